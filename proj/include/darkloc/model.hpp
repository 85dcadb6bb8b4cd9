// model.hpp — physical parameters, disorder sampling, full/effective Hamiltonians
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "darkloc/units.hpp"

namespace darkloc::model {

// Inputs of the lattice model, SI / rad/s.
struct RawParams {
    double J = 4.5e11;
    double g = 4.25e9;
    double d = 400e-6;
    int n_int = 1;
    double mu = units::ghz_to_rad(7.835);
};

struct ModelParams {
    double J = 0;       // photon hopping (rad/s), enters as -J
    double g = 0;       // qubit-photon coupling (rad/s)
    double d = 0;       // qubit spacing (m)
    int n_int = 0;      // free photon sites between qubit-coupled sites
    double mu = 0;      // disorder centre (rad/s)

    double d_gamma = 0; // photon lattice constant d/(n_int+1)
    double gamma10 = 0; // g^2/J
    double c = 0;       // 2 J d_gamma

    RawParams raw() const { return {J, g, d, n_int, mu}; }
    std::size_t sites_per_cell() const { return static_cast<std::size_t>(n_int) + 1; }
    std::size_t photon_sites(std::size_t n_qubits) const {
        return n_qubits == 0 ? 0 : sites_per_cell() * n_qubits - static_cast<std::size_t>(n_int);
    }
    std::size_t qubit_site(std::size_t i) const { return i * sites_per_cell(); }
};

// g = 0 is allowed (decoupled chain); everything else must be positive.
// Even n_int only warns, on `warn` if non-null.
ModelParams derive_params(const RawParams& raw, std::ostream* warn = nullptr);
ModelParams device_defaults();

// The device is usually quoted as (c, Gamma10, d, n_int, mu); this inverts derive_params.
struct PhysicalParams {
    double c = 0;
    double gamma10 = 0;
    double d = 0;
    int n_int = 1;
    double mu = 0;
};
PhysicalParams physical_of(const ModelParams& p);
RawParams raw_from_physical(const PhysicalParams& phys);

// ---- disorder ----

struct DisorderSpec {
    double W = 0;                              // sigma_omega / Gamma10
    std::optional<double> truncation = 2.5;    // half-width in sigma, nullopt = plain Gaussian
    std::uint64_t master_seed = 0;
    std::size_t n_realizations = 1;

    double sigma_omega(const ModelParams& p) const { return W * p.gamma10; }
};

void validate(const DisorderSpec& spec);

// Seed of realization `index`, a pure function of (master, index).
std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t index);

// Lazily draws qubit frequencies of one realization, O(1) memory.
// sample_realization(spec, p, N, i).omegas equals the first N values of DisorderStream(spec, p, i).
class DisorderStream {
public:
    DisorderStream(const DisorderSpec& spec, const ModelParams& p, std::uint64_t index);
    double next();
    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    double mu_;
    double sigma_;
    double half_width_; // absolute, rad/s; inf when untruncated
    std::uint64_t seed_;
    std::uint64_t index_;
};

struct DisorderRealization {
    std::vector<double> omegas;            // rad/s
    std::uint64_t realization_index = 0;
    std::uint64_t seed_used = 0;
    std::size_t size() const { return omegas.size(); }
};

DisorderRealization sample_realization(const DisorderSpec& spec, const ModelParams& p,
                                       std::size_t n_qubits, std::uint64_t index);
DisorderRealization clean_realization(const ModelParams& p, std::size_t n_qubits);

// ---- Hamiltonians ----

struct MatrixEntry {
    std::size_t row;
    std::size_t col;
    double value;
};

// Both triangles are stored; diagonal entries once.
struct SparseHamiltonian {
    std::size_t dimension = 0;
    std::vector<MatrixEntry> entries;

    std::size_t bandwidth() const;
    bool is_symmetric() const;
    Eigen::MatrixXd to_dense() const;
};

// Interleaved ordering per cell: q_i, p_{i(n+1)}, p_{i(n+1)+1}, ..., p_{i(n+1)+n}
// (the last cell stops after its coupled photon). Bandwidth is 2 for any n_int.
std::size_t qubit_index(const ModelParams& p, std::size_t i);
std::size_t photon_index(const ModelParams& p, std::size_t x);

SparseHamiltonian build_full_hamiltonian(const ModelParams& p, const DisorderRealization& r);

struct OnsiteProfile {
    std::vector<double> epsilons; // one per photon site
    double probe_omega = 0;
};

class PoleError : public std::domain_error {
public:
    PoleError(std::size_t qubit, double detuning);
    std::size_t qubit() const { return qubit_; }
    double detuning() const { return detuning_; }

private:
    std::size_t qubit_;
    double detuning_;
};

// |omega - omega_i| below this counts as exact resonance.
inline double pole_tolerance(const ModelParams& p) { return 1e-6 * p.gamma10; }

// g^2/(omega - omega_i): the photon-site energy left after eliminating the qubit.
// No pole check; g = 0 gives 0.
double qubit_onsite(const ModelParams& p, double omega_i, double omega);

// Throws PoleError on resonance.
OnsiteProfile effective_onsite(const ModelParams& p, const DisorderRealization& r, double omega);

} // namespace darkloc::model
