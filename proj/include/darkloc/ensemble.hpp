// ensemble.hpp — disorder ensembles over (f, W) grids, bootstrap errors, power-law fits
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "darkloc/model.hpp"
#include "darkloc/spectrum.hpp"
#include "darkloc/transfer.hpp"

namespace darkloc::ensemble {

enum class Engine {
    lattice,     // lead_transmission on the effective chain
    dissipative, // continuum point-scatterer chain
    lyapunov,    // transfer-matrix Lyapunov exponent, for long chains
};

const char* engine_name(Engine e);
Engine parse_engine(const std::string& s);

struct SweepRequest {
    std::vector<double> f_grid_ghz;
    std::vector<double> W_grid;
    std::size_t n_qubits = 8;
    std::size_t n_realizations = 1000;
    Engine engine = Engine::lattice;
    std::uint64_t master_seed = 0;
    std::optional<double> truncation = 2.5;
    double gamma_nr = 0;                  // rad/s, dissipative engine only
    std::size_t bootstrap_resamples = 1000;
    std::size_t workers = 1;
    transfer::LyapunovOptions lyapunov{}; // lyapunov engine only
};

struct SweepRow {
    double f_ghz = 0;
    double W = 0;
    double mean_log_T = 0;      // lyapunov engine: -N <1/xi>
    double xi_N = 0;            // -N / mean_log_T
    std::size_t n_realizations = 0;
    double bootstrap_std = 0;   // of xi_N
    std::size_t n_poles = 0;    // realizations with a qubit within the pole tolerance
    std::size_t n_unconverged = 0;
    bool ok = true;
    std::string error;
};

struct SweepTable {
    SweepRequest request;
    std::vector<SweepRow> rows; // W-major: rows[w * n_f + f]

    std::size_t n_f() const { return request.f_grid_ghz.size(); }
    std::size_t n_W() const { return request.W_grid.size(); }
    const SweepRow& at(std::size_t f_index, std::size_t W_index) const {
        return rows[W_index * n_f() + f_index];
    }
    std::vector<const SweepRow*> failed() const;
};

// Realizations are shared across frequencies (and keyed only by (master_seed, index)), so
// every cell of one W column sees the same disorder draws.
SweepTable run_sweep(const model::ModelParams& p, const SweepRequest& req);

struct BootstrapResult {
    double mean = 0;
    double std = 0;
};

// Resample-with-replacement standard deviation of the sample mean.
BootstrapResult bootstrap_ci(std::span<const double> samples, std::size_t n_resamples = 1000,
                             std::uint64_t seed = 0);
// Same, of stat(resampled mean); `mean` is stat(sample mean).
BootstrapResult bootstrap_ci(std::span<const double> samples, std::size_t n_resamples,
                             std::uint64_t seed, const std::function<double(double)>& stat);

struct PowerLawFit {
    double beta = 0;      // xi ~ prefactor * W^-beta
    double prefactor = 0;
    double residual = 0;  // rms of log residuals
    double W_min = 0;
    double W_max = 0;
    double bootstrap_std_beta = 0;
};

PowerLawFit fit_power_law(std::span<const double> W, std::span<const double> xi,
                          std::size_t n_resamples = 1000, std::uint64_t seed = 0);

// sigma_omega g^2 / delta_omega^2
double effective_disorder(double sigma_omega, double delta_omega, double g);

struct Peak {
    std::size_t f_index = 0;
    double f_ghz = 0;
    double xi_N = 0;
    double bootstrap_std = 0;
};

// argmax of xi_N over grid points inside the window, for one W column.
Peak locate_peak(const SweepTable& table, std::size_t W_index, spectrum::FrequencyWindow window);

struct CleanPeak {
    double f_ghz = 0;
    double T = 0;
};

// Highest transmission of the clean array on [f_lo, f_hi]: fine scan then golden-section polish.
CleanPeak clean_transmission_peak(const model::ModelParams& p, std::size_t n_qubits, double f_lo_ghz,
                                  double f_hi_ghz, double step_mhz = 0.01);

// Frequency window hosting the dark-mode peak: from the clean-array transmission minimum just
// below the lowest-lying T ~ 1 dark resonance up to mu/2pi.
spectrum::FrequencyWindow dark_mode_window(const model::ModelParams& p, std::size_t n_qubits);

} // namespace darkloc::ensemble
