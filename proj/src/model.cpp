// model.cpp — parameters, disorder streams, Hamiltonian assembly
#include "darkloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

namespace darkloc::model {

namespace {

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
        throw std::invalid_argument(std::string(name) + " must be finite and positive");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

ModelParams derive_params(const RawParams& raw, std::ostream* warn) {
    require_positive(raw.J, "J");
    require_positive(raw.d, "d");
    require_positive(raw.mu, "mu");
    if (!std::isfinite(raw.g) || raw.g < 0.0)
        throw std::invalid_argument("g must be finite and non-negative");
    if (raw.n_int < 0)
        throw std::invalid_argument("n_int must be >= 0");
    if (raw.n_int % 2 == 0 && warn)
        *warn << "warning: n_int = " << raw.n_int
              << " is even; the qubit-photon phase then sits at a band-symmetric point"
                 " and odd n_int is recommended\n";

    ModelParams p;
    p.J = raw.J;
    p.g = raw.g;
    p.d = raw.d;
    p.n_int = raw.n_int;
    p.mu = raw.mu;
    p.d_gamma = raw.d / (raw.n_int + 1);
    p.gamma10 = raw.g * raw.g / raw.J;
    p.c = 2.0 * raw.J * p.d_gamma;
    return p;
}

ModelParams device_defaults() { return derive_params(RawParams{}); }

PhysicalParams physical_of(const ModelParams& p) { return {p.c, p.gamma10, p.d, p.n_int, p.mu}; }

RawParams raw_from_physical(const PhysicalParams& phys) {
    require_positive(phys.c, "c");
    require_positive(phys.d, "d");
    if (phys.n_int < 0) throw std::invalid_argument("n_int must be >= 0");
    if (!std::isfinite(phys.gamma10) || phys.gamma10 < 0.0)
        throw std::invalid_argument("Gamma10 must be finite and non-negative");
    RawParams raw;
    raw.d = phys.d;
    raw.n_int = phys.n_int;
    raw.mu = phys.mu;
    raw.J = phys.c * (phys.n_int + 1) / (2.0 * phys.d);
    raw.g = std::sqrt(phys.gamma10 * raw.J);
    return raw;
}

// ---- disorder ----

void validate(const DisorderSpec& spec) {
    if (!std::isfinite(spec.W) || spec.W < 0.0)
        throw std::invalid_argument("disorder W must be finite and >= 0");
    if (spec.truncation) {
        // rejection needs a reasonable acceptance rate
        if (!std::isfinite(*spec.truncation) || *spec.truncation < 0.1)
            throw std::invalid_argument("truncation must be >= 0.1 sigma (or disabled)");
    }
    if (spec.n_realizations == 0)
        throw std::invalid_argument("n_realizations must be >= 1");
}

std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(~index));
}

DisorderStream::DisorderStream(const DisorderSpec& spec, const ModelParams& p, std::uint64_t index)
    : mu_(p.mu), sigma_(spec.sigma_omega(p)),
      half_width_(spec.truncation ? *spec.truncation * spec.sigma_omega(p)
                                  : std::numeric_limits<double>::infinity()),
      seed_(realization_seed(spec.master_seed, index)), index_(index) {
    validate(spec);
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    engine_.seed(seq);
}

double DisorderStream::next() {
    if (sigma_ == 0.0) return mu_;
    for (;;) {
        const double w = mu_ + sigma_ * normal_(engine_);
        // test the stored value itself so the window holds exactly
        if (std::abs(w - mu_) <= half_width_) return w;
    }
}

DisorderRealization sample_realization(const DisorderSpec& spec, const ModelParams& p,
                                       std::size_t n_qubits, std::uint64_t index) {
    if (index >= spec.n_realizations)
        throw std::invalid_argument("realization index " + std::to_string(index) +
                                    " >= n_realizations " + std::to_string(spec.n_realizations));
    DisorderStream stream(spec, p, index);
    DisorderRealization r;
    r.realization_index = index;
    r.seed_used = stream.seed();
    r.omegas.resize(n_qubits);
    for (auto& w : r.omegas) w = stream.next();
    return r;
}

DisorderRealization clean_realization(const ModelParams& p, std::size_t n_qubits) {
    DisorderRealization r;
    r.omegas.assign(n_qubits, p.mu);
    return r;
}

// ---- Hamiltonians ----

std::size_t SparseHamiltonian::bandwidth() const {
    std::size_t bw = 0;
    for (const auto& e : entries) bw = std::max(bw, e.row > e.col ? e.row - e.col : e.col - e.row);
    return bw;
}

bool SparseHamiltonian::is_symmetric() const {
    auto key = [](const MatrixEntry& e) { return std::tuple(e.row, e.col, e.value); };
    std::vector<std::tuple<std::size_t, std::size_t, double>> a, b;
    a.reserve(entries.size());
    b.reserve(entries.size());
    for (const auto& e : entries) {
        a.push_back(key(e));
        b.emplace_back(e.col, e.row, e.value);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

Eigen::MatrixXd SparseHamiltonian::to_dense() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension, dimension);
    for (const auto& e : entries) h(e.row, e.col) += e.value;
    return h;
}

std::size_t qubit_index(const ModelParams& p, std::size_t i) { return i * (p.sites_per_cell() + 1); }

std::size_t photon_index(const ModelParams& p, std::size_t x) {
    const std::size_t cell = x / p.sites_per_cell();
    const std::size_t off = x % p.sites_per_cell();
    return cell * (p.sites_per_cell() + 1) + 1 + off;
}

SparseHamiltonian build_full_hamiltonian(const ModelParams& p, const DisorderRealization& r) {
    const std::size_t n = r.size();
    if (n == 0) throw std::invalid_argument("build_full_hamiltonian needs at least one qubit");
    const std::size_t n_gamma = p.photon_sites(n);

    SparseHamiltonian h;
    h.dimension = n + n_gamma;
    h.entries.reserve(n + 2 * n + 2 * n_gamma);
    auto add_pair = [&](std::size_t a, std::size_t b, double v) {
        h.entries.push_back({a, b, v});
        h.entries.push_back({b, a, v});
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t q = qubit_index(p, i);
        h.entries.push_back({q, q, r.omegas[i]});
        if (p.g != 0.0) add_pair(q, photon_index(p, p.qubit_site(i)), p.g);
    }
    for (std::size_t x = 0; x + 1 < n_gamma; ++x)
        add_pair(photon_index(p, x), photon_index(p, x + 1), -p.J);
    return h;
}

PoleError::PoleError(std::size_t qubit, double detuning)
    : std::domain_error([&] {
          std::ostringstream os;
          os << "probe frequency resonant with qubit " << qubit << " (detuning " << detuning
             << " rad/s)";
          return os.str();
      }()),
      qubit_(qubit), detuning_(detuning) {}

double qubit_onsite(const ModelParams& p, double omega_i, double omega) {
    if (p.g == 0.0) return 0.0;
    return p.g * p.g / (omega - omega_i);
}

OnsiteProfile effective_onsite(const ModelParams& p, const DisorderRealization& r, double omega) {
    OnsiteProfile prof;
    prof.probe_omega = omega;
    prof.epsilons.assign(p.photon_sites(r.size()), 0.0);
    const double tol = pole_tolerance(p);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double det = omega - r.omegas[i];
        if (p.g != 0.0 && std::abs(det) < tol) throw PoleError(i, det);
        prof.epsilons[p.qubit_site(i)] = qubit_onsite(p, r.omegas[i], omega);
    }
    return prof;
}

} // namespace darkloc::model
