// transfer.cpp — backward plane-wave recursion, dense oracle, Lyapunov exponent
#include "darkloc/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace darkloc::transfer {

namespace {

constexpr double ln2 = std::numbers::ln2;

// Onsite energy at qubit i honouring the pole policy. Returns false for a
// zero_transmission pole hit.
bool onsite_or_pole(const model::ModelParams& p, double omega_i, double omega, PolePolicy policy,
                    double& eps, bool& hit) {
    const double det = omega - omega_i;
    const double tol = model::pole_tolerance(p);
    if (p.g != 0.0 && std::abs(det) < tol) {
        hit = true;
        if (policy == PolePolicy::zero_transmission) return false;
        eps = p.g * p.g / (det < 0 ? -tol : tol);
        return true;
    }
    eps = model::qubit_onsite(p, omega_i, omega);
    return true;
}

// keep |pair| near 1 by exact powers of two
inline void rescale(cdouble& a, cdouble& b, long& log2_scale) {
    const double m = std::max(std::abs(a), std::abs(b));
    if (m > 0x1p256 || (m < 0x1p-256 && m > 0.0)) {
        int e = 0;
        std::frexp(m, &e);
        a = cdouble(std::ldexp(a.real(), -e), std::ldexp(a.imag(), -e));
        b = cdouble(std::ldexp(b.real(), -e), std::ldexp(b.imag(), -e));
        log2_scale += e;
    }
}

} // namespace

void validate(const LeadSpec& leads) {
    for (double v : {leads.J_lead, leads.c_L, leads.c_R})
        if (!std::isfinite(v) || v <= 0.0)
            throw std::invalid_argument("lead hopping and couplings must be positive");
}

double lead_wavenumber(double omega, double J_lead) {
    const double x = -omega / (2.0 * J_lead);
    if (!(std::abs(x) < 1.0))
        throw std::domain_error("probe frequency outside the lead band (evanescent)");
    return std::acos(x);
}

ScatteringResult lead_transmission(const model::ModelParams& p, const model::DisorderRealization& r,
                                   double omega, const LeadSpec& leads, PolePolicy policy) {
    validate(leads);
    const double k = lead_wavenumber(omega, leads.J_lead);
    const cdouble eik = std::polar(1.0, k);

    ScatteringResult res;
    res.probe_omega = omega;

    const std::size_t m = p.photon_sites(r.size());
    // site energies of the effective chain, qubit sites only
    std::vector<double> eps(m, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        double e = 0.0;
        if (!onsite_or_pole(p, r.omegas[i], omega, policy, e, res.pole)) {
            const double inf = std::numeric_limits<double>::infinity();
            res.t = 0.0;
            res.r = 1.0;
            res.log_t = -inf;
            res.A_minus1 = cdouble(inf, 0.0);
            res.B_minus1 = cdouble(inf, 0.0);
            return res;
        }
        eps[p.qubit_site(i)] = e;
    }

    // psi_{n-1} = [(e_n - omega) psi_n - h_{n,n+1} psi_{n+1}] / h_{n-1,n}
    // sites: left lead ..,-1,0 | system 1..m | right lead m+1,..
    cdouble up = eik;       // psi_{n+1}
    cdouble here = 1.0;     // psi_n, starting at n = m+1
    long log2_scale = 0;
    if (m > 0) {
        auto hop = [&](std::size_t n) { // bond (n, n+1), n in [0, m]
            if (n == 0) return leads.c_L;
            if (n == m) return leads.c_R;
            return p.J;
        };
        for (std::size_t n = m + 1; n >= 1; --n) {
            const double e = (n == m + 1) ? 0.0 : eps[n - 1];
            const double h_up = (n == m + 1) ? leads.J_lead : hop(n);
            const cdouble down = ((e - omega) * here - h_up * up) / hop(n - 1);
            up = here;
            here = down;
            rescale(up, here, log2_scale);
        }
        // now here = psi_0, up = psi_1
    }
    // bare lead: psi_n = e^{ik(n-1)}, the same outgoing normalization at site m+1 = 1
    const cdouble psi0 = m > 0 ? here : std::conj(eik);
    const cdouble psi1 = up;
    const cdouble psim1 = m > 0 ? (-omega * psi0 - leads.c_L * psi1) / leads.J_lead
                                : std::conj(eik) * std::conj(eik);
    const cdouble A = (psi0 * eik - psim1) / (2.0 * cdouble(0.0, std::sin(k)));
    const cdouble B = psi0 - A;

    res.log_t = -2.0 * (std::log(std::abs(A)) + log2_scale * ln2);
    res.t = std::exp(res.log_t);
    res.r = std::norm(B / A);
    res.A_minus1 = A * std::exp2(static_cast<double>(log2_scale));
    res.B_minus1 = B * std::exp2(static_cast<double>(log2_scale));
    return res;
}

ScatteringResult scattering_oracle(const model::ModelParams& p, const model::DisorderRealization& r,
                                   double omega, const LeadSpec& leads, std::size_t padding) {
    validate(leads);
    if (r.size() > 64) throw std::invalid_argument("scattering_oracle is limited to N <= 64");
    if (padding == 0) throw std::invalid_argument("scattering_oracle needs padding >= 1");
    const double k = lead_wavenumber(omega, leads.J_lead);
    const cdouble eik = std::polar(1.0, k);

    const std::size_t m = p.photon_sites(r.size());
    const std::size_t n_chain = m + 2 * padding; // photon-like sites, lead sites included
    const std::size_t dim = n_chain + r.size();
    // chain site s <-> lattice site n = s - padding + 1; s = 0 is n = 1 - padding
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd src = Eigen::VectorXcd::Zero(dim);
    auto hopping = [&](std::size_t s) { // bond (s, s+1)
        const long n = static_cast<long>(s) - static_cast<long>(padding) + 1;
        if (m == 0 || n < 0 || n > static_cast<long>(m)) return leads.J_lead;
        if (n == 0) return leads.c_L;
        if (n == static_cast<long>(m)) return leads.c_R;
        return p.J;
    };
    for (std::size_t s = 0; s < n_chain; ++s) a(s, s) = omega;
    for (std::size_t s = 0; s + 1 < n_chain; ++s) {
        const double h = hopping(s);
        a(s, s + 1) = h; // omega - H with H_{s,s+1} = -h
        a(s + 1, s) = h;
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        const std::size_t q = n_chain + i;
        const std::size_t s = padding + p.qubit_site(i);
        a(q, q) = omega - r.omegas[i];
        a(q, s) = -p.g;
        a(s, q) = -p.g;
    }
    // outgoing closure on both edges, unit incoming wave from the left
    const long nL = 1 - static_cast<long>(padding);
    const long nR = static_cast<long>(m + padding);
    a(0, 0) += leads.J_lead * eik;
    a(n_chain - 1, n_chain - 1) += leads.J_lead * eik;
    src(0) = 2.0 * cdouble(0.0, 1.0) * leads.J_lead * std::sin(k) * std::polar(1.0, k * nL);

    const Eigen::VectorXcd psi = a.partialPivLu().solve(src);
    // transmitted amplitude referred to site m+1, reflected one to the left-lead origin
    const cdouble tau = psi(n_chain - 1) * std::polar(1.0, -k * (nR - static_cast<long>(m) - 1));
    const cdouble rho = (psi(0) - std::polar(1.0, k * nL)) * std::polar(1.0, k * nL);

    ScatteringResult res;
    res.probe_omega = omega;
    res.t = std::norm(tau);
    res.r = std::norm(rho);
    res.log_t = std::log(res.t);
    res.A_minus1 = 1.0 / tau;
    res.B_minus1 = rho / tau;
    return res;
}

// ---- Lyapunov ----

namespace {

// Clean unit cell (qubit at mu, then n_int free sites) acting on (psi_n, psi_{n-1}).
// In the pass band its eigenbasis turns the clean evolution into a pure phase, which
// removes the bounded oscillation of the plain norm from the growth estimate.
struct BlochFrame {
    bool active = false;
    Eigen::Matrix2cd inv;

    double log_norm(double a, double b) const {
        if (!active) return std::log(std::hypot(a, b));
        const Eigen::Vector2cd v = inv * Eigen::Vector2cd(a, b);
        return std::log(v.norm());
    }
};

BlochFrame bloch_frame(const model::ModelParams& p, double omega) {
    BlochFrame f;
    if (p.g != 0.0 && std::abs(omega - p.mu) < model::pole_tolerance(p)) return f;
    const double e = model::qubit_onsite(p, p.mu, omega);
    auto step = [&](double on) {
        Eigen::Matrix2d q;
        q << (on - omega) / p.J, -1.0, 1.0, 0.0;
        return q;
    };
    Eigen::Matrix2d cell = step(e);
    for (int s = 0; s < p.n_int; ++s) cell = step(0.0) * cell;
    const double tr = cell.trace();
    if (std::abs(tr) >= 2.0 - 1e-9) return f; // gap or band edge: keep the plain norm
    Eigen::EigenSolver<Eigen::Matrix2d> es(cell);
    const Eigen::Matrix2cd vecs = es.eigenvectors();
    if (std::abs(vecs.determinant()) < 1e-12) return f;
    f.active = true;
    f.inv = vecs.inverse();
    return f;
}

template <class Source>
LyapunovEstimate lyapunov_core(const model::ModelParams& p, Source&& next_omega, double omega,
                               std::size_t warmup_cells, std::size_t n_cells,
                               const LyapunovOptions& opt) {
    if (std::abs(omega) >= 2.0 * p.J)
        throw std::domain_error("probe frequency outside the photon band");
    if (n_cells == 0) throw std::invalid_argument("lyapunov_xi needs at least one measured qubit");
    if (opt.rescale_exponent < 8 || opt.rescale_exponent > 1000)
        throw std::invalid_argument("rescale_exponent out of range");

    LyapunovEstimate est;
    est.n_sites_used = n_cells * p.sites_per_cell();
    if (p.g == 0.0) {
        // free chain inside the band: extended, exponent exactly zero
        for (std::size_t i = 0; i < warmup_cells + n_cells; ++i) next_omega();
        return est;
    }

    const double tol = model::pole_tolerance(p);
    const double g2 = p.g * p.g;
    const double free_a = -omega / p.J;
    const double hi = std::ldexp(1.0, opt.rescale_exponent);
    const double lo = std::ldexp(1.0, -opt.rescale_exponent);
    const BlochFrame frame = bloch_frame(p, omega);

    double x1 = 1.0, x0 = 0.0; // (psi_{n+1}, psi_n) after the step; start (psi_0, psi_-1) = (1, 0)
    long log2_scale = 0;
    auto advance_cell = [&] {
        double det = omega - next_omega();
        if (std::abs(det) < tol) det = det < 0 ? -tol : tol;
        const double a = (g2 / det - omega) / p.J;
        double nx = a * x1 - x0;
        x0 = x1;
        x1 = nx;
        for (int s = 0; s < p.n_int; ++s) {
            nx = free_a * x1 - x0;
            x0 = x1;
            x1 = nx;
        }
        const double m = std::max(std::abs(x1), std::abs(x0));
        if (m > hi || m < lo) {
            int e = 0;
            std::frexp(m, &e);
            x1 = std::ldexp(x1, -e);
            x0 = std::ldexp(x0, -e);
            log2_scale += e;
            ++est.renorm_count;
        }
    };
    auto log_growth = [&] { return frame.log_norm(x1, x0) + log2_scale * ln2; };

    for (std::size_t i = 0; i < warmup_cells; ++i) advance_cell();
    const double start = log_growth();
    const std::size_t mark = std::max<std::size_t>(1, (n_cells * 9) / 10);
    double at_mark = start;
    for (std::size_t i = 0; i < n_cells; ++i) {
        advance_cell();
        if (i + 1 == mark) at_mark = log_growth();
    }
    const double end = log_growth();

    // power (factor 2) per qubit spacing
    est.inv_xi_raw = 2.0 * (end - start) / static_cast<double>(n_cells);
    est.inv_xi = std::max(0.0, est.inv_xi_raw);
    const double early = 2.0 * (at_mark - start) / static_cast<double>(mark);
    const double denom = std::abs(est.inv_xi_raw);
    est.relative_drift = denom > 0 ? std::abs(early - est.inv_xi_raw) / denom : 0.0;
    est.converged = est.relative_drift <= opt.drift_tolerance;
    return est;
}

std::size_t warmup_cells_for(const model::ModelParams& p, const LyapunovOptions& opt) {
    return (opt.warmup_sites + p.sites_per_cell() - 1) / p.sites_per_cell();
}

} // namespace

LyapunovEstimate lyapunov_xi(const model::ModelParams& p, model::DisorderStream& stream, double omega,
                             std::size_t n_qubits, const LyapunovOptions& opt) {
    return lyapunov_core(p, [&] { return stream.next(); }, omega, warmup_cells_for(p, opt), n_qubits,
                         opt);
}

LyapunovEstimate lyapunov_xi(const model::ModelParams& p, const model::DisorderRealization& r,
                             double omega, const LyapunovOptions& opt) {
    const std::size_t warm = warmup_cells_for(p, opt);
    if (r.size() <= warm)
        throw std::invalid_argument("realization shorter than the Lyapunov warm-up (" +
                                    std::to_string(warm) + " qubits)");
    std::size_t i = 0;
    return lyapunov_core(p, [&] { return r.omegas[i++]; }, omega, warm, r.size() - warm, opt);
}

// ---- xi_N ----

XiEstimate xi_from_log_transmission(std::span<const double> log_t, std::size_t n_qubits) {
    if (log_t.empty()) throw std::invalid_argument("xi_from_log_transmission: no samples");
    if (n_qubits == 0) throw std::invalid_argument("xi_from_log_transmission: N must be >= 1");
    XiEstimate est;
    double sum = 0.0;
    for (double v : log_t) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("xi_from_log_transmission: invalid log T sample");
        if (v == -std::numeric_limits<double>::infinity()) est.suppressed = true;
        sum += v;
    }
    est.mean_log_t = sum / static_cast<double>(log_t.size());
    const double n = static_cast<double>(n_qubits);
    if (est.suppressed) {
        est.xi = 0.0;
    } else if (est.mean_log_t >= 0.0) {
        est.divergent = true;
        est.xi = std::numeric_limits<double>::infinity();
    } else {
        est.xi = -n / est.mean_log_t;
    }
    return est;
}

XiEstimate xi_from_transmission(std::span<const double> t_values, std::size_t n_qubits) {
    std::vector<double> logs;
    logs.reserve(t_values.size());
    for (double t : t_values) {
        if (!(t >= 0.0) || t > 1.0 + 1e-9)
            throw std::invalid_argument("xi_from_transmission: T must lie in [0, 1]");
        logs.push_back(std::min(0.0, std::log(t)));
    }
    return xi_from_log_transmission(logs, n_qubits);
}

} // namespace darkloc::transfer
