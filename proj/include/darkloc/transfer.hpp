// transfer.hpp — transfer matrices on the effective photonic chain
#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>

#include "darkloc/model.hpp"

namespace darkloc::transfer {

using cdouble = std::complex<double>;

struct LeadSpec {
    double J_lead = 0;
    double c_L = 0;
    double c_R = 0;

    static LeadSpec matched(const model::ModelParams& p) { return {p.J, p.J, p.J}; }
};

void validate(const LeadSpec& leads);

// Lead band is omega = -2 J_lead cos k; throws std::domain_error outside it.
double lead_wavenumber(double omega, double J_lead);

struct ScatteringResult {
    double probe_omega = 0;
    double t = 0;          // power transmission
    double r = 0;          // power reflection
    cdouble A_minus1;      // incoming amplitude in the left lead (outgoing amplitude fixed to 1)
    cdouble B_minus1;      // reflected amplitude
    double log_t = 0;      // log of t, finite even when t underflows
    bool pole = false;     // some |omega - omega_i| was under the pole tolerance
};

enum class PolePolicy {
    zero_transmission, // report t = 0, r = 1
    clamp_detuning,    // evaluate at detuning +-tolerance (continuous limit, used for ensembles)
};

// Effective chain (qubits eliminated) between two semi-infinite leads.
// An empty realization is the bare lead.
ScatteringResult lead_transmission(const model::ModelParams& p, const model::DisorderRealization& r,
                                   double omega, const LeadSpec& leads,
                                   PolePolicy policy = PolePolicy::zero_transmission);

// Dense oracle: full Hamiltonian (qubit sites kept) padded by `padding` lead sites on
// each side, closed with the exact outgoing self-energy. N <= 64.
ScatteringResult scattering_oracle(const model::ModelParams& p, const model::DisorderRealization& r,
                                   double omega, const LeadSpec& leads, std::size_t padding = 2);

struct LyapunovOptions {
    std::size_t warmup_sites = 1000;
    int rescale_exponent = 512; // rescale when the pair norm leaves [2^-e, 2^e]
    double drift_tolerance = 0.05;
};

struct LyapunovEstimate {
    double inv_xi = 0;      // power decay rate per qubit spacing, clamped >= 0
    double inv_xi_raw = 0;  // unclamped estimate (can dip below 0 when xi >> N)
    std::size_t n_sites_used = 0;
    std::size_t renorm_count = 0;
    bool converged = true;
    double relative_drift = 0;

    double xi() const {
        return inv_xi > 0 ? 1.0 / inv_xi : std::numeric_limits<double>::infinity();
    }
};

// Growth of the clean-chain-normalized amplitude pair over n_qubits unit cells after a
// warm-up; qubit frequencies are pulled from the stream one per cell.
LyapunovEstimate lyapunov_xi(const model::ModelParams& p, model::DisorderStream& stream, double omega,
                             std::size_t n_qubits, const LyapunovOptions& opt = {});
// Finite realization: the first cells serve as warm-up, the rest are measured.
LyapunovEstimate lyapunov_xi(const model::ModelParams& p, const model::DisorderRealization& r,
                             double omega, const LyapunovOptions& opt = {});

struct XiEstimate {
    double xi = 0;
    double mean_log_t = 0;
    bool divergent = false;  // <log T> >= 0, xi reported as +inf
    bool suppressed = false; // some T = 0, xi reported as 0
};

// xi_N = -N / <log T>
XiEstimate xi_from_transmission(std::span<const double> t_values, std::size_t n_qubits);
XiEstimate xi_from_log_transmission(std::span<const double> log_t, std::size_t n_qubits);

} // namespace darkloc::transfer
