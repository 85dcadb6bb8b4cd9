// dissipative.hpp — point-scatterer chain in the continuum waveguide, with non-radiative loss
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "darkloc/model.hpp"
#include "darkloc/transfer.hpp"

namespace darkloc::dissipative {

using cdouble = std::complex<double>;

struct DissipationParams {
    double gamma10 = 0;   // radiative rate Gamma10 (rad/s)
    double gamma_nr = 0;  // non-radiative rate (rad/s)

    double decoherence() const { return 0.5 * gamma10 + gamma_nr; } // gamma10 (lower case)
};

void validate(const DissipationParams& d);

struct QubitScattering {
    cdouble r;
    cdouble t;
};

// r_q = -(Gamma10/2) / (i(omega_i - omega) + gamma10), t_q = 1 + r_q
QubitScattering qubit_scattering(double omega, double omega_i, const DissipationParams& diss);

// Maps (right-moving, left-moving) amplitudes from the left of the scatterer to its right.
// Singular at a lossless exact resonance (t_q = 0).
Eigen::Matrix2cd qubit_transfer_matrix(double omega, double omega_i, const DissipationParams& diss);

struct ChainScattering {
    double T = 0;
    double R = 0;
    double log_T = 0;
    bool pole = false;
};

// Lossless exact resonance: zero_transmission reports T = 0; clamp_detuning moves the
// offending qubit to +-1e-6 Gamma10 away from the probe.
ChainScattering chain_scattering_dissipative(
    std::span<const double> omegas, const DissipationParams& diss, double omega, double d, double c,
    transfer::PolePolicy policy = transfer::PolePolicy::zero_transmission);
double chain_transmission_dissipative(std::span<const double> omegas, const DissipationParams& diss,
                                      double omega, double d, double c);

struct PeakStudyRequest {
    std::vector<double> gamma_nr;    // rad/s
    std::vector<double> W_grid;
    std::vector<double> f_grid_ghz;  // peak searched over these points inside the dark-mode window
    std::size_t n_qubits = 8;
    std::size_t n_realizations = 1000;
    std::uint64_t master_seed = 0;
    std::optional<double> truncation = 2.5;
    std::size_t bootstrap_resamples = 1000;
    std::size_t workers = 1;
};

struct PeakStudyRow {
    double W = 0;
    double gamma_nr = 0;  // rad/s
    double f_peak_ghz = 0;
    double xi8_mean = 0;
    double xi8_bootstrap_std = 0;
    std::size_t n_realizations = 0;
};

// xi_N = -N/<log T> at the per-(W, Gamma_nr) peak frequency.
std::vector<PeakStudyRow> dissipative_peak_study(const model::ModelParams& p,
                                                 const PeakStudyRequest& req);

} // namespace darkloc::dissipative
