// spectrum.hpp — exact diagonalization DOS and the photon-integrated qubit Hamiltonian
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "darkloc/model.hpp"

namespace darkloc::spectrum {

// Ascending eigenvalues (rad/s) via the banded symmetric solver.
std::vector<double> eigenfrequencies(const model::SparseHamiltonian& h,
                                     std::size_t max_dimension = 20000);

struct FrequencyWindow {
    double f_min_ghz = 0;
    double f_max_ghz = 0;
    bool contains(double f_ghz) const { return f_ghz >= f_min_ghz && f_ghz <= f_max_ghz; }
};

struct DosResult {
    std::vector<double> bin_edges; // GHz
    std::vector<double> rho;       // states per GHz per site, realization-averaged
    std::size_t n_realizations = 0;
    std::size_t n_sites = 0;       // N + N_gamma
    FrequencyWindow window;

    double bin_width() const { return bin_edges.size() > 1 ? bin_edges[1] - bin_edges[0] : 0.0; }
    double bin_center(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
};

DosResult dos_histogram(const model::ModelParams& p, const model::DisorderSpec& spec,
                        std::size_t n_qubits, FrequencyWindow window, std::size_t n_bins,
                        std::size_t workers = 1);

struct GapEstimate {
    double width_mhz = 0;
    double f_lo_ghz = 0;
    double f_hi_ghz = 0;
    std::size_t first_bin = 0;
    std::size_t n_bins = 0;
};

// Longest run of bins with rho < fraction * median(rho).
GapEstimate gap_width(const DosResult& dos, double threshold_fraction = 0.05);

// H_ij = omega_i delta_ij + g^2 sum_n phi_n(x_i) phi_n(x_j) / (omega - E_n) over the standing
// waves of the open photon chain (E_n = -2J cos k_n, k_n = pi n/(N_gamma+1)); this is
// g^2 [(omega - H_gamma)^-1]_{x_i x_j} written as a momentum sum.
Eigen::MatrixXcd effective_qubit_hamiltonian(const model::ModelParams& p,
                                             const model::DisorderRealization& r, double omega);

} // namespace darkloc::spectrum
