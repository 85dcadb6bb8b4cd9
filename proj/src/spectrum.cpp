// spectrum.cpp — banded eigensolve, DOS histogram, gap finder, qubit-space Hamiltonian
#include "darkloc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <lapacke.h>

#include "darkloc/parallel.hpp"
#include "darkloc/units.hpp"

namespace darkloc::spectrum {

std::vector<double> eigenfrequencies(const model::SparseHamiltonian& h, std::size_t max_dimension) {
    const std::size_t n = h.dimension;
    if (n > max_dimension)
        throw std::invalid_argument("eigenfrequencies: dimension " + std::to_string(n) +
                                    " exceeds budget " + std::to_string(max_dimension));
    if (n == 0) return {};
    const std::size_t kd = std::max<std::size_t>(h.bandwidth(), 0);
    const std::size_t ldab = kd + 1;
    // lower band storage: ab[(i - j) + j*ldab] = H(i, j), j <= i <= j + kd
    std::vector<double> ab(ldab * n, 0.0);
    for (const auto& e : h.entries)
        if (e.row >= e.col) ab[(e.row - e.col) + e.col * ldab] += e.value;

    std::vector<double> w(n);
    const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                                          static_cast<lapack_int>(kd), ab.data(),
                                          static_cast<lapack_int>(ldab), w.data(), nullptr, 1);
    if (info != 0)
        throw std::runtime_error("LAPACKE_dsbev failed with info = " + std::to_string(info));
    return w; // dsbev returns ascending order
}

DosResult dos_histogram(const model::ModelParams& p, const model::DisorderSpec& spec,
                        std::size_t n_qubits, FrequencyWindow window, std::size_t n_bins,
                        std::size_t workers) {
    model::validate(spec);
    if (n_bins < 10) throw std::invalid_argument("dos_histogram needs n_bins >= 10");
    if (!(window.f_max_ghz > window.f_min_ghz))
        throw std::invalid_argument("dos_histogram: empty frequency window");
    if (n_qubits == 0) throw std::invalid_argument("dos_histogram needs N >= 1");

    DosResult dos;
    dos.window = window;
    dos.n_realizations = spec.n_realizations;
    dos.n_sites = n_qubits + p.photon_sites(n_qubits);
    const double width = (window.f_max_ghz - window.f_min_ghz) / static_cast<double>(n_bins);
    dos.bin_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        dos.bin_edges[b] = window.f_min_ghz + width * static_cast<double>(b);

    std::vector<std::vector<std::size_t>> counts(spec.n_realizations,
                                                 std::vector<std::size_t>(n_bins, 0));
    parallel::parallel_for(spec.n_realizations, workers, [&](std::size_t i) {
        const auto r = model::sample_realization(spec, p, n_qubits, i);
        const auto ev = eigenfrequencies(model::build_full_hamiltonian(p, r));
        for (double w : ev) {
            const double f = units::rad_to_ghz(w);
            if (f < window.f_min_ghz || f >= window.f_max_ghz) continue;
            auto b = static_cast<std::size_t>((f - window.f_min_ghz) / width);
            counts[i][std::min(b, n_bins - 1)] += 1;
        }
    });

    dos.rho.assign(n_bins, 0.0);
    const double norm = 1.0 / (static_cast<double>(spec.n_realizations) *
                               static_cast<double>(dos.n_sites) * width);
    for (std::size_t b = 0; b < n_bins; ++b) {
        std::size_t total = 0;
        for (const auto& c : counts) total += c[b];
        dos.rho[b] = static_cast<double>(total) * norm;
    }
    return dos;
}

GapEstimate gap_width(const DosResult& dos, double threshold_fraction) {
    if (dos.rho.empty() || dos.bin_edges.size() != dos.rho.size() + 1)
        throw std::invalid_argument("gap_width: malformed DOS");
    if (!(threshold_fraction > 0.0))
        throw std::invalid_argument("gap_width: threshold_fraction must be positive");
    std::vector<double> sorted = dos.rho;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
        const double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
        median = 0.5 * (median + lower);
    }
    const double threshold = threshold_fraction * median;

    GapEstimate best;
    std::size_t run_start = 0, run_len = 0;
    for (std::size_t b = 0; b <= dos.rho.size(); ++b) {
        if (b < dos.rho.size() && dos.rho[b] < threshold) {
            if (run_len == 0) run_start = b;
            ++run_len;
            continue;
        }
        if (run_len > best.n_bins) {
            best.first_bin = run_start;
            best.n_bins = run_len;
        }
        run_len = 0;
    }
    if (best.n_bins == 0) throw std::runtime_error("gap_width: no bin below threshold");
    best.f_lo_ghz = dos.bin_edges[best.first_bin];
    best.f_hi_ghz = dos.bin_edges[best.first_bin + best.n_bins];
    best.width_mhz = 1e3 * (best.f_hi_ghz - best.f_lo_ghz);
    return best;
}

Eigen::MatrixXcd effective_qubit_hamiltonian(const model::ModelParams& p,
                                             const model::DisorderRealization& r, double omega) {
    const std::size_t n = r.size();
    if (n == 0 || n > 64)
        throw std::invalid_argument("effective_qubit_hamiltonian needs 1 <= N <= 64");
    const std::size_t m = p.photon_sites(n);
    const double kscale = std::numbers::pi / static_cast<double>(m + 1);
    const double amp = std::sqrt(2.0 / static_cast<double>(m + 1));

    // photon modes phi_n(x) = amp sin(k_n (x+1)), energies -2J cos k_n
    std::vector<double> weight(m);
    for (std::size_t k = 1; k <= m; ++k) {
        const double e = -2.0 * p.J * std::cos(kscale * static_cast<double>(k));
        const double det = omega - e;
        if (std::abs(det) < 1e-12 * p.J)
            throw std::domain_error("effective_qubit_hamiltonian: probe hits a photon eigenfrequency");
        weight[k - 1] = 1.0 / det;
    }
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    const double g2 = p.g * p.g;
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) = r.omegas[i];
        if (g2 == 0.0) continue;
        const double xi = static_cast<double>(p.qubit_site(i) + 1);
        for (std::size_t j = i; j < n; ++j) {
            const double xj = static_cast<double>(p.qubit_site(j) + 1);
            double s = 0.0;
            for (std::size_t k = 1; k <= m; ++k) {
                const double kk = kscale * static_cast<double>(k);
                s += weight[k - 1] * std::sin(kk * xi) * std::sin(kk * xj);
            }
            s *= amp * amp * g2;
            h(i, j) += s;
            if (j != i) h(j, i) += s;
        }
    }
    return h;
}

} // namespace darkloc::spectrum
