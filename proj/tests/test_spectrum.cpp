#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "darkloc/spectrum.hpp"
#include "darkloc/units.hpp"
#include "oracles.hpp"

using namespace darkloc;
using namespace darkloc::spectrum;

namespace {

const model::ModelParams P = model::device_defaults();

model::DisorderRealization draw(double W, std::size_t n, std::uint64_t index = 0) {
    model::DisorderSpec s;
    s.W = W;
    s.master_seed = 31;
    s.n_realizations = index + 1;
    return model::sample_realization(s, P, n, index);
}

} // namespace

TEST_CASE("eigenfrequencies: decoupled sites and the 5x5 brute force") {
    model::RawParams raw;
    raw.g = 0.0;
    const auto free = model::derive_params(raw);
    auto one = model::clean_realization(free, 1);
    one.omegas[0] = units::ghz_to_rad(7.9);
    const auto ev = eigenfrequencies(model::build_full_hamiltonian(free, one));
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == 0.0);
    CHECK(ev[1] == doctest::Approx(one.omegas[0]).epsilon(1e-15));

    const auto clean = model::clean_realization(P, 2);
    const auto h = model::build_full_hamiltonian(P, clean);
    const auto a = eigenfrequencies(h);
    const auto b = oracle::dense_eigenvalues(oracle::natural_hamiltonian(P, clean));
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * P.J);
}

TEST_CASE("eigenvalue count, trace, and ascending order") {
    for (std::size_t n : {1u, 3u, 17u, 120u}) {
        const auto r = draw(1.3, n, n);
        const auto h = model::build_full_hamiltonian(P, r);
        const auto ev = eigenfrequencies(h);
        CHECK(ev.size() == n + P.photon_sites(n));
        CHECK(std::is_sorted(ev.begin(), ev.end()));
        const double trace = std::accumulate(r.omegas.begin(), r.omegas.end(), 0.0);
        const double sum = std::accumulate(ev.begin(), ev.end(), 0.0);
        // the spectrum spans +-2J, so compare on that scale
        CHECK(std::abs(sum - trace) <= 1e-8 * std::max(std::abs(trace), 2.0 * P.J));
    }
    CHECK(eigenfrequencies(model::SparseHamiltonian{}).empty());
    CHECK_THROWS_AS(eigenfrequencies(model::build_full_hamiltonian(P, draw(1.0, 100)), 50), std::invalid_argument);
}

TEST_CASE("banded solver agrees with an independent Sturm count") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uf(7.70, 7.95);
    for (std::size_t trial = 0; trial < 6; ++trial) {
        const auto r = draw(0.2 + 0.35 * static_cast<double>(trial), 400, trial);
        const auto ev = eigenfrequencies(model::build_full_hamiltonian(P, r));
        for (int k = 0; k < 50; ++k) {
            const double lam = units::ghz_to_rad(uf(rng));
            const auto below = static_cast<std::size_t>(std::lower_bound(ev.begin(), ev.end(), lam) - ev.begin());
            CHECK(below == oracle::sturm_count(P, r, lam));
        }
    }
}

TEST_CASE("DOS histogram: normalization, determinism, schedule independence") {
    model::DisorderSpec spec;
    spec.W = 0.5;
    spec.master_seed = 3;
    spec.n_realizations = 3;
    const double edge = units::rad_to_ghz(2.0 * P.J) * 1.001;
    const auto full = dos_histogram(P, spec, 60, {-edge, edge}, 200);
    double integral = 0.0;
    for (double v : full.rho) {
        CHECK(v >= 0.0);
        integral += v * full.bin_width();
    }
    CHECK(integral * static_cast<double>(full.n_sites) == doctest::Approx(static_cast<double>(60 + 119)));
    CHECK(full.n_realizations == 3);
    CHECK(full.bin_edges.size() == 201);

    const auto a = dos_histogram(P, spec, 300, {7.8, 7.92}, 120, 1);
    const auto b = dos_histogram(P, spec, 300, {7.8, 7.92}, 120, 3);
    const auto c = dos_histogram(P, spec, 300, {7.8, 7.92}, 120, 1);
    CHECK(a.rho == b.rho);
    CHECK(a.rho == c.rho);

    CHECK_THROWS_AS(dos_histogram(P, spec, 10, {7.8, 7.92}, 9), std::invalid_argument);
    CHECK_THROWS_AS(dos_histogram(P, spec, 10, {7.9, 7.9}, 20), std::invalid_argument);
}

TEST_CASE("gap_width on constructed input") {
    DosResult d;
    d.window = {7.8, 8.0};
    for (int b = 0; b <= 200; ++b) d.bin_edges.push_back(7.8 + 0.001 * b);
    d.rho.assign(200, 1.0);
    for (int b = 40; b < 100; ++b) d.rho[b] = 0.0;
    d.rho[10] = 0.0; // a shorter decoy run
    auto g = gap_width(d);
    CHECK(g.width_mhz == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(g.first_bin == 40);
    CHECK(g.f_lo_ghz == doctest::Approx(7.84));
    // median of the remaining weight sets the threshold
    CHECK(gap_width(d, 0.5).width_mhz == doctest::Approx(60.0).epsilon(1e-9));

    d.rho.assign(200, 1.0);
    CHECK_THROWS_AS(gap_width(d), std::runtime_error);
    d.rho.pop_back();
    CHECK_THROWS_AS(gap_width(d), std::invalid_argument);
}

TEST_CASE("polaritonic gap: opens above mu, weight mostly below, dilutes with disorder") {
    model::DisorderSpec spec;
    spec.W = 0.16;
    spec.master_seed = 5;
    spec.n_realizations = 2;
    const auto weak = dos_histogram(P, spec, 2000, {7.8, 7.92}, 120);
    const auto g = gap_width(weak);
    CHECK(g.f_lo_ghz >= 7.835);
    CHECK(g.width_mhz > 30.0);
    double below = 0.0, above = 0.0;
    for (std::size_t b = 0; b < weak.rho.size(); ++b)
        (weak.bin_center(b) < g.f_lo_ghz ? below : above) += weak.rho[b];
    CHECK(below > above);

    spec.W = 2.04;
    const auto strong = dos_histogram(P, spec, 2000, {7.8, 7.92}, 120);
    double w_strong = 0.0;
    try {
        w_strong = gap_width(strong).width_mhz;
    } catch (const std::runtime_error&) {
    }
    CHECK(w_strong < g.width_mhz);

    // decoupled chain: smooth band, nothing below 5% of the median
    model::RawParams raw;
    raw.g = 0.0;
    const auto free = model::derive_params(raw);
    model::DisorderSpec clean;
    clean.n_realizations = 1;
    CHECK_THROWS_AS(gap_width(dos_histogram(free, clean, 200, {-100.0, 100.0}, 40)), std::runtime_error);
}

TEST_CASE("effective qubit Hamiltonian equals the photon resolvent") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uf(7.80, 7.87);
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto r = draw(1.0, n, n);
        const double w = units::ghz_to_rad(uf(rng));
        const auto h = effective_qubit_hamiltonian(P, r, w);
        const auto res = oracle::qubit_resolvent(P, r, w);
        const double scale = res.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double ref = res(i, j) + (i == j ? r.omegas[i] : 0.0);
                CHECK(std::abs(h(i, j) - ref) <= 1e-8 * scale + 1e-12 * std::abs(ref));
                CHECK(std::abs(h(i, j) - std::conj(h(j, i))) == 0.0);
            }
    }

    model::RawParams raw;
    raw.g = 0.0;
    const auto free = model::derive_params(raw);
    const auto r = draw(1.0, 5);
    const auto h0 = effective_qubit_hamiltonian(free, r, units::ghz_to_rad(7.83));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(h0(i, j) == (i == j ? std::complex<double>(r.omegas[i]) : 0.0));

    // clean: mirror relabeling i -> N-1-i is a symmetry
    const auto c = model::clean_realization(P, 6);
    const auto hc = effective_qubit_hamiltonian(P, c, units::ghz_to_rad(7.82));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK(std::abs(hc(i, j) - hc(5 - i, 5 - j)) <= 1e-9 * std::abs(hc(i, j)) + 1e-6);

    // N = 2: the one off-diagonal element is the photon-mediated coupling
    const auto two = model::clean_realization(P, 2);
    const double w2 = units::ghz_to_rad(7.82);
    CHECK(effective_qubit_hamiltonian(P, two, w2)(0, 1).real() ==
          doctest::Approx(oracle::qubit_resolvent(P, two, w2)(0, 1)).epsilon(1e-10));

    // probe on a photon level of the 3-site chain (E = 0)
    CHECK_THROWS_AS(effective_qubit_hamiltonian(P, two, 0.0), std::domain_error);
    CHECK_THROWS_AS(effective_qubit_hamiltonian(P, draw(1.0, 65), w2), std::invalid_argument);
}

TEST_CASE("qubit-like eigenvalues of the full model solve the effective qubit problem") {
    const auto r = draw(1.0, 4);
    const auto ev = eigenfrequencies(model::build_full_hamiltonian(P, r));
    std::size_t checked = 0;
    for (double e : ev) {
        if (std::abs(e - P.mu) > 20.0 * P.gamma10) continue;
        const Eigen::MatrixXcd h = effective_qubit_hamiltonian(P, r, e);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        double best = INFINITY;
        for (int i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, std::abs(es.eigenvalues()(i) - e));
        CHECK(best <= 1e-6 * P.gamma10);
        ++checked;
    }
    CHECK(checked == 4);
}
