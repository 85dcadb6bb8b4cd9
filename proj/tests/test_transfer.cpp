#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "darkloc/transfer.hpp"
#include "darkloc/units.hpp"
#include "oracles.hpp"

using namespace darkloc;
using namespace darkloc::transfer;
using model::DisorderRealization;

namespace {

const model::ModelParams P = model::device_defaults();

DisorderRealization draw(double W, std::size_t n, std::uint64_t seed, std::uint64_t index = 0) {
    model::DisorderSpec s;
    s.W = W;
    s.master_seed = seed;
    s.n_realizations = index + 1;
    return model::sample_realization(s, P, n, index);
}

double f2w(double f) { return units::ghz_to_rad(f); }

} // namespace

TEST_CASE("bare lead transmits perfectly") {
    const auto leads = LeadSpec::matched(P);
    for (double f : {-50.0, 0.5, 7.82, 60.0, 140.0}) {
        const auto a = lead_transmission(P, DisorderRealization{}, f2w(f), leads);
        CHECK(a.t == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.r < 1e-28);
        const auto b = scattering_oracle(P, DisorderRealization{}, f2w(f), leads);
        CHECK(b.t == doctest::Approx(1.0).epsilon(1e-12));
    }
    // the couplings do not matter without a system
    LeadSpec odd{2.0 * P.J, 0.3 * P.J, 0.7 * P.J};
    CHECK(lead_transmission(P, DisorderRealization{}, f2w(7.82), odd).t == doctest::Approx(1.0));
}

TEST_CASE("single qubit matches the analytic single-defect transmission") {
    const auto leads = LeadSpec::matched(P);
    const auto r = model::clean_realization(P, 1);
    for (double df_mhz : {-40.0, -6.4, -1.0, -0.01, 0.02, 3.0, 25.0}) {
        const double w = P.mu + units::mhz_to_rad(df_mhz);
        const double eps = P.g * P.g / (w - P.mu);
        const auto res = lead_transmission(P, r, w, leads);
        CHECK(res.t == doctest::Approx(oracle::single_defect_t(P.J, eps, w)).epsilon(1e-10));
        CHECK(res.t + res.r == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("resonant qubit blocks transmission") {
    const auto leads = LeadSpec::matched(P);
    const auto r = model::clean_realization(P, 1);
    const auto res = lead_transmission(P, r, P.mu, leads);
    CHECK(res.pole);
    CHECK(res.t == 0.0);
    CHECK(res.r == 1.0);
    // the clamp policy evaluates the continuous limit instead
    const auto cl = lead_transmission(P, r, P.mu, leads, PolePolicy::clamp_detuning);
    CHECK(cl.pole);
    CHECK(cl.t < 1e-10);
    CHECK(std::isfinite(cl.log_t));
    CHECK(cl.t + cl.r == doctest::Approx(1.0).epsilon(1e-12));
    // the full-model oracle needs no special case
    CHECK(scattering_oracle(P, r, P.mu, leads).t < 1e-6);
}

TEST_CASE("clean 8-qubit array has a T ~ 1 dark peak just below mu") {
    const auto leads = LeadSpec::matched(P);
    const auto r = model::clean_realization(P, 8);
    double best = 0.0, f_best = 0.0;
    for (double f = 7.82; f <= 7.84; f += 1e-5) {
        const auto res = lead_transmission(P, r, f2w(f), leads, PolePolicy::clamp_detuning);
        if (res.t > best) {
            best = res.t;
            f_best = f;
        }
    }
    CHECK(best >= 0.999);
    CHECK(f_best > 7.828);
    CHECK(f_best < 7.835);
}

TEST_CASE("dense scattering oracle equals the transfer matrix") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> nq(0, 16);
    std::uniform_real_distribution<double> uw(0.0, 2.0), uf(7.80, 7.87), ul(0.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = draw(uw(rng), nq(rng), 99, trial);
        const double w = f2w(uf(rng));
        LeadSpec leads = LeadSpec::matched(P);
        if (trial % 3 == 0) leads = {P.J * ul(rng), P.J * ul(rng), P.J * ul(rng)};
        const auto a = lead_transmission(P, r, w, leads);
        const auto b = scattering_oracle(P, r, w, leads, 1 + trial % 4);
        CHECK(a.t == doctest::Approx(b.t).epsilon(1e-8));
        CHECK(a.r == doctest::Approx(b.r).epsilon(1e-8));
        CHECK(std::abs(a.A_minus1 - b.A_minus1) <= 1e-8 * std::abs(b.A_minus1));
        CHECK(std::abs(a.B_minus1 - b.B_minus1) <= 1e-8 * std::abs(b.A_minus1));
        CHECK(a.t + a.r == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(b.t + b.r == doctest::Approx(1.0).epsilon(1e-10));
    }
    // deep localization, t ~ 1e-9: relative agreement still holds
    const auto r = draw(2.0, 60, 5);
    const double w = f2w(7.83);
    const auto a = lead_transmission(P, r, w, LeadSpec::matched(P));
    const auto b = scattering_oracle(P, r, w, LeadSpec::matched(P));
    CHECK(a.t < 1e-5);
    CHECK(a.t == doctest::Approx(b.t).epsilon(1e-8));
    CHECK_THROWS_AS(scattering_oracle(P, draw(1.0, 65, 1), w, LeadSpec::matched(P)), std::invalid_argument);
}

TEST_CASE("flux conservation over 1000 random pairs") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> nq(1, 40);
    std::uniform_real_distribution<double> uw(0.0, 2.5), uf(7.78, 7.90);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = draw(uw(rng), nq(rng), 17, trial);
        const auto res = lead_transmission(P, r, f2w(uf(rng)), LeadSpec::matched(P));
        worst = std::max(worst, std::abs(res.t + res.r - 1.0));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("reciprocity: reversing the array leaves t unchanged") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uf(7.80, 7.87);
    for (int trial = 0; trial < 200; ++trial) {
        auto r = draw(1.5, 1 + trial % 30, 23, trial);
        const double w = f2w(uf(rng));
        const double t1 = lead_transmission(P, r, w, LeadSpec::matched(P)).t;
        std::reverse(r.omegas.begin(), r.omegas.end());
        const double t2 = lead_transmission(P, r, w, LeadSpec::matched(P)).t;
        CHECK(std::abs(t1 - t2) <= 1e-10 * std::max(t1, 1e-300) + 1e-300);
    }
}

TEST_CASE("long chains: no overflow, log t stays finite") {
    const auto r = draw(2.04, 5000, 8);
    const auto res = lead_transmission(P, r, f2w(7.83), LeadSpec::matched(P));
    CHECK(std::isfinite(res.log_t));
    CHECK(res.log_t < -500.0);
    CHECK(res.t == std::exp(res.log_t));
    CHECK(res.r == doctest::Approx(1.0));
}

TEST_CASE("lead band and argument errors") {
    CHECK_THROWS_AS(lead_wavenumber(2.0 * P.J, P.J), std::domain_error);
    CHECK_THROWS_AS(lead_wavenumber(-3.0 * P.J, P.J), std::domain_error);
    CHECK(lead_wavenumber(0.0, P.J) == doctest::Approx(std::acos(0.0)));
    const auto r = draw(1.0, 4, 1);
    CHECK_THROWS_AS(lead_transmission(P, r, 2.5 * P.J, LeadSpec::matched(P)), std::domain_error);
    CHECK_THROWS_AS(scattering_oracle(P, r, 2.5 * P.J, LeadSpec::matched(P)), std::domain_error);
    CHECK_THROWS_AS(lead_transmission(P, r, f2w(7.8), LeadSpec{P.J, 0.0, P.J}), std::invalid_argument);
}

TEST_CASE("Lyapunov exponent: free chain and clean periodic chain") {
    model::RawParams raw;
    raw.g = 0.0;
    const auto free = model::derive_params(raw);
    model::DisorderSpec spec;
    spec.W = 1.0;
    model::DisorderStream s0(spec, free, 0);
    const auto e0 = lyapunov_xi(free, s0, f2w(7.82), 10000);
    CHECK(e0.inv_xi == 0.0);
    CHECK(std::isinf(e0.xi()));

    model::DisorderSpec clean;
    for (double f : {7.84, 7.86, 7.88}) { // inside the polaritonic gap
        model::DisorderStream s(clean, P, 0);
        const auto e = lyapunov_xi(P, s, f2w(f), 100000);
        const double ref = oracle::clean_inv_xi(P, f2w(f));
        REQUIRE(ref > 0.0);
        CHECK(e.inv_xi == doctest::Approx(ref).epsilon(1e-4));
        CHECK(e.converged);
    }
    for (double f : {7.80, 7.82, 7.95}) { // pass bands
        REQUIRE(oracle::clean_inv_xi(P, f2w(f)) == 0.0);
        model::DisorderStream s(clean, P, 0);
        CHECK(std::abs(lyapunov_xi(P, s, f2w(f), 100000).inv_xi_raw) < 1e-12);
    }
}

TEST_CASE("Lyapunov exponent: rescaling threshold is irrelevant") {
    model::DisorderSpec spec;
    spec.W = 1.5;
    spec.master_seed = 4;
    for (double f : {7.825, 7.83, 7.85}) {
        LyapunovOptions a, b;
        a.rescale_exponent = 512;
        b.rescale_exponent = 412;
        model::DisorderStream sa(spec, P, 0), sb(spec, P, 0);
        const auto ea = lyapunov_xi(P, sa, f2w(f), 200000, a);
        const auto eb = lyapunov_xi(P, sb, f2w(f), 200000, b);
        CHECK(ea.renorm_count > 0);
        CHECK(eb.renorm_count > ea.renorm_count);
        CHECK(std::abs(ea.inv_xi - eb.inv_xi) <= 1e-10 * ea.inv_xi);
    }
}

TEST_CASE("Lyapunov exponent: stream and finite realization agree") {
    model::DisorderSpec spec;
    spec.W = 1.0;
    spec.master_seed = 12;
    spec.n_realizations = 1;
    const auto r = model::sample_realization(spec, P, 20500, 0);
    model::DisorderStream s(spec, P, 0);
    const auto a = lyapunov_xi(P, r, f2w(7.82));
    const auto b = lyapunov_xi(P, s, f2w(7.82), 20000);
    CHECK(a.inv_xi_raw == b.inv_xi_raw);
    CHECK(a.n_sites_used == 40000);
    CHECK_THROWS_AS(lyapunov_xi(P, model::clean_realization(P, 100), f2w(7.82)), std::invalid_argument);
    model::DisorderStream s2(spec, P, 0);
    CHECK_THROWS_AS(lyapunov_xi(P, s2, 2.5 * P.J, 1000), std::domain_error);
    CHECK_THROWS_AS(lyapunov_xi(P, s2, f2w(7.82), 0), std::invalid_argument);
}

TEST_CASE("two routes to xi agree: Lyapunov vs xi_2000 from transmission (W = 1, 7.82 GHz)") {
    model::DisorderSpec spec;
    spec.W = 1.0;
    spec.master_seed = 77;
    spec.n_realizations = 100;
    double inv = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        model::DisorderStream s(spec, P, i);
        inv += lyapunov_xi(P, s, f2w(7.82), 100000).inv_xi;
    }
    const double xi_lyap = 10.0 / inv;
    std::vector<double> logs;
    for (std::uint64_t i = 0; i < 100; ++i)
        logs.push_back(lead_transmission(P, model::sample_realization(spec, P, 2000, i), f2w(7.82),
                                         LeadSpec::matched(P), PolePolicy::clamp_detuning)
                           .log_t);
    const double xi_2000 = xi_from_log_transmission(logs, 2000).xi;
    CHECK(xi_2000 == doctest::Approx(xi_lyap).epsilon(0.10));
}

TEST_CASE("weak disorder at the dark peak: xi > 160") {
    model::DisorderSpec spec;
    spec.W = 0.16;
    spec.master_seed = 1;
    double inv = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        model::DisorderStream s(spec, P, i);
        inv += lyapunov_xi(P, s, f2w(7.8295), 100000).inv_xi;
    }
    CHECK(10.0 / inv > 160.0);
}

TEST_CASE("xi_N from transmissions") {
    const double t8[] = {std::exp(-8.0)};
    CHECK(xi_from_transmission(t8, 8).xi == doctest::Approx(1.0).epsilon(1e-15));
    const double ones[] = {1.0, 1.0};
    const auto d = xi_from_transmission(ones, 8);
    CHECK(d.divergent);
    CHECK(std::isinf(d.xi));
    const double zero[] = {0.5, 0.0};
    const auto z = xi_from_transmission(zero, 8);
    CHECK(z.suppressed);
    CHECK(z.xi == 0.0);
    const double mixed[] = {std::exp(-2.0), std::exp(-6.0)};
    CHECK(xi_from_transmission(mixed, 8).xi == doctest::Approx(2.0));
    CHECK(xi_from_transmission(mixed, 8).mean_log_t == doctest::Approx(-4.0));
    const double bad1[] = {1.5};
    const double bad2[] = {-0.1};
    const double bad3[] = {std::nan("")};
    CHECK_THROWS_AS(xi_from_transmission(bad1, 8), std::invalid_argument);
    CHECK_THROWS_AS(xi_from_transmission(bad2, 8), std::invalid_argument);
    CHECK_THROWS_AS(xi_from_transmission(bad3, 8), std::invalid_argument);
    CHECK_THROWS_AS(xi_from_transmission(std::span<const double>{}, 8), std::invalid_argument);
    CHECK_THROWS_AS(xi_from_transmission(t8, 0), std::invalid_argument);
}
