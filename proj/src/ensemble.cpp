// ensemble.cpp — sweeps, bootstrap, power-law fit, peak location
#include "darkloc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "darkloc/dissipative.hpp"
#include "darkloc/parallel.hpp"
#include "darkloc/units.hpp"

namespace darkloc::ensemble {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// bootstrap streams must not coincide with disorder streams
constexpr std::uint64_t bootstrap_salt = 0xb0075724b0075724ULL;

double xi_of_mean(double mean_log_t, std::size_t n) {
    return mean_log_t < 0.0 ? -static_cast<double>(n) / mean_log_t : inf;
}

} // namespace

const char* engine_name(Engine e) {
    switch (e) {
    case Engine::lattice: return "lattice";
    case Engine::dissipative: return "dissipative";
    case Engine::lyapunov: return "lyapunov";
    }
    return "?";
}

Engine parse_engine(const std::string& s) {
    if (s == "lattice") return Engine::lattice;
    if (s == "dissipative") return Engine::dissipative;
    if (s == "lyapunov") return Engine::lyapunov;
    throw std::invalid_argument("unknown engine '" + s + "' (lattice | dissipative | lyapunov)");
}

std::vector<const SweepRow*> SweepTable::failed() const {
    std::vector<const SweepRow*> out;
    for (const auto& r : rows)
        if (!r.ok) out.push_back(&r);
    return out;
}

SweepTable run_sweep(const model::ModelParams& p, const SweepRequest& req) {
    if (req.f_grid_ghz.empty() || req.W_grid.empty())
        throw std::invalid_argument("run_sweep: frequency and W grids must be non-empty");
    if (req.n_qubits == 0) throw std::invalid_argument("run_sweep: N must be >= 1");
    if (req.n_realizations < 2)
        throw std::invalid_argument("run_sweep: need >= 2 realizations for error bars");
    if (req.bootstrap_resamples < 100)
        throw std::invalid_argument("run_sweep: bootstrap_resamples must be >= 100");
    for (double W : req.W_grid) {
        model::DisorderSpec s;
        s.W = W;
        s.truncation = req.truncation;
        model::validate(s);
    }

    const std::size_t nf = req.f_grid_ghz.size();
    const std::size_t nw = req.W_grid.size();
    const std::size_t nr = req.n_realizations;

    // samples[(w*nf + f)*nr + r] hold log T (or -N/xi); errors/poles per slot
    std::vector<double> samples(nw * nf * nr, nan);
    std::vector<std::string> errors(nw * nf * nr);
    std::vector<unsigned char> pole(nw * nf * nr, 0), unconverged(nw * nf * nr, 0);
    auto slot = [&](std::size_t w, std::size_t f, std::size_t r) { return (w * nf + f) * nr + r; };

    auto spec_for = [&](double W) {
        model::DisorderSpec s;
        s.W = W;
        s.truncation = req.truncation;
        s.master_seed = req.master_seed;
        s.n_realizations = nr;
        return s;
    };

    if (req.engine == Engine::lyapunov) {
        parallel::parallel_for(nw * nf * nr, req.workers, [&](std::size_t item) {
            const std::size_t r = item % nr;
            const std::size_t f = (item / nr) % nf;
            const std::size_t w = item / (nr * nf);
            const std::size_t k = slot(w, f, r);
            try {
                model::DisorderStream stream(spec_for(req.W_grid[w]), p, r);
                const auto est = transfer::lyapunov_xi(p, stream, units::ghz_to_rad(req.f_grid_ghz[f]),
                                                       req.n_qubits, req.lyapunov);
                samples[k] = -static_cast<double>(req.n_qubits) * est.inv_xi_raw;
                unconverged[k] = !est.converged;
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        });
    } else {
        const auto leads = transfer::LeadSpec::matched(p);
        const dissipative::DissipationParams diss{p.gamma10, req.gamma_nr};
        parallel::parallel_for(nw * nr, req.workers, [&](std::size_t item) {
            const std::size_t r = item % nr;
            const std::size_t w = item / nr;
            const auto real = model::sample_realization(spec_for(req.W_grid[w]), p, req.n_qubits, r);
            for (std::size_t f = 0; f < nf; ++f) {
                const std::size_t k = slot(w, f, r);
                const double omega = units::ghz_to_rad(req.f_grid_ghz[f]);
                try {
                    if (req.engine == Engine::lattice) {
                        const auto res = transfer::lead_transmission(p, real, omega, leads,
                                                                     transfer::PolePolicy::clamp_detuning);
                        samples[k] = res.log_t;
                        pole[k] = res.pole;
                    } else {
                        const auto res = dissipative::chain_scattering_dissipative(
                            real.omegas, diss, omega, p.d, p.c, transfer::PolePolicy::clamp_detuning);
                        samples[k] = res.log_T;
                        pole[k] = res.pole;
                    }
                } catch (const std::exception& e) {
                    errors[k] = e.what();
                }
            }
        });
    }

    SweepTable table;
    table.request = req;
    table.rows.resize(nw * nf);
    parallel::parallel_for(nw * nf, req.workers, [&](std::size_t cell) {
        const std::size_t w = cell / nf;
        const std::size_t f = cell % nf;
        SweepRow& row = table.rows[cell];
        row.f_ghz = req.f_grid_ghz[f];
        row.W = req.W_grid[w];
        row.n_realizations = nr;
        const std::span<const double> cs(samples.data() + slot(w, f, 0), nr);
        for (std::size_t r = 0; r < nr; ++r) {
            const std::size_t k = slot(w, f, r);
            row.n_poles += pole[k];
            row.n_unconverged += unconverged[k];
            if (row.ok && !errors[k].empty()) {
                row.ok = false;
                row.error = "realization " + std::to_string(r) + ": " + errors[k];
            }
            if (row.ok && !std::isfinite(cs[r])) {
                row.ok = false;
                row.error = "realization " + std::to_string(r) + ": non-finite log T";
            }
        }
        if (!row.ok) {
            row.mean_log_T = row.xi_N = row.bootstrap_std = nan;
            return;
        }
        const std::size_t n = req.n_qubits;
        const auto bs = bootstrap_ci(cs, req.bootstrap_resamples,
                                     model::realization_seed(req.master_seed ^ bootstrap_salt, cell),
                                     [n](double m) { return xi_of_mean(m, n); });
        row.mean_log_T = std::accumulate(cs.begin(), cs.end(), 0.0) / static_cast<double>(nr);
        row.xi_N = xi_of_mean(row.mean_log_T, n);
        row.bootstrap_std = bs.std;
    });
    return table;
}

BootstrapResult bootstrap_ci(std::span<const double> samples, std::size_t n_resamples,
                             std::uint64_t seed, const std::function<double(double)>& stat) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("bootstrap_ci needs at least 2 samples");
    if (n_resamples < 100) throw std::invalid_argument("bootstrap_ci needs n_resamples >= 100");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double sum = 0.0, sum2 = 0.0;
    bool infinite = false;
    for (std::size_t b = 0; b < n_resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += samples[pick(rng)];
        const double v = stat(acc / static_cast<double>(n));
        if (!std::isfinite(v)) {
            infinite = true;
            continue;
        }
        sum += v;
        sum2 += v * v;
    }
    BootstrapResult out;
    out.mean = stat(std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n));
    if (infinite) {
        out.std = inf;
    } else {
        const double m = sum / static_cast<double>(n_resamples);
        out.std = std::sqrt(std::max(0.0, sum2 / static_cast<double>(n_resamples) - m * m));
    }
    return out;
}

BootstrapResult bootstrap_ci(std::span<const double> samples, std::size_t n_resamples,
                             std::uint64_t seed) {
    return bootstrap_ci(samples, n_resamples, seed, [](double m) { return m; });
}

namespace {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double rms = 0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

} // namespace

PowerLawFit fit_power_law(std::span<const double> W, std::span<const double> xi,
                          std::size_t n_resamples, std::uint64_t seed) {
    if (W.size() != xi.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    if (W.size() < 3) throw std::invalid_argument("fit_power_law needs at least 3 points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < W.size(); ++i) {
        if (!(W[i] > 0.0) || !(xi[i] > 0.0) || !std::isfinite(W[i]) || !std::isfinite(xi[i]))
            throw std::invalid_argument("fit_power_law: inputs must be finite and positive");
        lx.push_back(std::log(W[i]));
        ly.push_back(std::log(xi[i]));
    }
    if (*std::max_element(lx.begin(), lx.end()) == *std::min_element(lx.begin(), lx.end()))
        throw std::invalid_argument("fit_power_law: all W values coincide");

    const auto f = least_squares(lx, ly);
    PowerLawFit out;
    out.beta = -f.slope;
    out.prefactor = std::exp(f.intercept);
    out.residual = f.rms;
    out.W_min = *std::min_element(W.begin(), W.end());
    out.W_max = *std::max_element(W.begin(), W.end());

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, lx.size() - 1);
    std::vector<double> bx(lx.size()), by(lx.size());
    double sum = 0.0, sum2 = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < n_resamples; ++b) {
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const std::size_t j = pick(rng);
            bx[i] = lx[j];
            by[i] = ly[j];
        }
        if (*std::max_element(bx.begin(), bx.end()) == *std::min_element(bx.begin(), bx.end()))
            continue; // degenerate resample, slope undefined
        const double beta = -least_squares(bx, by).slope;
        sum += beta;
        sum2 += beta * beta;
        ++used;
    }
    if (used > 1) {
        const double m = sum / static_cast<double>(used);
        out.bootstrap_std_beta = std::sqrt(std::max(0.0, sum2 / static_cast<double>(used) - m * m));
    }
    return out;
}

double effective_disorder(double sigma_omega, double delta_omega, double g) {
    if (delta_omega == 0.0) throw std::invalid_argument("effective_disorder: zero detuning");
    return sigma_omega * g * g / (delta_omega * delta_omega);
}

Peak locate_peak(const SweepTable& table, std::size_t W_index, spectrum::FrequencyWindow window) {
    if (W_index >= table.n_W()) throw std::out_of_range("locate_peak: W index");
    Peak best;
    bool found = false;
    for (std::size_t f = 0; f < table.n_f(); ++f) {
        const auto& row = table.at(f, W_index);
        if (!row.ok || !window.contains(row.f_ghz)) continue;
        if (!found || row.xi_N > best.xi_N) {
            best = {f, row.f_ghz, row.xi_N, row.bootstrap_std};
            found = true;
        }
    }
    if (!found) throw std::runtime_error("locate_peak: no valid grid point inside the window");
    return best;
}

namespace {

double clean_t(const model::ModelParams& p, const model::DisorderRealization& r, double f_ghz) {
    return transfer::lead_transmission(p, r, units::ghz_to_rad(f_ghz), transfer::LeadSpec::matched(p),
                                       transfer::PolePolicy::clamp_detuning)
        .t;
}

} // namespace

CleanPeak clean_transmission_peak(const model::ModelParams& p, std::size_t n_qubits, double f_lo_ghz,
                                  double f_hi_ghz, double step_mhz) {
    if (!(f_hi_ghz > f_lo_ghz) || !(step_mhz > 0.0))
        throw std::invalid_argument("clean_transmission_peak: bad scan range");
    const auto r = model::clean_realization(p, n_qubits);
    const double step = 1e-3 * step_mhz;
    const auto n = static_cast<std::size_t>(std::ceil((f_hi_ghz - f_lo_ghz) / step));
    CleanPeak best{f_lo_ghz, -1.0};
    for (std::size_t i = 0; i <= n; ++i) {
        const double f = std::min(f_hi_ghz, f_lo_ghz + step * static_cast<double>(i));
        const double t = clean_t(p, r, f);
        if (t > best.T) best = {f, t};
    }
    // golden-section polish inside the neighbouring grid cells
    double a = std::max(f_lo_ghz, best.f_ghz - step), b = std::min(f_hi_ghz, best.f_ghz + step);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double t1 = clean_t(p, r, x1), t2 = clean_t(p, r, x2);
    for (int it = 0; it < 60; ++it) {
        if (t1 > t2) {
            b = x2;
            x2 = x1;
            t2 = t1;
            x1 = b - phi * (b - a);
            t1 = clean_t(p, r, x1);
        } else {
            a = x1;
            x1 = x2;
            t1 = t2;
            x2 = a + phi * (b - a);
            t2 = clean_t(p, r, x2);
        }
    }
    const double fm = 0.5 * (a + b);
    const double tm = clean_t(p, r, fm);
    if (tm > best.T) best = {fm, tm};
    return best;
}

spectrum::FrequencyWindow dark_mode_window(const model::ModelParams& p, std::size_t n_qubits) {
    const double mu_ghz = units::rad_to_ghz(p.mu);
    const double top = mu_ghz - 5e-6;                                  // stay off the pole
    const double bottom = mu_ghz - 5.0 * units::rad_to_ghz(p.gamma10); // a few widths below mu
    const auto r = model::clean_realization(p, n_qubits);
    const double step = 1e-5; // 10 kHz
    const auto n = static_cast<std::size_t>(std::floor((top - bottom) / step));
    std::vector<double> f(n + 1), t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        f[i] = bottom + step * static_cast<double>(i);
        t[i] = clean_t(p, r, f[i]);
    }
    // lowest transmission resonance with T ~ 1
    std::size_t lowest = n + 1;
    for (std::size_t i = 1; i < n; ++i)
        if (t[i] >= 0.99 && t[i] >= t[i - 1] && t[i] >= t[i + 1]) {
            lowest = i;
            break;
        }
    if (lowest > n) return {bottom, mu_ghz};
    const auto it = std::min_element(t.begin(), t.begin() + static_cast<long>(lowest));
    return {f[static_cast<std::size_t>(it - t.begin())], mu_ghz};
}

} // namespace darkloc::ensemble
