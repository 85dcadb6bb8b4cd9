// commands.cpp — dos | xi | transmission | sweep | scaling | dissipative
#include "darkloc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "darkloc/dissipative.hpp"
#include "darkloc/ensemble.hpp"
#include "darkloc/io.hpp"
#include "darkloc/spectrum.hpp"
#include "darkloc/transfer.hpp"
#include "darkloc/units.hpp"

namespace darkloc::cli {

using config::Command;
using config::RunConfig;
using nlohmann::ordered_json;

config::RunConfig resolve_config(const std::string& config_path, Command cmd, const Overrides& ov) {
    auto cfg = config::load_config(config_path, cmd);
    if (ov.out) cfg.run.output = *ov.out;
    if (ov.format) {
        if (*ov.format != "csv" && *ov.format != "json")
            throw config::ConfigError("--format must be csv or json");
        cfg.run.format = *ov.format;
    }
    if (ov.seed) cfg.run.seed = *ov.seed;
    return cfg;
}

namespace {

io::OutputHeader header_for(const RunConfig& cfg) {
    io::OutputHeader h;
    h.command = config::command_name(cfg.command);
    h.master_seed = cfg.run.seed;
    h.config_yaml = config::to_yaml(cfg);
    return h;
}

ordered_json maybe_number(double v) {
    if (std::isfinite(v)) return v;
    return io::format_number(v);
}

io::Table sweep_table(const ensemble::SweepTable& t) {
    io::Table out;
    out.columns = {"f_GHz", "W", "mean_log_T", "xi_N", "n_realizations", "bootstrap_std"};
    for (std::size_t w = 0; w < t.n_W(); ++w)
        for (std::size_t f = 0; f < t.n_f(); ++f) {
            const auto& r = t.at(f, w);
            out.rows.push_back({r.f_ghz, r.W, r.mean_log_T, r.xi_N,
                                static_cast<std::int64_t>(r.n_realizations), r.bootstrap_std});
        }
    return out;
}

int report_failures(const ensemble::SweepTable& t, io::OutputHeader& h, std::ostream& log) {
    const auto failed = t.failed();
    std::size_t poles = 0, unconv = 0;
    for (const auto& r : t.rows) {
        poles += r.n_poles;
        unconv += r.n_unconverged;
    }
    h.metadata["pole_hits"] = poles;
    if (t.request.engine == ensemble::Engine::lyapunov) h.metadata["unconverged_runs"] = unconv;
    auto cells = ordered_json::array();
    for (const auto* r : failed) {
        cells.push_back({{"f_GHz", r->f_ghz}, {"W", r->W}, {"error", r->error}});
        log << "failed cell f=" << io::format_number(r->f_ghz) << " GHz, W=" << io::format_number(r->W)
            << ": " << r->error << "\n";
    }
    h.metadata["failed_cells"] = cells;
    return failed.empty() ? 0 : 1;
}

ensemble::SweepRequest base_request(const RunConfig& cfg, std::size_t workers) {
    ensemble::SweepRequest s;
    s.f_grid_ghz = cfg.run.f_GHz.expand();
    s.W_grid = cfg.disorder.W;
    s.n_qubits = cfg.run.n_qubits;
    s.n_realizations = cfg.run.realizations;
    s.master_seed = cfg.run.seed;
    s.truncation = cfg.disorder.truncation;
    s.bootstrap_resamples = cfg.run.bootstrap;
    s.workers = workers;
    s.lyapunov.warmup_sites = cfg.run.warmup_sites;
    return s;
}

int cmd_dos(const RunConfig& cfg, const model::ModelParams& p, std::size_t workers, std::ostream& out,
            std::ostream& log) {
    model::DisorderSpec spec;
    spec.W = cfg.disorder.W.at(0);
    spec.truncation = cfg.disorder.truncation;
    spec.master_seed = cfg.run.seed;
    spec.n_realizations = cfg.run.realizations;
    const auto dos = spectrum::dos_histogram(p, spec, cfg.run.n_qubits,
                                             {cfg.run.f_min_GHz, cfg.run.f_max_GHz}, cfg.run.n_bins, workers);
    auto h = header_for(cfg);
    h.metadata["n_sites"] = dos.n_sites;
    h.metadata["bin_width_MHz"] = 1e3 * dos.bin_width();
    h.metadata["normalization"] = "states per GHz per site";
    try {
        const auto gap = spectrum::gap_width(dos, cfg.run.threshold_fraction);
        h.metadata["gap_width_MHz"] = gap.width_mhz;
        h.metadata["gap_f_lo_GHz"] = gap.f_lo_ghz;
        h.metadata["gap_f_hi_GHz"] = gap.f_hi_ghz;
        log << "gap_width: " << io::format_number(gap.width_mhz) << " MHz ["
            << io::format_number(gap.f_lo_ghz) << ", " << io::format_number(gap.f_hi_ghz) << "] GHz\n";
    } catch (const std::runtime_error&) {
        h.metadata["gap_width_MHz"] = 0.0;
        log << "gap_width: no bin below threshold\n";
    }
    io::Table t;
    t.columns = {"f_GHz", "rho"};
    for (std::size_t b = 0; b < dos.rho.size(); ++b) t.rows.push_back({dos.bin_center(b), dos.rho[b]});
    io::write_output(cfg.run.output, cfg.run.format, h, t, out);
    return 0;
}

int cmd_xi(const RunConfig& cfg, const model::ModelParams& p, std::size_t workers, std::ostream& out,
           std::ostream& log) {
    auto req = base_request(cfg, workers);
    req.engine = ensemble::Engine::lyapunov;
    const auto table = ensemble::run_sweep(p, req);
    auto h = header_for(cfg);
    h.metadata["engine"] = "lyapunov";
    h.metadata["xi_unit"] = "qubit spacings";
    const int rc = report_failures(table, h, log);
    io::write_output(cfg.run.output, cfg.run.format, h, sweep_table(table), out);
    log << "xi: " << table.rows.size() << " cells, " << table.failed().size() << " failed\n";
    return rc;
}

int cmd_transmission(const RunConfig& cfg, const model::ModelParams& p, std::ostream& out,
                     std::ostream& log) {
    model::DisorderSpec spec;
    spec.W = cfg.disorder.W.at(0);
    spec.truncation = cfg.disorder.truncation;
    spec.master_seed = cfg.run.seed;
    spec.n_realizations = *std::max_element(cfg.run.realization_indices.begin(),
                                            cfg.run.realization_indices.end()) + 1;
    const auto leads = transfer::LeadSpec::matched(p);
    const auto freqs = cfg.run.f_GHz.expand();

    auto h = header_for(cfg);
    io::Table t;
    t.columns = {"realization", "f_GHz", "T", "R"};
    auto qubits = ordered_json::object();
    auto failed = ordered_json::array();
    for (std::size_t idx : cfg.run.realization_indices) {
        const auto r = model::sample_realization(spec, p, cfg.run.n_qubits, idx);
        auto list = ordered_json::array();
        for (double w : r.omegas) list.push_back(units::rad_to_ghz(w));
        qubits[std::to_string(idx)] = list;
        for (double f : freqs) {
            try {
                const auto s = transfer::lead_transmission(p, r, units::ghz_to_rad(f), leads);
                t.rows.push_back({static_cast<std::int64_t>(idx), f, s.t, s.r});
            } catch (const std::exception& e) {
                t.rows.push_back({static_cast<std::int64_t>(idx), f, std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN()});
                failed.push_back({{"realization", idx}, {"f_GHz", f}, {"error", e.what()}});
                log << "failed cell realization=" << idx << ", f=" << io::format_number(f) << " GHz: " << e.what()
                    << "\n";
            }
        }
    }
    h.metadata["qubits_GHz"] = qubits;
    h.metadata["failed_cells"] = failed;
    io::write_output(cfg.run.output, cfg.run.format, h, t, out);
    return failed.empty() ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg, const model::ModelParams& p, std::size_t workers, std::ostream& out,
              std::ostream& log) {
    auto req = base_request(cfg, workers);
    req.engine = cfg.run.engine;
    req.gamma_nr = units::khz_to_rad(cfg.run.gamma_nr_kHz.at(0));
    const auto table = ensemble::run_sweep(p, req);
    auto h = header_for(cfg);
    h.metadata["engine"] = ensemble::engine_name(req.engine);
    const auto window = ensemble::dark_mode_window(p, req.n_qubits);
    h.metadata["peak_window_GHz"] = {window.f_min_ghz, window.f_max_ghz};
    auto peaks = ordered_json::array();
    for (std::size_t w = 0; w < table.n_W(); ++w) {
        try {
            const auto pk = ensemble::locate_peak(table, w, window);
            peaks.push_back({{"W", table.request.W_grid[w]}, {"f_GHz", pk.f_ghz}, {"xi_N", maybe_number(pk.xi_N)},
                             {"bootstrap_std", maybe_number(pk.bootstrap_std)}});
        } catch (const std::runtime_error&) {
        }
    }
    h.metadata["peaks"] = peaks;
    const int rc = report_failures(table, h, log);
    io::write_output(cfg.run.output, cfg.run.format, h, sweep_table(table), out);
    log << "sweep: " << table.rows.size() << " cells, " << table.failed().size() << " failed\n";
    return rc;
}

int cmd_scaling(const RunConfig& cfg, const model::ModelParams& p, std::size_t workers, std::ostream& out,
                std::ostream& log) {
    auto req = base_request(cfg, workers);
    req.engine = ensemble::Engine::lyapunov;
    const auto table = ensemble::run_sweep(p, req);
    auto h = header_for(cfg);
    int rc = report_failures(table, h, log);

    io::Table t;
    t.columns = {"W", "xi", "bootstrap_std", "n_realizations", "n_qubits"};
    std::vector<double> ws, xs;
    bool fittable = true;
    for (std::size_t w = 0; w < table.n_W(); ++w) {
        const auto& r = table.at(0, w);
        t.rows.push_back({r.W, r.xi_N, r.bootstrap_std, static_cast<std::int64_t>(r.n_realizations),
                          static_cast<std::int64_t>(req.n_qubits)});
        if (!r.ok || !std::isfinite(r.xi_N) || !(r.xi_N > 0.0)) fittable = false;
        ws.push_back(r.W);
        xs.push_back(r.xi_N);
    }
    if (fittable) {
        try {
            const auto fit = ensemble::fit_power_law(ws, xs, cfg.run.bootstrap, cfg.run.seed);
            h.metadata["fit"] = {{"beta", fit.beta},           {"prefactor", fit.prefactor},
                                 {"residual", fit.residual},   {"W_min", fit.W_min},
                                 {"W_max", fit.W_max},         {"bootstrap_std_beta", fit.bootstrap_std_beta}};
            log << "scaling: beta = " << io::format_number(fit.beta) << " +- "
                << io::format_number(fit.bootstrap_std_beta) << "\n";
        } catch (const std::invalid_argument& e) {
            h.metadata["fit_error"] = e.what();
            fittable = false;
        }
    } else {
        h.metadata["fit_error"] = "some xi estimate is not finite and positive (xi >> N?)";
    }
    if (!fittable) {
        log << "scaling: power-law fit not possible: " << h.metadata["fit_error"].get<std::string>() << "\n";
        rc = 1;
    }
    io::write_output(cfg.run.output, cfg.run.format, h, t, out);
    return rc;
}

int cmd_dissipative(const RunConfig& cfg, const model::ModelParams& p, std::size_t workers,
                    std::ostream& out, std::ostream& log) {
    dissipative::PeakStudyRequest req;
    for (double k : cfg.run.gamma_nr_kHz) req.gamma_nr.push_back(units::khz_to_rad(k));
    req.W_grid = cfg.disorder.W;
    req.f_grid_ghz = cfg.run.f_GHz.expand();
    req.n_qubits = cfg.run.n_qubits;
    req.n_realizations = cfg.run.realizations;
    req.master_seed = cfg.run.seed;
    req.truncation = cfg.disorder.truncation;
    req.bootstrap_resamples = cfg.run.bootstrap;
    req.workers = workers;
    const auto rows = dissipative::dissipative_peak_study(p, req);

    auto h = header_for(cfg);
    const auto window = ensemble::dark_mode_window(p, req.n_qubits);
    h.metadata["peak_window_GHz"] = {window.f_min_ghz, window.f_max_ghz};
    auto peaks = ordered_json::array();
    io::Table t;
    t.columns = {"W", "Gamma_nr_kHz", "xi8_mean", "xi8_bootstrap_std"};
    for (const auto& r : rows) {
        t.rows.push_back({r.W, units::rad_to_khz(r.gamma_nr), r.xi8_mean, r.xi8_bootstrap_std});
        peaks.push_back({{"W", r.W}, {"Gamma_nr_kHz", units::rad_to_khz(r.gamma_nr)}, {"f_peak_GHz", r.f_peak_ghz}});
    }
    h.metadata["peaks"] = peaks;
    io::write_output(cfg.run.output, cfg.run.format, h, t, out);
    log << "dissipative: " << rows.size() << " rows\n";
    return 0;
}

} // namespace

int run_command(const RunConfig& cfg, std::size_t workers, std::ostream& out, std::ostream& log) {
    const auto p = config::model_params(cfg, &log);
    switch (cfg.command) {
    case Command::dos: return cmd_dos(cfg, p, workers, out, log);
    case Command::xi: return cmd_xi(cfg, p, workers, out, log);
    case Command::transmission: return cmd_transmission(cfg, p, out, log);
    case Command::sweep: return cmd_sweep(cfg, p, workers, out, log);
    case Command::scaling: return cmd_scaling(cfg, p, workers, out, log);
    case Command::dissipative: return cmd_dissipative(cfg, p, workers, out, log);
    }
    return 1;
}

} // namespace darkloc::cli
