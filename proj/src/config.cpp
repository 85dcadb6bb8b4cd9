// config.cpp — strict YAML schema with line-level diagnostics
#include "darkloc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "darkloc/units.hpp"

namespace darkloc::config {

const char* command_name(Command c) {
    switch (c) {
    case Command::dos: return "dos";
    case Command::xi: return "xi";
    case Command::transmission: return "transmission";
    case Command::sweep: return "sweep";
    case Command::scaling: return "scaling";
    case Command::dissipative: return "dissipative";
    }
    return "?";
}

Command parse_command(const std::string& s) {
    for (auto c : {Command::dos, Command::xi, Command::transmission, Command::sweep, Command::scaling,
                   Command::dissipative})
        if (s == command_name(c)) return c;
    throw ConfigError("unknown command '" + s + "'");
}

std::vector<double> Grid::expand() const {
    if (!start) return values;
    std::vector<double> out;
    const double span = (*stop - *start) / *step;
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(*start + *step * static_cast<double>(i));
    return out;
}

namespace {

struct Ctx {
    std::string source;
    std::string where(const YAML::Node& n) const {
        const auto m = n.Mark();
        if (m.line < 0) return source;
        return source + ":" + std::to_string(m.line + 1);
    }
    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        throw ConfigError(where(n) + ": " + msg);
    }
};

double as_double(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) ctx.fail(n, "'" + key + "' must be a number");
    try {
        const double v = n.as<double>();
        if (!std::isfinite(v)) ctx.fail(n, "'" + key + "' must be finite");
        return v;
    } catch (const YAML::Exception&) {
        ctx.fail(n, "'" + key + "' must be a number, got '" + n.Scalar() + "'");
    }
}

std::uint64_t as_count(const Ctx& ctx, const YAML::Node& n, const std::string& key, bool allow_zero) {
    if (!n.IsScalar()) ctx.fail(n, "'" + key + "' must be an integer");
    std::uint64_t v = 0;
    const std::string& s = n.Scalar();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        // accept integral floats such as 1e6
        double d = 0;
        try {
            d = n.as<double>();
        } catch (const YAML::Exception&) {
            ctx.fail(n, "'" + key + "' must be an integer, got '" + s + "'");
        }
        if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15)
            ctx.fail(n, "'" + key + "' must be a non-negative integer, got '" + s + "'");
        v = static_cast<std::uint64_t>(d);
    }
    if (!allow_zero && v == 0) ctx.fail(n, "'" + key + "' must be >= 1");
    return v;
}

std::vector<double> as_double_list(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    std::vector<double> out;
    if (n.IsScalar()) {
        out.push_back(as_double(ctx, n, key));
    } else if (n.IsSequence()) {
        for (const auto& e : n) out.push_back(as_double(ctx, e, key));
        if (out.empty()) ctx.fail(n, "'" + key + "' must not be empty");
    } else {
        ctx.fail(n, "'" + key + "' must be a number or a list of numbers");
    }
    return out;
}

Grid as_grid(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    Grid g;
    if (n.IsMap()) {
        for (const auto& kv : n) {
            const auto k = kv.first.as<std::string>();
            if (k != "start" && k != "stop" && k != "step")
                ctx.fail(kv.first, "unknown key '" + key + "." + k + "' (expected start, stop, step)");
        }
        for (const char* k : {"start", "stop", "step"})
            if (!n[k]) ctx.fail(n, "missing key '" + key + "." + k + "'");
        g.start = as_double(ctx, n["start"], key + ".start");
        g.stop = as_double(ctx, n["stop"], key + ".stop");
        g.step = as_double(ctx, n["step"], key + ".step");
        if (!(*g.step > 0.0) || *g.stop < *g.start)
            ctx.fail(n, "'" + key + "' needs step > 0 and stop >= start");
        if ((*g.stop - *g.start) / *g.step > 1e6) ctx.fail(n, "'" + key + "' has more than 1e6 points");
        return g;
    }
    g.values = as_double_list(ctx, n, key);
    return g;
}

using KeySet = std::set<std::string>;

void check_keys(const Ctx& ctx, const YAML::Node& block, const std::string& name, const KeySet& allowed) {
    if (!block.IsMap()) ctx.fail(block, "'" + name + "' must be a mapping");
    for (const auto& kv : block) {
        const auto k = kv.first.as<std::string>();
        if (!allowed.count(k)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            ctx.fail(kv.first, "unknown key '" + name + "." + k + "' (allowed: " + list + ")");
        }
    }
}

bool scalar_W(Command c) { return c == Command::dos || c == Command::transmission; }

KeySet run_keys(Command c) {
    KeySet k{"seed", "format", "output", "n_qubits"};
    switch (c) {
    case Command::dos: k.insert({"realizations", "f_min_GHz", "f_max_GHz", "n_bins", "threshold_fraction"}); break;
    case Command::xi: k.insert({"realizations", "f_GHz", "bootstrap", "warmup_sites"}); break;
    case Command::transmission: k.insert({"f_GHz", "realization_indices"}); break;
    case Command::sweep: k.insert({"realizations", "f_GHz", "engine", "gamma_nr_kHz", "bootstrap"}); break;
    case Command::scaling: k.insert({"realizations", "f_GHz", "bootstrap", "warmup_sites"}); break;
    case Command::dissipative: k.insert({"realizations", "f_GHz", "gamma_nr_kHz", "bootstrap"}); break;
    }
    return k;
}

void apply_defaults(RunConfig& cfg) {
    auto& r = cfg.run;
    switch (cfg.command) {
    case Command::dos: r.n_qubits = 2000; r.realizations = 10; break;
    case Command::xi: r.n_qubits = 10000; r.realizations = 40; break;
    case Command::transmission: r.n_qubits = 8; r.realization_indices = {0}; break;
    case Command::sweep: r.n_qubits = 8; r.realizations = 1000; break;
    case Command::scaling: r.n_qubits = 1000000; r.realizations = 10; r.f_GHz.values = {7.82}; break;
    case Command::dissipative: r.n_qubits = 8; r.realizations = 1000; r.gamma_nr_kHz = {0.0, 400.0}; break;
    }
}

} // namespace

RunConfig parse_config(const std::string& yaml_text, Command cmd, const std::string& source) {
    Ctx ctx{source};
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": YAML syntax error: " + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    check_keys(ctx, root, "<top level>", {"model", "disorder", "run"});

    RunConfig cfg;
    cfg.command = cmd;
    apply_defaults(cfg);

    if (const auto m = root["model"]) {
        check_keys(ctx, m, "model", {"J_GHz", "g_GHz", "mu_GHz", "d_um", "n_int"});
        if (m["J_GHz"]) cfg.model.J_GHz = as_double(ctx, m["J_GHz"], "model.J_GHz");
        if (m["g_GHz"]) cfg.model.g_GHz = as_double(ctx, m["g_GHz"], "model.g_GHz");
        if (m["mu_GHz"]) cfg.model.mu_GHz = as_double(ctx, m["mu_GHz"], "model.mu_GHz");
        if (m["d_um"]) cfg.model.d_um = as_double(ctx, m["d_um"], "model.d_um");
        if (m["n_int"]) {
            const auto v = as_count(ctx, m["n_int"], "model.n_int", true);
            if (v > 1000) ctx.fail(m["n_int"], "'model.n_int' is unreasonably large");
            cfg.model.n_int = static_cast<int>(v);
        }
        try {
            model_params(cfg.model);
        } catch (const std::invalid_argument& e) {
            ctx.fail(m, std::string("invalid model block: ") + e.what());
        }
    }

    const auto d = root["disorder"];
    if (!d) throw ConfigError(source + ": missing key 'disorder.W' (no 'disorder' block)");
    check_keys(ctx, d, "disorder", {"W", "truncation"});
    if (!d["W"]) ctx.fail(d, "missing key 'disorder.W'");
    if (scalar_W(cmd)) {
        if (!d["W"].IsScalar()) ctx.fail(d["W"], "'disorder.W' must be a single number for '" +
                                                     std::string(command_name(cmd)) + "'");
        cfg.disorder.W = {as_double(ctx, d["W"], "disorder.W")};
    } else {
        cfg.disorder.W = as_double_list(ctx, d["W"], "disorder.W");
    }
    for (double w : cfg.disorder.W)
        if (w < 0.0) ctx.fail(d["W"], "'disorder.W' must be >= 0");
    if (cmd == Command::scaling && cfg.disorder.W.size() < 3)
        ctx.fail(d["W"], "'disorder.W' needs at least 3 values for a power-law fit");
    if (const auto t = d["truncation"]) {
        if (t.IsNull() || (t.IsScalar() && (t.Scalar() == "none" || t.Scalar() == "false"))) {
            cfg.disorder.truncation.reset();
        } else {
            cfg.disorder.truncation = as_double(ctx, t, "disorder.truncation");
            if (*cfg.disorder.truncation < 0.1) ctx.fail(t, "'disorder.truncation' must be >= 0.1 (or none)");
        }
    }

    const auto r = root["run"];
    auto& run = cfg.run;
    if (r) {
        check_keys(ctx, r, "run", run_keys(cmd));
        if (r["seed"]) run.seed = as_count(ctx, r["seed"], "run.seed", true);
        if (r["format"]) {
            run.format = r["format"].as<std::string>();
            if (run.format != "csv" && run.format != "json")
                ctx.fail(r["format"], "'run.format' must be csv or json");
        }
        if (r["output"]) run.output = r["output"].as<std::string>();
        if (r["n_qubits"]) run.n_qubits = as_count(ctx, r["n_qubits"], "run.n_qubits", false);
        if (r["realizations"]) run.realizations = as_count(ctx, r["realizations"], "run.realizations", false);
        if (r["f_GHz"]) run.f_GHz = as_grid(ctx, r["f_GHz"], "run.f_GHz");
        if (r["f_min_GHz"]) run.f_min_GHz = as_double(ctx, r["f_min_GHz"], "run.f_min_GHz");
        if (r["f_max_GHz"]) run.f_max_GHz = as_double(ctx, r["f_max_GHz"], "run.f_max_GHz");
        if (r["n_bins"]) run.n_bins = as_count(ctx, r["n_bins"], "run.n_bins", false);
        if (r["threshold_fraction"])
            run.threshold_fraction = as_double(ctx, r["threshold_fraction"], "run.threshold_fraction");
        if (r["engine"]) {
            try {
                run.engine = ensemble::parse_engine(r["engine"].as<std::string>());
            } catch (const std::invalid_argument& e) {
                ctx.fail(r["engine"], e.what());
            }
            if (run.engine == ensemble::Engine::lyapunov)
                ctx.fail(r["engine"], "'run.engine' for sweep is lattice or dissipative (use 'xi' for Lyapunov maps)");
        }
        if (r["gamma_nr_kHz"]) {
            if (cmd == Command::sweep && !r["gamma_nr_kHz"].IsScalar())
                ctx.fail(r["gamma_nr_kHz"], "'run.gamma_nr_kHz' must be a single number for sweep");
            run.gamma_nr_kHz = as_double_list(ctx, r["gamma_nr_kHz"], "run.gamma_nr_kHz");
            for (double g : run.gamma_nr_kHz)
                if (g < 0.0) ctx.fail(r["gamma_nr_kHz"], "'run.gamma_nr_kHz' must be >= 0");
        }
        if (r["bootstrap"]) {
            run.bootstrap = as_count(ctx, r["bootstrap"], "run.bootstrap", false);
            if (run.bootstrap < 100) ctx.fail(r["bootstrap"], "'run.bootstrap' must be >= 100");
        }
        if (r["warmup_sites"]) run.warmup_sites = as_count(ctx, r["warmup_sites"], "run.warmup_sites", true);
        if (r["realization_indices"]) {
            const auto n = r["realization_indices"];
            run.realization_indices.clear();
            if (n.IsScalar()) {
                run.realization_indices.push_back(as_count(ctx, n, "run.realization_indices", true));
            } else if (n.IsSequence() && n.size() > 0) {
                for (const auto& e : n) run.realization_indices.push_back(as_count(ctx, e, "run.realization_indices", true));
            } else {
                ctx.fail(n, "'run.realization_indices' must be an integer or a non-empty list");
            }
        }
    }

    const bool needs_f = cmd == Command::xi || cmd == Command::transmission || cmd == Command::sweep ||
                         cmd == Command::dissipative;
    if (needs_f && run.f_GHz.expand().empty())
        throw ConfigError(source + (r ? ":" + std::to_string(r.Mark().line + 1) : std::string()) +
                          ": missing key 'run.f_GHz'");
    if (cmd == Command::scaling && run.f_GHz.expand().size() != 1)
        ctx.fail(r["f_GHz"], "'run.f_GHz' must be a single frequency for scaling");
    if (cmd == Command::sweep) {
        if (run.gamma_nr_kHz.empty()) run.gamma_nr_kHz = {0.0};
        if (run.engine == ensemble::Engine::lattice && run.gamma_nr_kHz[0] != 0.0)
            ctx.fail(r["gamma_nr_kHz"], "'run.gamma_nr_kHz' requires engine: dissipative");
    }
    if (cmd == Command::dos) {
        if (!(run.f_max_GHz > run.f_min_GHz))
            throw ConfigError(source + ": run.f_max_GHz must exceed run.f_min_GHz");
        if (run.n_bins < 10) throw ConfigError(source + ": run.n_bins must be >= 10");
        if (!(run.threshold_fraction > 0.0)) throw ConfigError(source + ": run.threshold_fraction must be > 0");
    }
    if ((cmd == Command::xi || cmd == Command::sweep || cmd == Command::scaling ||
         cmd == Command::dissipative) && run.realizations < 2)
        throw ConfigError(source + ": run.realizations must be >= 2 for error bars");
    return cfg;
}

std::string extract_embedded_config(const std::string& text, Command cmd) {
    std::string cmd_seen;
    std::string yaml;
    if (!text.empty() && text.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("cannot parse JSON output file: ") + e.what());
        }
        if (!j.contains("config_yaml") || !j.contains("command"))
            throw ConfigError("JSON file carries no embedded darkloc config");
        cmd_seen = j["command"].get<std::string>();
        yaml = j["config_yaml"].get<std::string>();
    } else {
        std::istringstream in(text);
        std::string line;
        bool in_cfg = false;
        while (std::getline(in, line)) {
            if (line.rfind('#', 0) != 0) break;
            if (line.rfind("# command: ", 0) == 0) cmd_seen = line.substr(11);
            if (line == "# config:") {
                in_cfg = true;
                continue;
            }
            if (in_cfg) {
                if (line.rfind("#   ", 0) != 0) {
                    in_cfg = false;
                    continue;
                }
                yaml += line.substr(4) + "\n";
            }
        }
        if (yaml.empty()) throw ConfigError("output file carries no embedded darkloc config");
    }
    if (cmd_seen != command_name(cmd))
        throw ConfigError("embedded config belongs to '" + cmd_seen + "', not '" + command_name(cmd) + "'");
    return yaml;
}

RunConfig load_config(const std::string& path, Command cmd) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.rfind("# darkloc", 0) == 0 || (!text.empty() && text.front() == '{'))
        return parse_config(extract_embedded_config(text, cmd), cmd, path + " (embedded)");
    return parse_config(text, cmd, path);
}

namespace {

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, p);
    // keep YAML reading it back as a float, not an int
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void emit_list(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << num(x);
    e << YAML::EndSeq;
}

} // namespace

std::string to_yaml(const RunConfig& cfg) {
    const Command cmd = cfg.command;
    const auto& r = cfg.run;
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "J_GHz" << YAML::Value << num(cfg.model.J_GHz);
    e << YAML::Key << "g_GHz" << YAML::Value << num(cfg.model.g_GHz);
    e << YAML::Key << "mu_GHz" << YAML::Value << num(cfg.model.mu_GHz);
    e << YAML::Key << "d_um" << YAML::Value << num(cfg.model.d_um);
    e << YAML::Key << "n_int" << YAML::Value << cfg.model.n_int;
    e << YAML::EndMap;

    e << YAML::Key << "disorder" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "W" << YAML::Value;
    if (scalar_W(cmd)) e << num(cfg.disorder.W.at(0));
    else emit_list(e, cfg.disorder.W);
    e << YAML::Key << "truncation" << YAML::Value;
    if (cfg.disorder.truncation) e << num(*cfg.disorder.truncation);
    else e << "none";
    e << YAML::EndMap;

    e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "seed" << YAML::Value << r.seed;
    e << YAML::Key << "format" << YAML::Value << r.format;
    e << YAML::Key << "n_qubits" << YAML::Value << r.n_qubits;
    if (cmd != Command::transmission) e << YAML::Key << "realizations" << YAML::Value << r.realizations;
    if (cmd != Command::dos) {
        e << YAML::Key << "f_GHz" << YAML::Value;
        if (r.f_GHz.start) {
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "start" << YAML::Value << num(*r.f_GHz.start)
              << YAML::Key << "stop" << YAML::Value << num(*r.f_GHz.stop) << YAML::Key << "step"
              << YAML::Value << num(*r.f_GHz.step) << YAML::EndMap;
        } else if (cmd == Command::scaling) {
            e << num(r.f_GHz.values.at(0));
        } else {
            emit_list(e, r.f_GHz.values);
        }
    }
    switch (cmd) {
    case Command::dos:
        e << YAML::Key << "f_min_GHz" << YAML::Value << num(r.f_min_GHz);
        e << YAML::Key << "f_max_GHz" << YAML::Value << num(r.f_max_GHz);
        e << YAML::Key << "n_bins" << YAML::Value << r.n_bins;
        e << YAML::Key << "threshold_fraction" << YAML::Value << num(r.threshold_fraction);
        break;
    case Command::transmission:
        e << YAML::Key << "realization_indices" << YAML::Value << YAML::Flow << r.realization_indices;
        break;
    case Command::sweep:
        e << YAML::Key << "engine" << YAML::Value << ensemble::engine_name(r.engine);
        e << YAML::Key << "gamma_nr_kHz" << YAML::Value << num(r.gamma_nr_kHz.at(0));
        e << YAML::Key << "bootstrap" << YAML::Value << r.bootstrap;
        break;
    case Command::dissipative:
        e << YAML::Key << "gamma_nr_kHz" << YAML::Value;
        emit_list(e, r.gamma_nr_kHz);
        e << YAML::Key << "bootstrap" << YAML::Value << r.bootstrap;
        break;
    case Command::xi:
    case Command::scaling:
        e << YAML::Key << "bootstrap" << YAML::Value << r.bootstrap;
        e << YAML::Key << "warmup_sites" << YAML::Value << r.warmup_sites;
        break;
    }
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

model::ModelParams model_params(const ModelBlock& m, std::ostream* warn) {
    model::RawParams raw;
    raw.J = units::ghz_to_rad(m.J_GHz);
    raw.g = units::ghz_to_rad(m.g_GHz);
    raw.mu = units::ghz_to_rad(m.mu_GHz);
    raw.d = units::um_to_m(m.d_um);
    raw.n_int = m.n_int;
    return model::derive_params(raw, warn);
}

model::ModelParams model_params(const RunConfig& cfg, std::ostream* warn) {
    return model_params(cfg.model, warn);
}

} // namespace darkloc::config
