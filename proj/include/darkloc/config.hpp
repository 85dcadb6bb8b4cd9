// config.hpp — run configuration: model / disorder / run blocks, YAML in and out
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <numbers>

#include "darkloc/ensemble.hpp"
#include "darkloc/model.hpp"

namespace darkloc::config {

enum class Command { dos, xi, transmission, sweep, scaling, dissipative };

const char* command_name(Command c);
Command parse_command(const std::string& s);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Frequency grid, either listed or as an inclusive {start, stop, step} range.
struct Grid {
    std::vector<double> values;
    std::optional<double> start, stop, step; // set when given as a range
    std::vector<double> expand() const;
};

struct ModelBlock {
    double J_GHz = 4.5e11 / (2e9 * std::numbers::pi); // J/2pi
    double g_GHz = 4.25e9 / (2e9 * std::numbers::pi); // g/2pi
    double mu_GHz = 7.835;
    double d_um = 400.0;
    int n_int = 1;
};

struct DisorderBlock {
    std::vector<double> W;
    std::optional<double> truncation = 2.5;
};

struct RunBlock {
    std::size_t n_qubits = 0;
    std::size_t realizations = 0;
    std::uint64_t seed = 0;
    std::string format = "csv";
    std::string output; // not embedded in outputs
    Grid f_GHz;
    // dos
    double f_min_GHz = 7.8, f_max_GHz = 7.92;
    std::size_t n_bins = 120;
    double threshold_fraction = 0.05;
    // sweep / xi / scaling / dissipative
    ensemble::Engine engine = ensemble::Engine::lattice;
    std::vector<double> gamma_nr_kHz;
    std::size_t bootstrap = 1000;
    std::size_t warmup_sites = 1000;
    // transmission
    std::vector<std::size_t> realization_indices;
};

struct RunConfig {
    Command command = Command::sweep;
    ModelBlock model;
    DisorderBlock disorder;
    RunBlock run;
};

// `source` names the input in error messages.
RunConfig parse_config(const std::string& yaml_text, Command cmd, const std::string& source = "config");
// Reads YAML, or a previous output file (CSV or JSON) carrying an embedded config.
RunConfig load_config(const std::string& path, Command cmd);
std::string extract_embedded_config(const std::string& file_text, Command cmd);

// Canonical YAML of every resolved key except run.output.
std::string to_yaml(const RunConfig& cfg);

model::ModelParams model_params(const ModelBlock& m, std::ostream* warn = nullptr);
model::ModelParams model_params(const RunConfig& cfg, std::ostream* warn = nullptr);

} // namespace darkloc::config
