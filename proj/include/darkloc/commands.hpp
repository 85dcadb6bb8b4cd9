// commands.hpp — subcommand drivers shared by the CLI binary and the tests
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "darkloc/config.hpp"

namespace darkloc::cli {

struct Overrides {
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
};

config::RunConfig resolve_config(const std::string& config_path, config::Command cmd,
                                 const Overrides& ov);

// Runs one resolved config, writes its output file (or `out` when run.output is empty) and a
// short summary on `log`. Returns 0 when every grid cell succeeded, 1 otherwise.
int run_command(const config::RunConfig& cfg, std::size_t workers, std::ostream& out, std::ostream& log);

} // namespace darkloc::cli
