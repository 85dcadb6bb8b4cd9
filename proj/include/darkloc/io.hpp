// io.hpp — CSV / JSON result files with the resolved config embedded
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace darkloc::io {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct OutputHeader {
    std::string command;
    std::uint64_t master_seed = 0;
    std::string config_yaml;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

std::string version_string();

// %.17g; non-finite values as inf / -inf / nan
std::string format_number(double v);

void write_csv(std::ostream& os, const OutputHeader& head, const Table& table);
void write_json(std::ostream& os, const OutputHeader& head, const Table& table);

// Writes to `path`, or to `fallback` when the path is empty. format: csv | json.
void write_output(const std::string& path, const std::string& format, const OutputHeader& head,
                  const Table& table, std::ostream& fallback);

} // namespace darkloc::io
