// io.cpp — result serialization
#include "darkloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace darkloc::io {

std::string version_string() { return std::string("darkloc ") + DARKLOC_VERSION; }

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) return *d;
        return format_number(*d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

} // namespace

void write_csv(std::ostream& os, const OutputHeader& head, const Table& table) {
    os << "# " << version_string() << "\n";
    os << "# command: " << head.command << "\n";
    os << "# master_seed: " << head.master_seed << "\n";
    for (const auto& [k, v] : head.metadata.items()) os << "# " << k << ": " << v.dump() << "\n";
    os << "# config:\n";
    std::istringstream cfg(head.config_yaml);
    std::string line;
    while (std::getline(cfg, line)) os << "#   " << line << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << (i ? "," : "") << table.columns[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const OutputHeader& head, const Table& table) {
    nlohmann::ordered_json j;
    j["darkloc_version"] = version_string();
    j["command"] = head.command;
    j["master_seed"] = head.master_seed;
    j["config_yaml"] = head.config_yaml;
    j["metadata"] = head.metadata;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    os << j.dump(2) << "\n";
}

void write_output(const std::string& path, const std::string& format, const OutputHeader& head,
                  const Table& table, std::ostream& fallback) {
    if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
    auto emit = [&](std::ostream& os) {
        if (format == "csv") write_csv(os, head, table);
        else write_json(os, head, table);
    };
    if (path.empty()) {
        emit(fallback);
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    emit(out);
    if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

} // namespace darkloc::io
