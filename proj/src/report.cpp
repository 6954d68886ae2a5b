#include "rauzylab/report.hpp"

#include <cstdio>
#include <fstream>

#include "rauzylab/errors.hpp"

namespace rauzylab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary); // binary: identical bytes everywhere
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << kCsvSchema << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw ConfigError("csv row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

nlohmann::json manifest_skeleton(const std::string& command, std::uint64_t seed) {
    nlohmann::json m;
    m["tool"] = "rauzylab";
    m["version"] = kToolVersion;
    m["schema"] = 1;
    m["command"] = command;
    m["seed"] = seed;
    return m;
}

void write_manifest(const std::string& path, const nlohmann::json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << manifest.dump(2) << "\n";
}

} // namespace rauzylab
