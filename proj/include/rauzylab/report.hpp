#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rauzylab {

inline constexpr const char* kCsvSchema = "# rauzylab-schema v1";
inline constexpr const char* kToolVersion = "1.0.0";

// one numeric table: a header row and double-valued columns
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> values) { rows.emplace_back(values); }
};

// shortest representation that round-trips a double exactly
std::string format_double(double v);

// schema comment line, column header, then rows; deterministic byte-for-byte
void write_csv(const std::string& path, const CsvTable& table);

// manifest skeleton: tool identity plus the resolved configuration, so a run
// can be reproduced from its artifacts alone
nlohmann::json manifest_skeleton(const std::string& command, std::uint64_t seed);

void write_manifest(const std::string& path, const nlohmann::json& manifest);

} // namespace rauzylab
