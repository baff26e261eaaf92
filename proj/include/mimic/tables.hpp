#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mimic {

/// Shortest representation that round-trips a double exactly (17 significant
/// digits at most).
std::string format_double(double x);

/// Tab-separated numeric table with a header row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// Ordered flat key-value document, one `key = value` per line.
using FlatMap = std::vector<std::pair<std::string, std::string>>;

void write_flat_map(const std::filesystem::path& path, const FlatMap& map);
FlatMap read_flat_map(const std::filesystem::path& path);

const std::string* flat_find(const FlatMap& map, const std::string& key);
const std::string& flat_get(const FlatMap& map, const std::string& key);

/// FNV-1a 64-bit digest of the file contents, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

}  // namespace mimic
