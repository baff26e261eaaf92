#include "mimic/tables.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mimic {

std::string format_double(double x) {
    // 17 significant digits round-trip any double; prefer the shortest
    // representation that still parses back to the same bits.
    char buffer[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, x);
        double parsed = 0.0;
        std::sscanf(buffer, "%lf", &parsed);
        if (parsed == x) {
            break;
        }
    }
    return buffer;
}

void write_table(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c == 0 ? "" : "\t") << table.columns[c];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            throw std::runtime_error("table row width mismatch while writing " + path.string());
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c == 0 ? "" : "\t") << format_double(row[c]);
        }
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    Table table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty table " + path.string());
    }
    {
        std::stringstream header(line);
        std::string column;
        while (std::getline(header, column, '\t')) {
            table.columns.push_back(column);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        row.reserve(table.columns.size());
        const char* cursor = line.data();
        const char* end = line.data() + line.size();
        while (cursor < end) {
            double value = 0.0;
            const auto [next, ec] = std::from_chars(cursor, end, value);
            if (ec != std::errc()) {
                throw std::runtime_error("malformed number in " + path.string());
            }
            row.push_back(value);
            cursor = next;
            if (cursor < end && *cursor == '\t') {
                ++cursor;
            }
        }
        if (row.size() != table.columns.size()) {
            throw std::runtime_error("row width mismatch in " + path.string());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_flat_map(const std::filesystem::path& path, const FlatMap& map) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const auto& [key, value] : map) {
        out << key << " = " << value << "\n";
    }
}

FlatMap read_flat_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    FlatMap map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) {
            throw std::runtime_error("malformed line in " + path.string() + ": " + line);
        }
        map.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return map;
}

const std::string* flat_find(const FlatMap& map, const std::string& key) {
    for (const auto& [k, v] : map) {
        if (k == key) {
            return &v;
        }
    }
    return nullptr;
}

const std::string& flat_get(const FlatMap& map, const std::string& key) {
    const std::string* value = flat_find(map, key);
    if (value == nullptr) {
        throw std::runtime_error("missing key '" + key + "'");
    }
    return *value;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string() + " for digest");
    }
    std::uint64_t hash = 1469598103934665603ull;
    char buffer[65536];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(buffer))) {
            break;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

}  // namespace mimic
