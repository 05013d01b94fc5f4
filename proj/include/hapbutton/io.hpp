#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hapbutton::io {

/// Shortest decimal form that round-trips, '.' separator regardless of locale.
std::string format_double(double value);

/// Parses a full field as a double; throws InvalidInput naming the location.
double parse_double(std::string_view field, std::string_view where);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    /// Lines starting with '#' that preceded the header, without the marker.
    std::vector<std::string> comments;
    std::size_t column(std::string_view name) const;
};

/// Reads a numeric CSV with a single header row. Row numbers in errors are
/// 1-based file line numbers.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view source);

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate, write, check.
void write_text(const std::filesystem::path& path, std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// FNV-1a over the bytes; used for provenance stamps, not security.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace hapbutton::io
