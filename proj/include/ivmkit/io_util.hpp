#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ivmkit {

/// Shortest decimal representation that parses back to exactly `v`.
std::string format_double(double v);

double parse_double(const std::string& text, bool* ok = nullptr);

/// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Splits one CSV record on commas; no quoting (fields here never contain
/// commas), surrounding whitespace trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace ivmkit
