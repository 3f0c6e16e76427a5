#ifndef BAYRN_CSV_HPP
#define BAYRN_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bayrn::csv {

// Shortest decimal that round-trips the exact double (to_chars); non-finite
// values render as "nan"/"inf"/"-inf".
std::string format(double v);
std::string format(std::int64_t v);

// Comma-joined row; cells must not contain commas, quotes, or newlines.
std::string join(const std::vector<std::string>& cells);
std::vector<std::string> split(const std::string& line);

double parse_double(const std::string& cell);
std::int64_t parse_int(const std::string& cell);

// All rows of a CSV file, header included. Throws on a missing file.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);

}  // namespace bayrn::csv

#endif  // BAYRN_CSV_HPP
