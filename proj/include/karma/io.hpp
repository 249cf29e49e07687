#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace karma::io {

std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

// Splits one line of comma-separated text. Fields are not quoted by any
// writer in this project except titles, which never go through CSV.
std::vector<std::string> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

// Shortest text that parses back to the same double.
std::string format_double(double value);
// Fixed number of decimals.
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace karma::io
