// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agc {

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);
std::string_view trim(std::string_view s);
std::vector<std::string> split_csv_line(std::string_view line);
/// Strict double parse of a whole field; Parse error naming `what` otherwise.
double parse_double(std::string_view field, const std::string& what);
long parse_long(std::string_view field, const std::string& what);

}  // namespace agc
