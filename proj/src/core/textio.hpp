#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rp {

// Shortest round-trip decimal form, locale independent.
std::string fmt_double(double v);

// Fixed-point form with `precision` digits after the point.
std::string fmt_fixed(double v, int precision);

// Strict double parse of the whole token; throws Errc::parse.
double parse_double(std::string_view token);
long parse_long(std::string_view token);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace rp
