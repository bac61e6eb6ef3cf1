#ifndef PFOLIO_TEXT_HPP
#define PFOLIO_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pfolio {

std::vector<std::string> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

// Strict double parse of a whole token; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

// Shortest decimal string that round-trips to exactly the same double.
std::string format_double(double value);

// Fixed-point with the given number of fractional digits.
std::string format_fixed(double value, int digits);

std::string join(const std::vector<std::string>& parts, char delim);

}  // namespace pfolio

#endif
