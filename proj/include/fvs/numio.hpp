#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fvs/error.hpp"

namespace fvs {

// "%.17g" rendering; 17 significant digits round-trip an IEEE double exactly.
std::string format_g17(double v);

// Strict double parse; the whole token must be consumed.
double parse_double(const std::string& s, Errc on_error,
                    const std::string& context);

// Parameter arrays are serialized as arrays of decimal strings so files are
// value-exact and diff-stable.
nlohmann::json doubles_to_json(std::span<const double> v);
std::vector<double> doubles_from_json(const nlohmann::json& j,
                                      const std::string& context);

// Splits one CSV line on commas (no quoting; none of our formats needs it).
std::vector<std::string> split_csv_line(const std::string& line);

// Atomic-ish text file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace fvs
