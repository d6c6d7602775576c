#pragma once
#include <string>
#include <vector>

namespace fhjb {

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);
double parse_double(const std::string& s);

// Minimal CSV: rows of doubles, '.' decimal separator, optional header line.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_csv(const std::string& path,
                                          bool has_header);

}  // namespace fhjb
