#pragma once

#include <string>
#include <vector>

#include "banlin/linalg.hpp"

namespace banlin {

// Reads a CSV of decimal floats, one row per line, no header. Rows must all
// have the same width. Used for action sets (one action per row) and for
// precommitted loss sequences (row t is z_t).
std::vector<Vec> load_csv_rows(const std::string& path);

std::vector<Vec> parse_csv_rows(const std::string& text);

// Shortest-exact float formatting used everywhere a double is serialized:
// %.17g round-trips bit-exactly.
std::string format_double(double v);

}  // namespace banlin
