#pragma once

#include <string>

#include "json.hpp"

namespace kvf {

// Compact JSON text with floating-point numbers printed at 17 significant
// digits, so parsing the output and dumping it again reproduces the bytes
// exactly. Non-finite numbers dump as null (JSON has no representation for
// them); key order is preserved.
std::string dump_json(const nlohmann::ordered_json& j);

// Field quoting for CSV cells: quotes a cell containing commas, quotes, or
// newlines, doubling embedded quotes. Plain cells pass through untouched.
std::string csv_escape(const std::string& cell);

}  // namespace kvf
