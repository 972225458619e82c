#pragma once

#include <string>

#include "kvf/geometry.hpp"

namespace kvf {

// Manifold definition document: a single JSON object with fields
//   dimension: n
//   coords:    [names]                      (identifiers, unique)
//   metric:    {"i,j": "expr", ...}         (1-based indices; diagonal
//              required, missing off-diagonal entries default to "0";
//              giving both "i,j" and "j,i" different expressions is an error)
//   V:         ["expr", ...]                (n components)
//   frame:     [["expr", ...], ...]         (optional; n columns of n
//              components, ordered E_1, E_1*, ..., kernel ..., V)
//   domain:    {coord: [lo, hi]}            (every coordinate)
//   grid:      {coord: count}               (optional; default 5 per axis)
//   name:      string                       (optional; defaults to name_hint)
// Expressions use the expression-language grammar. Structural problems throw
// ValidationError naming the offending entry; malformed JSON throws
// ParseError with a byte offset.
ManifoldDefinition parse_definition(const std::string& json_text,
                                    const std::string& name_hint);

// parse_definition on the file contents; the hint is the file stem.
// Throws ValidationError when the file cannot be read.
ManifoldDefinition load_definition(const std::string& path);

}  // namespace kvf
