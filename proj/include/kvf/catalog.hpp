#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kvf/geometry.hpp"

namespace kvf {

// Known facts about a built-in manifold, asserted by regression tests.
struct ExpectedFacts {
  std::optional<double> lambda_const;  // single rotation speed, constant over the box
  std::optional<double> f_const;       // volume density, constant over the box
  bool minimal = false;                // verdict of the sampled minimality criterion
};

struct CatalogEntry {
  std::string name;
  std::string summary;
  std::map<std::string, double> parameters;  // name -> default value
  ExpectedFacts expected;
};

const std::vector<CatalogEntry>& catalog_entries();
bool is_catalog_name(const std::string& name);
const CatalogEntry& catalog_entry(const std::string& name);  // UnknownNameError

// Builds the named benchmark manifold. Overrides must name declared
// parameters (UnknownNameError) and stay inside their validated ranges
// (ParameterRangeError).
ManifoldDefinition builtin(const std::string& name,
                           const std::map<std::string, double>& overrides = {});

}  // namespace kvf
