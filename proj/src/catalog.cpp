#include "kvf/catalog.hpp"

#include "kvf/errors.hpp"
#include "kvf/format.hpp"

namespace kvf {

namespace {

// Assembles a definition from expression strings; "set" mirrors entries so
// the stored metric is symmetric by construction.
struct Builder {
  ManifoldDefinition def;

  Builder(std::string name, std::vector<std::string> coords) {
    def.name = std::move(name);
    def.coords = std::move(coords);
    def.dimension = static_cast<int>(def.coords.size());
    const int n = def.dimension;
    def.metric.reserve(n * n);
    for (int i = 0; i < n * n; ++i) def.metric.push_back(Expression::parse("0", def.coords));
    def.domain.lo.resize(n);
    def.domain.hi.resize(n);
    def.grid.assign(n, 5);
  }

  void set(int i, int j, const std::string& src) {
    const int n = def.dimension;
    def.metric[i * n + j] = Expression::parse(src, def.coords);
    if (i != j) def.metric[j * n + i] = Expression::parse(src, def.coords);
  }

  void field(const std::vector<std::string>& comps) {
    for (const std::string& s : comps) def.field_V.push_back(Expression::parse(s, def.coords));
  }

  // columns ordered E_1, E_1*, ..., kernel ..., V; stored column-major
  void frame(const std::vector<std::vector<std::string>>& cols) {
    std::vector<Expression> fr;
    for (const auto& col : cols)
      for (const std::string& s : col) fr.push_back(Expression::parse(s, def.coords));
    def.frame = std::move(fr);
  }

  void box(int axis, double lo, double hi) {
    def.domain.lo(axis) = lo;
    def.domain.hi(axis) = hi;
  }
};

ManifoldDefinition make_euclidean_parallel() {
  Builder b("euclidean_parallel", {"x", "y", "z"});
  b.set(0, 0, "1");
  b.set(1, 1, "1");
  b.set(2, 2, "1");
  b.field({"0", "0", "1"});
  b.frame({{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
  for (int a = 0; a < 3; ++a) b.box(a, -1.0, 1.0);
  validate_definition(b.def);
  return b.def;
}

// Round unit S^3 in the stereographic chart; the conformal factor
// 4/(1+|x|^2)^2 makes the chart metric that of the unit sphere. V is the
// Hopf field, E_1/E_1* the other two left-invariant fields.
ManifoldDefinition make_hopf_s3() {
  Builder b("hopf_s3", {"x", "y", "z"});
  const std::string conf = "4/((1 + x^2 + y^2 + z^2)^2)";
  b.set(0, 0, conf);
  b.set(1, 1, conf);
  b.set(2, 2, conf);
  b.field({"x*z - y", "y*z + x", "(1 - x^2 - y^2 + z^2)/2"});
  b.frame({{"-z - x*y", "(x^2 - y^2 + z^2 - 1)/2", "x - y*z"},
           {"(-(x^2) + y^2 + z^2 - 1)/2", "z - x*y", "-y - x*z"},
           {"x*z - y", "y*z + x", "(1 - x^2 - y^2 + z^2)/2"}});
  for (int a = 0; a < 3; ++a) b.box(a, -0.4, 0.4);
  validate_definition(b.def);
  return b.def;
}

// Heisenberg group, left-invariant metric dx^2 + dy^2 + (dz - x dy)^2,
// V the central field d_z.
ManifoldDefinition make_heisenberg() {
  Builder b("heisenberg", {"x", "y", "z"});
  b.set(0, 0, "1");
  b.set(1, 1, "1 + x^2");
  b.set(1, 2, "-x");
  b.set(2, 2, "1");
  b.field({"0", "0", "1"});
  b.frame({{"1", "0", "0"}, {"0", "1", "x"}, {"0", "0", "1"}});
  for (int a = 0; a < 3; ++a) b.box(a, -1.0, 1.0);
  validate_definition(b.def);
  return b.def;
}

// g = dx^2 + dy^2 + (dz + A(x,y) dx)^2 with twist potential A = a*x*y;
// V = d_z is unit Killing (no coefficient depends on z). Rotation speed is
// |d_y A|/2 = a*x/2, non-constant on the box.
ManifoldDefinition make_twisted_r3(double a) {
  Builder b("twisted_r3", {"x", "y", "z"});
  const std::string A = "(" + format_g17(a) + "*x*y)";
  b.set(0, 0, "1 + " + A + "^2");
  b.set(0, 2, A);
  b.set(1, 1, "1");
  b.set(2, 2, "1");
  b.field({"0", "0", "1"});
  b.frame({{"1", "0", "-" + A}, {"0", "1", "0"}, {"0", "0", "1"}});
  b.box(0, 0.2, 0.9);
  b.box(1, 0.2, 0.9);
  b.box(2, -0.5, 0.5);
  validate_definition(b.def);
  return b.def;
}

// hopf_s3 x flat R^2; the two flat directions populate the kernel block.
ManifoldDefinition make_product_s3_r2() {
  Builder b("product_s3_r2", {"x", "y", "z", "p", "q"});
  const std::string conf = "4/((1 + x^2 + y^2 + z^2)^2)";
  b.set(0, 0, conf);
  b.set(1, 1, conf);
  b.set(2, 2, conf);
  b.set(3, 3, "1");
  b.set(4, 4, "1");
  b.field({"x*z - y", "y*z + x", "(1 - x^2 - y^2 + z^2)/2", "0", "0"});
  b.frame({{"-z - x*y", "(x^2 - y^2 + z^2 - 1)/2", "x - y*z", "0", "0"},
           {"(-(x^2) + y^2 + z^2 - 1)/2", "z - x*y", "-y - x*z", "0", "0"},
           {"0", "0", "0", "1", "0"},
           {"0", "0", "0", "0", "1"},
           {"x*z - y", "y*z + x", "(1 - x^2 - y^2 + z^2)/2", "0", "0"}});
  for (int a = 0; a < 3; ++a) b.box(a, -0.4, 0.4);
  b.box(3, -1.0, 1.0);
  b.box(4, -1.0, 1.0);
  validate_definition(b.def);
  return b.def;
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    v.push_back({"euclidean_parallel",
                 "flat R^3 with the parallel field d_z (everything vanishes)",
                 {},
                 {std::nullopt, 1.0, true}});
    v.push_back({"hopf_s3",
                 "round unit S^3, Hopf field, left-invariant frame (lambda = 1, f = 2)",
                 {},
                 {1.0, 2.0, true}});
    v.push_back({"heisenberg",
                 "Heisenberg group with its central field (lambda = 1/2, f = 5/4)",
                 {},
                 {0.5, 1.25, true}});
    v.push_back({"twisted_r3",
                 "flat-coordinates box with twist potential A = a*x*y; non-constant "
                 "lambda = a*x/2, the benchmark where the uncorrected identity fails",
                 {{"a", 1.0}},
                 {std::nullopt, std::nullopt, false}});
    v.push_back({"product_s3_r2",
                 "hopf_s3 x flat R^2, exercising a nonempty kernel block",
                 {},
                 {1.0, 2.0, true}});
    return v;
  }();
  return entries;
}

bool is_catalog_name(const std::string& name) {
  for (const CatalogEntry& e : catalog_entries())
    if (e.name == name) return true;
  return false;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const CatalogEntry& e : catalog_entries())
    if (e.name == name) return e;
  throw UnknownNameError("unknown catalog entry '" + name + "'");
}

ManifoldDefinition builtin(const std::string& name,
                           const std::map<std::string, double>& overrides) {
  const CatalogEntry& entry = catalog_entry(name);
  std::map<std::string, double> params = entry.parameters;
  for (const auto& [key, value] : overrides) {
    auto it = params.find(key);
    if (it == params.end())
      throw UnknownNameError("catalog entry '" + name + "' has no parameter '" + key + "'");
    it->second = value;
  }

  if (name == "euclidean_parallel") return make_euclidean_parallel();
  if (name == "hopf_s3") return make_hopf_s3();
  if (name == "heisenberg") return make_heisenberg();
  if (name == "twisted_r3") {
    const double a = params.at("a");
    if (!(a >= 0.0 && a <= 100.0))
      throw ParameterRangeError("twisted_r3 parameter a = " + format_g17(a) +
                                " outside validated range [0, 100]");
    return make_twisted_r3(a);
  }
  if (name == "product_s3_r2") return make_product_s3_r2();
  throw InternalError("catalog entry '" + name + "' registered but not constructible");
}

}  // namespace kvf
