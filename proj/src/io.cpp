#include "kvf/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kvf/errors.hpp"

namespace kvf {

namespace {

using nlohmann::json;

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

bool is_function_name(const std::string& s) {
  static const std::set<std::string> fns = {"sin", "cos",  "tan",  "exp",
                                            "log", "sqrt", "sinh", "cosh"};
  return fns.count(s) > 0;
}

Expression parse_entry(const std::string& src, const std::vector<std::string>& coords,
                       const std::string& where) {
  try {
    return Expression::parse(src, coords);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

// "i,j" with 1-based indices in [1, n]
std::pair<int, int> metric_key(const std::string& key, int n) {
  const auto comma = key.find(',');
  const auto bad = [&] {
    return ValidationError("metric key \"" + key + "\" is not of the form \"i,j\" with 1 <= i,j <= " +
                           std::to_string(n));
  };
  if (comma == std::string::npos) throw bad();
  int i = 0, j = 0;
  try {
    std::size_t used = 0;
    i = std::stoi(key.substr(0, comma), &used);
    if (used != comma) throw bad();
    const std::string tail = key.substr(comma + 1);
    j = std::stoi(tail, &used);
    if (used != tail.size()) throw bad();
  } catch (const std::exception&) {
    throw bad();
  }
  if (i < 1 || i > n || j < 1 || j > n) throw bad();
  return {i - 1, j - 1};
}

}  // namespace

ManifoldDefinition parse_definition(const std::string& json_text, const std::string& name_hint) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed definition JSON (") + e.what() + ")",
                     e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object()) throw ValidationError("definition document must be a JSON object");

  static const std::set<std::string> allowed = {"dimension", "coords", "metric", "V",
                                                "frame",     "domain", "grid",   "name"};
  for (const auto& [key, value] : doc.items())
    if (!allowed.count(key)) throw ValidationError("unknown definition field \"" + key + "\"");
  for (const char* required : {"dimension", "coords", "metric", "V", "domain"})
    if (!doc.contains(required))
      throw ValidationError(std::string("definition field \"") + required + "\" is missing");

  ManifoldDefinition def;
  def.name = doc.value("name", name_hint);

  if (!doc["dimension"].is_number_integer() && !doc["dimension"].is_number_unsigned())
    throw ValidationError("\"dimension\" must be an integer");
  def.dimension = doc["dimension"].get<int>();
  if (def.dimension < 1) throw ValidationError("\"dimension\" must be at least 1");
  const int n = def.dimension;

  if (!doc["coords"].is_array() || doc["coords"].size() != static_cast<std::size_t>(n))
    throw ValidationError("\"coords\" must be an array of " + std::to_string(n) + " names");
  std::set<std::string> seen;
  for (const json& c : doc["coords"]) {
    if (!c.is_string()) throw ValidationError("\"coords\" entries must be strings");
    const std::string name = c.get<std::string>();
    if (!valid_identifier(name))
      throw ValidationError("coordinate name \"" + name + "\" is not a valid identifier");
    if (is_function_name(name))
      throw ValidationError("coordinate name \"" + name + "\" shadows a built-in function");
    if (!seen.insert(name).second)
      throw ValidationError("coordinate name \"" + name + "\" appears twice");
    def.coords.push_back(name);
  }

  // metric: diagonal required, off-diagonal defaults to 0, mirrored entries
  // must agree structurally (the symmetric-input contract).
  if (!doc["metric"].is_object()) throw ValidationError("\"metric\" must be an object");
  std::vector<std::optional<Expression>> entries(n * n);
  std::vector<std::string> entry_key(n * n);
  for (const auto& [key, value] : doc["metric"].items()) {
    const auto [i, j] = metric_key(key, n);
    if (!value.is_string())
      throw ValidationError("metric entry \"" + key + "\" must be an expression string");
    Expression e = parse_entry(value.get<std::string>(), def.coords, "metric entry \"" + key + "\"");
    if (entries[j * n + i].has_value() && i != j) {
      if (!entries[j * n + i]->same_structure(e))
        throw ValidationError("metric entries \"" + entry_key[j * n + i] + "\" and \"" + key +
                              "\" disagree; the metric must be symmetric");
    }
    entries[i * n + j] = e;
    entry_key[i * n + j] = key;
    if (i != j && !entries[j * n + i].has_value()) {
      entries[j * n + i] = e;
      entry_key[j * n + i] = key;
    }
  }
  for (int i = 0; i < n; ++i)
    if (!entries[i * n + i].has_value())
      throw ValidationError("metric entry \"" + std::to_string(i + 1) + "," +
                            std::to_string(i + 1) + "\" is missing");
  const Expression zero = Expression::parse("0", def.coords);
  for (int i = 0; i < n * n; ++i) def.metric.push_back(entries[i].value_or(zero));

  if (!doc["V"].is_array() || doc["V"].size() != static_cast<std::size_t>(n))
    throw ValidationError("\"V\" must be an array of " + std::to_string(n) + " expression strings");
  for (std::size_t k = 0; k < doc["V"].size(); ++k) {
    const json& comp = doc["V"][k];
    if (!comp.is_string()) throw ValidationError("\"V\" entries must be expression strings");
    def.field_V.push_back(parse_entry(comp.get<std::string>(), def.coords,
                                      "V component " + std::to_string(k + 1)));
  }

  if (doc.contains("frame")) {
    if (!doc["frame"].is_array() || doc["frame"].size() != static_cast<std::size_t>(n))
      throw ValidationError("\"frame\" must be an array of " + std::to_string(n) + " columns");
    std::vector<Expression> fr;
    for (std::size_t a = 0; a < doc["frame"].size(); ++a) {
      const json& col = doc["frame"][a];
      if (!col.is_array() || col.size() != static_cast<std::size_t>(n))
        throw ValidationError("frame column " + std::to_string(a + 1) + " must have " +
                              std::to_string(n) + " components");
      for (std::size_t c = 0; c < col.size(); ++c) {
        if (!col[c].is_string())
          throw ValidationError("frame entries must be expression strings");
        fr.push_back(parse_entry(col[c].get<std::string>(), def.coords,
                                 "frame column " + std::to_string(a + 1) + " component " +
                                     std::to_string(c + 1)));
      }
    }
    def.frame = std::move(fr);
  }

  if (!doc["domain"].is_object()) throw ValidationError("\"domain\" must be an object");
  def.domain.lo.resize(n);
  def.domain.hi.resize(n);
  std::vector<bool> have_domain(n, false);
  for (const auto& [key, value] : doc["domain"].items()) {
    const auto it = std::find(def.coords.begin(), def.coords.end(), key);
    if (it == def.coords.end())
      throw ValidationError("domain key \"" + key + "\" is not a coordinate");
    const int a = static_cast<int>(it - def.coords.begin());
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
      throw ValidationError("domain entry \"" + key + "\" must be [lo, hi]");
    def.domain.lo(a) = value[0].get<double>();
    def.domain.hi(a) = value[1].get<double>();
    have_domain[a] = true;
  }
  for (int a = 0; a < n; ++a)
    if (!have_domain[a])
      throw ValidationError("domain entry \"" + def.coords[a] + "\" is missing");

  def.grid.assign(n, 5);
  if (doc.contains("grid")) {
    if (!doc["grid"].is_object()) throw ValidationError("\"grid\" must be an object");
    for (const auto& [key, value] : doc["grid"].items()) {
      const auto it = std::find(def.coords.begin(), def.coords.end(), key);
      if (it == def.coords.end())
        throw ValidationError("grid key \"" + key + "\" is not a coordinate");
      if (!value.is_number_integer() && !value.is_number_unsigned())
        throw ValidationError("grid entry \"" + key + "\" must be an integer");
      def.grid[it - def.coords.begin()] = value.get<int>();
    }
  }

  validate_definition(def);
  return def;
}

ManifoldDefinition load_definition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read definition file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_definition(text.str(), std::filesystem::path(path).stem().string());
}

}  // namespace kvf
