#include "kvf/report.hpp"

#include <cmath>

#include "kvf/format.hpp"

namespace kvf {

namespace {

void dump_into(const nlohmann::ordered_json& j, std::string& out) {
  using value_t = nlohmann::ordered_json::value_t;
  switch (j.type()) {
    case value_t::null:
      out += "null";
      break;
    case value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v))
        out += format_g17(v);
      else
        out += "null";
      break;
    }
    case value_t::string:
      out += nlohmann::ordered_json(j.get<std::string>()).dump();
      break;
    case value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ',';
        first = false;
        dump_into(item, out);
      }
      out += ']';
      break;
    }
    case value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::ordered_json(key).dump();
        out += ':';
        dump_into(value, out);
      }
      out += '}';
      break;
    }
    default:
      out += "null";
      break;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& j) {
  std::string out;
  dump_into(j, out);
  return out;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace kvf
