#include "kvf/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kvf/catalog.hpp"
#include "kvf/errors.hpp"
#include "kvf/format.hpp"
#include "kvf/frame.hpp"
#include "kvf/geometry.hpp"
#include "kvf/io.hpp"
#include "kvf/minimality.hpp"
#include "kvf/report.hpp"
#include "kvf/sampling.hpp"

namespace kvf {

namespace {

using nlohmann::ordered_json;

struct RunConfig {
  std::string source;
  std::vector<std::string> commands;
  bool grid = false;
  int random_count = 0;  // 0 = none
  std::vector<std::string> point_specs;
  std::vector<std::string> param_specs;
  std::vector<std::string> tol_specs;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 12345;
};

const std::set<std::string>& known_commands() {
  static const std::set<std::string> cmds = {"check-killing", "frame", "lemma12", "minimality",
                                             "compare-theorems"};
  return cmds;
}

std::pair<std::string, std::string> split_key_value(const std::string& spec,
                                                    const std::string& option) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError(option + " expects key=value, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": '" + text + "' is not a number");
  }
}

Tolerances apply_tolerances(const std::vector<std::string>& specs) {
  Tolerances tol;
  std::map<std::string, double*> slots = {
      {"unit", &tol.unit}, {"killing", &tol.killing},   {"sep", &tol.sep},
      {"rank", &tol.rank}, {"min", &tol.min},           {"identity", &tol.identity},
      {"lemma12", &tol.lemma12}};
  for (const std::string& spec : specs) {
    const auto [key, value] = split_key_value(spec, "--tol");
    const auto it = slots.find(key);
    if (it == slots.end()) throw ValidationError("unknown tolerance '" + key + "'");
    const double v = parse_double(value, "--tol " + key);
    if (!(v > 0)) throw ValidationError("tolerance '" + key + "' must be positive");
    *it->second = v;
  }
  return tol;
}

ManifoldDefinition resolve_source(const RunConfig& cfg) {
  if (std::filesystem::exists(cfg.source)) {
    if (!cfg.param_specs.empty())
      throw ValidationError("--param applies to catalog sources only");
    return load_definition(cfg.source);
  }
  if (is_catalog_name(cfg.source)) {
    std::map<std::string, double> overrides;
    for (const std::string& spec : cfg.param_specs) {
      const auto [key, value] = split_key_value(spec, "--param");
      overrides[key] = parse_double(value, "--param " + key);
    }
    return builtin(cfg.source, overrides);
  }
  throw ValidationError("source '" + cfg.source +
                        "' is neither a readable file nor a catalog entry");
}

Eigen::VectorXd parse_point(const std::string& spec, int n) {
  std::vector<double> comps;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string piece =
        comma == std::string::npos ? spec.substr(pos) : spec.substr(pos, comma - pos);
    comps.push_back(parse_double(piece, "--point component"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (static_cast<int>(comps.size()) != n)
    throw ValidationError("--point '" + spec + "' has " + std::to_string(comps.size()) +
                          " components, expected " + std::to_string(n));
  Eigen::VectorXd x(n);
  for (int a = 0; a < n; ++a) x(a) = comps[a];
  return x;
}

std::vector<Eigen::VectorXd> collect_points(const RunConfig& cfg, const ManifoldDefinition& def) {
  std::vector<Eigen::VectorXd> points;
  const bool any_spec = cfg.grid || cfg.random_count > 0 || !cfg.point_specs.empty();
  if (cfg.grid || !any_spec) {
    std::vector<Eigen::VectorXd> gp = grid_points(def);
    points.insert(points.end(), gp.begin(), gp.end());
  }
  if (cfg.random_count > 0) {
    std::vector<Eigen::VectorXd> rp = random_points(def, cfg.random_count, cfg.seed);
    points.insert(points.end(), rp.begin(), rp.end());
  }
  for (const std::string& spec : cfg.point_specs) {
    Eigen::VectorXd x = parse_point(spec, def.dimension);
    if (!def.inside_domain(x))
      throw ValidationError("--point '" + spec + "' lies outside the definition's domain");
    points.push_back(std::move(x));
  }
  return points;
}

ordered_json point_json(const Eigen::VectorXd& x) {
  ordered_json arr = ordered_json::array();
  for (int a = 0; a < x.size(); ++a) arr.push_back(x(a));
  return arr;
}

ordered_json tolerances_json(const Tolerances& tol) {
  ordered_json j = ordered_json::object();
  j["unit"] = tol.unit;
  j["killing"] = tol.killing;
  j["sep"] = tol.sep;
  j["rank"] = tol.rank;
  j["min"] = tol.min;
  j["identity"] = tol.identity;
  j["lemma12"] = tol.lemma12;
  return j;
}

std::string sample_spec_text(const RunConfig& cfg) {
  std::string s;
  const bool any_spec = cfg.grid || cfg.random_count > 0 || !cfg.point_specs.empty();
  if (cfg.grid || !any_spec) s += "grid";
  if (cfg.random_count > 0) s += std::string(s.empty() ? "" : "+") + "random:" +
                                 std::to_string(cfg.random_count);
  if (!cfg.point_specs.empty())
    s += std::string(s.empty() ? "" : "+") + "points:" + std::to_string(cfg.point_specs.size());
  return s;
}

// One report per command. Bundles the JSON document and the CSV rendering;
// the chosen format is emitted at the end of the run.
struct CommandReport {
  std::string command;
  ordered_json doc;
  std::string csv;
  bool pass = false;
};

struct CsvBuilder {
  std::string text;

  void comment(const std::string& key, const std::string& value) {
    text += "# " + key + "=" + value + "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += csv_escape(cells[i]);
    }
    text += '\n';
  }
};

std::vector<std::string> point_cells(const Eigen::VectorXd& x) {
  std::vector<std::string> cells;
  for (int a = 0; a < x.size(); ++a) cells.push_back(format_g17(x(a)));
  return cells;
}

ordered_json report_header(const RunConfig& cfg, const ManifoldDefinition& def,
                           const std::string& command, const Tolerances& tol,
                           std::size_t point_count) {
  ordered_json j = ordered_json::object();
  j["command"] = command;
  j["source"] = cfg.source;
  j["definition"] = def.name;
  j["seed"] = cfg.seed;
  j["samples"] = sample_spec_text(cfg);
  j["points"] = point_count;
  j["tolerances"] = tolerances_json(tol);
  return j;
}

CsvBuilder csv_header(const RunConfig& cfg, const ManifoldDefinition& def,
                      const std::string& command, std::size_t point_count) {
  CsvBuilder csv;
  csv.comment("command", command);
  csv.comment("source", cfg.source);
  csv.comment("definition", def.name);
  csv.comment("seed", std::to_string(cfg.seed));
  csv.comment("samples", sample_spec_text(cfg));
  csv.comment("points", std::to_string(point_count));
  return csv;
}

CommandReport run_check_killing(const RunConfig& cfg, const ManifoldDefinition& def,
                                const std::vector<Eigen::VectorXd>& points,
                                const Tolerances& tol) {
  CommandReport rep;
  rep.command = "check-killing";
  rep.doc = report_header(cfg, def, rep.command, tol, points.size());
  CsvBuilder csv = csv_header(cfg, def, rep.command, points.size());
  std::vector<std::string> head = def.coords;
  head.insert(head.end(), {"unit_defect", "killing_defect"});
  csv.row(head);

  double max_unit = 0.0, max_killing = 0.0;
  int failed = 0;
  ordered_json rows = ordered_json::array();
  for (const Eigen::VectorXd& x : points) {
    ordered_json row = ordered_json::object();
    row["x"] = point_json(x);
    try {
      const GeometryAtPoint geo = geometry_at(def, x);
      const double unit = std::abs(geo.V.dot(geo.g * geo.V) - 1.0);
      const double kd = killing_defect(def, x);
      row["unit_defect"] = unit;
      row["killing_defect"] = kd;
      max_unit = std::max(max_unit, unit);
      max_killing = std::max(max_killing, kd);
      std::vector<std::string> cells = point_cells(x);
      cells.push_back(format_g17(unit));
      cells.push_back(format_g17(kd));
      csv.row(cells);
    } catch (const Error& e) {
      row["error"] = std::string(e.what());
      ++failed;
      csv.comment("failed-point", e.what());
    }
    rows.push_back(std::move(row));
  }

  ordered_json summary = ordered_json::object();
  summary["max_unit_defect"] = max_unit;
  summary["max_killing_defect"] = max_killing;
  summary["failed_points"] = failed;
  rep.pass = failed == 0 && max_unit <= tol.unit && max_killing <= tol.killing;
  rep.doc["rows"] = std::move(rows);
  rep.doc["summary"] = std::move(summary);
  rep.doc["pass"] = rep.pass;
  rep.csv = std::move(csv.text);
  return rep;
}

CommandReport run_frame(const RunConfig& cfg, const ManifoldDefinition& def,
                        const std::vector<Eigen::VectorXd>& points, const Tolerances& tol) {
  CommandReport rep;
  rep.command = "frame";
  rep.doc = report_header(cfg, def, rep.command, tol, points.size());
  rep.doc["path"] = def.frame.has_value() ? "analytic" : "constructed";
  CsvBuilder csv = csv_header(cfg, def, rep.command, points.size());
  std::vector<std::string> head = def.coords;
  head.insert(head.end(), {"m", "lambdas"});
  csv.row(head);

  int failed = 0;
  ordered_json rows = ordered_json::array();
  for (const Eigen::VectorXd& x : points) {
    ordered_json row = ordered_json::object();
    row["x"] = point_json(x);
    try {
      const AdaptedFrame frame = adapted_frame_at(def, x, tol);
      row["m"] = frame.m;
      ordered_json lams = ordered_json::array();
      std::string lam_cell;
      for (double l : frame.lambdas) {
        lams.push_back(l);
        if (!lam_cell.empty()) lam_cell += ';';
        lam_cell += format_g17(l);
      }
      row["lambdas"] = std::move(lams);
      std::vector<std::string> cells = point_cells(x);
      cells.push_back(std::to_string(frame.m));
      cells.push_back(lam_cell);
      csv.row(cells);
    } catch (const Error& e) {
      row["error"] = std::string(e.what());
      ++failed;
      csv.comment("failed-point", e.what());
    }
    rows.push_back(std::move(row));
  }

  ordered_json summary = ordered_json::object();
  summary["failed_points"] = failed;
  rep.pass = failed == 0;
  rep.doc["rows"] = std::move(rows);
  rep.doc["summary"] = std::move(summary);
  rep.doc["pass"] = rep.pass;
  rep.csv = std::move(csv.text);
  return rep;
}

CommandReport run_lemma12(const RunConfig& cfg, const ManifoldDefinition& def,
                          const std::vector<Eigen::VectorXd>& points, const Tolerances& tol) {
  CommandReport rep;
  rep.command = "lemma12";
  rep.doc = report_header(cfg, def, rep.command, tol, points.size());
  CsvBuilder csv = csv_header(cfg, def, rep.command, points.size());
  std::vector<std::string> head = def.coords;
  head.push_back("residual");
  csv.row(head);

  double max_residual = 0.0;
  int failed = 0;
  ordered_json rows = ordered_json::array();
  for (const Eigen::VectorXd& x : points) {
    ordered_json row = ordered_json::object();
    row["x"] = point_json(x);
    try {
      const double r = lemma12_residual(def, x, tol);
      row["residual"] = r;
      max_residual = std::max(max_residual, r);
      std::vector<std::string> cells = point_cells(x);
      cells.push_back(format_g17(r));
      csv.row(cells);
    } catch (const Error& e) {
      row["error"] = std::string(e.what());
      ++failed;
      csv.comment("failed-point", e.what());
    }
    rows.push_back(std::move(row));
  }

  ordered_json summary = ordered_json::object();
  summary["max_residual"] = max_residual;
  summary["failed_points"] = failed;
  rep.pass = failed == 0 && max_residual < tol.lemma12;
  rep.doc["rows"] = std::move(rows);
  rep.doc["summary"] = std::move(summary);
  rep.doc["pass"] = rep.pass;
  rep.csv = std::move(csv.text);
  return rep;
}

CommandReport run_minimality(const RunConfig& cfg, const ManifoldDefinition& def,
                             const std::vector<Eigen::VectorXd>& points, const Tolerances& tol,
                             const std::string& command) {
  CommandReport rep;
  rep.command = command;
  rep.doc = report_header(cfg, def, rep.command, tol, points.size());
  CsvBuilder csv = csv_header(cfg, def, rep.command, points.size());
  std::vector<std::string> head = def.coords;
  head.insert(head.end(), {"direction", "omega_direct", "omega_frame", "f", "rho_original",
                           "rho_corrected", "grad_term", "residual_original",
                           "residual_corrected"});
  csv.row(head);

  const MinimalityReport result = compare_theorems(def, points, tol);

  ordered_json rows = ordered_json::array();
  for (const IdentityResiduals& pt : result.rows) {
    ordered_json row = ordered_json::object();
    row["x"] = point_json(pt.x);
    if (!pt.ok) {
      row["error"] = pt.error;
      csv.comment("failed-point", pt.error);
      rows.push_back(std::move(row));
      continue;
    }
    row["f"] = pt.f;
    ordered_json lams = ordered_json::array();
    for (double l : pt.lambdas) lams.push_back(l);
    row["lambdas"] = std::move(lams);
    ordered_json dirs = ordered_json::array();
    for (const DirectionRow& d : pt.directions) {
      ordered_json dj = ordered_json::object();
      dj["direction"] = d.label;
      dj["omega_direct"] = d.omega_direct;
      dj["omega_frame"] = d.omega_frame;
      dj["rho_original"] = d.rho_original;
      dj["rho_corrected"] = d.rho_corrected;
      dj["grad_term"] = d.grad_term;
      dj["residual_original"] = d.residual_original;
      dj["residual_corrected"] = d.residual_corrected;
      dirs.push_back(std::move(dj));

      std::vector<std::string> cells = point_cells(pt.x);
      cells.push_back(d.label);
      cells.push_back(format_g17(d.omega_direct));
      cells.push_back(format_g17(d.omega_frame));
      cells.push_back(format_g17(pt.f));
      cells.push_back(format_g17(d.rho_original));
      cells.push_back(format_g17(d.rho_corrected));
      cells.push_back(format_g17(d.grad_term));
      cells.push_back(format_g17(d.residual_original));
      cells.push_back(format_g17(d.residual_corrected));
      csv.row(cells);
    }
    row["directions"] = std::move(dirs);
    rows.push_back(std::move(row));
  }

  ordered_json summary = ordered_json::object();
  summary["minimal"] = result.minimal;
  summary["max_residual_original"] = result.max_residual_original;
  summary["max_residual_corrected"] = result.max_residual_corrected;
  summary["max_minimality_measure"] = result.max_min_measure;
  summary["max_omega_perp"] = result.max_omega_perp;
  summary["failed_points"] = result.failed_points;
  // The verdict is data; the check passes when every point evaluated cleanly
  // and the corrected identity held everywhere.
  rep.pass = result.failed_points == 0 && result.max_residual_corrected < tol.identity;
  rep.doc["rows"] = std::move(rows);
  rep.doc["summary"] = std::move(summary);
  rep.doc["pass"] = rep.pass;
  rep.csv = std::move(csv.text);
  return rep;
}

std::string report_path(const std::string& base, const std::string& command, bool multi) {
  if (!multi) return base;
  const std::filesystem::path p(base);
  std::filesystem::path named = p.parent_path() / p.stem();
  named += "." + command;
  named += p.extension();
  return named.string();
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ManifoldDefinition def = resolve_source(cfg);
  const Tolerances tol = apply_tolerances(cfg.tol_specs);
  const std::vector<Eigen::VectorXd> points = collect_points(cfg, def);

  std::vector<CommandReport> reports;
  for (const std::string& command : cfg.commands) {
    if (command == "check-killing")
      reports.push_back(run_check_killing(cfg, def, points, tol));
    else if (command == "frame")
      reports.push_back(run_frame(cfg, def, points, tol));
    else if (command == "lemma12")
      reports.push_back(run_lemma12(cfg, def, points, tol));
    else if (command == "minimality" || command == "compare-theorems")
      reports.push_back(run_minimality(cfg, def, points, tol, command));
    else
      throw ValidationError("unknown command '" + command + "'");
  }

  bool all_pass = true;
  for (const CommandReport& rep : reports) {
    const std::string text = cfg.format == "csv" ? rep.csv : dump_json(rep.doc) + "\n";
    if (cfg.out_path.empty()) {
      out << text;
    } else {
      const std::string path = report_path(cfg.out_path, rep.command, reports.size() > 1);
      std::ofstream file(path, std::ios::binary);
      if (!file) throw ValidationError("cannot write report file '" + path + "'");
      file << text;
      err << rep.command << ": " << (rep.pass ? "pass" : "FAIL") << " -> " << path << "\n";
    }
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"numerical checks for unit Killing vector fields: curvature identities, "
               "adapted frames, and the minimality criterion"};
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::App* verify = app.add_subcommand(
      "verify", "run verification commands on a manifold definition or catalog entry");
  verify->add_option("source", cfg.source,
                     "definition file path, or catalog entry name (euclidean_parallel, "
                     "hopf_s3, heisenberg, twisted_r3, product_s3_r2)")
      ->required();
  verify->add_option("--cmd", cfg.commands,
                     "command to run: check-killing, frame, lemma12, minimality, "
                     "compare-theorems (repeatable)")
      ->required();
  verify->add_flag("--grid", cfg.grid, "sample the definition's default interior grid");
  verify->add_option("--random", cfg.random_count, "sample N seeded uniform interior points")
      ->check(CLI::PositiveNumber);
  verify->add_option("--point", cfg.point_specs,
                     "explicit sample point as comma-separated coordinates (repeatable)");
  verify->add_option("--param", cfg.param_specs,
                     "catalog parameter override key=value (repeatable)");
  verify->add_option("--tol", cfg.tol_specs,
                     "tolerance override key=value; keys: unit killing sep rank min "
                     "identity lemma12 (repeatable)");
  verify->add_option("--out", cfg.out_path,
                     "report file path; with several commands the command name is inserted "
                     "before the extension (default: report to stdout)");
  verify->add_option("--format", cfg.format, "report format (default json)")
      ->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--seed", cfg.seed, "random sampling seed (default 12345)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (const std::string& command : cfg.commands)
    if (!known_commands().count(command)) {
      err << "error: unknown command '" << command << "'\n";
      return 2;
    }

  try {
    return run_verify(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace kvf
