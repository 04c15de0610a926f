// Command-line front end: optimize, table, verify, mesh-dump, spectrum.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cneumann/errors.hpp"
#include "cneumann/fem.hpp"
#include "cneumann/geometry.hpp"
#include "cneumann/io.hpp"
#include "cneumann/mesh.hpp"
#include "cneumann/optimizer.hpp"
#include "cneumann/theory.hpp"
#include "cneumann/verify.hpp"

namespace fs = std::filesystem;
using namespace cneumann;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNotConverged = 2, kDegenerate = 3, kVerifyFailed = 4 };

int worker_threads() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("CONVEX_NEUMANN_THREADS")) {
    const int cap = std::atoi(env);
    if (cap < 1) throw ConfigError("CONVEX_NEUMANN_THREADS must be a positive integer");
    n = std::min(n, cap);
  }
  return n;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return kOk;
    case RunStatus::Degenerate: return kDegenerate;
    case RunStatus::MaxIters:
    case RunStatus::LineSearchFailure: return kNotConverged;
  }
  return kNotConverged;
}

ConvexPolygon read_shape(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + p.string());
  return read_shape_csv(in);
}

// Everything the optimize subcommand writes for one finished run.
void write_run_files(const fs::path& dir, const RunRecord& r, int k, const json& extra) {
  json run = run_json(r);
  for (const auto& [key, value] : extra.items()) run[key] = value;
  atomic_write(dir / "run.json", run.dump(2) + "\n");

  std::ostringstream svg, csv, md;
  std::ostringstream caption;
  caption << r.config["problem"]["objective"].get<std::string>() << ", k = " << k << ": " << std::setprecision(6) << r.objective;
  write_shape_svg(svg, r.shape, caption.str());
  atomic_write(dir / "shape.svg", svg.str());
  write_shape_csv(csv, r.shape);
  atomic_write(dir / "shape.csv", csv.str());
  const json spec{{"mu", r.mu}, {"residuals", r.residuals}, {"clusters", r.clusters},
                  {"multiplicity", multiplicity_pattern(r.clusters, k)}};
  atomic_write(dir / "spectrum.json", spec.dump(2) + "\n");
  write_bound_markdown(md, {bound_report("optimized shape", r.shape, r.mu, k)});
  atomic_write(dir / "bounds.md", "# Bound checks\n\n" + md.str());
}

struct Overrides {
  std::string config_path;
  std::string objective, sense, parametrization, element, out;
  int k = 0, n = 0, starts = 0, max_iters = -1;
  long long seed = -1;
  double h_rel = 0.0, tol_opt = 0.0;
};

RunConfig build_config(const Overrides& o) {
  json j = o.config_path.empty() ? json::object() : read_json_file(o.config_path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  if (o.k) j["k"] = o.k;
  if (o.n) j["N"] = o.n;
  if (o.starts) j["starts"] = o.starts;
  if (o.max_iters >= 0) j["max_iters"] = o.max_iters;
  if (o.seed >= 0) j["seed"] = o.seed;
  if (o.h_rel > 0) j["h_rel"] = o.h_rel;
  if (o.tol_opt > 0) j["tol_opt"] = o.tol_opt;
  if (!o.objective.empty()) j["objective"] = o.objective;
  if (!o.sense.empty()) j["sense"] = o.sense;
  if (!o.parametrization.empty()) j["parametrization"] = o.parametrization;
  if (!o.element.empty()) j["element"] = o.element;
  if (!o.out.empty()) j["out"] = o.out;
  return RunConfig::from_json(j);
}

int cmd_optimize(const Overrides& o, bool quiet) {
  RunConfig cfg = build_config(o);
  if (!quiet) {
    cfg.options.on_iteration = [](const IterationLog& l) {
      if (l.iter % 10 == 0) {
        std::cerr << "iter " << l.iter << "  J " << std::setprecision(8) << l.objective << "  pg " << std::setprecision(3)
                  << l.pg_norm << "\n";
      }
    };
  }
  const int threads = std::min(worker_threads(), cfg.starts);
  if (threads > 1) cfg.options.on_iteration = nullptr;  // interleaved output is useless
  const auto ms = multistart(cfg.problem, cfg.starts, cfg.problem.seed, cfg.options, threads);
  const RunRecord& best = ms.best_run();
  json starts = json::array();
  for (std::size_t s = 0; s < ms.runs.size(); ++s) {
    starts.push_back({{"start", s}, {"status", to_string(ms.runs[s].status)}, {"objective", ms.runs[s].objective}});
  }
  json extra{{"multistart", {{"best", ms.best}, {"starts", starts}, {"threads", threads}}},
             {"run_config", cfg.to_json()}};
  write_run_files(cfg.out_dir, best, cfg.problem.k, extra);
  std::cout << "status " << to_string(best.status) << "\nobjective " << std::setprecision(10) << best.objective
            << "\nmultiplicity " << multiplicity_pattern(best.clusters, cfg.problem.k) << "\nwritten to "
            << cfg.out_dir << "\n";
  return exit_code(best.status);
}

bool same_problem(const json& cfg, const Problem& p) {
  try {
    const json& q = cfg.at("problem");
    return q.at("k").get<int>() == p.k && q.at("objective").get<std::string>() == to_string(p.functional) &&
           q.at("sense").get<std::string>() == to_string(p.sense);
  } catch (const json::exception&) {
    return false;
  }
}

struct TableArgs {
  std::vector<std::string> kinds;
  std::string runs_dir;
  std::string out = "tables";
  int starts = 1;
  int max_iters = -1;
  unsigned seed = 1;
};

int cmd_table(const TableArgs& a) {
  std::vector<TableKind> kinds;
  for (const auto& s : a.kinds) {
    if (s == "all") kinds = {TableKind::DiameterMin, TableKind::PerimeterMin, TableKind::PerimeterMax};
    else if (s == "diameter-min") kinds.push_back(TableKind::DiameterMin);
    else if (s == "perimeter-min") kinds.push_back(TableKind::PerimeterMin);
    else if (s == "perimeter-max") kinds.push_back(TableKind::PerimeterMax);
    else throw ConfigError("unknown table '" + s + "'");
  }
  std::vector<json> prior;
  if (!a.runs_dir.empty()) {
    if (!fs::is_directory(a.runs_dir)) throw ConfigError(a.runs_dir + " is not a directory");
    for (const auto& e : fs::recursive_directory_iterator(a.runs_dir)) {
      if (e.path().filename() != "run.json") continue;
      try {
        prior.push_back(parse_run_json(read_file(e.path())));
      } catch (const ConfigError& err) {
        std::cerr << "skipping " << e.path() << ": " << err.what() << "\n";
      }
    }
  }
  const int threads = std::min(worker_threads(), a.starts);
  for (TableKind kind : kinds) {
    auto rows = reference_table(kind);
    const Sense sense = table_problem(kind, 1).sense;
    for (auto& row : rows) {
      const Problem p = table_problem(kind, row.k);
      if (!a.runs_dir.empty()) {
        // best matching prior run
        for (const auto& r : prior) {
          if (!same_problem(r["config"], p)) continue;
          const double v = r["objective"].get<double>();
          const bool better = !row.value || (sense == Sense::Minimize ? v < *row.value : v > *row.value);
          if (better) {
            row.value = v;
            row.pattern = multiplicity_pattern(r["clusters"].get<std::vector<std::vector<int>>>(), row.k);
            row.note = r["status"].get<std::string>();
          }
        }
        if (!row.value) row.note = "missing run";
        continue;
      }
      SolveOptions opts;
      if (a.max_iters >= 0) opts.max_iters = a.max_iters;
      std::cerr << to_string(kind) << " k = " << row.k << " ..." << std::flush;
      try {
        const auto ms = multistart(p, a.starts, a.seed, opts, threads);
        const auto& b = ms.best_run();
        row.value = b.objective;
        row.pattern = multiplicity_pattern(b.clusters, row.k);
        row.note = to_string(b.status);
        std::cerr << " " << b.objective << "\n";
      } catch (const Error& e) {
        row.note = std::string("failed: ") + e.what();
        std::cerr << " failed\n";
      }
    }
    std::ostringstream csv, md;
    write_table_csv(csv, rows);
    write_table_markdown(md, kind, rows);
    atomic_write(fs::path(a.out) / (to_string(kind) + ".csv"), csv.str());
    atomic_write(fs::path(a.out) / (to_string(kind) + ".md"), md.str());
    std::cout << md.str();
  }
  return kOk;
}

struct VerifyArgs {
  std::vector<std::string> suites;
  std::string profile;
  std::string out;
  int k = 1;
  unsigned seed = 1;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions opts;
  opts.k = a.k;
  opts.seed = a.seed;
  if (!a.profile.empty()) {
    std::ifstream in(a.profile);
    if (!in) throw ConfigError("cannot read " + a.profile);
    opts.profile = read_profile(in);
  }
  std::vector<std::string> names = a.suites;
  if (names.empty() || std::find(names.begin(), names.end(), "all") != names.end()) names = suite_names();
  std::vector<SuiteReport> reports;
  for (const auto& n : names) {
    std::cerr << "suite " << n << " ..." << std::flush;
    reports.push_back(run_suite(n, opts));
    std::cerr << (reports.back().passed() ? " pass\n" : " FAIL\n");
  }
  std::ostringstream md;
  write_verify_markdown(md, reports);
  if (!a.out.empty()) atomic_write(a.out, md.str());
  std::cout << md.str();
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const SuiteReport& r) { return r.passed(); });
  return ok ? kOk : kVerifyFailed;
}

struct ShapeArgs {
  std::string shape_csv;
  std::vector<double> rectangle;
  int regular = 0;
  double h = 0.05;
};

ConvexPolygon shape_from(const ShapeArgs& a) {
  if (!a.shape_csv.empty()) return read_shape(a.shape_csv);
  if (a.rectangle.size() == 2) return make_rectangle(a.rectangle[0], a.rectangle[1]);
  if (a.regular >= 3) return make_regular_polygon(a.regular, 1.0);
  throw ConfigError("give --shape, --rectangle or --regular");
}

int cmd_mesh_dump(const ShapeArgs& a, const std::string& out) {
  const auto mesh = mesh_polygon(shape_from(a), a.h);
  std::ostringstream os;
  write_mesh(os, mesh);
  if (out.empty()) std::cout << os.str();
  else atomic_write(out, os.str());
  std::cerr << mesh.num_nodes() << " nodes, " << mesh.num_triangles() << " triangles, min angle "
            << mesh.min_angle_deg() << " deg, area " << mesh.total_area() << "\n";
  return kOk;
}

int cmd_spectrum(const ShapeArgs& a, const std::string& mesh_path, int count, const std::string& element) {
  if (element != "P1" && element != "P2") throw ConfigError("element must be P1 or P2");
  TriMesh mesh;
  if (!mesh_path.empty()) {
    std::ifstream in(mesh_path);
    if (!in) throw ConfigError("cannot read " + mesh_path);
    mesh = read_mesh(in);
  } else {
    mesh = mesh_polygon(shape_from(a), a.h);
  }
  const auto s = neumann_spectrum(mesh, count, element == "P1" ? Element::P1 : Element::P2);
  std::cout << spectrum_json(s) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann eigenvalue optimization over convex polygons"};
  app.require_subcommand(1);

  Overrides ov;
  bool quiet = false;
  auto* opt = app.add_subcommand("optimize", "optimize D^2 mu_k or P^2 mu_k");
  opt->add_option("--config", ov.config_path, "JSON config; flags override its values");
  opt->add_option("--objective", ov.objective, "diam2mu, perim2mu or area_mu");
  opt->add_option("--k", ov.k, "eigenvalue index");
  opt->add_option("--sense", ov.sense, "min or max");
  opt->add_option("--parametrization", ov.parametrization, "support or gauge");
  opt->add_option("--N", ov.n, "number of samples");
  opt->add_option("--seed", ov.seed, "random seed");
  opt->add_option("--starts", ov.starts, "multistart count");
  opt->add_option("--max-iters", ov.max_iters, "iteration cap");
  opt->add_option("--h-rel", ov.h_rel, "mesh size relative to the diameter");
  opt->add_option("--tol-opt", ov.tol_opt, "stationarity tolerance relative to |J|");
  opt->add_option("--element", ov.element, "P1 or P2");
  opt->add_option("--out", ov.out, "output directory");
  opt->add_flag("--quiet", quiet, "no progress output");

  TableArgs ta;
  auto* tab = app.add_subcommand("table", "compare optimized values with the published tables");
  tab->add_option("--kind", ta.kinds, "diameter-min, perimeter-min, perimeter-max or all")->default_str("all");
  tab->add_option("--runs", ta.runs_dir, "directory searched for run.json files instead of running");
  tab->add_option("--starts", ta.starts, "multistart count for fresh runs");
  tab->add_option("--max-iters", ta.max_iters, "iteration cap for fresh runs");
  tab->add_option("--seed", ta.seed, "base seed");
  tab->add_option("--out", ta.out, "output directory for CSV and Markdown");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "run verification suites");
  ver->add_option("--suite", va.suites, "suite name (repeatable): analytic, bessel, disk, gradients, sl, collapse, "
                                        "theory, inertia or all");
  ver->add_option("--profile", va.profile, "profile file (x h per line) for the collapse suite");
  ver->add_option("--k", va.k, "eigenvalue index for the collapse suite");
  ver->add_option("--seed", va.seed, "seed of the randomized checks");
  ver->add_option("--out", va.out, "write the Markdown report here as well");

  ShapeArgs sa;
  std::string mesh_out, mesh_in, element = "P2";
  int count = 10;
  auto add_shape = [&](CLI::App* c) {
    c->add_option("--shape", sa.shape_csv, "polygon as x,y CSV");
    c->add_option("--rectangle", sa.rectangle, "width and height")->expected(2);
    c->add_option("--regular", sa.regular, "regular polygon with this many vertices on the unit circle");
    c->add_option("--mesh-h", sa.h, "target mesh size");
  };
  auto* md = app.add_subcommand("mesh-dump", "mesh a polygon and write the mesh");
  add_shape(md);
  md->add_option("--out", mesh_out, "mesh file (stdout when absent)");
  auto* sp = app.add_subcommand("spectrum", "Neumann eigenvalues of a polygon or mesh");
  add_shape(sp);
  sp->add_option("--mesh", mesh_in, "mesh file written by mesh-dump");
  sp->add_option("--count", count, "number of eigenvalues including mu_0");
  sp->add_option("--element", element, "P1 or P2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  try {
    if (*opt) return cmd_optimize(ov, quiet);
    if (*tab) {
      if (ta.kinds.empty()) ta.kinds = {"all"};
      return cmd_table(ta);
    }
    if (*ver) return cmd_verify(va);
    if (*md) return cmd_mesh_dump(sa, mesh_out);
    if (*sp) return cmd_spectrum(sa, mesh_in, count, element);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const InfeasibleStart& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  }
  return kOk;
}
