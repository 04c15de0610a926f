#include "cneumann/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "cneumann/errors.hpp"

namespace cneumann {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& contents) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message());
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw ConfigError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_shape_svg(std::ostream& os, const ConvexPolygon& poly, const std::string& caption) {
  Point lo = poly.vertices.front(), hi = lo;
  for (const auto& v : poly.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double size = 400.0, pad = 20.0;
  const double s = (size - 2 * pad) / span;
  auto px = [&](const Point& p) {
    // flip y so the drawing has the usual orientation
    return Point(pad + (p.x() - lo.x()) * s, size - pad - (p.y() - lo.y()) * s);
  };
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
     << size + (caption.empty() ? 0 : 24) << "\" viewBox=\"0 0 " << size << ' '
     << size + (caption.empty() ? 0 : 24) << "\">\n";
  os << "<polygon fill=\"#dde6f2\" stroke=\"#1f3a5f\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const Point q = px(poly.vertices[i]);
    os << (i ? " " : "") << q.x() << ',' << q.y();
  }
  os << "\"/>\n";
  if (!caption.empty()) {
    os << "<text x=\"" << size / 2 << "\" y=\"" << size + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << caption
       << "</text>\n";
  }
  os << "</svg>\n";
}

void write_shape_csv(std::ostream& os, const ConvexPolygon& poly) {
  os << std::setprecision(17) << "x,y\n";
  for (const auto& v : poly.vertices) os << v.x() << ',' << v.y() << '\n';
}

ConvexPolygon read_shape_csv(std::istream& is) {
  ConvexPolygon poly;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y)) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("bad vertex line: " + line);
    }
    first = false;
    poly.vertices.emplace_back(x, y);
  }
  if (poly.size() < 3) throw ConfigError("a shape needs at least 3 vertices");
  return poly;
}

namespace {

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  Problem& p = c.problem;
  SolveOptions& o = c.options;
  bool param_given = false;
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key == "k") p.k = get_as<int>(j, key);
    else if (key == "sense") p.sense = sense_from_string(get_as<std::string>(j, key));
    else if (key == "objective") p.functional = functional_from_string(get_as<std::string>(j, key));
    else if (key == "parametrization") {
      p.parametrization = parametrization_from_string(get_as<std::string>(j, key));
      param_given = true;
    }
    else if (key == "N") p.n = get_as<int>(j, key);
    else if (key == "seed") p.seed = get_as<unsigned>(j, key);
    else if (key == "init_noise") p.init_noise = get_as<double>(j, key);
    else if (key == "init_harmonics") p.init_harmonics = get_as<double>(j, key);
    else if (key == "initial") p.initial = get_as<std::vector<double>>(j, key);
    else if (key == "starts") c.starts = get_as<int>(j, key);
    else if (key == "out") c.out_dir = get_as<std::string>(j, key);
    else if (key == "max_iters") o.max_iters = get_as<int>(j, key);
    else if (key == "tol_opt") o.tol_opt = get_as<double>(j, key);
    else if (key == "stall_rel") o.stall_rel = get_as<double>(j, key);
    else if (key == "stall_window") o.stall_window = get_as<int>(j, key);
    else if (key == "h_rel") o.h_rel = get_as<double>(j, key);
    else if (key == "elements_per_wavelength") o.elements_per_wavelength = get_as<double>(j, key);
    else if (key == "final_h_rel") o.final_h_rel = get_as<double>(j, key);
    else if (key == "element") {
      const auto e = get_as<std::string>(j, key);
      if (e != "P1" && e != "P2") throw ConfigError("element must be P1 or P2");
      o.element = e == "P1" ? Element::P1 : Element::P2;
    }
    else if (key == "cluster_tol") o.cluster_tol = get_as<double>(j, key);
    else if (key == "beta") o.beta = get_as<double>(j, key);
    else if (key == "beta_start") o.beta_start = get_as<double>(j, key);
    else if (key == "beta_growth") o.beta_growth = get_as<double>(j, key);
    else if (key == "surrogate_window") o.surrogate_window = get_as<double>(j, key);
    else if (key == "volume_gradient") o.volume_gradient = get_as<bool>(j, key);
    else if (key == "armijo") o.armijo = get_as<double>(j, key);
    else if (key == "nonmonotone_memory") o.nonmonotone_memory = get_as<int>(j, key);
    else if (key == "max_backtracks") o.max_backtracks = get_as<int>(j, key);
    else if (key == "aspect_ratio_guard") o.aspect_ratio_guard = get_as<double>(j, key);
    else if (key == "saturation_tol") o.saturation_tol = get_as<double>(j, key);
    else if (key == "gamma_min_rel") o.gamma_min_rel = get_as<double>(j, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (!param_given) {
    p.parametrization = p.functional == Functional::DiameterSquaredMu ? Parametrization::Support
                                                                      : Parametrization::Gauge;
  }
  if (c.starts < 1 || c.starts > 64) throw ConfigError("starts must be between 1 and 64");
  if (o.max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (!(o.beta_growth > 1.0)) throw ConfigError("beta_growth must exceed 1");
  p.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = options_json(options);
  j.update(problem_json(problem));
  j["starts"] = starts;
  j["out"] = out_dir;
  return j;
}

nlohmann::json parse_run_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run.json is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string()) {
    throw ConfigError("run.json has no schema_version");
  }
  auto major = [](const std::string& v) { return v.substr(0, v.find('.')); };
  const std::string version = j["schema_version"];
  if (major(version) != major(kRunSchemaVersion)) {
    throw ConfigError("unsupported run.json schema version " + version);
  }
  for (const char* key : {"config", "objective", "mu", "clusters", "status"}) {
    if (!j.contains(key)) throw ConfigError(std::string("run.json lacks '") + key + "'");
  }
  return j;
}

std::string multiplicity_pattern(const std::vector<std::vector<int>>& clusters, int k) {
  int top = -1;
  for (const auto& c : clusters) {
    for (int i : c) top = std::max(top, i);
  }
  if (k < 1 || k > top) return "";
  auto cluster_index = [&](int i) {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (std::find(clusters[c].begin(), clusters[c].end(), i) != clusters[c].end()) return static_cast<int>(c);
    }
    return -1;
  };
  const auto& own = clusters[cluster_index(k)];
  const int lo = std::max(1, std::min(own.front(), k - 1));
  const int hi = std::min(top, std::max(own.back(), k + 1));
  std::string out = "mu" + std::to_string(lo);
  for (int i = lo + 1; i <= hi; ++i) {
    out += cluster_index(i) == cluster_index(i - 1) ? "=" : "<";
    out += "mu" + std::to_string(i);
  }
  return out;
}

std::string to_string(TableKind t) {
  switch (t) {
    case TableKind::DiameterMin: return "diameter-min";
    case TableKind::PerimeterMin: return "perimeter-min";
    case TableKind::PerimeterMax: return "perimeter-max";
  }
  return "";
}

double TableRow::rel_diff() const {
  if (!value) return std::numeric_limits<double>::quiet_NaN();
  return (*value - reference) / reference;
}

bool TableRow::passes(double rel_tol, Sense sense) const {
  if (!value || !std::isfinite(*value)) return false;
  const double d = rel_diff();
  if (std::abs(d) <= rel_tol) return true;
  return sense == Sense::Minimize ? d < 0.0 : d > 0.0;
}

std::vector<TableRow> reference_table(TableKind kind) {
  std::vector<TableRow> rows;
  auto add = [&](int k, double v, const char* pattern = "") {
    TableRow r;
    r.k = k;
    r.reference = v;
    r.reference_pattern = pattern;
    rows.push_back(r);
  };
  switch (kind) {
    case TableKind::DiameterMin:
      add(2, 13.56, "mu1<mu2=mu3");
      add(3, 15.42, "mu2<mu3<mu4");
      add(4, 37.35, "mu3=mu4<mu5");
      add(5, 48.92, "mu3=mu4=mu5<mu6");
      add(6, 63.49, "mu5<mu6<mu7");
      add(7, 70.64, "mu6=mu7<mu8");
      add(8, 97.42, "mu7<mu8<mu9");
      add(9, 101.70, "mu8=mu9<mu10");
      break;
    case TableKind::PerimeterMin:
      add(2, 132.07);
      add(3, 256.52);
      add(4, 358.57);
      add(5, 391.53);
      add(6, 616.83);
      add(7, 697.44);
      add(8, 863.53);
      add(9, 985.59);
      break;
    case TableKind::PerimeterMax:
      add(1, 157.91);
      add(2, 353.48);
      add(3, 492.45);
      break;
  }
  return rows;
}

Problem table_problem(TableKind kind, int k) {
  Problem p;
  p.k = k;
  p.n = 128;
  if (kind == TableKind::DiameterMin) {
    p.functional = Functional::DiameterSquaredMu;
    p.parametrization = Parametrization::Support;
    p.sense = Sense::Minimize;
  } else {
    p.functional = Functional::PerimeterSquaredMu;
    p.parametrization = Parametrization::Gauge;
    p.sense = kind == TableKind::PerimeterMax ? Sense::Maximize : Sense::Minimize;
  }
  return p;
}

double table_tolerance(TableKind kind) {
  switch (kind) {
    case TableKind::DiameterMin: return 0.02;
    case TableKind::PerimeterMin: return 0.03;
    case TableKind::PerimeterMax: return 0.01;
  }
  return 0.0;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  os << std::setprecision(8);
  os << "k,reference_value,our_value,rel_diff,multiplicity,reference_multiplicity,note\n";
  for (const auto& r : rows) {
    os << r.k << ',' << r.reference << ',';
    if (r.value) os << *r.value << ',' << r.rel_diff();
    else os << ',';
    os << ',' << r.pattern << ',' << r.reference_pattern << ',' << r.note << '\n';
  }
}

void write_table_markdown(std::ostream& os, TableKind kind, const std::vector<TableRow>& rows) {
  os << "### " << to_string(kind) << "\n\n";
  os << "| k | reference value | our value | rel. diff | multiplicity | published multiplicity | note |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.k << " | " << std::fixed << std::setprecision(2) << r.reference << " | ";
    if (r.value) {
      os << std::setprecision(3) << *r.value << " | " << std::showpos << std::setprecision(2)
         << 100.0 * r.rel_diff() << "%" << std::noshowpos;
    } else {
      os << "missing | ";
    }
    os << " | " << r.pattern << " | " << r.reference_pattern << " | " << r.note << " |\n";
    os.unsetf(std::ios::fixed);
  }
  os << "\n";
}

}  // namespace cneumann
