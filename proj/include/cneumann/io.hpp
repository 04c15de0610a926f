#pragma once

// Files produced by the command-line tool: atomic writes, shape drawings and
// tables, run configuration and run.json parsing, and the comparison tables
// against the published optima.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cneumann/geometry.hpp"
#include "cneumann/optimizer.hpp"

namespace cneumann {

/// Writes to a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

void write_shape_svg(std::ostream& os, const ConvexPolygon& poly, const std::string& caption = "");
/// "x,y" per vertex after a header line.
void write_shape_csv(std::ostream& os, const ConvexPolygon& poly);
/// Vertices from "x,y" lines; a non-numeric first line is taken as a header.
ConvexPolygon read_shape_csv(std::istream& is);

inline constexpr const char* kRunSchemaVersion = "1.0";

/// Options of the optimize subcommand, as read from a JSON document.
struct RunConfig {
  Problem problem;
  SolveOptions options;
  int starts = 1;
  std::string out_dir = "run";

  /// Throws ConfigError on unknown keys or values of the wrong type.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Parses run.json text; throws ConfigError when the schema major version
/// differs from kRunSchemaVersion or required fields are missing.
nlohmann::json parse_run_json(const std::string& text);

/// "mu1<mu2=mu3": the cluster of mu_k together with mu_{k-1} and mu_{k+1}.
std::string multiplicity_pattern(const std::vector<std::vector<int>>& clusters, int k);

enum class TableKind { DiameterMin, PerimeterMin, PerimeterMax };
std::string to_string(TableKind t);

struct TableRow {
  int k = 0;
  double reference = 0.0;
  std::optional<double> value;
  std::string pattern;
  std::string reference_pattern;  // empty when none is published
  std::string note;

  /// (value - reference) / reference, NaN without a value.
  double rel_diff() const;
  /// Within rel_tol, or better than the reference in the optimization sense.
  bool passes(double rel_tol, Sense sense) const;
};

/// Published optimal values, k = 2..9 for minima and k = 1..3 for maxima.
std::vector<TableRow> reference_table(TableKind kind);
/// Objective, sense and parametrization used for a table kind.
Problem table_problem(TableKind kind, int k);
double table_tolerance(TableKind kind);

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);
void write_table_markdown(std::ostream& os, TableKind kind, const std::vector<TableRow>& rows);

}  // namespace cneumann
