#pragma once

// Shape optimization of Neumann eigenvalues over convex polygons given by
// support or gauge samples. The method is a spectral projected gradient
// (Barzilai-Borwein steps, nonmonotone Armijo search) on a smooth surrogate
// of mu_k, with every iterate remeshed and re-solved.

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cneumann/fem.hpp"
#include "cneumann/geometry.hpp"
#include "cneumann/projection.hpp"

namespace cneumann {

enum class Functional {
  DiameterSquaredMu,   // D^2 mu_k
  PerimeterSquaredMu,  // P^2 mu_k
  AreaMu,              // |K| mu_k
};

enum class Sense { Minimize, Maximize };
enum class Parametrization { Support, Gauge };

std::string to_string(Functional f);
std::string to_string(Sense s);
std::string to_string(Parametrization p);
Functional functional_from_string(const std::string& s);
Sense sense_from_string(const std::string& s);
Parametrization parametrization_from_string(const std::string& s);

struct Problem {
  int k = 1;
  Sense sense = Sense::Minimize;
  Functional functional = Functional::DiameterSquaredMu;
  Parametrization parametrization = Parametrization::Support;
  int n = 128;
  /// Explicit starting parameters; empty means disk samples plus noise.
  std::vector<double> initial;
  double init_noise = 0.05;
  /// Amplitude of random Fourier modes 2..6 added to the starting disk
  /// (mode m scaled by 1/m); 0 keeps the plain noisy disk.
  double init_harmonics = 0.0;
  unsigned seed = 1;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct IterationLog {
  int iter = 0;
  double objective = 0.0;      // surrogate value times the normalization
  double mu_k = 0.0;
  double infeasibility = 0.0;
  double pg_norm = 0.0;
  double step = 0.0;           // accepted line-search fraction times BB step
  bool surrogate_active = false;
  int evaluations = 0;
};

struct SolveOptions {
  int max_iters = 300;
  /// Stop when ||P(x - a g) - x|| / a * max|x| <= tol_opt |J| at the BB step a.
  double tol_opt = 1e-4;
  /// Stop when the best objective improved by less than stall_rel |J| over
  /// the last stall_window iterations.
  double stall_rel = 2e-6;
  int stall_window = 30;
  /// Mesh size: min(h_rel D, wavelength / elements_per_wavelength) with the
  /// wavelength 2 pi / sqrt(mu_k).
  double h_rel = 0.04;
  double elements_per_wavelength = 10.0;
  /// Mesh size of the final evaluation, relative to D.
  double final_h_rel = 0.02;
  Element element = Element::P2;
  double cluster_tol = kDefaultClusterTol;
  /// Surrogate sharpness relative to mu_k and the relative window of
  /// eigenvalues it aggregates. Runs start at beta_start and multiply the
  /// sharpness by beta_growth each time a stage settles, up to beta.
  double beta = 1e3;
  double beta_start = 30.0;
  double beta_growth = 3.0;
  double surrogate_window = 0.05;
  /// Eigenvalue gradients from the volume form (exact for the discrete
  /// problem on the current mesh) instead of the boundary form.
  bool volume_gradient = true;
  double armijo = 1e-4;
  int nonmonotone_memory = 8;
  int max_backtracks = 12;
  double aspect_ratio_guard = 1e3;
  double saturation_tol = 1e-6;
  /// Lower bound on gauge samples relative to their mean.
  double gamma_min_rel = 1e-3;
  std::function<void(const IterationLog&)> on_iteration;
};

enum class RunStatus { Converged, MaxIters, Degenerate, LineSearchFailure };
std::string to_string(RunStatus s);

/// Per-vertex saturation flags of the final shape.
struct Saturation {
  std::vector<bool> corner;     // rho_i (or gauge convexity) <= tol
  std::vector<bool> diametral;  // vertex attains the diameter within tol
  double unflagged_fraction = 0.0;
};

struct RunRecord {
  nlohmann::json config;
  std::vector<IterationLog> trace;
  std::vector<double> params;
  ConvexPolygon shape;
  std::vector<double> mu;                 // final fine-mesh spectrum mu_0..
  std::vector<double> residuals;
  std::vector<std::vector<int>> clusters;
  double objective = 0.0;                 // normalization^2 * mu_k on the fine mesh
  double diameter = 0.0;
  double perimeter = 0.0;
  double area = 0.0;
  RunStatus status = RunStatus::MaxIters;
  std::string message;
  double wall_seconds = 0.0;
  bool surrogate_used = false;
  int recenterings = 0;
  Saturation saturation;
};

nlohmann::json problem_json(const Problem& p);
nlohmann::json options_json(const SolveOptions& o);
nlohmann::json run_json(const RunRecord& r);

/// Feasible set of the problem's parametrization.
LinearConstraints problem_constraints(const Problem& p, double gamma_min = 0.0);

/// Starting parameters (explicit or disk plus seeded uniform noise), projected.
std::vector<double> initial_parameters(const Problem& p, const SolveOptions& opts);

/// Objective value normalization^2 mu_k of a polygon.
double functional_value(Functional f, const ConvexPolygon& poly, double mu_k);

/// Throws InfeasibleStart when the start cannot be made into a valid polygon.
RunRecord solve(const Problem& problem, const SolveOptions& opts = {});

struct MultistartResult {
  int best = -1;
  std::vector<RunRecord> runs;
  const RunRecord& best_run() const { return runs.at(best); }
};

/// Start s uses seed + s. Odd starts of a problem without init_harmonics get
/// harmonic amplitude 0.3 for diversity. Deterministic for any thread count.
/// When `enough` accepts a finished run, starts not yet begun are skipped and
/// `runs` holds only the starts that ran (deterministic with one thread).
MultistartResult multistart(const Problem& problem, int n_starts, unsigned seed,
                            const SolveOptions& opts = {}, int threads = 1,
                            const std::function<bool(const RunRecord&)>& enough = {});

}  // namespace cneumann
