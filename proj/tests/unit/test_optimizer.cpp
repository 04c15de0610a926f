#include <cmath>
#include <numbers>

#include "cneumann/errors.hpp"
#include "cneumann/optimizer.hpp"
#include "doctest.h"

using namespace cneumann;

namespace {

// Small and coarse so each run takes a fraction of a second.
SolveOptions quick_options(int iters) {
  SolveOptions o;
  o.max_iters = iters;
  o.h_rel = 0.12;
  o.final_h_rel = 0.08;
  o.element = Element::P1;
  return o;
}

Problem small_problem(Functional f, Sense s, Parametrization par, int k = 1) {
  Problem p;
  p.k = k;
  p.functional = f;
  p.sense = s;
  p.parametrization = par;
  p.n = 16;
  return p;
}

}  // namespace

TEST_CASE("problem validation") {
  Problem p;
  CHECK_NOTHROW(p.validate());
  p.k = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.k = 2;
  p.n = 15;
  CHECK_THROWS_AS(p.validate(), ConfigError);  // support needs even N
  p.parametrization = Parametrization::Gauge;
  CHECK_NOTHROW(p.validate());
  p.initial = {1.0, 2.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.initial.clear();
  p.init_harmonics = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  CHECK(functional_from_string(to_string(Functional::PerimeterSquaredMu)) == Functional::PerimeterSquaredMu);
  CHECK(sense_from_string(to_string(Sense::Maximize)) == Sense::Maximize);
  CHECK_THROWS_AS(functional_from_string("volume"), ConfigError);
}

TEST_CASE("starting points are feasible and seeded") {
  auto p = small_problem(Functional::DiameterSquaredMu, Sense::Minimize, Parametrization::Support);
  p.n = 32;
  const SolveOptions o;
  const auto a = initial_parameters(p, o);
  const auto b = initial_parameters(p, o);
  CHECK(a == b);
  const auto cons = problem_constraints(p);
  Eigen::Map<const Eigen::VectorXd> xa(a.data(), static_cast<Eigen::Index>(a.size()));
  CHECK(cons.max_violation(xa) <= kFeasibilityTol);
  CHECK(widths(SupportVector(a))[0] == doctest::Approx(1.0).epsilon(1e-9));

  p.seed = 2;
  CHECK(initial_parameters(p, o) != a);
  p.seed = 1;
  p.init_harmonics = 0.3;
  const auto h = initial_parameters(p, o);
  double dev = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) dev = std::max(dev, std::abs(h[i] - a[i]));
  CHECK(dev > 0.02);

  auto g = small_problem(Functional::PerimeterSquaredMu, Sense::Maximize, Parametrization::Gauge);
  const auto gs = initial_parameters(g, o);
  for (double v : gauge_convexity(GaugeVector(gs))) CHECK(v >= -1e-9);

  // a start that is far from convex is projected
  g.initial.assign(16, 1.0);
  g.initial[3] = 5.0;
  CHECK_NOTHROW(initial_parameters(g, o));
}

TEST_CASE("objective is unchanged by rescaling the start") {
  auto p = small_problem(Functional::PerimeterSquaredMu, Sense::Minimize, Parametrization::Support);
  p.initial = initial_parameters(p, {});
  const auto a = solve(p, quick_options(0));
  for (double& v : p.initial) v *= 3.7;
  const auto b = solve(p, quick_options(0));
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
  CHECK(a.perimeter == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(b.perimeter == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(functional_value(Functional::PerimeterSquaredMu, a.shape, a.mu[1]) ==
        doctest::Approx(a.objective));
}

TEST_CASE("one start of multistart is the plain solve") {
  const auto p = small_problem(Functional::DiameterSquaredMu, Sense::Minimize, Parametrization::Support, 2);
  const auto o = quick_options(6);
  const auto single = solve(p, o);
  const auto ms = multistart(p, 1, p.seed, o);
  REQUIRE(ms.runs.size() == 1);
  CHECK(ms.best == 0);
  CHECK(ms.best_run().objective == single.objective);
  CHECK(ms.best_run().params == single.params);
  CHECK(ms.best_run().trace.size() == single.trace.size());
}

TEST_CASE("multistart is deterministic and picks the best") {
  const auto p = small_problem(Functional::PerimeterSquaredMu, Sense::Maximize, Parametrization::Gauge);
  const auto o = quick_options(4);
  const auto a = multistart(p, 3, 5, o);
  const auto b = multistart(p, 3, 5, o, 2);
  REQUIRE(a.runs.size() == 3);
  for (int s = 0; s < 3; ++s) CHECK(a.runs[s].params == b.runs[s].params);
  for (const auto& r : a.runs) CHECK(r.objective <= a.best_run().objective);
}

TEST_CASE("multistart stops once a run is good enough") {
  const auto p = small_problem(Functional::PerimeterSquaredMu, Sense::Maximize, Parametrization::Gauge);
  const auto o = quick_options(4);
  const auto full = multistart(p, 3, 5, o);
  int calls = 0;
  const auto cut = multistart(p, 3, 5, o, 1, [&](const RunRecord&) { return ++calls == 2; });
  CHECK(calls == 2);
  REQUIRE(cut.runs.size() == 2);
  CHECK(cut.runs[1].params == full.runs[1].params);
  const auto never = multistart(p, 3, 5, o, 1, [](const RunRecord&) { return false; });
  CHECK(never.runs.size() == 3);
}

TEST_CASE("a short maximization run improves and stays feasible") {
  auto p = small_problem(Functional::PerimeterSquaredMu, Sense::Maximize, Parametrization::Gauge);
  p.n = 24;
  const auto o = quick_options(25);
  const auto r = solve(p, o);
  REQUIRE(!r.trace.empty());
  CHECK(r.trace.back().objective >= r.trace.front().objective);
  for (const auto& t : r.trace) CHECK(t.infeasibility <= 1e-9);
  // the disk value P^2 mu_1 = 4 pi^2 j'_{11}^2 is about 133.4; the maximum is the square's 16 pi^2
  CHECK(r.objective > 130.0);
  CHECK(r.objective < 16 * std::numbers::pi * std::numbers::pi * 1.02);
  CHECK(is_convex(r.shape));
  CHECK(r.mu.size() > 2);
  CHECK(r.mu[0] == doctest::Approx(0.0).epsilon(1e-8));
  const auto j = run_json(r);
  CHECK(j["schema_version"] == "1.0");
  CHECK(j["status"] == to_string(r.status));
  CHECK(j["mu"].size() == r.mu.size());
}
