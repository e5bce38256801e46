#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "minmax/classify.hpp"
#include "minmax/function.hpp"

using namespace minmax;
using Catch::Approx;

namespace {

PointXY pt2(double x, double y) {
  return {VectorXd::Constant(1, x), VectorXd::Constant(1, y)};
}

const StabilityReport* report_near(const std::vector<StabilityReport>& reports, double x, double y,
                                   double tol = 1e-6) {
  for (const StabilityReport& r : reports)
    if (std::abs(r.point.x[0] - x) <= tol && std::abs(r.point.y[0] - y) <= tol) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("find_critical_points: unique roots of the simple builtins") {
  const Box box = Box::cube(2, -5.0, 5.0);
  for (const char* name : {"xy", "f1", "f2"}) {
    const CriticalPointSet cps = find_critical_points(builtin(name), box, 16, 0);
    REQUIRE(cps.points.size() == 1);
    CHECK(cps.points[0].flat().norm() < 1e-10);
    CHECK(cps.residuals[0] <= 1e-10);
    CHECK(cps.merged_multiplicity[0] >= 1);
  }
}

TEST_CASE("find_critical_points: composite2d has exactly the five table points") {
  const Box box = Box::cube(2, -5.0, 5.0);
  const CriticalPointSet cps = find_critical_points(builtins::composite2d(), box, 64, 0);
  REQUIRE(cps.points.size() == 5);
  // sorted lexicographically
  const double expected[5][2] = {{0.0, 0.0},
                                 {0.0, 1.0},
                                 {0.3301883590024767, 0.33577868156319677},
                                 {1.0, 0.0},
                                 {1.0, 1.0}};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(cps.points[i].x[0] - expected[i][0]) <= 1e-8);
    CHECK(std::abs(cps.points[i].y[0] - expected[i][1]) <= 1e-8);
    CHECK(cps.residuals[i] <= 1e-10);
  }
}

TEST_CASE("find_critical_points restricts to the box") {
  const Box inner = Box::cube(2, 0.2, 0.9);
  const CriticalPointSet cps = find_critical_points(builtins::composite2d(), inner, 32, 0);
  REQUIRE(cps.points.size() == 1);
  CHECK(cps.points[0].x[0] == Approx(0.3301883590024767).margin(1e-8));
}

TEST_CASE("find_critical_points input validation") {
  const MinMaxFunction f = builtins::f1();
  CHECK_THROWS_AS(find_critical_points(f, Box::cube(3, -1, 1), 8, 0), std::invalid_argument);
  CHECK_THROWS_AS(find_critical_points(f, Box::cube(2, -1, 1), 0, 0), std::invalid_argument);
}

TEST_CASE("local min-max second-order test") {
  CHECK(local_minmax_test(builtins::f1(), pt2(0, 0)) == Ternary::No);
  CHECK(local_minmax_test(builtins::f2(), pt2(0, 0)) == Ternary::No);
  // bilinear: ordering holds with equality
  CHECK(local_minmax_test(builtins::xy(), pt2(0, 0)) == Ternary::Yes);
  CHECK_FALSE(strongly_local_minmax_test(builtins::xy(), pt2(0, 0)));
  PointXY zero10{VectorXd::Zero(5), VectorXd::Zero(5)};
  CHECK(local_minmax_test(builtins::w(), zero10) == Ternary::Yes);
  CHECK(strongly_local_minmax_test(builtins::w(), zero10));
  // degenerate: f = x^4 - y^4 has a zero Hessian at the origin
  SparsePolynomial deg(2, {Term{1.0, {4, 0}}, Term{-1.0, {0, 4}}});
  CHECK(local_minmax_test(MinMaxFunction(1, 1, deg), pt2(0, 0)) == Ternary::Indeterminate);
  // non-critical points are rejected
  CHECK_THROWS_AS(local_minmax_test(builtins::f1(), pt2(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(strongly_local_minmax_test(builtins::f1(), pt2(1, 1)), std::invalid_argument);
}

TEST_CASE("small-alpha GDA verdicts for the taxonomy witnesses") {
  CHECK(gda_stability_small_alpha(builtins::f1(), pt2(0, 0)) == SmallAlphaVerdict::Stable);
  CHECK(gda_stability_small_alpha(builtins::f2(), pt2(0, 0)) == SmallAlphaVerdict::Unstable);
  CHECK(gda_stability_small_alpha(builtins::xy(), pt2(0, 0)) == SmallAlphaVerdict::Unstable);
  PointXY zero10{VectorXd::Zero(5), VectorXd::Zero(5)};
  CHECK(gda_stability_small_alpha(builtins::w(), zero10) == SmallAlphaVerdict::Stable);
  // zero Hessian: linearization is silent
  SparsePolynomial deg(2, {Term{1.0, {4, 0}}, Term{-1.0, {0, 4}}});
  CHECK(gda_stability_small_alpha(MinMaxFunction(1, 1, deg), pt2(0, 0)) ==
        SmallAlphaVerdict::Indeterminate);
}

TEST_CASE("small-alpha OGDA verdicts include the rotational cases") {
  CHECK(ogda_stability_small_alpha(builtins::xy(), pt2(0, 0)) == SmallAlphaVerdict::Stable);
  CHECK(ogda_stability_small_alpha(builtins::f2(), pt2(0, 0)) == SmallAlphaVerdict::Stable);
  CHECK(ogda_stability_small_alpha(builtins::f1(), pt2(0, 0)) == SmallAlphaVerdict::Stable);
  PointXY zero10{VectorXd::Zero(5), VectorXd::Zero(5)};
  CHECK(ogda_stability_small_alpha(builtins::w(), zero10) == SmallAlphaVerdict::Stable);
  // repelling directions stay repelling under OGDA
  const PointXY interior = pt2(0.3301883590024767, 0.33577868156319677);
  CHECK(ogda_stability_small_alpha(builtins::composite2d(), interior) ==
        SmallAlphaVerdict::Unstable);
}

TEST_CASE("stability at a concrete step size") {
  CHECK(gda_stability_at_alpha(builtins::f1(), pt2(0, 0), 0.001) == StabilityAtAlpha::Stable);
  CHECK(gda_stability_at_alpha(builtins::f2(), pt2(0, 0), 0.001) == StabilityAtAlpha::Unstable);
  CHECK(gda_stability_at_alpha(builtins::xy(), pt2(0, 0), 0.001) == StabilityAtAlpha::Unstable);
  CHECK(ogda_stability_at_alpha(builtins::xy(), pt2(0, 0), 0.001) == StabilityAtAlpha::Stable);
  CHECK(ogda_stability_at_alpha(builtins::f2(), pt2(0, 0), 0.001) == StabilityAtAlpha::Stable);
  // GDA on a bilinear objective is marginal in the alpha -> 0 sense never,
  // but a pure rotation Jacobian with alpha = 0 is excluded by validation
  CHECK_THROWS_AS(gda_stability_at_alpha(builtins::xy(), pt2(0, 0), 0.0), std::invalid_argument);
}

TEST_CASE("classify_radius band") {
  CHECK(classify_radius(0.5) == StabilityAtAlpha::Stable);
  CHECK(classify_radius(1.0 - 1e-12) == StabilityAtAlpha::MarginallyStable);
  CHECK(classify_radius(1.0) == StabilityAtAlpha::MarginallyStable);
  CHECK(classify_radius(1.0 + 1e-12) == StabilityAtAlpha::MarginallyStable);
  CHECK(classify_radius(1.0 + 1e-6) == StabilityAtAlpha::Unstable);
  CHECK(classify_radius(1.0 - 1e-6) == StabilityAtAlpha::Stable);
}

TEST_CASE("assumption checks") {
  const Box box = Box::cube(2, -5.0, 5.0);
  const auto [a1_f1, a2_f1] = assumption_checks(builtins::f1(), pt2(0, 0), box);
  CHECK(a1_f1);
  CHECK(a2_f1);
  // xy: invertible Hessian everywhere, purely imaginary spectrum of H
  const auto [a1_xy, a2_xy] = assumption_checks(builtins::xy(), pt2(0, 0), box);
  CHECK(a1_xy);
  CHECK_FALSE(a2_xy);
}

TEST_CASE("full_report on composite2d reproduces the published table rows") {
  const Box box = Box::cube(2, -5.0, 5.0);
  const auto reports = full_report(builtins::composite2d(), box, 0.001, 64, 0);
  REQUIRE(reports.size() == 5);

  const StabilityReport* origin = report_near(reports, 0, 0);
  REQUIRE(origin != nullptr);
  CHECK(origin->gda_small_alpha == SmallAlphaVerdict::Unstable);
  CHECK(origin->ogda_small_alpha == SmallAlphaVerdict::Stable);
  CHECK(origin->local_minmax == Ternary::No);

  const StabilityReport* p01 = report_near(reports, 0, 1);
  REQUIRE(p01 != nullptr);
  CHECK(p01->gda_small_alpha == SmallAlphaVerdict::Unstable);
  CHECK(p01->ogda_small_alpha == SmallAlphaVerdict::Unstable);
  CHECK(p01->local_minmax == Ternary::No);

  const StabilityReport* p10 = report_near(reports, 1, 0);
  REQUIRE(p10 != nullptr);
  CHECK(p10->gda_small_alpha == SmallAlphaVerdict::Stable);
  CHECK(p10->ogda_small_alpha == SmallAlphaVerdict::Stable);
  CHECK(p10->local_minmax == Ternary::Yes);
  CHECK(p10->strongly_local_minmax);

  const StabilityReport* p11 = report_near(reports, 1, 1);
  REQUIRE(p11 != nullptr);
  CHECK(p11->gda_small_alpha == SmallAlphaVerdict::Stable);
  CHECK(p11->ogda_small_alpha == SmallAlphaVerdict::Stable);
  CHECK(p11->local_minmax == Ternary::No);

  const StabilityReport* interior = report_near(reports, 0.330188, 0.335779, 1e-4);
  REQUIRE(interior != nullptr);
  CHECK(interior->gda_small_alpha == SmallAlphaVerdict::Unstable);
  CHECK(interior->ogda_small_alpha == SmallAlphaVerdict::Unstable);
  CHECK(interior->local_minmax == Ternary::No);
  CHECK(interior->f_value == Approx(0.10961104135432859).margin(1e-9));

  // reports arrive sorted lexicographically by coordinates
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const VectorXd a = reports[i - 1].point.flat();
    const VectorXd b = reports[i].point.flat();
    CHECK((a[0] < b[0] + 1e-12 || (a[0] == b[0] && a[1] <= b[1])));
  }
}

TEST_CASE("inclusion chain: local min-max implies GDA-stable implies OGDA-stable") {
  const Box box2 = Box::cube(2, -5.0, 5.0);
  const Box box10 = Box::cube(10, -5.0, 5.0);
  for (const char* name : {"xy", "f1", "f2", "composite2d", "w"}) {
    const MinMaxFunction f = builtin(name);
    const auto reports = full_report(f, f.dim() == 2 ? box2 : box10, 0.001, 16, 0);
    for (const StabilityReport& r : reports) {
      if (!r.assumption2_holds) continue;
      if (r.local_minmax == Ternary::Yes)
        CHECK(r.gda_small_alpha == SmallAlphaVerdict::Stable);
      if (r.gda_small_alpha == SmallAlphaVerdict::Stable)
        CHECK(r.ogda_small_alpha == SmallAlphaVerdict::Stable);
    }
  }
}

TEST_CASE("report JSON and markdown rendering") {
  const Box box = Box::cube(2, -5.0, 5.0);
  const auto reports = full_report(builtins::f1(), box, 0.001, 16, 0);
  REQUIRE(reports.size() == 1);
  const nlohmann::json j = report_to_json(reports[0]);
  CHECK(j["gda_small_alpha"] == "Stable");
  CHECK(j["ogda_small_alpha"] == "Stable");
  CHECK(j["local_minmax"] == "NO");
  CHECK(j["point"]["x"].size() == 1);
  CHECK(j["h_spectrum"]["dim"] == 2);

  std::ostringstream os;
  write_report_markdown(os, reports);
  const std::string md = os.str();
  CHECK(md.find("| Critical point |") != std::string::npos);
  CHECK(md.find("| YES | YES | NO |") != std::string::npos);
}
