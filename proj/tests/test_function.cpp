#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "minmax/function.hpp"
#include "minmax/rng.hpp"

using namespace minmax;
using Catch::Approx;

namespace {

// Central finite differences used as the independent oracle for gradients
// and Hessians throughout this file.
VectorXd fd_gradient(const MinMaxFunction& f, const VectorXd& z, double h = 1e-5) {
  VectorXd g(z.size());
  for (int v = 0; v < z.size(); ++v) {
    VectorXd zp = z, zm = z;
    zp[v] += h;
    zm[v] -= h;
    g[v] = (f.evaluate_flat({zp.data(), static_cast<std::size_t>(zp.size())}) -
            f.evaluate_flat({zm.data(), static_cast<std::size_t>(zm.size())})) /
           (2 * h);
  }
  return g;
}

MatrixXd fd_hessian(const MinMaxFunction& f, const VectorXd& z, double h = 1e-4) {
  const int d = static_cast<int>(z.size());
  MatrixXd out(d, d);
  for (int j = 0; j < d; ++j) {
    VectorXd zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    out.col(j) = (fd_gradient(f, zp, h) - fd_gradient(f, zm, h)) / (2 * h);
  }
  return out;
}

PointXY pt2(double x, double y) {
  return {VectorXd::Constant(1, x), VectorXd::Constant(1, y)};
}

}  // namespace

TEST_CASE("PointXY flat roundtrip and validation") {
  VectorXd z(3);
  z << 1, 2, 3;
  const PointXY p = PointXY::from_flat(z, 2, 1);
  CHECK(p.x.size() == 2);
  CHECK(p.y.size() == 1);
  CHECK(p.flat() == z);
  CHECK_THROWS_AS(PointXY::from_flat(z, 2, 2), std::invalid_argument);
}

TEST_CASE("Box validation and sampling stays inside") {
  CHECK_THROWS_AS(Box::cube(2, 1.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Box::cube(2, 2.0, -2.0).validate(), std::invalid_argument);
  Box bad{VectorXd::Zero(2), VectorXd::Ones(3)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const Box b = Box::cube(3, -2.0, 5.0);
  auto rng = substream(9, 0);
  for (int i = 0; i < 100; ++i) {
    const VectorXd z = b.sample(rng);
    for (int v = 0; v < 3; ++v) {
      CHECK(z[v] >= -2.0);
      CHECK(z[v] <= 5.0);
    }
  }
}

TEST_CASE("builtin catalog resolves and rejects") {
  for (const char* name : {"xy", "f1", "f2", "composite2d", "w", "planted10d"}) {
    CHECK(is_builtin_name(name));
    CHECK_NOTHROW(builtin(name, 1));
  }
  CHECK_FALSE(is_builtin_name("nope"));
  CHECK_THROWS_AS(builtin("nope"), std::invalid_argument);
}

TEST_CASE("builtin values at hand-checked points") {
  CHECK(builtins::xy().evaluate(pt2(3.0, -2.0)) == Approx(-6.0));
  CHECK(builtins::f1().evaluate(pt2(1.0, 1.0)) == Approx(-0.125 - 0.5 + 0.6));
  CHECK(builtins::f2().evaluate(pt2(1.0, 1.0)) == Approx(0.5 + 0.5 + 4.0));
  PointXY pw{VectorXd::Ones(5), VectorXd::Ones(5) * 2.0};
  CHECK(builtins::w().evaluate(pw) == Approx(5.0 - 20.0));
}

TEST_CASE("gradient and Hessian match finite differences for every builtin") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (const char* name : {"xy", "f1", "f2", "composite2d", "w", "planted10d"}) {
    const MinMaxFunction f = builtin(name, 5);
    for (int trial = 0; trial < 5; ++trial) {
      VectorXd z(f.dim());
      for (int v = 0; v < f.dim(); ++v) z[v] = unif(rng);
      const PointXY p = PointXY::from_flat(z, f.n(), f.m());
      auto [gx, gy] = f.gradient(p);
      VectorXd g(f.dim());
      g << gx, gy;
      const VectorXd gfd = fd_gradient(f, z);
      CHECK((g - gfd).norm() <= 1e-5 * (1.0 + gfd.norm()));
      const MatrixXd h = f.hessian(p).full();
      const MatrixXd hfd = fd_hessian(f, z);
      CHECK((h - hfd).norm() <= 1e-4 * (1.0 + hfd.norm()));
    }
  }
}

TEST_CASE("factored evaluation agrees with the expanded polynomial of record") {
  // The factored fast path and the expanded body are independent routes.
  const MinMaxFunction fac = builtins::composite2d();
  const MinMaxFunction expanded(1, 1, fac.body(), "expanded");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const PointXY p = pt2(unif(rng), unif(rng));
    CHECK(fac.evaluate(p) == Approx(expanded.evaluate(p)).margin(1e-9));
    auto [gx1, gy1] = fac.gradient(p);
    auto [gx2, gy2] = expanded.gradient(p);
    CHECK(gx1[0] == Approx(gx2[0]).margin(1e-9));
    CHECK(gy1[0] == Approx(gy2[0]).margin(1e-9));
    CHECK((fac.hessian(p).full() - expanded.hessian(p).full()).norm() < 1e-8);
  }
}

TEST_CASE("composite2d frozen oracle values") {
  const MinMaxFunction f = builtins::composite2d();
  // independently derived with extended-precision Newton + symbolic Hessians
  CHECK(f.evaluate(pt2(0.7, -1.3)) == Approx(-3.0708622250).margin(1e-9));
  auto [gx, gy] = f.gradient(pt2(0.7, -1.3));
  CHECK(gx[0] == Approx(-0.434584).margin(1e-6));
  CHECK(gy[0] == Approx(6.3820485).margin(1e-6));

  const MatrixXd h00 = f.hessian(pt2(0, 0)).full();
  CHECK(h00(0, 0) == Approx(1.0));
  CHECK(h00(0, 1) == Approx(4.0));
  CHECK(h00(1, 1) == Approx(1.0));
  const MatrixXd h11 = f.hessian(pt2(1, 1)).full();
  CHECK(h11(0, 0) == Approx(-0.25));
  CHECK(h11(0, 1) == Approx(0.6));
  CHECK(h11(1, 1) == Approx(-1.0));
  const MatrixXd h10 = f.hessian(pt2(1, 0)).full();
  CHECK(h10(0, 0) == Approx(1.0));
  CHECK(h10(0, 1) == Approx(0.0).margin(1e-12));
  CHECK(h10(1, 1) == Approx(-1.0));
  const MatrixXd h01 = f.hessian(pt2(0, 1)).full();
  CHECK(h01(0, 0) == Approx(-0.25));
  CHECK(h01(1, 1) == Approx(1.0));

  const PointXY interior = pt2(0.3301883590024767, 0.33577868156319677);
  auto [ix, iy] = f.gradient(interior);
  CHECK(std::abs(ix[0]) < 1e-12);
  CHECK(std::abs(iy[0]) < 1e-12);
  CHECK(f.evaluate(interior) == Approx(0.10961104135432859).margin(1e-12));
  const MatrixXd hi = f.hessian(interior).full();
  CHECK(hi(0, 0) == Approx(-1.3305166882094862).margin(1e-10));
  CHECK(hi(0, 1) == Approx(-0.1923652008518697).margin(1e-10));
  CHECK(hi(1, 1) == Approx(-1.2552261162745878).margin(1e-10));
}

TEST_CASE("bilinear detection") {
  CHECK(builtins::xy().is_bilinear());
  MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(builtins::bilinear(a).is_bilinear());
  CHECK_FALSE(builtins::f1().is_bilinear());
  CHECK_FALSE(builtins::composite2d().is_bilinear());
  // bilinear plus linear terms still counts
  SparsePolynomial body =
      SparsePolynomial(2, {Term{2.0, {1, 1}}, Term{3.0, {1, 0}}, Term{-1.0, {0, 1}}});
  CHECK(MinMaxFunction(1, 1, body).is_bilinear());
}

TEST_CASE("lipschitz estimate against constant-Hessian closed forms") {
  // Hessian of f1 is [[-0.25, 0.6], [0.6, -1]]; spectral norm (1.25 + sqrt(2.0025))/2
  const double f1_norm = (1.25 + std::sqrt(2.0025)) / 2.0;
  const Box b2 = Box::cube(2, -5.0, 5.0);
  CHECK(builtins::f1().lipschitz_estimate(b2, 10, 0) == Approx(1.1 * f1_norm).margin(1e-12));
  const Box b10 = Box::cube(10, -5.0, 5.0);
  CHECK(builtins::w().lipschitz_estimate(b10, 10, 0) == Approx(2.2).margin(1e-12));
  CHECK(builtins::xy().lipschitz_estimate(b2, 10, 0) == Approx(1.1).margin(1e-12));
  CHECK_THROWS_AS(builtins::f1().lipschitz_estimate(b10, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(builtins::f1().lipschitz_estimate(b2, 0, 0), std::invalid_argument);
}

TEST_CASE("planted10d structure") {
  const MinMaxFunction f = builtins::planted10d(7);
  CHECK(f.n() == 5);
  CHECK(f.m() == 5);
  // every term has degree >= 2, so f(0) = 0 with zero gradient
  PointXY zero{VectorXd::Zero(5), VectorXd::Zero(5)};
  CHECK(f.evaluate(zero) == 0.0);
  auto [gx, gy] = f.gradient(zero);
  CHECK(gx.norm() == 0.0);
  CHECK(gy.norm() == 0.0);
  // the Hessian at the origin is the planted quadratic's
  const MatrixXd h = f.hessian(zero).full();
  CHECK((h - (MatrixXd(10, 10) << MatrixXd::Identity(5, 5) * 2.0, MatrixXd::Zero(5, 5),
              MatrixXd::Zero(5, 5), MatrixXd::Identity(5, 5) * -2.0)
                 .finished())
            .norm() < 1e-12);
  // deterministic given the seed, distinct across seeds
  CHECK(builtins::planted10d(7).body() == f.body());
  CHECK_FALSE(builtins::planted10d(8).body() == f.body());
  // p*s has minimum degree 3, so every term of degree <= 2 is one of w's
  for (const Term& t : f.body().terms()) {
    int deg = 0;
    for (int e : t.exps) deg += e;
    if (deg <= 2) CHECK(std::abs(t.coeff) == 1.0);
  }
}

TEST_CASE("function JSON roundtrip") {
  const MinMaxFunction f = builtins::f1();
  const MinMaxFunction g = MinMaxFunction::from_json(f.to_json());
  CHECK(g.n() == 1);
  CHECK(g.m() == 1);
  CHECK(g.label() == "f1");
  CHECK(g.body() == f.body());
}

TEST_CASE("function JSON rejects malformed input") {
  CHECK_THROWS_AS(MinMaxFunction::from_json(nlohmann::json{{"n", 1}, {"m", 1}}),
                  std::invalid_argument);
  nlohmann::json bad = {{"n", 1},
                        {"m", 1},
                        {"terms", {{{"c", 1.0}, {"e", {1, 1}}}, {{"c", 2.0}, {"e", {1, 2, 3}}}}}};
  try {
    MinMaxFunction::from_json(bad);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("term 1") != std::string::npos);
  }
  nlohmann::json junk = {{"n", 1}, {"m", 1}, {"terms", {{{"c", "x"}, {"e", {1, 1}}}}}};
  CHECK_THROWS_AS(MinMaxFunction::from_json(junk), std::invalid_argument);
}

TEST_CASE("from_file error paths and roundtrip") {
  CHECK_THROWS_AS(MinMaxFunction::from_file("/nonexistent/path.json"), std::invalid_argument);
  const std::string path = "test_function_tmp.json";
  {
    std::ofstream out(path);
    out << builtins::f2().to_json().dump();
  }
  const MinMaxFunction g = MinMaxFunction::from_file(path);
  CHECK(g.body() == builtins::f2().body());
  std::remove(path.c_str());
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_AS(MinMaxFunction::from_file(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(MinMaxFunction(0, 1, SparsePolynomial(1)), std::invalid_argument);
  CHECK_THROWS_AS(MinMaxFunction(1, 1, SparsePolynomial(3)), std::invalid_argument);
  const MinMaxFunction f = builtins::f1();
  PointXY bad{VectorXd::Zero(2), VectorXd::Zero(1)};
  CHECK_THROWS_AS(f.evaluate(bad), std::invalid_argument);
  CHECK_THROWS_AS(f.gradient(bad), std::invalid_argument);
  CHECK_THROWS_AS(f.hessian(bad), std::invalid_argument);
}
