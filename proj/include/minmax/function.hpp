// Min-max objectives f(x, y) with exact gradients and Hessians, plus the
// builtin catalog used throughout the tests and experiments.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "minmax/polynomial.hpp"
#include "minmax/rng.hpp"

namespace minmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PointXY {
  VectorXd x;
  VectorXd y;

  int dim() const { return static_cast<int>(x.size() + y.size()); }

  VectorXd flat() const {
    VectorXd z(dim());
    z << x, y;
    return z;
  }

  static PointXY from_flat(const VectorXd& z, int n, int m) {
    if (z.size() != n + m) throw std::invalid_argument("PointXY::from_flat: dimension mismatch");
    return {z.head(n), z.tail(m)};
  }
};

struct HessianBlocks {
  MatrixXd xx, xy, yx, yy;

  MatrixXd full() const {
    const auto n = xx.rows(), m = yy.rows();
    MatrixXd h(n + m, n + m);
    h.topLeftCorner(n, n) = xx;
    h.topRightCorner(n, m) = xy;
    h.bottomLeftCorner(m, n) = yx;
    h.bottomRightCorner(m, m) = yy;
    return h;
  }
};

struct Box {
  VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  void validate() const {
    if (lo.size() != hi.size()) throw std::invalid_argument("Box: lo/hi dimension mismatch");
    for (int i = 0; i < lo.size(); ++i)
      if (!(hi[i] > lo[i])) throw std::invalid_argument("Box: degenerate (zero-volume) box");
  }

  static Box cube(int dim, double lo, double hi) {
    return {VectorXd::Constant(dim, lo), VectorXd::Constant(dim, hi)};
  }

  template <class Rng>
  VectorXd sample(Rng& rng) const {
    VectorXd p(lo.size());
    for (int i = 0; i < lo.size(); ++i) {
      std::uniform_real_distribution<double> d(lo[i], hi[i]);
      p[i] = d(rng);
    }
    return p;
  }
};

// A twice-differentiable objective split into a min block of dimension n and
// a max block of dimension m. The body is a sparse polynomial, so first and
// second derivatives are exact. Builtins constructed as sums of products keep
// a factored form for fast evaluation on the Monte Carlo hot path; the
// expanded polynomial is always present and is the representation of record.
class MinMaxFunction {
 public:
  MinMaxFunction(int n, int m, SparsePolynomial body, std::string label = "")
      : n_(n), m_(m), body_(std::move(body)), label_(std::move(label)) {
    if (n < 1 || m < 1) throw std::invalid_argument("MinMaxFunction: n and m must be >= 1");
    if (body_.nvars() != n + m)
      throw std::invalid_argument("MinMaxFunction: body arity must be n + m");
    finish_setup();
  }

  // body = sum_i a_i * b_i + rest, kept factored for evaluation.
  MinMaxFunction(int n, int m, std::vector<std::pair<SparsePolynomial, SparsePolynomial>> products,
                 SparsePolynomial rest, std::string label = "")
      : n_(n), m_(m), body_(std::move(rest)), label_(std::move(label)) {
    if (n < 1 || m < 1) throw std::invalid_argument("MinMaxFunction: n and m must be >= 1");
    factored_rest_ = body_;
    for (auto& [a, b] : products) {
      body_ = body_ + a * b;
      FactorPair fp;
      fp.a = std::move(a);
      fp.b = std::move(b);
      factored_.push_back(std::move(fp));
    }
    finish_setup();
  }

  int n() const { return n_; }
  int m() const { return m_; }
  int dim() const { return n_ + m_; }
  const std::string& label() const { return label_; }
  const SparsePolynomial& body() const { return body_; }

  // True when the Hessian blocks xx and yy vanish identically and xy is
  // constant, i.e. f(x, y) = x^T A y + b^T x + c^T y + d. At any critical
  // point of such a function the min-max ordering holds with equality.
  bool is_bilinear() const { return bilinear_; }

  double evaluate(const PointXY& p) const {
    check_dims(p);
    const VectorXd z = p.flat();
    return evaluate_flat({z.data(), static_cast<std::size_t>(z.size())});
  }

  std::pair<VectorXd, VectorXd> gradient(const PointXY& p) const {
    check_dims(p);
    const VectorXd z = p.flat();
    VectorXd g(dim());
    gradient_flat({z.data(), static_cast<std::size_t>(z.size())},
                  {g.data(), static_cast<std::size_t>(g.size())});
    return {g.head(n_), g.tail(m_)};
  }

  HessianBlocks hessian(const PointXY& p) const {
    check_dims(p);
    const VectorXd z = p.flat();
    const MatrixXd h = hessian_flat(z);
    HessianBlocks blocks;
    blocks.xx = h.topLeftCorner(n_, n_);
    blocks.xy = h.topRightCorner(n_, m_);
    blocks.yx = h.bottomLeftCorner(m_, n_);
    blocks.yy = h.bottomRightCorner(m_, m_);
    return blocks;
  }

  double evaluate_flat(std::span<const double> z) const {
    double acc = factored_.empty() ? body_.evaluate(z) : factored_rest_->evaluate(z);
    for (const FactorPair& fp : factored_) acc += fp.a.evaluate(z) * fp.b.evaluate(z);
    return acc;
  }

  void gradient_flat(std::span<const double> z, std::span<double> out) const {
    const int d = dim();
    if (factored_.empty()) {
      for (int v = 0; v < d; ++v) out[v] = grad_[v].evaluate(z);
      return;
    }
    for (int v = 0; v < d; ++v) out[v] = factored_rest_grad_[v].evaluate(z);
    for (const FactorPair& fp : factored_) {
      const double av = fp.a.evaluate(z);
      const double bv = fp.b.evaluate(z);
      for (int v = 0; v < d; ++v)
        out[v] += fp.da[v].evaluate(z) * bv + av * fp.db[v].evaluate(z);
    }
  }

  MatrixXd hessian_flat(const VectorXd& z) const {
    const int d = dim();
    std::span<const double> zs{z.data(), static_cast<std::size_t>(z.size())};
    MatrixXd h(d, d);
    if (factored_.empty()) {
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) h(i, j) = h(j, i) = hess_[idx(i, j)].evaluate(zs);
      return h;
    }
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) h(i, j) = h(j, i) = factored_rest_hess_[idx(i, j)].evaluate(zs);
    for (const FactorPair& fp : factored_) {
      const double av = fp.a.evaluate(zs);
      const double bv = fp.b.evaluate(zs);
      VectorXd ga(d), gb(d);
      for (int v = 0; v < d; ++v) {
        ga[v] = fp.da[v].evaluate(zs);
        gb[v] = fp.db[v].evaluate(zs);
      }
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          const double v = fp.haa[idx(i, j)].evaluate(zs) * bv + ga[i] * gb[j] + ga[j] * gb[i] +
                           av * fp.hbb[idx(i, j)].evaluate(zs);
          h(i, j) += v;
          if (j != i) h(j, i) += v;
        }
    }
    return h;
  }

  // Sampled spectral-norm bound on the Hessian over `box`, with a 1.1 safety
  // factor. Not certified; callers may override the step size directly.
  double lipschitz_estimate(const Box& box, int samples, std::uint64_t seed) const {
    box.validate();
    if (box.dim() != dim()) throw std::invalid_argument("lipschitz_estimate: box dimension mismatch");
    if (samples < 1) throw std::invalid_argument("lipschitz_estimate: samples must be >= 1");
    double worst = 0.0;
    auto rng = substream(seed, 0);
    for (int s = 0; s < samples; ++s) {
      const VectorXd z = box.sample(rng);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(hessian_flat(z), Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      worst = std::max({worst, std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())});
    }
    return 1.1 * worst;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["m"] = m_;
    j["label"] = label_;
    j["terms"] = nlohmann::json::array();
    for (const Term& t : body_.terms()) j["terms"].push_back({{"c", t.coeff}, {"e", t.exps}});
    return j;
  }

  static MinMaxFunction from_json(const nlohmann::json& j) {
    if (!j.contains("n") || !j.contains("m") || !j.contains("terms"))
      throw std::invalid_argument("function JSON: required keys are n, m, terms");
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    std::vector<Term> terms;
    const auto& jt = j.at("terms");
    for (std::size_t i = 0; i < jt.size(); ++i) {
      Term t;
      try {
        t.coeff = jt[i].at("c").get<double>();
        t.exps = jt[i].at("e").get<std::vector<int>>();
      } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("function JSON: malformed term at index " + std::to_string(i));
      }
      if (static_cast<int>(t.exps.size()) != n + m)
        throw std::invalid_argument("function JSON: term " + std::to_string(i) +
                                    " exponent vector length " + std::to_string(t.exps.size()) +
                                    " does not equal n + m = " + std::to_string(n + m));
      terms.push_back(std::move(t));
    }
    std::string label = j.value("label", std::string{});
    return MinMaxFunction(n, m, SparsePolynomial(n + m, std::move(terms)), label);
  }

  static MinMaxFunction from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open function file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("function file " + path + ": " + e.what());
    }
    return from_json(j);
  }

 private:
  struct FactorPair {
    SparsePolynomial a, b;
    std::vector<SparsePolynomial> da, db;
    std::vector<SparsePolynomial> haa, hbb;  // upper-triangle second derivatives
  };

  std::size_t idx(int i, int j) const {  // upper triangle, i <= j
    return static_cast<std::size_t>(i) * dim() - i * (i + 1) / 2 + j;
  }

  void check_dims(const PointXY& p) const {
    if (p.x.size() != n_ || p.y.size() != m_)
      throw std::invalid_argument("MinMaxFunction: point dimension mismatch");
  }

  static std::vector<SparsePolynomial> all_derivatives(const SparsePolynomial& p) {
    std::vector<SparsePolynomial> g;
    g.reserve(p.nvars());
    for (int v = 0; v < p.nvars(); ++v) g.push_back(p.derivative(v));
    return g;
  }

  static std::vector<SparsePolynomial> upper_hessian(const std::vector<SparsePolynomial>& g) {
    std::vector<SparsePolynomial> h;
    const int d = static_cast<int>(g.size());
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) h.push_back(g[i].derivative(j));
    return h;
  }

  void finish_setup() {
    const int d = dim();
    grad_ = all_derivatives(body_);
    hess_ = upper_hessian(grad_);
    if (!factored_.empty()) {
      factored_rest_grad_ = all_derivatives(*factored_rest_);
      factored_rest_hess_ = upper_hessian(factored_rest_grad_);
      for (FactorPair& fp : factored_) {
        fp.da = all_derivatives(fp.a);
        fp.db = all_derivatives(fp.b);
        fp.haa = upper_hessian(fp.da);
        fp.hbb = upper_hessian(fp.db);
      }
    }
    bilinear_ = true;
    for (int i = 0; i < d && bilinear_; ++i)
      for (int j = i; j < d && bilinear_; ++j) {
        const SparsePolynomial& h = hess_[idx(i, j)];
        const bool same_block = (i < n_) == (j < n_);
        if (same_block) {
          if (!h.empty()) bilinear_ = false;
        } else {
          if (h.degree() > 0) bilinear_ = false;
        }
      }
  }

  int n_, m_;
  SparsePolynomial body_;
  std::string label_;
  std::vector<SparsePolynomial> grad_;
  std::vector<SparsePolynomial> hess_;
  std::optional<SparsePolynomial> factored_rest_;
  std::vector<SparsePolynomial> factored_rest_grad_;
  std::vector<SparsePolynomial> factored_rest_hess_;
  std::vector<FactorPair> factored_;
  bool bilinear_ = false;
};

inline double evaluate(const MinMaxFunction& f, const PointXY& p) { return f.evaluate(p); }
inline std::pair<VectorXd, VectorXd> gradient(const MinMaxFunction& f, const PointXY& p) {
  return f.gradient(p);
}
inline HessianBlocks hessian(const MinMaxFunction& f, const PointXY& p) { return f.hessian(p); }

// ---- builtin catalog -------------------------------------------------------

namespace builtins {

inline SparsePolynomial poly2(std::initializer_list<std::pair<double, std::array<int, 2>>> ts) {
  std::vector<Term> terms;
  for (const auto& [c, e] : ts) terms.push_back({c, {e[0], e[1]}});
  return SparsePolynomial(2, std::move(terms));
}

inline MinMaxFunction xy() {
  return MinMaxFunction(1, 1, poly2({{1.0, {1, 1}}}), "xy");
}

inline MinMaxFunction f1() {
  return MinMaxFunction(1, 1, poly2({{-0.125, {2, 0}}, {-0.5, {0, 2}}, {0.6, {1, 1}}}), "f1");
}

inline MinMaxFunction f2() {
  return MinMaxFunction(1, 1, poly2({{0.5, {2, 0}}, {0.5, {0, 2}}, {4.0, {1, 1}}}), "f2");
}

// f2(x,y) (x-1)^2 (y-1)^2 + f1(x-1,y-1) x^2 y^2.
//
// The quadratic multiplied by x^2 y^2 is recentred at (1,1) so that (1,1) is
// critical with Hessian equal to that quadratic's; the published description
// pairs the quadratics the other way round and omits the recentring, which
// yields a function whose critical points do not match the published table
// (for instance (1,1) fails to be critical at all). This form reproduces the
// table exactly: five critical points, with (0,0) inheriting the rotational
// f2 spectrum, (1,1) inheriting the f1 spectrum, (1,0) a strict local
// min-max, and the interior point near (0.3301, 0.3357) with value 0.1096.
inline MinMaxFunction composite2d() {
  const SparsePolynomial xm1 = poly2({{1.0, {1, 0}}, {-1.0, {0, 0}}});
  const SparsePolynomial ym1 = poly2({{1.0, {0, 1}}, {-1.0, {0, 0}}});
  const SparsePolynomial g1 = xm1 * xm1 * ym1 * ym1;
  const SparsePolynomial g2 = poly2({{1.0, {2, 2}}});
  const SparsePolynomial f1_shift = xm1 * xm1 * poly2({{-0.125, {0, 0}}}) +
                                    ym1 * ym1 * poly2({{-0.5, {0, 0}}}) +
                                    xm1 * ym1 * poly2({{0.6, {0, 0}}});
  std::vector<std::pair<SparsePolynomial, SparsePolynomial>> prods;
  prods.emplace_back(f2().body(), g1);
  prods.emplace_back(f1_shift, g2);
  return MinMaxFunction(1, 1, std::move(prods), SparsePolynomial(2), "composite2d");
}

// w(x,y) = sum_i (x_i^2 - y_i^2), n = m = 5
inline MinMaxFunction w() {
  std::vector<Term> terms;
  for (int i = 0; i < 10; ++i) {
    Term t;
    t.coeff = i < 5 ? 1.0 : -1.0;
    t.exps.assign(10, 0);
    t.exps[i] = 2;
    terms.push_back(std::move(t));
  }
  return MinMaxFunction(5, 5, SparsePolynomial(10, std::move(terms)), "w");
}

// f = p(x,y) * sum_i (x_i^3 + y_i^3) + w(x,y), where p is a full degree-3
// polynomial in 10 variables with coefficients i.i.d. uniform on [-1, 1].
inline MinMaxFunction planted10d(std::uint64_t seed) {
  std::vector<Term> pterms;
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  // enumerate all exponent vectors of total degree <= 3, lexicographically
  std::vector<int> e(10, 0);
  const auto total = [&] { int s = 0; for (int v : e) s += v; return s; };
  while (true) {
    if (total() <= 3) pterms.push_back({unif(rng), e});
    int i = 9;
    while (i >= 0 && e[i] == 3) e[i--] = 0;
    if (i < 0) break;
    ++e[i];
  }
  std::vector<Term> sterms;
  for (int i = 0; i < 10; ++i) {
    Term t;
    t.coeff = 1.0;
    t.exps.assign(10, 0);
    t.exps[i] = 3;
    sterms.push_back(std::move(t));
  }
  std::vector<std::pair<SparsePolynomial, SparsePolynomial>> prods;
  prods.emplace_back(SparsePolynomial(10, std::move(pterms)),
                     SparsePolynomial(10, std::move(sterms)));
  return MinMaxFunction(5, 5, std::move(prods), w().body(),
                        "planted10d(seed=" + std::to_string(seed) + ")");
}

inline MinMaxFunction bilinear(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  std::vector<Term> terms;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      if (a(i, j) == 0.0) continue;
      Term t;
      t.exps.assign(n + m, 0);
      t.exps[i] = 1;
      t.exps[n + j] = 1;
      t.coeff = a(i, j);
      terms.push_back(std::move(t));
    }
  return MinMaxFunction(n, m, SparsePolynomial(n + m, std::move(terms)), "bilinear");
}

}  // namespace builtins

// Resolves a builtin by name. planted10d takes its instance seed as an
// argument; the other names ignore it.
inline MinMaxFunction builtin(const std::string& name, std::uint64_t seed = 0) {
  if (name == "xy") return builtins::xy();
  if (name == "f1") return builtins::f1();
  if (name == "f2") return builtins::f2();
  if (name == "composite2d") return builtins::composite2d();
  if (name == "w") return builtins::w();
  if (name == "planted10d") return builtins::planted10d(seed);
  throw std::invalid_argument("unknown builtin function: " + name);
}

inline bool is_builtin_name(const std::string& name) {
  return name == "xy" || name == "f1" || name == "f2" || name == "composite2d" || name == "w" ||
         name == "planted10d";
}

}  // namespace minmax
