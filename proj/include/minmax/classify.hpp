// Critical-point search and stability classification: local min-max tests,
// GDA / OGDA stability at a given step size and in the small-step limit.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "minmax/dynamics.hpp"
#include "minmax/function.hpp"
#include "minmax/spectral.hpp"

namespace minmax {

enum class Ternary { Yes, No, Indeterminate };
enum class StabilityAtAlpha { Stable, MarginallyStable, Unstable };
enum class SmallAlphaVerdict { Stable, Unstable, Indeterminate };

inline std::string to_string(Ternary t) {
  switch (t) {
    case Ternary::Yes: return "YES";
    case Ternary::No: return "NO";
    default: return "IND";
  }
}
inline std::string to_string(StabilityAtAlpha s) {
  switch (s) {
    case StabilityAtAlpha::Stable: return "Stable";
    case StabilityAtAlpha::MarginallyStable: return "MarginallyStable";
    default: return "Unstable";
  }
}
inline std::string to_string(SmallAlphaVerdict s) {
  switch (s) {
    case SmallAlphaVerdict::Stable: return "Stable";
    case SmallAlphaVerdict::Unstable: return "Unstable";
    default: return "Indeterminate";
  }
}

namespace tol {
inline constexpr double critical_grad = 1e-8;     // precondition for classification ops
inline constexpr double root_residual = 1e-10;    // Newton refinement target
inline constexpr double dedup_radius = 1e-6;
inline constexpr double eig_band = 1e-9;          // strictness band around 0 / rho = 1
}  // namespace tol

struct CriticalPointSet {
  std::vector<PointXY> points;
  std::vector<double> residuals;
  std::vector<int> merged_multiplicity;
};

namespace detail {

inline bool lex_less(const VectorXd& a, const VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

inline bool inside(const Box& box, const VectorXd& z, double slack = 1e-9) {
  for (int i = 0; i < z.size(); ++i)
    if (z[i] < box.lo[i] - slack || z[i] > box.hi[i] + slack) return false;
  return true;
}

// Damped Newton on grad f = 0 from one start. Returns the refined root, or
// nullopt when the start does not converge.
inline std::optional<VectorXd> newton_root(const MinMaxFunction& f, VectorXd z) {
  const int d = f.dim();
  VectorXd g(d);
  const auto grad_at = [&](const VectorXd& p, VectorXd& out) {
    f.gradient_flat({p.data(), static_cast<std::size_t>(p.size())},
                    {out.data(), static_cast<std::size_t>(out.size())});
  };
  grad_at(z, g);
  for (int it = 0; it < 200; ++it) {
    if (!z.allFinite() || !g.allFinite()) return std::nullopt;
    if (g.norm() <= 1e-12) break;
    const MatrixXd h = f.hessian_flat(z);
    Eigen::FullPivLU<MatrixXd> lu(h);
    VectorXd dir;
    if (lu.isInvertible()) {
      dir = lu.solve(-g);
    } else {
      // least-squares step through a singular Newton system
      dir = h.completeOrthogonalDecomposition().solve(-g);
    }
    const double g0 = g.squaredNorm();
    double t = 1.0;
    VectorXd zn = z + dir;
    VectorXd gn(d);
    grad_at(zn, gn);
    int backtracks = 0;
    while ((!gn.allFinite() || gn.squaredNorm() > (1.0 - 1e-4 * t) * g0) && backtracks < 30) {
      t *= 0.5;
      zn = z + t * dir;
      grad_at(zn, gn);
      ++backtracks;
    }
    if (backtracks >= 30 && (!gn.allFinite() || gn.squaredNorm() >= g0)) return std::nullopt;
    z = zn;
    g = gn;
  }
  // polish with a few undamped steps
  for (int it = 0; it < 5 && g.norm() > 1e-14; ++it) {
    const MatrixXd h = f.hessian_flat(z);
    Eigen::FullPivLU<MatrixXd> lu(h);
    if (!lu.isInvertible()) break;
    z += lu.solve(-g);
    grad_at(z, g);
  }
  if (!z.allFinite() || g.norm() > tol::root_residual) return std::nullopt;
  return z;
}

}  // namespace detail

// Multistart damped Newton on grad f = 0: a coarse grid plus `seeds` random
// starts, refined to ||grad f|| <= 1e-10, deduplicated at radius 1e-6 and
// restricted to the box. Non-convergent starts are dropped.
inline CriticalPointSet find_critical_points(const MinMaxFunction& f, const Box& box, int seeds,
                                             std::uint64_t seed) {
  box.validate();
  if (box.dim() != f.dim()) throw std::invalid_argument("find_critical_points: box dim mismatch");
  if (seeds < 1) throw std::invalid_argument("find_critical_points: seeds must be >= 1");

  const int d = f.dim();
  std::vector<VectorXd> starts;
  const int per_axis = d <= 2 ? 9 : (d <= 4 ? 4 : 0);
  if (per_axis > 0) {
    long total = 1;
    for (int i = 0; i < d; ++i) total *= per_axis;
    for (long k = 0; k < total; ++k) {
      long rem = k;
      VectorXd z(d);
      for (int i = 0; i < d; ++i) {
        const int gi = static_cast<int>(rem % per_axis);
        rem /= per_axis;
        z[i] = box.lo[i] + (gi + 0.5) * (box.hi[i] - box.lo[i]) / per_axis;
      }
      starts.push_back(z);
    }
  }
  for (int s = 0; s < seeds; ++s) {
    auto rng = substream(seed, static_cast<std::uint64_t>(s));
    starts.push_back(box.sample(rng));
  }

  std::vector<VectorXd> roots;
  for (const VectorXd& z0 : starts)
    if (auto r = detail::newton_root(f, z0); r && detail::inside(box, *r)) roots.push_back(*r);

  std::sort(roots.begin(), roots.end(), detail::lex_less);

  CriticalPointSet out;
  std::vector<VectorXd> reps;
  for (const VectorXd& r : roots) {
    bool merged = false;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      if ((reps[c] - r).norm() <= tol::dedup_radius) {
        ++out.merged_multiplicity[c];
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(r);
      out.merged_multiplicity.push_back(1);
    }
  }
  // order the merged representatives tolerance-aware: coordinates that agree
  // to within the dedup radius (Newton jitter) compare equal, so the ordering
  // cannot flip between runs on coordinates like 0 vs 1e-12
  std::vector<std::size_t> order(reps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (int i = 0; i < d; ++i) {
      if (std::abs(reps[a][i] - reps[b][i]) <= tol::dedup_radius) continue;
      return reps[a][i] < reps[b][i];
    }
    return false;
  });
  std::vector<VectorXd> sorted_reps;
  std::vector<int> sorted_mult;
  for (std::size_t idx : order) {
    sorted_reps.push_back(reps[idx]);
    sorted_mult.push_back(out.merged_multiplicity[idx]);
  }
  reps = std::move(sorted_reps);
  out.merged_multiplicity = std::move(sorted_mult);

  for (const VectorXd& r : reps) {
    VectorXd g(d);
    f.gradient_flat({r.data(), static_cast<std::size_t>(r.size())},
                    {g.data(), static_cast<std::size_t>(g.size())});
    out.points.push_back(PointXY::from_flat(r, f.n(), f.m()));
    out.residuals.push_back(g.norm());
  }
  return out;
}

namespace detail {

inline void require_critical(const MinMaxFunction& f, const PointXY& p, const char* op) {
  auto [gx, gy] = f.gradient(p);
  const double gn = std::sqrt(gx.squaredNorm() + gy.squaredNorm());
  if (gn > tol::critical_grad)
    throw std::invalid_argument(std::string(op) + ": point is not critical (||grad|| = " +
                                std::to_string(gn) + ")");
}

inline SpectrumResult reliable_spectrum(const MatrixXd& m, const char* op) {
  SpectrumResult s = eigenvalues(m);
  if (!s.reliable)
    throw internal_consistency_error(std::string(op) + ": unreliable spectrum (residual " +
                                     std::to_string(s.residual) + ")");
  return s;
}

}  // namespace detail

// Second-order test for the local min-max ordering. Strict definiteness of
// the blocks is sufficient (Yes); a strictly wrong-signed eigenvalue violates
// the necessary condition (No); the semidefinite boundary is Indeterminate,
// except for bilinear bodies where the ordering holds with equality at every
// critical point.
inline Ternary local_minmax_test(const MinMaxFunction& f, const PointXY& p) {
  detail::require_critical(f, p, "local_minmax_test");
  const HessianBlocks h = f.hessian(p);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ex(h.xx, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ey(h.yy, Eigen::EigenvaluesOnly);
  const double xx_min = ex.eigenvalues().minCoeff();
  const double yy_max = ey.eigenvalues().maxCoeff();
  if (xx_min < -tol::eig_band || yy_max > tol::eig_band) return Ternary::No;
  if (xx_min > tol::eig_band && yy_max < -tol::eig_band) return Ternary::Yes;
  if (f.is_bilinear()) return Ternary::Yes;
  return Ternary::Indeterminate;
}

inline bool strongly_local_minmax_test(const MinMaxFunction& f, const PointXY& p) {
  detail::require_critical(f, p, "strongly_local_minmax_test");
  const HessianBlocks h = f.hessian(p);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ex(h.xx, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ey(h.yy, Eigen::EigenvaluesOnly);
  return ex.eigenvalues().minCoeff() > tol::eig_band && ey.eigenvalues().maxCoeff() < -tol::eig_band;
}

inline StabilityAtAlpha classify_radius(double rho) {
  if (rho < 1.0 - tol::eig_band) return StabilityAtAlpha::Stable;
  if (rho <= 1.0 + tol::eig_band) return StabilityAtAlpha::MarginallyStable;
  return StabilityAtAlpha::Unstable;
}

inline StabilityAtAlpha gda_stability_at_alpha(const MinMaxFunction& f, const PointXY& p,
                                               double alpha) {
  detail::require_critical(f, p, "gda_stability_at_alpha");
  const SpectrumResult s = detail::reliable_spectrum(jacobian_gda(f, p, alpha),
                                                     "gda_stability_at_alpha");
  return classify_radius(s.spectral_radius());
}

// Classification from spec(H): the eigenvalue of J_GDA paired with mu is
// 1 + alpha mu, so |1 + alpha mu|^2 = 1 + 2 alpha Re(mu) + alpha^2 |mu|^2.
// Negative real parts admit a stabilizing step size; a positive real part or
// a nonzero purely imaginary eigenvalue is unstable for every step size.
inline SmallAlphaVerdict gda_stability_small_alpha(const MinMaxFunction& f, const PointXY& p) {
  detail::require_critical(f, p, "gda_stability_small_alpha");
  const SpectrumResult s = detail::reliable_spectrum(h_gda(f, p), "gda_stability_small_alpha");
  bool all_negative = true;
  bool indeterminate = false;
  for (const Complex& mu : s.eigenvalues) {
    if (mu.real() > tol::eig_band) return SmallAlphaVerdict::Unstable;
    if (std::abs(mu) <= tol::eig_band) {
      indeterminate = true;
      continue;
    }
    if (std::abs(mu.real()) <= tol::eig_band) {
      if (std::abs(mu.imag()) > tol::eig_band) return SmallAlphaVerdict::Unstable;
      indeterminate = true;
      continue;
    }
    if (mu.real() >= -tol::eig_band) all_negative = false;
  }
  if (indeterminate) return SmallAlphaVerdict::Indeterminate;
  return all_negative ? SmallAlphaVerdict::Stable : SmallAlphaVerdict::Indeterminate;
}

inline StabilityAtAlpha ogda_stability_at_alpha(const MinMaxFunction& f, const PointXY& p,
                                                double alpha) {
  detail::require_critical(f, p, "ogda_stability_at_alpha");
  const SpectrumResult s = detail::reliable_spectrum(jacobian_ogda(f, p, alpha),
                                                     "ogda_stability_at_alpha");
  // cross-check against the quadratic root construction from spec(alpha H)
  const SpectrumResult hs = detail::reliable_spectrum(h_gda(f, p), "ogda_stability_at_alpha");
  std::vector<Complex> predicted;
  for (const Complex& mu : hs.eigenvalues) {
    const auto [l1, l2] = ogda_eigs_from_r(alpha * mu);
    predicted.push_back(l1);
    predicted.push_back(l2);
  }
  if (!multiset_match(predicted, s.eigenvalues, 1e-7))
    throw internal_consistency_error(
        "ogda_stability_at_alpha: eigensolver spectrum does not match the quadratic root "
        "construction");
  return classify_radius(s.spectral_radius());
}

// Geometric sweep alpha_k = beta 2^{-k}, k = 0..10, through the quadratic
// root map, with an analytic cross-check on the sign structure of spec(H).
// `lipschitz` scales beta = 1/(4 L); pass 0 to use the local Hessian norm.
inline SmallAlphaVerdict ogda_stability_small_alpha(const MinMaxFunction& f, const PointXY& p,
                                                    double lipschitz = 0.0) {
  detail::require_critical(f, p, "ogda_stability_small_alpha");
  const MatrixXd h = h_gda(f, p);
  const SpectrumResult s = detail::reliable_spectrum(h, "ogda_stability_small_alpha");
  double lhat = lipschitz;
  if (!(lhat > 0)) lhat = std::max(h.operatorNorm(), 1e-8);
  const double beta = 1.0 / (4.0 * lhat);

  int stable_count = 0;
  const int sweeps = 11;
  for (int k = 0; k < sweeps; ++k) {
    const double a = beta * std::pow(2.0, -k);
    double maxmag = 0.0;
    for (const Complex& mu : s.eigenvalues) {
      const auto [l1, l2] = ogda_eigs_from_r(a * mu);
      maxmag = std::max({maxmag, std::abs(l1), std::abs(l2)});
    }
    if (maxmag <= 1.0 + tol::eig_band) ++stable_count;
  }
  SmallAlphaVerdict sweep = stable_count == sweeps  ? SmallAlphaVerdict::Stable
                            : stable_count == 0     ? SmallAlphaVerdict::Unstable
                                                    : SmallAlphaVerdict::Indeterminate;

  // analytic expectation where the sign structure is clear-cut
  bool any_pos = false, all_neg = true, all_imag_or_neg = true, any_zero = false;
  for (const Complex& mu : s.eigenvalues) {
    if (std::abs(mu) <= tol::eig_band) any_zero = true;
    if (mu.real() > tol::eig_band) any_pos = true;
    if (mu.real() >= -tol::eig_band) all_neg = false;
    if (mu.real() > tol::eig_band) all_imag_or_neg = false;
  }
  std::optional<SmallAlphaVerdict> expected;
  if (!any_zero) {
    if (any_pos) expected = SmallAlphaVerdict::Unstable;
    else if (all_neg || all_imag_or_neg) expected = SmallAlphaVerdict::Stable;
  }
  if (expected && *expected != sweep) return SmallAlphaVerdict::Indeterminate;
  return sweep;
}

// assumption1: Hessian invertible (min |det| over p and sampled points);
// assumption2: spec(H at p) has no eigenvalue with zero real part.
inline std::pair<bool, bool> assumption_checks(const MinMaxFunction& f, const PointXY& p,
                                               const Box& box, int samples = 50,
                                               std::uint64_t seed = 0) {
  box.validate();
  double min_det = std::abs(f.hessian_flat(p.flat()).determinant());
  auto rng = substream(seed, 1);
  for (int s = 0; s < samples; ++s)
    min_det = std::min(min_det, std::abs(f.hessian_flat(box.sample(rng)).determinant()));
  const bool a1 = min_det > 1e-10;

  const SpectrumResult s = detail::reliable_spectrum(h_gda(f, p), "assumption_checks");
  double min_re = std::numeric_limits<double>::infinity();
  for (const Complex& mu : s.eigenvalues) min_re = std::min(min_re, std::abs(mu.real()));
  const bool a2 = min_re > tol::eig_band;
  return {a1, a2};
}

struct StabilityReport {
  PointXY point;
  double grad_norm = 0.0;
  double f_value = 0.0;
  Ternary local_minmax = Ternary::Indeterminate;
  bool strongly_local_minmax = false;
  StabilityAtAlpha gda_at_alpha = StabilityAtAlpha::Unstable;
  StabilityAtAlpha ogda_at_alpha = StabilityAtAlpha::Unstable;
  SmallAlphaVerdict gda_small_alpha = SmallAlphaVerdict::Indeterminate;
  SmallAlphaVerdict ogda_small_alpha = SmallAlphaVerdict::Indeterminate;
  bool assumption1_holds = false;
  bool assumption2_holds = false;
  SpectrumResult h_spectrum;
};

inline std::vector<StabilityReport> full_report(const MinMaxFunction& f, const Box& box,
                                                double alpha, int seeds = 64,
                                                std::uint64_t seed = 0) {
  const CriticalPointSet cps = find_critical_points(f, box, seeds, seed);
  const double lhat = f.lipschitz_estimate(box, 200, seed);
  std::vector<StabilityReport> reports;
  for (std::size_t i = 0; i < cps.points.size(); ++i) {
    const PointXY& p = cps.points[i];
    StabilityReport r;
    r.point = p;
    r.grad_norm = cps.residuals[i];
    r.f_value = f.evaluate(p);
    r.local_minmax = local_minmax_test(f, p);
    r.strongly_local_minmax = strongly_local_minmax_test(f, p);
    r.gda_at_alpha = gda_stability_at_alpha(f, p, alpha);
    r.ogda_at_alpha = ogda_stability_at_alpha(f, p, alpha);
    r.gda_small_alpha = gda_stability_small_alpha(f, p);
    r.ogda_small_alpha = ogda_stability_small_alpha(f, p, lhat);
    std::tie(r.assumption1_holds, r.assumption2_holds) = assumption_checks(f, p, box, 50, seed);
    r.h_spectrum = eigenvalues(h_gda(f, p));
    reports.push_back(std::move(r));
  }
  return reports;  // find_critical_points already sorts lexicographically
}

inline nlohmann::json report_to_json(const StabilityReport& r) {
  nlohmann::json j;
  j["point"] = {{"x", std::vector<double>(r.point.x.data(), r.point.x.data() + r.point.x.size())},
                {"y", std::vector<double>(r.point.y.data(), r.point.y.data() + r.point.y.size())}};
  j["grad_norm"] = r.grad_norm;
  j["f_value"] = r.f_value;
  j["local_minmax"] = to_string(r.local_minmax);
  j["strongly_local_minmax"] = r.strongly_local_minmax;
  j["gda_at_alpha"] = to_string(r.gda_at_alpha);
  j["ogda_at_alpha"] = to_string(r.ogda_at_alpha);
  j["gda_small_alpha"] = to_string(r.gda_small_alpha);
  j["ogda_small_alpha"] = to_string(r.ogda_small_alpha);
  j["assumption1_holds"] = r.assumption1_holds;
  j["assumption2_holds"] = r.assumption2_holds;
  j["h_spectrum"] = spectrum_to_json(r.h_spectrum);
  return j;
}

inline std::string format_point(const PointXY& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.x.size(); ++i) os << (i ? ", " : "") << p.x[i];
  for (int i = 0; i < p.y.size(); ++i) os << ", " << p.y[i];
  os << ")";
  return os.str();
}

inline void write_report_markdown(std::ostream& os, const std::vector<StabilityReport>& reports) {
  os << "| Critical point | GDA-stable | OGDA-stable | Local min-max | value of f | A1 | A2 |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const StabilityReport& r : reports) {
    const auto verdict = [](SmallAlphaVerdict v) {
      return v == SmallAlphaVerdict::Stable ? "YES" : v == SmallAlphaVerdict::Unstable ? "NO" : "IND";
    };
    os << "| " << format_point(r.point) << " | " << verdict(r.gda_small_alpha) << " | "
       << verdict(r.ogda_small_alpha) << " | " << to_string(r.local_minmax) << " | " << r.f_value
       << " | " << (r.assumption1_holds ? "yes" : "no") << " | "
       << (r.assumption2_holds ? "yes" : "no") << " |\n";
  }
}

}  // namespace minmax
