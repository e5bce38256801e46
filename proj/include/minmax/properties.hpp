// Self-check property suite backing the `check` CLI command: spectral
// identities and inequalities that must hold for any objective.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "minmax/classify.hpp"
#include "minmax/function.hpp"
#include "minmax/rng.hpp"
#include "minmax/spectral.hpp"

namespace minmax {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace properties {

inline std::vector<Complex> random_lambdas(std::mt19937_64& rng, int count, double rlo, double rhi,
                                           double half_exclusion) {
  std::uniform_real_distribution<double> radius(rlo, rhi);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<Complex> out;
  while (static_cast<int>(out.size()) < count) {
    const Complex l = std::polar(radius(rng), angle(rng));
    if (std::abs(l - 0.5) > half_exclusion) out.push_back(l);
  }
  return out;
}

inline PropertyResult char_poly_identity(const MinMaxFunction& f, const PointXY& p, double alpha,
                                         std::uint64_t seed) {
  auto rng = substream(seed, 101);
  const auto lambdas = random_lambdas(rng, 20, 0.6, 3.0, 0.1);
  const CharPolyCheckResult r = char_poly_identity_check(f, p, alpha, lambdas);
  PropertyResult out{"char-poly-identity", r.max_rel_error <= 1e-8,
                     "max_rel_error=" + std::to_string(r.max_rel_error)};
  if (r.sign_flip_seen) out.detail += " (sign-only discrepancy flagged)";
  return out;
}

// Both roots of l^2 - (1 + 2r) l + r have magnitude <= 1 whenever |r| < 1/2
// and |1 + r| < 1.
inline PropertyResult quadratic_root_bound(std::uint64_t seed, long samples = 100000) {
  auto rng = substream(seed, 102);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  long tested = 0;
  double worst = 0.0;
  while (tested < samples) {
    const Complex r(unif(rng), unif(rng));
    if (std::abs(r) >= 0.5 || std::abs(1.0 + r) >= 1.0) continue;
    ++tested;
    const auto [l1, l2] = ogda_eigs_from_r(r);
    worst = std::max({worst, std::abs(l1), std::abs(l2)});
  }
  return {"quadratic-root-bound", worst <= 1.0 + 1e-12, "max_root_magnitude=" + std::to_string(worst)};
}

// All four closed-form OGDA eigenvalues of the bilinear example have
// magnitude <= 1 for 0 < alpha < 1/2.
inline PropertyResult bilinear_ogda_root_bound(long steps = 1000) {
  double worst = 0.0;
  for (long k = 1; k <= steps; ++k) {
    const double alpha = 0.5 * k / (steps + 1);
    for (const Complex& l : bilinear_ogda_closed_form(alpha)) worst = std::max(worst, std::abs(l));
  }
  return {"bilinear-ogda-root-bound", worst <= 1.0 + 1e-12,
          "max_root_magnitude=" + std::to_string(worst)};
}

// max Re of spec(H) is bounded by the largest eigenvalue of the symmetric
// part of H, at sampled points.
inline PropertyResult ky_fan(const MinMaxFunction& f, const Box& box, std::uint64_t seed,
                             int samples = 1000) {
  auto rng = substream(seed, 103);
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const VectorXd z = box.sample(rng);
    const MatrixXd h = h_gda(f.hessian(PointXY::from_flat(z, f.n(), f.m())));
    const SpectrumResult sp = eigenvalues(h);
    double max_re = -std::numeric_limits<double>::infinity();
    for (const Complex& mu : sp.eigenvalues) max_re = std::max(max_re, mu.real());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    worst_gap = std::max(worst_gap, max_re - es.eigenvalues().maxCoeff());
  }
  return {"ky-fan", worst_gap <= 1e-8, "max_violation=" + std::to_string(worst_gap)};
}

// det(J_GDA) stays away from zero at sampled points when alpha < 1/L.
inline PropertyResult gda_diffeomorphism(const MinMaxFunction& f, const Box& box,
                                         std::uint64_t seed, int samples = 1000) {
  const double lhat = f.lipschitz_estimate(box, 100, seed);
  const double alpha = 0.5 / lhat;
  auto rng = substream(seed, 104);
  double min_det = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const VectorXd z = box.sample(rng);
    const MatrixXd j = jacobian_gda(f, PointXY::from_flat(z, f.n(), f.m()), alpha);
    min_det = std::min(min_det, std::abs(j.determinant()));
  }
  return {"gda-diffeomorphism", min_det > 1e-12, "min_abs_det=" + std::to_string(min_det)};
}

// lambda = 1/2 is never an eigenvalue of J_OGDA at a fixed point.
inline PropertyResult ogda_half_exclusion(const MinMaxFunction& f,
                                          const std::vector<PointXY>& fixed_points, double alpha) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (const PointXY& p : fixed_points) {
    const SpectrumResult s = eigenvalues(jacobian_ogda(f, p, alpha));
    for (const Complex& l : s.eigenvalues) min_gap = std::min(min_gap, std::abs(l - 0.5));
  }
  if (fixed_points.empty()) return {"ogda-half-exclusion", true, "no fixed points in box"};
  return {"ogda-half-exclusion", min_gap > 1e-9, "min_gap_to_half=" + std::to_string(min_gap)};
}

}  // namespace properties

inline std::vector<PropertyResult> run_property_suite(const MinMaxFunction& f, const Box& box,
                                                      double alpha, std::uint64_t seed) {
  const CriticalPointSet cps = find_critical_points(f, box, 32, seed);
  const PointXY probe = cps.points.empty()
                            ? PointXY::from_flat(0.5 * (box.lo + box.hi), f.n(), f.m())
                            : cps.points.front();
  std::vector<PropertyResult> out;
  out.push_back(properties::char_poly_identity(f, probe, alpha, seed));
  out.push_back(properties::quadratic_root_bound(seed));
  out.push_back(properties::bilinear_ogda_root_bound());
  out.push_back(properties::ky_fan(f, box, seed));
  out.push_back(properties::gda_diffeomorphism(f, box, seed));
  out.push_back(properties::ogda_half_exclusion(f, cps.points, alpha));
  return out;
}

}  // namespace minmax
