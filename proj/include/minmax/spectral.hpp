// Jacobians of the GDA / OGDA update rules, spectra of real matrices, and the
// eigenvalue correspondence between the two dynamics.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "minmax/function.hpp"

namespace minmax {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;

// Raised when two supposedly-equivalent computation routes disagree.
struct internal_consistency_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpectrumResult {
  std::vector<Complex> eigenvalues;
  double residual = 0.0;  // max over eigenpairs of ||Mv - lambda v|| / ||M||
  int matrix_dim = 0;
  bool reliable = true;

  double spectral_radius() const {
    double r = 0.0;
    for (const Complex& l : eigenvalues) r = std::max(r, std::abs(l));
    return r;
  }
};

// H = [[-Hxx, -Hxy], [Hyx, Hyy]] = diag(-I, I) * hessian; J_GDA = I + alpha H.
inline MatrixXd h_gda(const HessianBlocks& h) {
  const auto n = h.xx.rows(), m = h.yy.rows();
  MatrixXd out(n + m, n + m);
  out.topLeftCorner(n, n) = -h.xx;
  out.topRightCorner(n, m) = -h.xy;
  out.bottomLeftCorner(m, n) = h.yx;
  out.bottomRightCorner(m, m) = h.yy;
  return out;
}

inline MatrixXd h_gda(const MinMaxFunction& f, const PointXY& p) { return h_gda(f.hessian(p)); }

inline MatrixXd jacobian_gda(const MinMaxFunction& f, const PointXY& p, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("jacobian_gda: alpha must be > 0");
  const int d = f.dim();
  return MatrixXd::Identity(d, d) + alpha * h_gda(f, p);
}

// Jacobian of the lifted OGDA update at a fixed point (x, y, x, y):
//   [ I - 2aA  -2aB |  aA   aB ]
//   [ 2aC  I + 2aD  | -aC  -aD ]
//   [ I        0    |  0    0  ]
//   [ 0        I    |  0    0  ]
// with A = Hxx, B = Hxy, C = Hyx, D = Hyy.
inline MatrixXd jacobian_ogda(const MinMaxFunction& f, const PointXY& p, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("jacobian_ogda: alpha must be > 0");
  const int n = f.n(), m = f.m(), d = n + m;
  const HessianBlocks h = f.hessian(p);
  MatrixXd j = MatrixXd::Zero(2 * d, 2 * d);
  j.block(0, 0, n, n) = MatrixXd::Identity(n, n) - 2 * alpha * h.xx;
  j.block(0, n, n, m) = -2 * alpha * h.xy;
  j.block(0, d, n, n) = alpha * h.xx;
  j.block(0, d + n, n, m) = alpha * h.xy;
  j.block(n, 0, m, n) = 2 * alpha * h.yx;
  j.block(n, n, m, m) = MatrixXd::Identity(m, m) + 2 * alpha * h.yy;
  j.block(n, d, m, n) = -alpha * h.yx;
  j.block(n, d + n, m, m) = -alpha * h.yy;
  j.block(d, 0, d, d) = MatrixXd::Identity(d, d);
  return j;
}

namespace detail {

// Pairs off non-real eigenvalues into exact conjugate pairs (tolerance 1e-10
// relative to the matrix scale); lone near-real values are snapped to the
// real axis.
inline void symmetrize_conjugates(std::vector<Complex>& eigs, double scale) {
  const double tol = 1e-10 * (1.0 + scale);
  std::vector<bool> used(eigs.size(), false);
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (used[i] || eigs[i].imag() == 0.0) continue;
    std::size_t best = i;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < eigs.size(); ++j) {
      if (used[j]) continue;
      const double dd = std::abs(eigs[j] - std::conj(eigs[i]));
      if (dd < best_d) {
        best_d = dd;
        best = j;
      }
    }
    if (best != i && best_d <= tol) {
      const Complex avg = 0.5 * (eigs[i] + std::conj(eigs[best]));
      eigs[i] = avg;
      eigs[best] = std::conj(avg);
      used[i] = used[best] = true;
    } else if (std::abs(eigs[i].imag()) <= tol) {
      eigs[i] = Complex(eigs[i].real(), 0.0);
      used[i] = true;
    }
  }
  std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

}  // namespace detail

inline SpectrumResult eigenvalues(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  if (m.rows() > 64) throw std::invalid_argument("eigenvalues: dimension must be <= 64");
  if (!m.allFinite()) throw std::invalid_argument("eigenvalues: matrix has non-finite entries");

  Eigen::EigenSolver<MatrixXd> es(m, /*computeEigenvectors=*/true);
  SpectrumResult res;
  res.matrix_dim = static_cast<int>(m.rows());
  if (es.info() != Eigen::Success) {
    res.reliable = false;
    return res;
  }

  const double mnorm = m.norm();
  const MatrixXcd mc = m.cast<Complex>();
  double worst = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    const Complex lambda = es.eigenvalues()[i];
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    worst = std::max(worst, (mc * v - lambda * v).norm() / std::max(mnorm, 1e-300));
    res.eigenvalues.push_back(lambda);
  }
  res.residual = worst;
  res.reliable = worst <= 1e-8;
  detail::symmetrize_conjugates(res.eigenvalues, mnorm);
  return res;
}

inline double spectral_radius(const MatrixXd& m) { return eigenvalues(m).spectral_radius(); }

// Roots of lambda^2 - (1 + 2r) lambda + r = 0. When r is an eigenvalue of
// alpha * H_GDA (so 1 + r is an eigenvalue of J_GDA), both roots are
// eigenvalues of J_OGDA.
inline std::pair<Complex, Complex> ogda_eigs_from_r(Complex r) {
  const Complex disc = std::sqrt(4.0 * r * r + 1.0);
  return {(1.0 + 2.0 * r + disc) / 2.0, (1.0 + 2.0 * r - disc) / 2.0};
}

// Closed-form spectrum of the 4x4 OGDA Jacobian of f(x, y) = xy at the
// origin: (1 +/- sqrt(1 - 8a^2 +/- 4 sqrt(4a^4 - a^2))) / 2.
inline std::array<Complex, 4> bilinear_ogda_closed_form(double alpha) {
  const Complex inner = std::sqrt(Complex(4.0 * std::pow(alpha, 4) - alpha * alpha, 0.0));
  std::array<Complex, 4> out;
  int k = 0;
  for (double s1 : {+1.0, -1.0})
    for (double s2 : {+1.0, -1.0})
      out[k++] = 0.5 * (1.0 + s1 * std::sqrt(1.0 - 8.0 * alpha * alpha + s2 * 4.0 * inner));
  return out;
}

// Greedy minimal-distance matching of two eigenvalue multisets.
inline bool multiset_match(std::vector<Complex> a, std::vector<Complex> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const Complex& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = std::abs(b[j] - x);
      if (d < best) {
        best = d;
        bi = j;
      }
    }
    if (best > tol) return false;
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(bi));
  }
  return true;
}

namespace detail {

inline Complex char_poly_at(const MatrixXd& m, Complex lambda) {
  const long d = m.rows();
  MatrixXcd a = -m.cast<Complex>();
  a.diagonal().array() += lambda;
  return Eigen::PartialPivLU<MatrixXcd>(a).determinant();
}

}  // namespace detail

struct CharPolyCheckResult {
  double max_rel_error = 0.0;
  bool sign_flip_seen = false;  // magnitudes agreed but signs did not
};

// Pointwise check of q_OGDA(l) = (2l - 1)^{n+m} q_GDA((l^2 + l - 1)/(2l - 1)).
// Characteristic polynomials are evaluated as det(lI - J) via complex LU.
inline CharPolyCheckResult char_poly_identity_check(const MinMaxFunction& f, const PointXY& p,
                                                    double alpha,
                                                    const std::vector<Complex>& sample_points) {
  const MatrixXd jg = jacobian_gda(f, p, alpha);
  const MatrixXd jo = jacobian_ogda(f, p, alpha);
  const int d = f.dim();
  CharPolyCheckResult out;
  for (const Complex& l : sample_points) {
    if (std::abs(l - 0.5) < 1e-12)
      throw std::invalid_argument("char_poly_identity_check: lambda = 1/2 is excluded");
    const Complex lhs = detail::char_poly_at(jo, l);
    const Complex u = (l * l + l - 1.0) / (2.0 * l - 1.0);
    const Complex rhs = std::pow(2.0 * l - 1.0, d) * detail::char_poly_at(jg, u);
    double err = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    const double err_mag = std::abs(std::abs(lhs) - std::abs(rhs)) / (1.0 + std::abs(lhs));
    if (err > 1e-8 && err_mag <= 1e-8) {
      // magnitudes agree, sign does not: flag instead of failing outright
      out.sign_flip_seen = true;
      err = err_mag;
    }
    out.max_rel_error = std::max(out.max_rel_error, err);
  }
  return out;
}

inline nlohmann::json spectrum_to_json(const SpectrumResult& s) {
  nlohmann::json j;
  j["dim"] = s.matrix_dim;
  j["eigs"] = nlohmann::json::array();
  for (const Complex& l : s.eigenvalues) j["eigs"].push_back({{"re", l.real()}, {"im", l.imag()}});
  j["residual"] = s.residual;
  j["reliable"] = s.reliable;
  return j;
}

}  // namespace minmax
