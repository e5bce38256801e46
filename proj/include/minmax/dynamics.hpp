// GDA and OGDA iterations with convergence / divergence detection.
#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "minmax/function.hpp"

namespace minmax {

enum class Method { GDA, OGDA };

inline std::string to_string(Method m) { return m == Method::GDA ? "gda" : "ogda"; }

// OGDA has one step of memory: cur = (x_t, y_t), prev = (x_{t-1}, y_{t-1}).
struct LiftedState {
  PointXY cur;
  PointXY prev;

  VectorXd flat() const {
    VectorXd z(2 * cur.dim());
    z << cur.flat(), prev.flat();
    return z;
  }
};

struct StepConfig {
  double alpha = 0.001;
  long max_iters = 10000;
  double conv_step_tol = 1e-9;
  double conv_grad_tol = 1e-7;
  double diverge_norm = 1e6;

  void validate() const {
    if (!(alpha > 0)) throw std::invalid_argument("StepConfig: alpha must be > 0");
    if (max_iters < 1) throw std::invalid_argument("StepConfig: max_iters must be >= 1");
    if (!(conv_step_tol > 0) || !(conv_grad_tol > 0) || !(diverge_norm > 0))
      throw std::invalid_argument("StepConfig: tolerances must be > 0");
  }
};

enum class Outcome { ConvergedTo, Diverged, BudgetExhausted };

struct TrajectoryResult {
  Outcome outcome = Outcome::BudgetExhausted;
  long steps_taken = 0;
  long diverged_at = -1;            // step index when outcome == Diverged
  PointXY final;                     // current iterate at exit
  std::optional<PointXY> final_prev; // OGDA memory slot at exit
  std::vector<VectorXd> trace;       // flat states, when tracing is enabled
};

inline PointXY gda_step(const MinMaxFunction& f, const PointXY& p, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("gda_step: alpha must be > 0");
  auto [gx, gy] = f.gradient(p);
  return {p.x - alpha * gx, p.y + alpha * gy};
}

inline LiftedState ogda_step(const MinMaxFunction& f, const LiftedState& s, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("ogda_step: alpha must be > 0");
  auto [gx, gy] = f.gradient(s.cur);
  auto [px, py] = f.gradient(s.prev);
  PointXY next{s.cur.x - 2 * alpha * gx + alpha * px, s.cur.y + 2 * alpha * gy - alpha * py};
  return {std::move(next), s.cur};
}

namespace detail {

inline bool finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace detail

// Iterates until the step and the gradient are both small (ConvergedTo), the
// state norm exceeds cfg.diverge_norm or goes non-finite (Diverged), or the
// budget runs out. For OGDA the step test covers the lifted state, so a
// converged result has cur ~ prev.
inline TrajectoryResult run(const MinMaxFunction& f, const LiftedState& start,
                            const StepConfig& cfg, Method method, bool trace = false) {
  cfg.validate();
  if (start.cur.x.size() != f.n() || start.cur.y.size() != f.m() ||
      start.prev.x.size() != f.n() || start.prev.y.size() != f.m())
    throw std::invalid_argument("run: start dimension mismatch");

  const int d = f.dim();
  const double a = cfg.alpha;
  VectorXd cur = start.cur.flat(), prev = start.prev.flat();
  VectorXd gcur(d), gprev(d), next(d);

  const auto grad = [&](const VectorXd& z, VectorXd& g) {
    f.gradient_flat({z.data(), static_cast<std::size_t>(z.size())},
                    {g.data(), static_cast<std::size_t>(g.size())});
    // descent on the x block, ascent on the y block
    g.head(f.n()) *= -1.0;
  };

  TrajectoryResult res;
  grad(cur, gcur);
  if (method == Method::OGDA) grad(prev, gprev);

  for (long t = 0; t < cfg.max_iters; ++t) {
    if (trace) {
      if (method == Method::OGDA) {
        VectorXd z(2 * d);
        z << cur, prev;
        res.trace.push_back(z);
      } else {
        res.trace.push_back(cur);
      }
    }
    if (method == Method::GDA) {
      next = cur + a * gcur;
    } else {
      next = cur + 2 * a * gcur - a * gprev;
    }
    res.steps_taken = t + 1;

    if (!detail::finite(next) || next.norm() > cfg.diverge_norm) {
      res.outcome = Outcome::Diverged;
      res.diverged_at = t + 1;
      if (method == Method::OGDA) {
        prev = cur;
      }
      cur = next;
      break;
    }

    double step_sq = (next - cur).squaredNorm();
    if (method == Method::OGDA) step_sq += (cur - prev).squaredNorm();

    if (method == Method::OGDA) {
      gprev = gcur;
      prev = cur;
    }
    cur = next;
    grad(cur, gcur);

    if (step_sq <= cfg.conv_step_tol * cfg.conv_step_tol &&
        gcur.norm() <= cfg.conv_grad_tol) {
      res.outcome = Outcome::ConvergedTo;
      break;
    }
  }

  res.final = PointXY::from_flat(cur, f.n(), f.m());
  if (method == Method::OGDA) res.final_prev = PointXY::from_flat(prev, f.n(), f.m());
  if (trace) {
    if (method == Method::OGDA) {
      VectorXd z(2 * d);
      z << cur, prev;
      res.trace.push_back(z);
    } else {
      res.trace.push_back(cur);
    }
  }
  return res;
}

inline TrajectoryResult run(const MinMaxFunction& f, const PointXY& start, const StepConfig& cfg,
                            Method method, bool trace = false) {
  // OGDA warm start from a single point: prev = cur, so the first step is a
  // plain GDA step.
  return run(f, LiftedState{start, start}, cfg, method, trace);
}

inline void write_trajectory_csv(std::ostream& os, const MinMaxFunction& f, Method method,
                                 const TrajectoryResult& res) {
  os << "t";
  for (int i = 1; i <= f.n(); ++i) os << ",x" << i;
  for (int i = 1; i <= f.m(); ++i) os << ",y" << i;
  if (method == Method::OGDA) {
    for (int i = 1; i <= f.n(); ++i) os << ",px" << i;
    for (int i = 1; i <= f.m(); ++i) os << ",py" << i;
  }
  os << "\n";
  for (std::size_t t = 0; t < res.trace.size(); ++t) {
    os << t;
    const VectorXd& z = res.trace[t];
    for (int i = 0; i < z.size(); ++i) os << "," << z[i];
    os << "\n";
  }
  const char* name = res.outcome == Outcome::ConvergedTo ? "ConvergedTo"
                     : res.outcome == Outcome::Diverged  ? "Diverged"
                                                         : "BudgetExhausted";
  os << "# outcome=" << name << " steps=" << res.steps_taken << "\n";
}

}  // namespace minmax
