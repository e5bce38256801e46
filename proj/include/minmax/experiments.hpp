// Monte Carlo basin-of-attraction sweeps, unstable-point avoidance checks,
// the planted 10-dimensional experiment, and vector-field export.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "minmax/classify.hpp"
#include "minmax/dynamics.hpp"
#include "minmax/function.hpp"
#include "minmax/rng.hpp"

namespace minmax {

struct SweepConfig {
  Box box;
  long samples = 10000;
  Method method = Method::GDA;
  StepConfig step;
  double attribution_radius = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    box.validate();
    step.validate();
    if (samples < 1) throw std::invalid_argument("SweepConfig: samples must be >= 1");
    if (!(attribution_radius > 0))
      throw std::invalid_argument("SweepConfig: attribution_radius must be > 0");
  }
};

struct SweepResult {
  std::vector<PointXY> critical_points;
  std::vector<double> per_point_fraction;  // aligned with critical_points
  std::vector<long> per_point_count;
  double diverged_fraction = 0.0;
  double unresolved_fraction = 0.0;  // budget exhausted or converged off-catalog
  long diverged_count = 0;
  long unresolved_count = 0;
  SweepConfig config;
};

namespace detail {

// Index of the nearest critical point within the attribution radius, or -1.
// Candidate points are pre-sorted lexicographically, so distance ties resolve
// to the lexicographically smaller point.
inline int attribute(const std::vector<VectorXd>& cps, const VectorXd& z, double radius) {
  int best = -1;
  double best_d = radius;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const double d = (cps[i] - z).norm();
    if (d < best_d || (best < 0 && d <= best_d)) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace detail

// Samples starts i.i.d. uniform on the box (one RNG substream per sample
// index) and attributes converged trajectories to the nearest critical point
// within the attribution radius. Deterministic given the seed.
inline SweepResult basin_sweep(const MinMaxFunction& f, const CriticalPointSet& critical_points,
                               const SweepConfig& cfg) {
  cfg.validate();
  if (critical_points.points.empty())
    throw std::invalid_argument("basin_sweep: critical point set is empty");
  if (cfg.box.dim() != f.dim()) throw std::invalid_argument("basin_sweep: box dimension mismatch");

  std::vector<VectorXd> cps;
  for (const PointXY& p : critical_points.points) cps.push_back(p.flat());

  SweepResult res;
  res.config = cfg;
  res.critical_points = critical_points.points;
  res.per_point_count.assign(cps.size(), 0);

  for (long s = 0; s < cfg.samples; ++s) {
    auto rng = substream(cfg.seed, static_cast<std::uint64_t>(s));
    const VectorXd z0 = cfg.box.sample(rng);
    const PointXY start = PointXY::from_flat(z0, f.n(), f.m());
    const TrajectoryResult tr = run(f, start, cfg.step, cfg.method);
    if (tr.outcome == Outcome::Diverged) {
      ++res.diverged_count;
    } else if (tr.outcome == Outcome::ConvergedTo) {
      const int idx = detail::attribute(cps, tr.final.flat(), cfg.attribution_radius);
      if (idx >= 0)
        ++res.per_point_count[idx];
      else
        ++res.unresolved_count;
    } else {
      ++res.unresolved_count;
    }
  }

  const double total = static_cast<double>(cfg.samples);
  for (long c : res.per_point_count) res.per_point_fraction.push_back(c / total);
  res.diverged_fraction = res.diverged_count / total;
  res.unresolved_fraction = res.unresolved_count / total;
  return res;
}

// Fraction of sampled trajectories attributed to points whose small-step
// verdict for the sweep's dynamics is Unstable. Expected ~0.
inline double avoidance_check(const SweepResult& sweep, const std::vector<StabilityReport>& reports,
                              Method method) {
  double frac = 0.0;
  for (std::size_t i = 0; i < sweep.critical_points.size(); ++i) {
    const VectorXd z = sweep.critical_points[i].flat();
    for (const StabilityReport& r : reports) {
      if ((r.point.flat() - z).norm() > 1e-9) continue;
      const SmallAlphaVerdict v =
          method == Method::GDA ? r.gda_small_alpha : r.ogda_small_alpha;
      if (v == SmallAlphaVerdict::Unstable) frac += sweep.per_point_fraction[i];
      break;
    }
  }
  return frac;
}

// Builds planted10d(seed), samples starts uniform in [-5, 5]^10 and returns
// the fraction converging to the origin under each dynamics.
inline std::pair<double, double> highdim_experiment(std::uint64_t seed, long samples,
                                                    const StepConfig& step) {
  if (samples < 1) throw std::invalid_argument("highdim_experiment: samples must be >= 1");
  const MinMaxFunction f = builtins::planted10d(seed);
  const Box box = Box::cube(10, -5.0, 5.0);
  const VectorXd origin = VectorXd::Zero(10);
  double fractions[2];
  for (Method method : {Method::GDA, Method::OGDA}) {
    long converged = 0;
    for (long s = 0; s < samples; ++s) {
      auto rng = substream(seed, static_cast<std::uint64_t>(s));
      const VectorXd z0 = box.sample(rng);
      const TrajectoryResult tr = run(f, PointXY::from_flat(z0, 5, 5), step, method);
      if (tr.outcome == Outcome::ConvergedTo && (tr.final.flat() - origin).norm() <= 1e-3)
        ++converged;
    }
    fractions[method == Method::GDA ? 0 : 1] = static_cast<double>(converged) / samples;
  }
  return {fractions[0], fractions[1]};
}

struct FieldSample {
  double x, y, dx, dy;
};

// One dynamics step per grid node of a 2D box; dx, dy is the displacement.
inline std::vector<FieldSample> vector_field_export(const MinMaxFunction& f, const Box& box,
                                                    int grid, double alpha, Method method) {
  if (f.n() != 1 || f.m() != 1)
    throw std::invalid_argument("vector_field_export: requires n = m = 1");
  box.validate();
  if (box.dim() != 2) throw std::invalid_argument("vector_field_export: box must be 2D");
  if (grid < 2) throw std::invalid_argument("vector_field_export: grid must be >= 2");

  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      PointXY p{VectorXd::Constant(1, box.lo[0] + i * (box.hi[0] - box.lo[0]) / (grid - 1)),
                VectorXd::Constant(1, box.lo[1] + j * (box.hi[1] - box.lo[1]) / (grid - 1))};
      PointXY q = method == Method::GDA ? gda_step(f, p, alpha)
                                        : ogda_step(f, LiftedState{p, p}, alpha).cur;
      out.push_back({p.x[0], p.y[0], q.x[0] - p.x[0], q.y[0] - p.y[0]});
    }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "# samples=" << r.config.samples << " method=" << to_string(r.config.method)
     << " alpha=" << r.config.step.alpha << " max_iters=" << r.config.step.max_iters
     << " seed=" << r.config.seed << " attribution_radius=" << r.config.attribution_radius << "\n";
  os << "critical_point,fraction\n";
  for (std::size_t i = 0; i < r.critical_points.size(); ++i)
    os << "\"" << format_point(r.critical_points[i]) << "\"," << r.per_point_fraction[i] << "\n";
  os << "diverged," << r.diverged_fraction << "\n";
  os << "unresolved," << r.unresolved_fraction << "\n";
}

inline nlohmann::json sweep_to_json(const SweepResult& r) {
  nlohmann::json j;
  j["samples"] = r.config.samples;
  j["method"] = to_string(r.config.method);
  j["alpha"] = r.config.step.alpha;
  j["max_iters"] = r.config.step.max_iters;
  j["seed"] = r.config.seed;
  j["attribution_radius"] = r.config.attribution_radius;
  j["per_point"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.critical_points.size(); ++i)
    j["per_point"].push_back(
        {{"point", format_point(r.critical_points[i])}, {"fraction", r.per_point_fraction[i]}});
  j["diverged_fraction"] = r.diverged_fraction;
  j["unresolved_fraction"] = r.unresolved_fraction;
  return j;
}

inline void write_field_csv(std::ostream& os, const std::vector<FieldSample>& field,
                            const Box& box, double alpha, Method method) {
  os << "# alpha=" << alpha << " method=" << to_string(method) << " box=[" << box.lo[0] << ","
     << box.hi[0] << "]x[" << box.lo[1] << "," << box.hi[1] << "]\n";
  os << "x,y,dx,dy\n";
  for (const FieldSample& s : field) os << s.x << "," << s.y << "," << s.dx << "," << s.dy << "\n";
}

}  // namespace minmax
