// Command-line surface: classification, trajectory tracing, basin sweeps,
// vector-field export and the self-check property suite.
//
// Exit codes: 0 success, 1 input error, 2 internal-consistency error,
// 3 property failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minmax/minmax.hpp"

namespace {

using namespace minmax;

struct CommonOpts {
  std::string fn;
  std::uint64_t fn_seed = 0;
  double alpha = 0.001;
  std::uint64_t seed = 0;
  std::vector<double> box_bounds;  // lo hi, uniform per axis
  std::string out_path;
  std::string format = "md";
};

MinMaxFunction resolve_function(const CommonOpts& o) {
  if (is_builtin_name(o.fn)) return builtin(o.fn, o.fn_seed);
  return MinMaxFunction::from_file(o.fn);
}

Box resolve_box(const CommonOpts& o, int dim) {
  double lo = -5.0, hi = 5.0;
  if (!o.box_bounds.empty()) {
    if (o.box_bounds.size() != 2) throw std::invalid_argument("--box expects two values: lo hi");
    lo = o.box_bounds[0];
    hi = o.box_bounds[1];
  }
  Box b = Box::cube(dim, lo, hi);
  b.validate();
  return b;
}

// Output goes to the named file, or stdout when no path is given.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::uint64_t default_seed_from_env() {
  if (const char* s = std::getenv("MINMAX_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--fn", o.fn, "builtin name or function JSON path")->required();
  cmd->add_option("--fn-seed", o.fn_seed, "instance seed for planted10d");
  cmd->add_option("--alpha", o.alpha, "step size");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--box", o.box_bounds, "box bounds, lo hi, applied per axis")->expected(2);
  cmd->add_option("--out", o.out_path, "output path (default: stdout)");
}

Method parse_method(const std::string& s) {
  if (s == "gda") return Method::GDA;
  if (s == "ogda") return Method::OGDA;
  throw std::invalid_argument("--dyn must be gda or ogda");
}

int run_classify(const CommonOpts& o, int seeds) {
  const MinMaxFunction f = resolve_function(o);
  const Box box = resolve_box(o, f.dim());
  const auto reports = full_report(f, box, o.alpha, seeds, o.seed);
  OutputTarget out(o.out_path);
  if (o.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(report_to_json(r));
    out.stream() << j.dump(2) << "\n";
  } else {
    write_report_markdown(out.stream(), reports);
  }
  if (f.label() == "composite2d") {
    out.stream() << "\nnote: verdicts are computed from the spectrum of H at each point; near "
                    "(0,0) this function inherits the rotational spectrum of f2 (GDA-unstable, "
                    "OGDA-stable) and near (1,1) the spectrum of f1 (GDA-stable). See README for "
                    "discussion.\n";
  }
  return 0;
}

int run_trace(const CommonOpts& o, const std::string& dyn, const std::vector<double>& start,
              long max_iters) {
  const MinMaxFunction f = resolve_function(o);
  const Method method = parse_method(dyn);
  if (static_cast<int>(start.size()) != f.dim())
    throw std::invalid_argument("--start expects n + m values");
  VectorXd z(f.dim());
  for (int i = 0; i < f.dim(); ++i) z[i] = start[i];
  if (!z.allFinite()) throw std::invalid_argument("--start has non-finite entries");
  StepConfig cfg;
  cfg.alpha = o.alpha;
  cfg.max_iters = max_iters;
  const TrajectoryResult res =
      run(f, PointXY::from_flat(z, f.n(), f.m()), cfg, method, /*trace=*/true);
  OutputTarget out(o.out_path);
  write_trajectory_csv(out.stream(), f, method, res);
  return 0;
}

int run_sweep(const CommonOpts& o, const std::string& dyn, long samples, long max_iters) {
  const MinMaxFunction f = resolve_function(o);
  const Box box = resolve_box(o, f.dim());
  const auto reports = full_report(f, box, o.alpha, 64, o.seed);
  CriticalPointSet cps;
  for (const auto& r : reports) {
    cps.points.push_back(r.point);
    cps.residuals.push_back(r.grad_norm);
    cps.merged_multiplicity.push_back(1);
  }
  SweepConfig cfg;
  cfg.box = box;
  cfg.samples = samples;
  cfg.method = parse_method(dyn);
  cfg.step.alpha = o.alpha;
  cfg.step.max_iters = max_iters;
  cfg.seed = o.seed;
  const SweepResult res = basin_sweep(f, cps, cfg);
  const double unstable_mass = avoidance_check(res, reports, cfg.method);
  OutputTarget out(o.out_path);
  if (o.format == "json") {
    nlohmann::json j = sweep_to_json(res);
    j["unstable_mass"] = unstable_mass;
    out.stream() << j.dump(2) << "\n";
  } else {
    write_sweep_csv(out.stream(), res);
    out.stream() << "unstable_mass," << unstable_mass << "\n";
  }
  return 0;
}

int run_field(const CommonOpts& o, const std::string& dyn, int grid) {
  const MinMaxFunction f = resolve_function(o);
  const Box box = resolve_box(o, 2);
  const auto field = vector_field_export(f, box, grid, o.alpha, parse_method(dyn));
  OutputTarget out(o.out_path);
  write_field_csv(out.stream(), field, box, o.alpha, parse_method(dyn));
  return 0;
}

int run_check(const CommonOpts& o) {
  const MinMaxFunction f = resolve_function(o);
  const Box box = resolve_box(o, f.dim());
  const auto results = run_property_suite(f, box, o.alpha, o.seed);
  OutputTarget out(o.out_path);
  bool all_pass = true;
  for (const PropertyResult& r : results) {
    out.stream() << (r.pass ? "PASS" : "FAIL") << " " << r.name << " (" << r.detail << ")\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"min-max dynamics toolbox: GDA/OGDA trajectories, stability classification, "
               "basin sweeps"};
  app.require_subcommand(1);

  CommonOpts o;
  o.seed = default_seed_from_env();

  auto* classify = app.add_subcommand("classify", "find and classify critical points");
  int seeds = 64;
  add_common(classify, o);
  classify->add_option("--seeds", seeds, "random Newton starts");
  classify->add_option("--format", o.format, "md or json");

  auto* trace = app.add_subcommand("trace", "run one trajectory, CSV output");
  std::string dyn = "gda";
  std::vector<double> start;
  long max_iters = 10000;
  add_common(trace, o);
  trace->add_option("--dyn", dyn, "gda or ogda");
  trace->add_option("--start", start, "start point, n + m values")->required()->expected(-2);
  trace->add_option("--max-iters", max_iters, "iteration budget");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo basin-of-attraction sweep");
  long samples = 10000;
  long sweep_iters = 100000;
  add_common(sweep, o);
  sweep->add_option("--dyn", dyn, "gda or ogda");
  sweep->add_option("--samples", samples, "number of sampled starts");
  sweep->add_option("--max-iters", sweep_iters, "iteration budget per trajectory");
  sweep->add_option("--format", o.format, "csv or json");

  auto* field = app.add_subcommand("field", "export a 2D vector field as CSV");
  int grid = 50;
  add_common(field, o);
  field->add_option("--dyn", dyn, "gda or ogda");
  field->add_option("--grid", grid, "grid nodes per axis");

  auto* check = app.add_subcommand("check", "run the property suite");
  add_common(check, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) return run_classify(o, seeds);
    if (trace->parsed()) return run_trace(o, dyn, start, max_iters);
    if (sweep->parsed()) return run_sweep(o, dyn, samples, sweep_iters);
    if (field->parsed()) return run_field(o, dyn, grid);
    if (check->parsed()) return run_check(o);
  } catch (const minmax::internal_consistency_error& e) {
    std::cerr << "internal consistency error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
