#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "hopflax/conditions.hpp"
#include "hopflax/experiment.hpp"
#include "hopflax/field_io.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/moreau.hpp"
#include "hopflax/pathology.hpp"
#include "hopflax/report.hpp"
#include "hopflax/spec_parse.hpp"

using namespace hopflax;
using nlohmann::json;

namespace {

void output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") std::cout << bytes;
  else write_text(path, bytes);
}

// A path to an existing field file, or a field spec.
Field load_input(const std::string& in, std::size_t n) {
  if (std::filesystem::is_regular_file(in)) return load_field(in);
  return parse_field(in, n);
}

struct SolveArgs {
  double t = 0.1;
  std::string lagrangian = "quadratic";
  std::string in;
  std::string out;
  std::string method = "auto";
  std::size_t n = 1;
  std::size_t res = 129;
  double box = 2.0;
  int levels = 3;
};

int run_solve(const SolveArgs& a) {
  const Field u = load_input(a.in, a.n);
  const Kernel l = parse_kernel(a.lagrangian, u.dim());
  std::string method = a.method;
  if (method == "auto") {
    if (!u.is_tabulated()) method = "brute";
    else if (l.describe() == "quadratic") method = "moreau";
    else if (l.separable_parts(u.dim())) method = "separable";
    else method = "brute";
  }
  HopfLaxSolution sol;
  if (method == "moreau") {
    if (l.describe() != "quadratic") throw Error("--method moreau needs --lagrangian quadratic");
    sol = moreau_quadratic(u, a.t);
  } else if (method == "separable") {
    sol = hopf_lax_separable(u, l, a.t);
  } else if (method == "brute") {
    const Grid g = u.is_tabulated() ? u.grid() : Grid::uniform(u.dim(), -a.box, a.box, a.res);
    SearchPlan plan;
    plan.levels = a.levels;
    sol = hopf_lax_brute(u, l, a.t, g, plan);
  } else {
    throw Error("unknown method '" + method + "' (auto, brute, moreau, separable)");
  }
  std::ostringstream os;
  write_solution(os, sol);
  output(a.out, os.str());
  return 0;
}

struct TransformArgs {
  std::string hamiltonian = "quadratic";
  std::string in;  // two-column samples (1D), overrides --hamiltonian
  std::size_t n = 1;
  double pmax = 4.0;
  std::size_t psamples = 801;
  double qmax = 3.0;
  std::size_t qsamples = 121;
  std::string mode = "auto";
  std::string format = "csv";
  std::string out;
};

int run_transform(const TransformArgs& a) {
  const ReportFormat f = parse_format(a.format);
  json j;
  std::string csv;
  if (!a.in.empty() || a.n == 1) {
    std::vector<double> p, h;
    if (!a.in.empty()) {
      std::tie(p, h) = read_two_column(a.in);
    } else {
      const Kernel k = parse_kernel(a.hamiltonian, 1);
      const Grid pg = Grid::line(-a.pmax, a.pmax, a.psamples);
      for (std::size_t i = 0; i < pg.size(); ++i) {
        p.push_back(pg.coordinate(0, i));
        const double x[1] = {p.back()};
        h.push_back(k.eval(std::span<const double>(x, 1)));
      }
    }
    const Grid qg = Grid::line(-a.qmax, a.qmax, a.qsamples);
    std::vector<double> q(qg.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = qg.coordinate(0, i);
    const Conjugate1D c = legendre_1d(p, h, q);
    csv = "q,value,trusted\n";
    for (std::size_t i = 0; i < q.size(); ++i)
      csv += json(q[i]).dump() + ',' + json(c.values[i]).dump() + ',' + (c.trusted[i] ? "1" : "0") + '\n';
    j = {{"q", c.q}, {"values", c.values}, {"slope_lo", c.slope_lo}, {"slope_hi", c.slope_hi}};
    std::vector<int> tr(c.trusted.begin(), c.trusted.end());
    j["trusted"] = tr;
  } else {
    const Kernel k = parse_kernel(a.hamiltonian, a.n);
    const Grid pg = Grid::uniform(a.n, -a.pmax, a.pmax, a.psamples);
    const Grid qg = Grid::uniform(a.n, -a.qmax, a.qmax, a.qsamples);
    ConjugateMode mode = ConjugateMode::Auto;
    if (a.mode == "separable") mode = ConjugateMode::Separable;
    else if (a.mode == "brute") mode = ConjugateMode::Brute;
    else if (a.mode != "auto") throw Error("unknown mode '" + a.mode + "' (auto, separable, brute)");
    const ConjugateND c = legendre_nd(k, pg, qg, mode);
    csv.clear();
    for (std::size_t d = 0; d < a.n; ++d) csv += "q" + std::to_string(d + 1) + ',';
    csv += "value,trusted\n";
    for (std::size_t i = 0; i < qg.size(); ++i) {
      const Point q = qg.point(i);
      for (std::size_t d = 0; d < a.n; ++d) csv += json(q[d]).dump() + ',';
      csv += json(c.values.values()[i]).dump() + ',' + (c.trusted[i] ? "1" : "0") + '\n';
    }
    j = {{"hamiltonian", k.describe()}, {"values", c.values.values()}, {"trusted_count", c.trusted_count()}};
  }
  output(a.out, f == ReportFormat::Csv ? csv : j.dump(2) + '\n');
  return 0;
}

struct CheckArgs {
  std::string hamiltonian;
  std::string lagrangian;
  std::size_t n = 2;
  double rmin = 0.5;
  double rmax = 1e3;
  std::size_t radii = 13;
  std::size_t dirs = 16;
  std::uint64_t seed = 20240917;
  std::string out;
};

int run_check(const CheckArgs& a) {
  if (a.hamiltonian.empty() && a.lagrangian.empty()) throw Error("give --hamiltonian and/or --lagrangian");
  const SamplePlan plan = log_plan(a.n, a.rmin, a.rmax, a.radii, a.n > 1 ? a.dirs : 0, a.seed);
  json j = json::object();
  if (!a.hamiltonian.empty()) {
    const Kernel h = parse_kernel(a.hamiltonian, a.n);
    j["hamiltonian"] = h.describe();
    j["paha2"] = to_json(check_doubling(h, plan));
    j["paha3"] = to_json(check_quasi_radial(h, plan));
  }
  if (!a.lagrangian.empty()) {
    const Kernel l = parse_kernel(a.lagrangian, a.n);
    j["lagrangian"] = l.describe();
    j["aina"] = to_json(check_growth_ratio(l, plan));
  }
  output(a.out, j.dump(2) + '\n');
  return 0;
}

struct ConstructArgs {
  std::string name;
  std::size_t n = 0;
  double p = 0, alpha = 0, s = 0, s2 = 0;
  int kmin = 0, kmax = 0;
  std::size_t res = 0;
  double box = 0;
  std::string sample;  // optional path for a sampled field
  std::string out;
};

int run_construct(const ConstructArgs& a, const CLI::App& sub) {
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  json prov;
  std::optional<Field> field;
  double lo = 0.0, hi = 1.0;
  if (a.name == "grid-bump") {
    GridBumpSpec g;
    if (given("--n")) g.n = a.n;
    if (given("--kmax")) g.k_max = a.kmax;
    field = build_grid_bump(g);
    prov = provenance(g);
  } else if (a.name == "exponential") {
    ExponentialSpec e;
    if (given("--n")) e.n = a.n;
    if (given("--p")) e.p = a.p;
    if (given("--alpha")) e.alpha = a.alpha;
    if (given("--kmin")) e.k_min = a.kmin;
    if (given("--kmax")) e.k_max = a.kmax;
    field = build_exponential(e);
    prov = provenance(e);
    lo = -0.5;
    hi = e.centre(e.k_min)[0] + e.ball_radius(e.k_min);
  } else if (a.name == "anisotropic") {
    AnisotropicSpec s;
    if (given("--s")) s.s = a.s;
    if (given("--s2")) s.s2 = a.s2;
    if (given("--p")) s.p = a.p;
    if (given("--alpha")) s.alpha = a.alpha;
    field = build_anisotropic(s);
    prov = provenance(s);
    lo = -2.0;
    hi = 2.0;
  } else {
    throw Error("unknown construction '" + a.name + "' (grid-bump, exponential, anisotropic)");
  }
  if (given("--box")) {
    lo = -a.box;
    hi = a.box;
  }
  if (!a.sample.empty()) {
    const std::size_t res = a.res ? a.res : 65;
    save_field(a.sample, sample(*field, Grid::uniform(field->dim(), lo, hi, res)));
  }
  output(a.out, prov.dump(2) + '\n');
  return 0;
}

const std::map<std::string, std::string> kExperimentFlags = {
    {"--field", "field"},     {"--lagrangian", "lagrangian"}, {"--hamiltonian", "hamiltonian"},
    {"--n", "n"},             {"--p", "p"},                   {"--alpha", "alpha"},
    {"--s", "s"},             {"--s2", "s2"},                 {"--kmin", "kmin"},
    {"--kmax", "kmax"},       {"--base", "base"},             {"--tmax-exp", "tmax_exp"},
    {"--tmin-exp", "tmin_exp"}, {"--res", "res"},             {"--box", "box"},
    {"--levels", "levels"},   {"--samples", "samples"},       {"--seed", "seed"},
    {"--format", "format"},   {"--out", "out"},               {"--expect", "expect"}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hopf-Lax solver, Legendre transforms and counterexample experiments"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve u_t = inf_a u(x + t a) + t L(a) on a grid");
  solve->add_option("--t", sa.t, "Time t > 0")->required();
  solve->add_option("--lagrangian", sa.lagrangian, "Kernel spec, e.g. quadratic, power:q=3, aniso:s=3,s2=2");
  solve->add_option("--in", sa.in, "Field file, or a field spec such as bump or grid-bump:kmax=2")->required();
  solve->add_option("--out", sa.out, "Solution path (default stdout)");
  solve->add_option("--method", sa.method, "auto, brute, moreau or separable");
  solve->add_option("--n", sa.n, "Dimension for field specs");
  solve->add_option("--res", sa.res, "Points per axis for closed-form fields");
  solve->add_option("--box", sa.box, "Half-width of the output box for closed-form fields");
  solve->add_option("--levels", sa.levels, "Refinement levels for closed-form fields");

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Discrete Legendre-Fenchel transform");
  transform->add_option("--hamiltonian", ta.hamiltonian, "Kernel spec to conjugate");
  transform->add_option("--in", ta.in, "Two-column samples 'p H(p)' (1D)");
  transform->add_option("--n", ta.n, "Dimension");
  transform->add_option("--pmax", ta.pmax, "Sample box half-width in p");
  transform->add_option("--psamples", ta.psamples, "Samples per axis in p");
  transform->add_option("--qmax", ta.qmax, "Output half-width in q");
  transform->add_option("--qsamples", ta.qsamples, "Output points per axis in q");
  transform->add_option("--mode", ta.mode, "auto, separable or brute (n > 1)");
  transform->add_option("--format", ta.format, "csv or json");
  transform->add_option("--out", ta.out, "Output path (default stdout)");

  CheckArgs ca;
  auto* check = app.add_subcommand("check-conditions", "Sample the growth, doubling and quasi-radial conditions");
  check->add_option("--hamiltonian", ca.hamiltonian, "H spec: doubling and quasi-radial checks");
  check->add_option("--lagrangian", ca.lagrangian, "L spec: growth-ratio check");
  check->add_option("--n", ca.n, "Dimension");
  check->add_option("--rmin", ca.rmin, "Smallest radius");
  check->add_option("--rmax", ca.rmax, "Largest radius");
  check->add_option("--radii", ca.radii, "Number of log-spaced radii");
  check->add_option("--dirs", ca.dirs, "Random directions besides the axes");
  check->add_option("--seed", ca.seed, "Direction seed");
  check->add_option("--out", ca.out, "Output path (default stdout)");

  std::string exp_id, config_path;
  bool timing = false;
  std::map<std::string, std::string> exp_values;
  auto* experiment = app.add_subcommand("experiment", "Run an experiment preset");
  experiment->add_option("id", exp_id, "converge, bump-blowup, exp-blowup, aniso-blowup, conditions, transform-check")
      ->required();
  experiment->add_option("--config", config_path, "key = value file applied before flags");
  experiment->add_flag("--timing", timing, "Record wall-clock runtimes (reports are then not byte-stable)");
  for (const auto& [flag, key] : kExperimentFlags) experiment->add_option(flag, exp_values[key]);

  ConstructArgs cona;
  auto* construct = app.add_subcommand("construct", "Build a counterexample field and print its provenance");
  construct->add_option("name", cona.name, "grid-bump, exponential or anisotropic")->required();
  construct->add_option("--n", cona.n);
  construct->add_option("--p", cona.p);
  construct->add_option("--alpha", cona.alpha);
  construct->add_option("--s", cona.s);
  construct->add_option("--s2", cona.s2);
  construct->add_option("--kmin", cona.kmin);
  construct->add_option("--kmax", cona.kmax);
  construct->add_option("--res", cona.res, "Points per axis for --sample");
  construct->add_option("--box", cona.box, "Half-width of the sampling box");
  construct->add_option("--sample", cona.sample, "Write the field sampled on a grid to this path");
  construct->add_option("--out", cona.out, "Provenance path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*transform) return run_transform(ta);
    if (*check) return run_check(ca);
    if (*construct) return run_construct(cona, *construct);
    if (*experiment) {
      ExperimentConfig cfg = defaults_for(exp_id);
      if (!config_path.empty()) {
        auto kv = read_config(config_path);
        kv.erase("id");
        kv.erase("experiment");
        apply_settings(cfg, kv);
      }
      for (const auto& [flag, key] : kExperimentFlags)
        if (experiment->count(flag)) apply_setting(cfg, key, exp_values[key]);
      if (timing) cfg.timing = true;
      const ExperimentOutput res = run_experiment(cfg);
      output(cfg.out, res.bytes);
      std::cerr << exp_id << ": verdict " << res.verdict << " (expected " << res.expected << ")\n";
      return res.verdict == res.expected ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
