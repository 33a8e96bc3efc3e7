#include "hopflax/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hopflax/conditions.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/pathology.hpp"
#include "hopflax/spec_parse.hpp"
#include "numfmt.hpp"
#include "parallel.hpp"

namespace hopflax {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(Clock::time_point start, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

// Simpson on an odd number of equally spaced samples over [0, b].
double simpson_samples(const std::vector<double>& f, double b) {
  const std::size_t m = f.size();
  if (m < 3 || m % 2 == 0) throw Error("simpson needs an odd sample count >= 3");
  const double h = b / static_cast<double>(m - 1);
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

template <class F>
double simpson(F f, double a, double b, std::size_t panels) {
  std::vector<double> v(2 * panels + 1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a + (b - a) * static_cast<double>(i) / static_cast<double>(v.size() - 1));
  return simpson_samples(v, b - a);
}

// One solved point of a divergence run.
struct Probe {
  double value = 0.0;
  Point grad;
  bool nondiff = false;
  double displacement = 0.0;  // t |a*|
  double reeval_error = 0.0;
  double excess = 0.0;  // u_t(x) - u(x)
};

Probe probe(const PointSolver& solver, const Field& u, const Lagrangian& l, double t, const Point& x) {
  const PointSolution ps = solver.solve(x);
  Probe p;
  p.value = ps.value;
  const double tol = solver.plan().rel_tol * (1.0 + std::abs(ps.value));
  const auto g = gradient_at(ps, l, t, solver.merge_radius(), tol);
  p.nondiff = !g;
  p.grad = g ? *g : -1.0 * l.grad(ps.argmin);
  p.displacement = t * ps.argmin.norm();
  p.reeval_error = std::abs(solver.objective(x, ps.argmin) - ps.value);
  p.excess = ps.value - u.value_at(x);
  return p;
}

std::vector<Probe> probe_all(const PointSolver& solver, const Field& u, const Lagrangian& l, double t,
                             const std::vector<Point>& xs) {
  std::vector<Probe> out(xs.size());
  detail::parallel_for(xs.size(), [&](std::size_t i) { out[i] = probe(solver, u, l, t, xs[i]); });
  return out;
}

json invariant_extras(const std::vector<Probe>& ps) {
  double reeval = 0.0, excess = -std::numeric_limits<double>::infinity();
  for (const Probe& p : ps) {
    reeval = std::max(reeval, p.reeval_error);
    excess = std::max(excess, p.excess);
  }
  return {{"max_reeval_error", reeval}, {"max_excess_over_u", excess}};
}

std::vector<double> displacements(const std::vector<Probe>& ps) {
  std::vector<double> d;
  for (const Probe& p : ps) d.push_back(p.displacement);
  return d;
}

std::string aniso_spec(double s, double s2) {
  return "aniso:s=" + detail::fmt(s) + ",s2=" + detail::fmt(s2);
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  const double d = detail::parse_double(v);
  if (d < 0 || d != std::floor(d)) throw Error(key + " must be a nonnegative integer");
  return static_cast<std::size_t>(d);
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = detail::parse_double(v);
  if (d != std::floor(d)) throw Error(key + " must be an integer");
  return static_cast<int>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(key + " must be a boolean");
}

}  // namespace

// ------------------------------------------------------------------ config

std::vector<double> ExperimentConfig::times() const {
  std::vector<double> t;
  if (id == "exp-blowup") {
    for (int k = kmin; k <= kmax; ++k) t.push_back(std::pow(base, -k));
  } else {
    for (int j = tmax_exp; j <= tmin_exp; ++j) t.push_back(std::pow(base, -j));
  }
  return t;
}

void ExperimentConfig::validate() const {
  if (std::find(std::begin(kExperimentIds), std::end(kExperimentIds), id) == std::end(kExperimentIds))
    throw Error("unknown experiment '" + id + "'");
  if (n == 0 || n > kMaxDim) throw Error("n must be in 1..4");
  if (!(p >= 1.0)) throw Error("p must be >= 1");
  if (!(base > 1.0)) throw Error("base must exceed 1");
  if (res != 0 && res < 17) throw Error("res must be at least 17 per axis");
  if (!(box > 0.0)) throw Error("box must be positive");
  if (levels < 0) throw Error("levels must be >= 0");
  if (id == "converge" || id == "bump-blowup" || id == "aniso-blowup") {
    if (tmin_exp < tmax_exp) throw Error("need tmin-exp >= tmax-exp (t-sequence must decrease)");
  }
  if (id == "exp-blowup" && kmax < kmin) throw Error("need kmax >= kmin");
  if (format != "csv" && format != "json") throw Error("format must be csv or json");
}

json ExperimentConfig::to_json() const {
  return {{"id", id},       {"field", field},       {"lagrangian", lagrangian}, {"hamiltonian", hamiltonian},
          {"n", n},         {"p", p},               {"alpha", alpha},           {"s", s},
          {"s2", s2},       {"kmin", kmin},         {"kmax", kmax},             {"base", base},
          {"tmax_exp", tmax_exp}, {"tmin_exp", tmin_exp}, {"res", res},     {"box", box},
          {"levels", levels}, {"samples", samples}, {"seed", seed}};
}

ExperimentConfig defaults_for(const std::string& id) {
  ExperimentConfig c;
  c.id = id;
  if (id == "converge") {
    // defaults above
  } else if (id == "bump-blowup") {
    c.field = "grid-bump";
    c.n = 2;
    c.p = 2.0;
    c.kmax = 3;
    c.base = 4.0;
    c.tmax_exp = 2;
    c.tmin_exp = 4;
    c.levels = 3;
    c.samples = 64;
  } else if (id == "exp-blowup") {
    c.field = "exponential";
    c.lagrangian = "exp-radial";
    c.n = 3;
    c.p = 4.0;
    c.alpha = 0.6;
    c.kmin = 2;
    c.kmax = 6;
    c.levels = 4;
    c.samples = 401;
  } else if (id == "aniso-blowup") {
    c.field = "anisotropic";
    c.lagrangian = "";
    c.n = 2;
    c.p = 4.0;
    c.alpha = 0.51;
    c.tmax_exp = 1;
    c.tmin_exp = 10;
    c.levels = 4;
    c.samples = 16;
  } else if (id == "conditions") {
    c.n = 2;
  } else if (id == "transform-check") {
    c.lagrangian = "";
    c.n = 2;
  } else {
    throw Error("unknown experiment '" + id + "'");
  }
  return c;
}

void apply_setting(ExperimentConfig& c, std::string key, const std::string& v) {
  key = normalize_key(key);
  if (key == "id" || key == "experiment") c.id = v;
  else if (key == "field") c.field = v;
  else if (key == "lagrangian") c.lagrangian = v;
  else if (key == "hamiltonian") c.hamiltonian = v;
  else if (key == "n") c.n = parse_size(key, v);
  else if (key == "p") c.p = detail::parse_double(v);
  else if (key == "alpha") c.alpha = detail::parse_double(v);
  else if (key == "s") c.s = detail::parse_double(v);
  else if (key == "s2") c.s2 = detail::parse_double(v);
  else if (key == "kmin") c.kmin = parse_int(key, v);
  else if (key == "kmax") c.kmax = parse_int(key, v);
  else if (key == "base") c.base = detail::parse_double(v);
  else if (key == "tmax_exp") c.tmax_exp = parse_int(key, v);
  else if (key == "tmin_exp") c.tmin_exp = parse_int(key, v);
  else if (key == "res") c.res = parse_size(key, v);
  else if (key == "box") c.box = detail::parse_double(v);
  else if (key == "levels") c.levels = parse_int(key, v);
  else if (key == "samples") c.samples = parse_size(key, v);
  else if (key == "seed") c.seed = parse_size(key, v);
  else if (key == "timing") c.timing = parse_bool(key, v);
  else if (key == "format") c.format = v;
  else if (key == "out") c.out = v;
  else if (key == "expect") c.expect = v;
  else throw Error("unknown setting '" + key + "'");
}

void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
}

std::string expected_verdict(const ExperimentConfig& cfg) {
  if (!cfg.expect.empty()) return cfg.expect;
  if (cfg.id == "converge") return "converging";
  if (cfg.id == "bump-blowup" || cfg.id == "exp-blowup") return "blowup";
  if (cfg.id == "aniso-blowup") {
    AnisotropicSpec a{cfg.s, cfg.s2, cfg.p, cfg.alpha};
    return a.beta() < 0.0 ? "blowup" : "bounded";
  }
  if (cfg.id == "conditions") return "consistent";
  if (cfg.id == "transform-check") return "match";
  throw Error("unknown experiment '" + cfg.id + "'");
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("slope fit needs >= 2 matching points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("slope fit needs distinct x values");
  return sxy / sxx;
}

bool offsets_resolved(std::vector<double> d, double resolution) {
  std::erase_if(d, [](double v) { return v == 0.0; });
  if (d.empty()) return true;
  return median(std::move(d)) >= 4.0 * resolution;
}

// ------------------------------------------------------------- convergence

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n;
  const Field u = parse_field(cfg.field, n);
  const Kernel l = parse_kernel(cfg.lagrangian, n);
  const std::size_t res = cfg.res ? cfg.res : (n == 1 ? 257 : n == 2 ? 65 : 17);
  const Grid grid = Grid::uniform(n, -cfg.box, cfg.box, res);

  ConvergenceReport rep;
  rep.experiment = cfg.id;
  rep.config = cfg.to_json();
  rep.config["res"] = res;
  rep.expected = expected_verdict(cfg);
  rep.provenance = {{"field", cfg.field}, {"lagrangian", l.describe()}, {"grid_spacing", grid.spacing(0)}};

  const ConditionReport aina = check_growth_ratio(l, log_plan(n, 0.5, 50.0, 9, n > 1 ? 8 : 0, cfg.seed));
  if (aina.verdict != Verdict::Holds)
    rep.warnings.push_back("growth-ratio condition " + to_string(aina.verdict) + " for " + l.describe());
  rep.summary["aina_verdict"] = to_string(aina.verdict);
  rep.summary["aina_extremum"] = aina.extremum;

  const VectorField du = u.has_gradient() ? sample_gradient(u, grid) : gradient_fd(sample(u, grid));
  rep.reference_norm = lp_norm(du, cfg.p);

  for (double t : cfg.times()) {
    const auto start = Clock::now();
    SearchPlan plan;
    plan.levels = cfg.levels;
    plan.lattice_spacing = grid.spacing(0);
    for (std::size_t d = 1; d < n; ++d) plan.lattice_spacing = std::min(plan.lattice_spacing, grid.spacing(d));
    const HopfLaxSolution sol = hopf_lax_brute(u, l, t, grid, plan);
    const GradientResult gr = gradient_from_minimizers(sol, l);

    ReportRow row;
    row.t = t;
    row.norm_grad_ut = lp_norm(gr.grad, cfg.p);
    row.norm_diff = lp_norm(difference(gr.grad, du), cfg.p);
    row.nondiff_fraction = gr.nondiff_fraction;

    const PointSolver solver(u, l, t, plan);
    double reeval = 0.0, excess = -std::numeric_limits<double>::infinity();
    std::vector<double> disp(sol.size());
    for (std::size_t i = 0; i < sol.size(); ++i) {
      const Point x = grid.point(i);
      reeval = std::max(reeval, std::abs(solver.objective(x, sol.offset(i)) - sol.values[i]));
      excess = std::max(excess, sol.values[i] - u.value_at(x));
      disp[i] = t * sol.offset(i).norm();
    }
    row.trusted = offsets_resolved(disp, sol.resolution);
    row.extras = {{"max_reeval_error", reeval},
                  {"max_excess_over_u", excess},
                  {"search_radius", sol.search_radius_used},
                  {"resolution", sol.resolution},
                  {"ratio", rep.reference_norm > 0.0 ? row.norm_grad_ut / rep.reference_norm : 0.0}};
    row.runtime_ms = elapsed_ms(start, cfg.timing);
    rep.rows.push_back(std::move(row));
  }

  std::vector<const ReportRow*> trusted;
  for (const auto& r : rep.rows)
    if (r.trusted) trusted.push_back(&r);
  const double tiny = 1e-14 * (1.0 + rep.reference_norm);
  if (trusted.size() < 3) {
    rep.verdict = "inconclusive";
    rep.warnings.push_back("fewer than 3 trusted rows");
  } else {
    const std::size_t m = trusted.size();
    const double d1 = trusted[m - 3]->norm_diff, d2 = trusted[m - 2]->norm_diff, d3 = trusted[m - 1]->norm_diff;
    const bool all_zero = d1 <= tiny && d2 <= tiny && d3 <= tiny;
    const bool decreasing = all_zero || (d1 > d2 && d2 > d3);
    bool bounded = true;
    double max_ratio = 0.0;
    const double first_ratio = trusted.front()->extras["ratio"].get<double>();
    for (const ReportRow* r : trusted) max_ratio = std::max(max_ratio, r->extras["ratio"].get<double>());
    if (rep.reference_norm > 0.0) bounded = max_ratio <= 1.5 * first_ratio;
    rep.verdict = decreasing && bounded ? "converging" : "not-converging";
    rep.summary["max_ratio"] = max_ratio;
    rep.summary["ratio_at_largest_t"] = first_ratio;
    rep.summary["final_relative_diff"] =
        rep.reference_norm > 0.0 ? trusted.back()->norm_diff / rep.reference_norm : trusted.back()->norm_diff;
  }

  std::vector<double> lx, ly;
  for (const ReportRow* r : trusted)
    if (r->norm_diff > tiny) {
      lx.push_back(std::log(r->t));
      ly.push_back(std::log(r->norm_diff));
    }
  rep.slope_metric = "log norm_diff vs log t";
  if (lx.size() >= 3) rep.slope = fit_slope(lx, ly);
  return rep;
}

// -------------------------------------------------------------- divergence

namespace {

ConvergenceReport bump_blowup(const ExperimentConfig& cfg, ConvergenceReport rep) {
  GridBumpSpec spec;
  spec.n = cfg.n;
  spec.k_max = cfg.kmax;
  spec.validate();
  const Field u = build_grid_bump(spec);
  const Kernel l = parse_kernel(cfg.lagrangian, cfg.n);
  rep.provenance = provenance(spec);
  rep.provenance["lagrangian"] = l.describe();

  const std::size_t m = cfg.samples;
  if (m < 2) throw Error("bump-blowup needs samples >= 2 per axis");
  const Grid cells = Grid::uniform(cfg.n, 0.5 / static_cast<double>(m), 1.0 - 0.5 / static_cast<double>(m), m);
  std::vector<Point> xs(cells.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = cells.point(i);

  bool measurable = true, all_met = true;
  std::vector<double> medians;
  for (double t : cfg.times()) {
    const auto start = Clock::now();
    const BadSet bad = predicted_bad_set(spec, t);
    SearchPlan plan;
    plan.levels = cfg.levels;
    plan.lattice_spacing = 0.5 / static_cast<double>(m);
    const PointSolver solver(u, l, t, plan);
    const auto probes = probe_all(solver, u, l, t, xs);

    std::size_t in_b = 0, complement = 0, complement_met = 0, bc_met = 0, nondiff = 0;
    std::vector<double> bc_mag;
    double sum_p = 0.0, sum_diff_p = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Probe& pr = probes[i];
      const double mag = pr.grad.norm();
      const Point du = u.gradient_at(xs[i]);
      sum_p += std::pow(mag, cfg.p);
      sum_diff_p += std::pow((pr.grad - du).norm(), cfg.p);
      nondiff += pr.nondiff;
      const bool b = bad.in_B(xs[i]);
      if (b) {
        ++in_b;
        continue;
      }
      bc_mag.push_back(mag);
      bc_met += mag >= bad.gradient_bound;
      if (!bad.in_Bj(xs[i])) {
        ++complement;
        complement_met += mag >= bad.gradient_bound;
      }
    }
    const double count = static_cast<double>(xs.size());
    ReportRow row;
    row.t = t;
    row.norm_grad_ut = std::pow(sum_p / count, 1.0 / cfg.p);
    row.norm_diff = std::pow(sum_diff_p / count, 1.0 / cfg.p);
    row.nondiff_fraction = static_cast<double>(nondiff) / count;
    row.trusted = offsets_resolved(displacements(probes), solver.resolution());
    const double med = median(bc_mag);
    medians.push_back(med);
    row.extras = invariant_extras(probes);
    row.extras["j"] = bad.j;
    row.extras["gradient_bound"] = bad.gradient_bound;
    row.extras["samples"] = xs.size();
    row.extras["in_B"] = in_b;
    row.extras["in_complement"] = complement;
    row.extras["complement_fraction_met"] =
        complement ? json(static_cast<double>(complement_met) / static_cast<double>(complement)) : json("unmeasurable");
    row.extras["Bc_fraction_met"] = bc_mag.empty() ? 0.0 : static_cast<double>(bc_met) / static_cast<double>(bc_mag.size());
    row.extras["median_grad_Bc"] = med;
    row.extras["Bj_radius"] = bad.radius_j;
    if (complement == 0) measurable = false;
    else if (static_cast<double>(complement_met) < 0.9 * static_cast<double>(complement)) all_met = false;
    row.runtime_ms = elapsed_ms(start, cfg.timing);
    rep.rows.push_back(std::move(row));
  }
  const bool medians_up = strictly_increasing(medians);
  rep.summary["medians_increasing"] = medians_up;
  rep.summary["complement_measurable"] = measurable;
  if (!measurable) {
    rep.verdict = "unmeasurable";
    rep.warnings.push_back("(B u B_j)^c holds no sample points for some j: B_j covers the unit cube");
  } else {
    rep.verdict = all_met && medians_up ? "blowup" : "no-blowup";
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < medians.size(); ++i)
    if (medians[i] > 0.0) {
      lx.push_back(std::log(rep.rows[i].t));
      ly.push_back(std::log(medians[i]));
    }
  rep.slope_metric = "log median |Du_t| on B^c vs log t";
  if (lx.size() >= 2) rep.slope = fit_slope(lx, ly);
  return rep;
}

ConvergenceReport exp_blowup(const ExperimentConfig& cfg, ConvergenceReport rep) {
  ExponentialSpec spec;
  spec.n = cfg.n;
  spec.p = cfg.p;
  spec.alpha = cfg.alpha;
  spec.k_min = cfg.kmin;
  spec.k_max = cfg.kmax;
  spec.validate();
  const Field u = build_exponential(spec);
  const Kernel l = parse_kernel(cfg.lagrangian, cfg.n);
  rep.provenance = provenance(spec);
  rep.provenance["lagrangian"] = l.describe();

  std::size_t m = std::max<std::size_t>(cfg.samples, 3);
  if (m % 2 == 0) ++m;
  const double omega = unit_sphere_area(cfg.n);
  const double nn = static_cast<double>(cfg.n);
  const double osc = oscillation(u);

  std::vector<double> ks, integrals;
  bool increasing = true;
  for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
    const auto start = Clock::now();
    const double t = std::pow(cfg.base, -k);
    const double r0 = spec.r0(k, t);
    ReportRow row;
    row.t = t;
    row.extras = {{"k", k}, {"r0", r0}};
    if (!(r0 > 0.0)) {
      rep.warnings.push_back("r0 <= 0 at k=" + std::to_string(k) + "; window is empty");
      row.extras["window_integral"] = 0.0;
      integrals.push_back(0.0);
      ks.push_back(k);
      rep.rows.push_back(std::move(row));
      continue;
    }
    SearchPlan plan;
    plan.levels = cfg.levels;
    plan.lattice_spacing = t * search_radius(osc, l, t) / 16.0;
    const PointSolver solver(u, l, t, plan);
    // u and L are radial about x_k on B(x_k, r_k), so u_t is too: integrate
    // along a ray orthogonal to the line of centres.
    Point dir(cfg.n);
    dir[cfg.n > 1 ? 1 : 0] = 1.0;
    std::vector<Point> xs(m);
    for (std::size_t i = 0; i < m; ++i)
      xs[i] = spec.centre(k) + (r0 * static_cast<double>(i) / static_cast<double>(m - 1)) * dir;
    const auto probes = probe_all(solver, u, l, t, xs);
    std::vector<double> f(m), fd(m);
    std::size_t nondiff = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = r0 * static_cast<double>(i) / static_cast<double>(m - 1);
      const double shell = omega * std::pow(r, nn - 1.0);
      f[i] = shell * std::pow(probes[i].grad.norm(), cfg.p);
      fd[i] = shell * std::pow((probes[i].grad - u.gradient_at(xs[i])).norm(), cfg.p);
      nondiff += probes[i].nondiff;
    }
    const double integral = simpson_samples(f, r0);
    // same window from the radial profile alone: |Du_t(x)| = phi'(|x - x_k| / t)
    const double profile = l.is_radial()
        ? omega * std::pow(t, nn) *
              simpson([&](double s) { return std::pow(s, nn - 1.0) * std::pow(l.radial_slope(s), cfg.p); }, 0.0,
                      r0 / t, 2048)
        : kNaN;
    row.norm_grad_ut = std::pow(integral, 1.0 / cfg.p);
    row.norm_diff = std::pow(simpson_samples(fd, r0), 1.0 / cfg.p);
    row.nondiff_fraction = static_cast<double>(nondiff) / static_cast<double>(m);
    row.trusted = offsets_resolved(displacements(probes), solver.resolution());
    json inv = invariant_extras(probes);
    row.extras.update(inv);
    row.extras["window_integral"] = integral;
    if (std::isfinite(profile)) row.extras["window_integral_profile"] = profile;
    row.runtime_ms = elapsed_ms(start, cfg.timing);
    if (!integrals.empty() && !(integral > integrals.back())) increasing = false;
    integrals.push_back(integral);
    ks.push_back(k);
    rep.rows.push_back(std::move(row));
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (integrals[i] > 0.0) {
      lx.push_back(std::log(ks[i]));
      ly.push_back(std::log(integrals[i]));
    }
  rep.slope_metric = "log window integral vs log k";
  if (lx.size() >= 2) rep.slope = fit_slope(lx, ly);
  rep.summary["integrals_increasing"] = increasing;
  rep.summary["predicted_exponent"] = nn - 1.0 - 1.5;
  if (rep.slope) rep.summary["growth_exponent"] = *rep.slope;
  rep.verdict = increasing && integrals.size() >= 2 ? "blowup" : "no-blowup";
  return rep;
}

ConvergenceReport aniso_blowup(const ExperimentConfig& cfg, ConvergenceReport rep) {
  if (cfg.n != 2) throw Error("aniso-blowup is planar (n = 2)");
  AnisotropicSpec spec{cfg.s, cfg.s2, cfg.p, cfg.alpha};
  spec.validate();
  const Field u = build_anisotropic(spec);
  const Kernel l = parse_kernel(cfg.lagrangian.empty() ? aniso_spec(cfg.s, cfg.s2) : cfg.lagrangian, 2);
  rep.provenance = provenance(spec);
  rep.provenance["lagrangian"] = l.describe();
  const double osc = oscillation(u);
  const std::size_t m = std::max<std::size_t>(cfg.samples, 1);

  std::vector<double> lx, ly, lyx;
  for (double t : cfg.times()) {
    const auto start = Clock::now();
    const double hx = spec.q_half_x(t), hy = spec.q_half_y(t);
    SearchPlan plan;
    plan.levels = cfg.levels;
    plan.lattice_spacing = t * search_radius(osc, l, t) / 32.0;
    const PointSolver solver(u, l, t, plan);
    std::vector<Point> xs;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double fx = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        const double fy = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
        xs.push_back(Point{hx * (2.0 * fx - 1.0), hy * (2.0 * fy - 1.0)});
      }
    const auto probes = probe_all(solver, u, l, t, xs);
    double sum_p = 0.0, sum_x_p = 0.0, sum_diff_p = 0.0;
    std::size_t nondiff = 0, at_origin = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sum_p += std::pow(probes[i].grad.norm(), cfg.p);
      sum_x_p += std::pow(std::abs(probes[i].grad[0]), cfg.p);
      sum_diff_p += std::pow((probes[i].grad - u.gradient_at(xs[i])).norm(), cfg.p);
      nondiff += probes[i].nondiff;
      at_origin += std::abs(probes[i].displacement - xs[i].norm()) <= 1e-12 * (1.0 + xs[i].norm());
    }
    const double area = 4.0 * hx * hy;
    const double count = static_cast<double>(xs.size());
    const double integral = area * sum_p / count;
    ReportRow row;
    row.t = t;
    row.norm_grad_ut = std::pow(integral, 1.0 / cfg.p);
    row.norm_diff = std::pow(area * sum_diff_p / count, 1.0 / cfg.p);
    row.nondiff_fraction = static_cast<double>(nondiff) / count;
    row.trusted = offsets_resolved(displacements(probes), solver.resolution());
    row.extras = invariant_extras(probes);
    row.extras["q_integral"] = integral;
    row.extras["q_integral_x"] = area * sum_x_p / count;
    row.extras["q_half_x"] = hx;
    row.extras["q_half_y"] = hy;
    row.extras["origin_minimizer_fraction"] = static_cast<double>(at_origin) / count;
    row.runtime_ms = elapsed_ms(start, cfg.timing);
    if (row.trusted && integral > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(integral));
      lyx.push_back(std::log(area * sum_x_p / count));
    }
    rep.rows.push_back(std::move(row));
  }
  rep.slope_metric = "log integral over Q_t of |Du_t|^p vs log t";
  rep.summary["beta"] = spec.beta();
  rep.summary["beta_negative_by_equivalence"] = spec.beta_negative_by_equivalence();
  if (lx.size() >= 3) {
    rep.slope = fit_slope(lx, ly);
    rep.summary["slope_minus_beta"] = *rep.slope - spec.beta();
    rep.summary["slope_x_part"] = fit_slope(lx, lyx);
    rep.verdict = *rep.slope < 0.0 ? "blowup" : "bounded";
  } else {
    rep.verdict = "inconclusive";
    rep.warnings.push_back("fewer than 3 trusted rows");
  }
  return rep;
}

}  // namespace

ConvergenceReport run_divergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.experiment = cfg.id;
  rep.config = cfg.to_json();
  rep.expected = expected_verdict(cfg);
  if (cfg.id == "bump-blowup") return bump_blowup(cfg, std::move(rep));
  if (cfg.id == "exp-blowup") return exp_blowup(cfg, std::move(rep));
  if (cfg.id == "aniso-blowup") return aniso_blowup(cfg, std::move(rep));
  throw Error("run_divergence: '" + cfg.id + "' is not a divergence experiment");
}

// -------------------------------------------------------------- conditions

ConditionBundle run_conditions(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n;
  const Kernel h = parse_kernel(cfg.hamiltonian, n);
  const std::size_t dirs = n > 1 ? 16 : 0;
  const NumericConjugate conj = conjugate_kernel(h, n, 20.0);
  const double r_max = std::min(50.0, 0.5 * conj.trusted_radius);
  if (!(r_max > 1.0)) throw Error("numeric conjugate is trusted only up to |q| = " + detail::fmt(conj.trusted_radius));

  ConditionBundle b;
  b.hamiltonian = h.describe();
  b.lagrangian = conj.kernel.describe();
  b.trusted_radius = conj.trusted_radius;
  const SamplePlan hplan = log_plan(n, 0.5, 1e6, 25, dirs, cfg.seed);
  b.paha2 = check_doubling(h, hplan);
  b.paha3 = check_quasi_radial(h, hplan);
  b.aina = check_growth_ratio(conj.kernel, log_plan(n, 0.5, r_max, 13, dirs, cfg.seed));
  const bool premise = b.paha2.verdict == Verdict::Holds && b.paha3.verdict == Verdict::Holds;
  b.consistent = !premise || b.aina.verdict == Verdict::Holds;
  b.verdict = b.consistent ? "consistent" : "inconsistent";
  b.expected = expected_verdict(cfg);
  return b;
}

// --------------------------------------------------------- transform check

SummaryReport run_transform_check(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.n != 2) throw Error("transform-check is planar (n = 2)");
  const Kernel l = parse_kernel(cfg.lagrangian.empty() ? aniso_spec(cfg.s, cfg.s2) : cfg.lagrangian, 2);
  if (l.kind() != KernelKind::AxisPower) throw Error("transform-check needs an axis-power kernel");
  const double s = l.exponents()[0], s2 = l.exponents()[1];
  const double ex = s / (s - 1.0), ey = s2 / (s2 - 1.0);
  // conjugate of c|x|^s is c^{-1/(s-1)} C(s) |q|^{s/(s-1)}
  const double cx = std::pow(l.coefs()[0], -1.0 / (s - 1.0)) * power_conjugate_coef(s);
  const double cy = std::pow(l.coefs()[1], -1.0 / (s2 - 1.0)) * power_conjugate_coef(s2);

  const Grid p_box = Grid::uniform(2, -4.0, 4.0, 801);
  const Grid q_grid = Grid::uniform(2, -3.0, 3.0, 121);
  const ConjugateND conj = legendre_nd(l, p_box, q_grid, ConjugateMode::Separable);

  double max_exact = 0.0;
  std::vector<double> exact(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const Point q = q_grid.point(i);
    exact[i] = cx * std::pow(std::abs(q[0]), ex) + cy * std::pow(std::abs(q[1]), ey);
    if (conj.trusted[i]) max_exact = std::max(max_exact, exact[i]);
  }
  double max_rel = 0.0, sx_num = 0.0, sx_den = 0.0, sy_num = 0.0, sy_den = 0.0;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!conj.trusted[i]) continue;
    const Point q = q_grid.point(i);
    const double v = conj.values.values()[i];
    if (exact[i] >= 0.01 * max_exact) max_rel = std::max(max_rel, std::abs(v - exact[i]) / exact[i]);
    if (q[1] == 0.0 && q[0] != 0.0) {
      const double b = std::pow(std::abs(q[0]), ex);
      sx_num += v * b;
      sx_den += b * b;
    }
    if (q[0] == 0.0 && q[1] != 0.0) {
      const double b = std::pow(std::abs(q[1]), ey);
      sy_num += v * b;
      sy_den += b * b;
    }
  }
  const double fx = sx_num / sx_den, fy = sy_num / sy_den;
  const double ex_rel = std::abs(fx - cx) / cx, ey_rel = std::abs(fy - cy) / cy;

  SummaryReport r;
  r.experiment = cfg.id;
  r.config = cfg.to_json();
  r.data = {{"lagrangian", l.describe()},
            {"p_box", "[-4,4]^2, 801 per axis"},
            {"q_grid", "[-3,3]^2, 121 per axis"},
            {"trusted_points", conj.trusted_count()},
            {"expected_coef_x", cx},
            {"expected_coef_y", cy},
            {"fitted_coef_x", fx},
            {"fitted_coef_y", fy},
            {"coef_x_rel_error", ex_rel},
            {"coef_y_rel_error", ey_rel},
            {"max_rel_error", max_rel}};
  r.verdict = ex_rel <= 0.01 && ey_rel <= 0.01 && max_rel <= 0.01 ? "match" : "mismatch";
  r.expected = expected_verdict(cfg);
  return r;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ReportFormat f = parse_format(cfg.format);
  if (cfg.id == "converge") {
    const auto r = run_convergence(cfg);
    return {render(r, f), r.verdict, r.expected};
  }
  if (cfg.id == "conditions") {
    const auto b = run_conditions(cfg);
    return {render(b, f), b.verdict, b.expected};
  }
  if (cfg.id == "transform-check") {
    const auto r = run_transform_check(cfg);
    return {render(r, f), r.verdict, r.expected};
  }
  const auto r = run_divergence(cfg);
  return {render(r, f), r.verdict, r.expected};
}

}  // namespace hopflax
