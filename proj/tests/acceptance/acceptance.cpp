// Acceptance suite: one pass/fail line per criterion.
//
//   hopflax_acceptance        run every criterion
//   hopflax_acceptance 3 5    run the listed criteria
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hopflax/conditions.hpp"
#include "hopflax/experiment.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/kernel.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/moreau.hpp"
#include "hopflax/spec_parse.hpp"

using namespace hopflax;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-8;
constexpr double kOracleSeconds = 30.0;
constexpr double kTransformRel = 0.01;
constexpr double kSemigroupTol = 1e-9;
constexpr double kPointwiseCells = 10.0;
constexpr double kFinalDiffShare = 0.1;
constexpr double kConvergeSeconds = 300.0;
constexpr double kRatioGrowth = 1.5;
constexpr double kBumpFraction = 0.9;
constexpr double kExpExponentLo = 0.2, kExpExponentHi = 0.9;
constexpr double kBetaBand = 0.05;
constexpr double kGrowthSlopeRel = 0.05;
constexpr double kDominationTol = 1e-12;
constexpr double kReevalTol = 1e-10;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Field tabulate(const Grid& g, const std::function<double(const Point&)>& f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i));
  return Field::tabulated(g, std::move(v));
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-0.6, 0.6), amp(-1.0, 1.0), w(0.05, 0.4), noise(-0.05, 0.05);
  std::vector<std::pair<Point, std::pair<double, double>>> bumps;
  for (int k = 0; k < 5; ++k) {
    Point p(g.dim());
    for (std::size_t d = 0; d < g.dim(); ++d) p[d] = c(rng);
    bumps.push_back({p, {amp(rng), w(rng)}});
  }
  return tabulate(g, [&](const Point& x) {
    double s = noise(rng);
    for (const auto& [p, aw] : bumps) s += aw.first * std::exp(-std::pow((x - p).norm() / aw.second, 2));
    return s;
  });
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// The two converge runs, computed once per process.
const ConvergenceReport& converge_run(int which) {
  static std::vector<ConvergenceReport> cache(2);
  static std::vector<bool> done(2, false);
  if (!done[which]) {
    ExperimentConfig c = defaults_for("converge");
    if (which == 1) {
      c.n = 2;
      c.p = 3.0;
      c.lagrangian = "power:q=3";
    }
    cache[which] = run_convergence(c);
    done[which] = true;
  }
  return cache[which];
}

// ---------------------------------------------------------------- criteria

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20240917);
  const auto t0 = Clock::now();
  double worst_moreau = 0.0, worst_sep = 0.0;
  const std::vector<double> times{0.01, 0.05, 0.2};
  for (int f = 0; f < 20; ++f) {
    const bool planar = f >= 10;
    const Grid g = planar ? Grid::uniform(2, -1.0, 1.0, 33 + 16 * (f % 3 == 0)) : Grid::line(-1.0, 1.0, 65 - (f % 2));
    const Field u = random_field(g, rng);
    const double t = times[static_cast<std::size_t>(f) % times.size()];
    const Kernel sep = planar ? Kernel::anisotropic(3.0, 2.0) : Kernel::axis_power({3.0});
    worst_moreau = std::max(worst_moreau, max_abs_diff(moreau_quadratic(u, t).values,
                                                       hopf_lax_brute(u, Kernel::quadratic(), t, g).values));
    worst_sep = std::max(worst_sep, max_abs_diff(hopf_lax_separable(u, sep, t).values, hopf_lax_brute(u, sep, t, g).values));
  }
  const double secs = seconds_since(t0);
  o.require(worst_moreau <= kOracleTol, "moreau vs brute " + num(worst_moreau));
  o.require(worst_sep <= kOracleTol, "separable vs brute " + num(worst_sep));
  o.require(secs <= kOracleSeconds, "runtime " + num(secs) + " s");
  return o;
}

Outcome legendre_correctness() {
  Outcome o;
  // double conjugate of convex tabulated inputs
  const std::size_t n = 401;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  const double hp = p[1] - p[0];
  std::vector<double> q(20001);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = -25.0 + 50.0 * static_cast<double>(i) / static_cast<double>(q.size() - 1);
  const double hq = q[1] - q[0];
  double worst = 0.0;
  for (auto f : {+[](double x) { return x * x / 2.0; }, +[](double x) { return std::exp(x) - x; },
                 +[](double x) { return std::pow(std::abs(x), 3.0); }, +[](double x) { return std::cosh(x); }}) {
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = f(p[i]);
    const Conjugate1D c = legendre_1d(p, h, q);
    const Conjugate1D cc = legendre_1d(c.q, c.values, p);
    double f2 = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) f2 = std::max(f2, std::abs(h[i + 1] - 2.0 * h[i] + h[i - 1]) / (hp * hp));
    // the PL interpolant in p, plus the q tabulation of the conjugate
    const double bound = f2 * hp * hp / 8.0 + f2 * hq * hq / 8.0;
    for (std::size_t i = 1; i + 1 < n; ++i) worst = std::max(worst, std::abs(cc.values[i] - h[i]) / (2.0 * bound));
  }
  o.require(worst <= 1.0, "double conjugate error / (2 x bound) " + num(worst));

  const SummaryReport r = run_transform_check(defaults_for("transform-check"));
  const double ex = r.data.at("coef_x_rel_error").get<double>();
  const double ey = r.data.at("coef_y_rel_error").get<double>();
  const double mx = r.data.at("max_rel_error").get<double>();
  o.require(ex <= kTransformRel && ey <= kTransformRel, "C(3), C(2) rel errors " + num(ex) + ", " + num(ey));
  o.require(mx <= kTransformRel, "max rel error on trusted range " + num(mx));
  return o;
}

Outcome semigroup() {
  Outcome o;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int f = 0; f < 5; ++f) {
    const Grid g = Grid::line(-2.0, 2.0, 401);
    const Field u = random_field(g, rng);
    for (double t : {0.05, 0.1, 0.2})
      for (double s : {0.05, 0.1, 0.2}) {
        const auto [whole, comp] = semigroup_compose(u, t, s);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (std::abs(g.coordinate(0, i)) <= 1.0) worst = std::max(worst, std::abs(whole.values[i] - comp.values[i]));
      }
  }
  o.require(worst <= kSemigroupTol, "max interior deviation " + num(worst));
  return o;
}

Outcome pointwise_convergence() {
  Outcome o;
  const Field u = smooth_bump(1, 1.0);
  const Kernel l = Kernel::quadratic();
  const double h = 4.0 / 256.0;  // the converge grid spacing on [-2, 2]
  std::vector<Point> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(Point{-0.85 + 0.17 * i + 0.013});
  std::vector<double> errs;
  for (int j = 1; j <= 7; ++j) {
    const double t = std::pow(2.0, -j);
    SearchPlan plan;
    plan.lattice_spacing = h;
    plan.levels = 6;
    const PointSolver solver(u, l, t, plan);
    double worst = 0.0;
    for (const Point& x : xs) {
      const PointSolution ps = solver.solve(x);
      const Point du_t = -1.0 * l.grad(ps.argmin);
      worst = std::max(worst, (du_t - u.gradient_at(x)).norm());
    }
    errs.push_back(worst);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < errs.size(); ++i) monotone = monotone && errs[i] < errs[i - 1];
  std::string seq;
  for (double e : errs) seq += (seq.empty() ? "" : " ") + num(e);
  o.require(monotone, "max |Du_t - Du| over t = 2^-1..2^-7: " + seq);
  o.require(errs.back() <= kPointwiseCells * h, "final " + num(errs.back()) + " <= " + num(kPointwiseCells * h));
  return o;
}

double finest_trusted_diff(const ConvergenceReport& r) {
  for (auto it = r.rows.rbegin(); it != r.rows.rend(); ++it)
    if (it->trusted) return it->norm_diff;
  return INFINITY;
}

Outcome lp_convergence() {
  Outcome o;
  for (int which : {0, 1}) {
    const auto t0 = Clock::now();
    const ConvergenceReport& r = converge_run(which);
    const double secs = seconds_since(t0);
    const std::string tag = which == 0 ? "n=1 p=2: " : "n=2 p=3: ";
    o.require(r.verdict == "converging", tag + "verdict " + r.verdict);
    const double d = finest_trusted_diff(r);
    o.require(d <= kFinalDiffShare * r.reference_norm,
              tag + "final diff " + num(d) + " vs ||Du||_p " + num(r.reference_norm));
    o.require(secs <= kConvergeSeconds, tag + "runtime " + num(secs) + " s");
  }
  return o;
}

Outcome boundedness() {
  Outcome o;
  for (int which : {0, 1}) {
    const ConvergenceReport& r = converge_run(which);
    double worst = 0.0;
    for (const auto& row : r.rows) worst = std::max(worst, row.norm_grad_ut / r.reference_norm);
    const double first = r.rows.front().norm_grad_ut / r.reference_norm;
    o.require(worst <= kRatioGrowth * first, std::string(which == 0 ? "n=1: " : "n=2: ") + "max ratio " + num(worst) +
                                                 " vs 1.5 x " + num(first));
  }
  return o;
}

Outcome bump_trend() {
  Outcome o;
  const ConvergenceReport r = run_divergence(defaults_for("bump-blowup"));
  std::vector<double> medians;
  for (const auto& row : r.rows) {
    const auto& frac = row.extras.at("complement_fraction_met");
    const std::string j = std::to_string(row.extras.at("j").get<int>());
    if (frac.is_number())
      o.require(frac.get<double>() >= kBumpFraction, "j=" + j + " fraction " + num(frac.get<double>()));
    else
      o.require(false, "j=" + j + " (B u B_j)^c has no sample points");
    medians.push_back(row.extras.at("median_grad_Bc").get<double>());
  }
  bool inc = true;
  for (std::size_t i = 1; i < medians.size(); ++i) inc = inc && medians[i] > medians[i - 1];
  std::string seq;
  for (double m : medians) seq += (seq.empty() ? "" : " ") + num(m);
  o.require(inc, "median |Du_t| on B^c: " + seq);
  return o;
}

Outcome exponential_trend() {
  Outcome o;
  const ConvergenceReport r = run_divergence(defaults_for("exp-blowup"));
  std::vector<double> ints;
  for (const auto& row : r.rows) ints.push_back(row.extras.at("window_integral").get<double>());
  bool inc = true;
  for (std::size_t i = 1; i < ints.size(); ++i) inc = inc && ints[i] > ints[i - 1];
  std::string seq;
  for (double v : ints) seq += (seq.empty() ? "" : " ") + num(v);
  o.require(inc, "window integrals k=2..6: " + seq);
  const double e = r.slope.value_or(NAN);
  o.require(e >= kExpExponentLo && e <= kExpExponentHi, "growth exponent " + num(e));
  return o;
}

Outcome anisotropic() {
  Outcome o;
  ExperimentConfig c = defaults_for("aniso-blowup");
  const ConvergenceReport r = run_divergence(c);
  const double beta = r.summary.at("beta").get<double>();
  const double slope = r.slope.value_or(NAN);
  o.require(std::abs(slope - beta) <= kBetaBand, "alpha=0.51 slope " + num(slope) + " vs beta " + num(beta));
  c.alpha = 0.55;
  const ConvergenceReport k = run_divergence(c);
  const double cs = k.slope.value_or(NAN);
  o.require(cs >= 0.0, "alpha=0.55 slope " + num(cs));
  return o;
}

Outcome conditions() {
  Outcome o;
  const ConditionBundle q = run_conditions(defaults_for("conditions"));
  o.require(q.paha2.verdict == Verdict::Holds && q.paha3.verdict == Verdict::Holds,
            "quadratic H doubling " + to_string(q.paha2.verdict) + ", quasi-radial " + to_string(q.paha3.verdict));
  o.require(q.aina.verdict == Verdict::Holds, "conjugate of quadratic H growth ratio " + to_string(q.aina.verdict));

  const ConditionReport a = check_quasi_radial(parse_kernel("aniso-h:s=3,s2=2"), log_plan(2, 0.5, 1e6, 25, 16));
  o.require(a.verdict == Verdict::Fails, "anisotropic H quasi-radial " + to_string(a.verdict));

  // sampled past the join, where the ratio is |x|
  const ConditionReport e = check_growth_ratio(Kernel::exponential_radial(), log_plan(3, 5.0, 60.0, 12, 16));
  std::vector<double> r, v;
  for (const auto& s : e.per_radius) {
    r.push_back(s.radius);
    v.push_back(s.value);
  }
  const double slope = fit_slope(r, v);
  o.require(e.verdict == Verdict::Fails, "exponential L growth ratio " + to_string(e.verdict));
  o.require(std::abs(slope - 1.0) <= kGrowthSlopeRel, "ratio vs radius slope " + num(slope));
  return o;
}

Outcome invariants() {
  Outcome o;
  std::vector<ConvergenceReport> runs{converge_run(0), converge_run(1)};
  for (const char* id : {"bump-blowup", "exp-blowup", "aniso-blowup"}) runs.push_back(run_divergence(defaults_for(id)));
  double excess = -INFINITY, reeval = 0.0;
  for (const auto& r : runs)
    for (const auto& row : r.rows) {
      excess = std::max(excess, row.extras.at("max_excess_over_u").get<double>());
      reeval = std::max(reeval, row.extras.at("max_reeval_error").get<double>());
    }
  o.require(excess <= kDominationTol, "max u_t - u " + num(excess));
  o.require(reeval <= kReevalTol, "max argmin re-evaluation error " + num(reeval));

  bool same = true;
  for (const char* id : {"converge", "aniso-blowup", "conditions", "transform-check"}) {
    ExperimentConfig c = defaults_for(id);
    c.format = "json";
    same = same && run_experiment(c).bytes == run_experiment(c).bytes;
    c.format = "csv";
    same = same && run_experiment(c).bytes == run_experiment(c).bytes;
  }
  o.require(same, std::string("repeated reports byte-identical: ") + (same ? "yes" : "no"));
  return o;
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"oracle equivalence", oracle_equivalence},
    {"legendre correctness", legendre_correctness},
    {"semigroup", semigroup},
    {"pointwise gradient convergence", pointwise_convergence},
    {"L^p convergence trend", lp_convergence},
    {"gradient norm boundedness", boundedness},
    {"grid-bump blowup trend", bump_trend},
    {"exponential blowup trend", exponential_trend},
    {"anisotropic exponent", anisotropic},
    {"condition checkers", conditions},
    {"invariant suite", invariants},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 11) {
      std::fprintf(stderr, "criterion must be 1..11, got '%s'\n", argv[i]);
      return 1;
    }
    ids.push_back(id);
  }
  if (ids.empty())
    for (int i = 1; i <= 11; ++i) ids.push_back(i);

  bool all = true;
  for (int id : ids) {
    const Criterion& c = kCriteria[id - 1];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    all = all && o.pass;
    std::printf("criterion %2d %-32s %s  %s\n", id, c.name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
