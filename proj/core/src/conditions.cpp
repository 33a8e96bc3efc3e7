#include "hopflax/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace hopflax {

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::Aina: return "aina";
    case ConditionId::Paha2: return "paha2";
    case ConditionId::Paha3: return "paha3";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller, spelled out so the stream is identical across standard libraries.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const SamplePlan& plan, const Kernel& k) {
  if (plan.dim == 0 || plan.dim > kMaxDim) throw Error("sample plan dimension out of range");
  if (plan.radii.empty()) throw Error("sample plan has no radii");
  for (double r : plan.radii)
    if (!(r > 0.0) || !std::isfinite(r)) throw Error("sample plan radii must be positive");
  if (!k.accepts(plan.dim)) throw Error("kernel dimension does not match the sample plan");
}

}  // namespace

std::vector<Point> SamplePlan::directions() const {
  std::vector<Point> dirs;
  for (std::size_t d = 0; d < dim; ++d)
    for (double s : {1.0, -1.0}) {
      Point u(dim);
      u[d] = s;
      dirs.push_back(u);
    }
  if (dim == 1) return dirs;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < random_directions; ++k) {
    Point u(dim);
    double nrm = 0.0;
    while (nrm < 1e-12) {
      for (std::size_t d = 0; d < dim; ++d) u[d] = standard_normal(rng);
      nrm = u.norm();
    }
    u *= 1.0 / nrm;
    dirs.push_back(u);
  }
  return dirs;
}

SamplePlan log_plan(std::size_t dim, double rmin, double rmax, std::size_t count, std::size_t random_directions,
                    std::uint64_t seed) {
  if (!(rmin > 0.0) || !(rmax >= rmin)) throw Error("log_plan needs 0 < rmin <= rmax");
  if (count == 0) throw Error("log_plan needs at least one radius");
  SamplePlan plan;
  plan.dim = dim;
  plan.random_directions = random_directions;
  plan.seed = seed;
  const double a = std::log(rmin), b = std::log(rmax);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    plan.radii.push_back(i + 1 == count ? rmax : std::exp(a + f * (b - a)));
  }
  if (count > 1) plan.radii.front() = rmin;
  return plan;
}

ConditionReport check_growth_ratio(const Kernel& l, const SamplePlan& plan) {
  validate(plan, l);
  ConditionReport rep;
  rep.id = ConditionId::Aina;
  rep.plan = plan;
  const auto dirs = plan.directions();
  std::size_t skipped = 0, used = 0;
  for (double r : plan.radii) {
    double sup = 0.0;
    bool any = false;
    for (const Point& u : dirs) {
      const Point x = r * u;
      const double lx = l.eval(x);
      if (!(lx > 0.0) || !std::isfinite(lx)) {
        ++skipped;
        continue;
      }
      sup = std::max(sup, l.grad(x).norm() * r / lx);
      any = true;
      ++used;
    }
    if (any) rep.per_radius.push_back({r, sup});
  }
  if (used == 0) throw Error("growth ratio: L vanished at every sample");
  if (skipped) rep.warnings.push_back(std::to_string(skipped) + " samples skipped where L was 0 or infinite");
  rep.extremum = 0.0;
  for (const auto& s : rep.per_radius) rep.extremum = std::max(rep.extremum, s.value);
  rep.verdict = Verdict::Holds;
  if (rep.per_radius.size() >= 2) {
    const double last = rep.per_radius.back().value;
    const double prev = rep.per_radius[rep.per_radius.size() - 2].value;
    if (last > 1.02 * prev) rep.verdict = Verdict::Fails;
  }
  return rep;
}

ConditionReport check_doubling(const Kernel& h, const SamplePlan& plan) {
  validate(plan, h);
  ConditionReport rep;
  rep.id = ConditionId::Paha2;
  rep.plan = plan;
  const auto dirs = plan.directions();
  for (double r : plan.radii) {
    double inf = std::numeric_limits<double>::infinity();
    for (const Point& u : dirs) {
      const Point x = r * u;
      const double hx = h.eval(x);
      if (!(hx > 0.0)) throw Error("doubling check: H vanishes away from the origin");
      inf = std::min(inf, h.eval(2.0 * x) / hx);
    }
    rep.per_radius.push_back({r, inf});
  }
  rep.extremum = std::numeric_limits<double>::infinity();
  double max_margin = 0.0;
  for (const auto& s : rep.per_radius) {
    rep.extremum = std::min(rep.extremum, s.value);
    max_margin = std::max(max_margin, s.value - 2.0);
  }
  if (!std::isfinite(rep.extremum)) throw Error("doubling check: H is infinite at a sample");
  if (rep.extremum <= 2.0) {
    rep.verdict = Verdict::Fails;
    return rep;
  }
  rep.verdict = Verdict::Holds;
  const std::size_t m = rep.per_radius.size();
  if (m >= 2) {
    const double end = rep.per_radius[m - 1].value - 2.0;
    const double before = rep.per_radius[m - 2].value - 2.0;
    if (end < before) {
      if (end < 0.10 * max_margin) rep.verdict = Verdict::Fails;
      else if (end < 0.25 * max_margin) rep.verdict = Verdict::Inconclusive;
    }
  }
  return rep;
}

ConditionReport check_quasi_radial(const Kernel& h, const SamplePlan& plan) {
  validate(plan, h);
  ConditionReport rep;
  rep.id = ConditionId::Paha3;
  rep.plan = plan;
  const auto dirs = plan.directions();
  for (double r : plan.radii) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Point& u : dirs) {
      const double v = h.eval(r * u);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo > 0.0)) throw Error("quasi-radial check: inf of H on a sphere is 0");
    if (!std::isfinite(hi)) throw Error("quasi-radial check: H is infinite on a sampled sphere");
    rep.per_radius.push_back({r, hi / lo});
  }
  rep.extremum = 0.0;
  for (const auto& s : rep.per_radius) rep.extremum = std::max(rep.extremum, s.value);
  rep.verdict = Verdict::Holds;
  const std::size_t m = rep.per_radius.size();
  if (m >= 2) {
    const bool grows_out = rep.per_radius[m - 1].value > 1.02 * rep.per_radius[m - 2].value;
    const bool grows_in = rep.per_radius[0].value > 1.02 * rep.per_radius[1].value;
    if (grows_out || grows_in) rep.verdict = Verdict::Fails;
  }
  return rep;
}

}  // namespace hopflax
