#include "hopflax/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"

namespace hopflax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lex_less(const Point& a, const Point& b) {
  for (std::size_t d = 0; d < a.size(); ++d)
    if (a[d] != b[d]) return a[d] < b[d];
  return false;
}

// Smallest objective, then smallest |a|, then lexicographic a.
template <class C>
bool better(const C& x, const C& y) {
  if (x.obj != y.obj) return x.obj < y.obj;
  const double nx = x.a.norm(), ny = y.a.norm();
  if (nx != ny) return nx < ny;
  return lex_less(x.a, y.a);
}

}  // namespace

double search_radius(double osc, const Lagrangian& l, double t) {
  if (!(osc >= 0.0) || !std::isfinite(osc)) throw Error("search_radius needs a finite osc >= 0");
  if (!(t > 0.0)) throw Error("search_radius needs t > 0");
  if (osc == 0.0) return 0.0;
  // t L(a) > 2 osc beyond R; the ray crossing gives L(R u) >= level, so step
  // just past it.
  const double level = 2.0 * osc / t;
  if (l.is_radial()) {
    const double e1[1] = {1.0};
    return l.ray_crossing(e1, level);
  }
  const std::size_t n = l.dim().value_or(1);
  double r = 0.0;
  std::vector<double> u(n);
  for (std::size_t d = 0; d < n; ++d)
    for (double s : {1.0, -1.0}) {
      std::fill(u.begin(), u.end(), 0.0);
      u[d] = s;
      r = std::max(r, l.ray_crossing(u, level));
    }
  if (n == 2) {
    for (int k = 0; k < 32; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / 32.0;
      const double dir[2] = {std::cos(th), std::sin(th)};
      r = std::max(r, l.ray_crossing(dir, level));
    }
  } else if (n > 2) {
    // all sign patterns of the main diagonals
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      for (std::size_t d = 0; d < n; ++d) u[d] = ((mask >> d) & 1U ? -1.0 : 1.0) / std::sqrt(double(n));
      r = std::max(r, l.ray_crossing(u, level));
    }
  }
  return r;
}

struct PointSolver::Candidate {
  Point a;
  double obj;
};

PointSolver::PointSolver(const Field& u, const Lagrangian& l, double t, SearchPlan plan)
    : u_(u), l_(l), t_(t), plan_(plan) {
  if (!(t > 0.0)) throw Error("Hopf-Lax needs t > 0");
  if (!l.accepts(u.dim())) throw Error("Lagrangian dimension does not match the field");
  const double required = search_radius(oscillation(u), l, t);
  if (plan_.radius < 0.0) {
    radius_ = required;
  } else {
    if (plan_.radius < required * (1.0 - 1e-12) && !plan_.override_radius)
      throw Error("search window smaller than the localization radius");
    radius_ = plan_.radius;
  }
  plan_.radius = radius_;
  if (!u.is_tabulated()) {
    if (!(plan_.lattice_spacing > 0.0)) throw Error("closed-form fields need a lattice spacing in the plan");
    cell_ = std::max(t * radius_, 1e-300);
    const auto crit = u.critical_points();
    std::vector<std::vector<long>> keys(crit.size());
    for (std::size_t i = 0; i < crit.size(); ++i)
      for (std::size_t d = 0; d < u.dim(); ++d) keys[i].push_back(static_cast<long>(std::floor(crit[i][d] / cell_)));
    order_.resize(crit.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    for (std::size_t i : order_) keys_.push_back(keys[i]);
  }
}

double PointSolver::resolution() const {
  if (u_.is_tabulated()) {
    double h = kInf;
    for (std::size_t d = 0; d < u_.dim(); ++d) h = std::min(h, u_.grid().spacing(d));
    return h;
  }
  return plan_.lattice_spacing / std::pow(4.0, std::max(plan_.levels, 0));
}

double PointSolver::merge_radius() const {
  if (u_.is_tabulated()) {
    double h = 0.0;
    for (std::size_t d = 0; d < u_.dim(); ++d) h = std::max(h, u_.grid().spacing(d));
    return 2.0 * h;
  }
  return 2.0 * plan_.lattice_spacing;
}

double PointSolver::objective(const Point& x, const Point& a) const {
  const double la = l_.eval(a);
  if (la == 0.0) return u_.value_at(x + t_ * a);
  return u_.value_at(x + t_ * a) + t_ * la;
}

void PointSolver::tabulated_candidates(const Point& x, std::vector<Candidate>& out) const {
  const Grid& g = u_.grid();
  const std::size_t n = g.dim();
  const double w = t_ * radius_;
  std::array<std::size_t, kMaxDim> lo{}, hi{}, idx{};
  for (std::size_t d = 0; d < n; ++d) {
    const double a = std::ceil((x[d] - w - g.lo(d)) / g.spacing(d) - 1e-9);
    const double b = std::floor((x[d] + w - g.lo(d)) / g.spacing(d) + 1e-9);
    const double top = static_cast<double>(g.count(d) - 1);
    if (b < 0.0 || a > top) return;
    lo[d] = static_cast<std::size_t>(std::max(a, 0.0));
    hi[d] = static_cast<std::size_t>(std::min(b, top));
  }
  idx = lo;
  const auto& v = g;
  while (true) {
    Point a(n);
    std::size_t k = 0;
    for (std::size_t d = 0; d < n; ++d) {
      a[d] = (v.coordinate(d, idx[d]) - x[d]) / t_;
      k += idx[d] * v.stride(d);
    }
    if (a.norm() <= radius_ * (1.0 + 1e-12)) {
      const double la = l_.eval(a);
      out.push_back({a, la == 0.0 ? u_.values()[k] : u_.values()[k] + t_ * la});
    }
    std::size_t d = n;
    while (d-- > 0) {
      if (++idx[d] <= hi[d]) break;
      idx[d] = lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
}

void PointSolver::lattice_candidates(const Point& x, std::vector<Candidate>& out) const {
  const std::size_t n = u_.dim();
  const double h = plan_.lattice_spacing;
  const double w = t_ * radius_;
  const long m = static_cast<long>(std::floor(w / h + 1e-9));
  double total = std::pow(2.0 * static_cast<double>(m) + 1.0, static_cast<double>(n));
  if (total > static_cast<double>(plan_.max_lattice))
    throw Error("candidate lattice too large for the window; raise the lattice spacing");
  std::array<long, kMaxDim> k{};
  for (std::size_t d = 0; d < n; ++d) k[d] = -m;
  while (true) {
    Point a(n);
    for (std::size_t d = 0; d < n; ++d) a[d] = static_cast<double>(k[d]) * h / t_;
    if (a.norm() <= radius_ * (1.0 + 1e-12)) out.push_back({a, objective(x, a)});
    std::size_t d = 0;
    for (; d < n; ++d) {
      if (++k[d] <= m) break;
      k[d] = -m;
    }
    if (d == n) break;
  }
}

void PointSolver::critical_candidates(const Point& x, std::vector<Candidate>& out) const {
  const auto crit = u_.critical_points();
  if (crit.empty()) return;
  const std::size_t n = u_.dim();
  std::vector<long> base(n), key(n);
  for (std::size_t d = 0; d < n; ++d) base[d] = static_cast<long>(std::floor(x[d] / cell_));
  const std::size_t cells = static_cast<std::size_t>(std::pow(3, n));
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t r = c;
    for (std::size_t d = 0; d < n; ++d) {
      key[d] = base[d] + static_cast<long>(r % 3) - 1;
      r /= 3;
    }
    auto range = std::equal_range(keys_.begin(), keys_.end(), key);
    for (auto it = range.first; it != range.second; ++it) {
      const Point& y = crit[order_[static_cast<std::size_t>(it - keys_.begin())]];
      Point a = y - x;
      a *= 1.0 / t_;
      if (a.norm() <= radius_ * (1.0 + 1e-12)) out.push_back({a, objective(x, a)});
    }
  }
}

void PointSolver::refine(const Point& x, std::vector<Candidate>& all) const {
  if (plan_.levels <= 0 || all.empty()) return;
  const std::size_t n = u_.dim();
  std::vector<Candidate> sorted = all;
  std::sort(sorted.begin(), sorted.end(), [](const Candidate& p, const Candidate& q) { return better(p, q); });
  // distinct seeds: skip candidates within two lattice steps of a chosen one
  std::vector<Candidate> seeds;
  const double sep = 2.0 * plan_.lattice_spacing;
  for (const Candidate& c : sorted) {
    bool near = false;
    for (const Candidate& s : seeds)
      if (t_ * (c.a - s.a).norm() <= sep) near = true;
    if (!near) seeds.push_back(c);
    if (seeds.size() >= plan_.max_seeds) break;
  }
  const std::size_t stencil = static_cast<std::size_t>(std::pow(9, n));
  for (Candidate inc : seeds) {
    double step = plan_.lattice_spacing;
    for (int level = 0; level < plan_.levels; ++level) {
      step /= 4.0;
      Candidate best = inc;
      for (std::size_t c = 0; c < stencil; ++c) {
        std::size_t r = c;
        Point a = inc.a;
        bool centre = true;
        for (std::size_t d = 0; d < n; ++d) {
          const long k = static_cast<long>(r % 9) - 4;
          r /= 9;
          if (k != 0) centre = false;
          a[d] += static_cast<double>(k) * step / t_;
        }
        if (centre || a.norm() > radius_ * (1.0 + 1e-12)) continue;
        Candidate cand{a, objective(x, a)};
        all.push_back(cand);
        if (better(cand, best)) best = cand;
      }
      inc = best;
    }
  }
}

PointSolution PointSolver::solve(const Point& x) const {
  if (x.size() != u_.dim()) throw Error("point dimension does not match the field");
  std::vector<Candidate> all;
  if (radius_ == 0.0) {
    all.push_back({Point(x.size()), u_.value_at(x)});
  } else if (u_.is_tabulated()) {
    tabulated_candidates(x, all);
  } else {
    lattice_candidates(x, all);
    critical_candidates(x, all);
    refine(x, all);
  }
  if (all.empty()) throw Error("search window contains no candidates");

  const Candidate* best = &all.front();
  for (const Candidate& c : all)
    if (better(c, *best)) best = &c;
  PointSolution ps;
  ps.value = best->obj;
  ps.argmin = best->a;
  const double tol = plan_.rel_tol * (1.0 + std::abs(ps.value));
  const double capture = plan_.capture_factor * tol;
  std::vector<const Candidate*> near;
  for (const Candidate& c : all)
    if (c.obj - ps.value <= capture) near.push_back(&c);
  std::sort(near.begin(), near.end(), [](const Candidate* p, const Candidate* q) { return better(*p, *q); });
  for (const Candidate* c : near) {
    if (!ps.near.empty() && ps.near.back() == c->a) continue;
    bool dup = false;
    for (const Point& q : ps.near)
      if (q == c->a) dup = true;
    if (dup) continue;
    ps.near.push_back(c->a);
    ps.gaps.push_back(c->obj - ps.value);
    if (ps.near.size() >= plan_.max_near) break;
  }
  return ps;
}

HopfLaxSolution hopf_lax_brute(const Field& u, const Lagrangian& l, double t, const Grid& out_grid, SearchPlan plan) {
  if (!(t > 0.0)) throw Error("Hopf-Lax needs t > 0");
  if (out_grid.dim() != u.dim()) throw Error("output grid dimension does not match the field");
  if (!u.is_tabulated() && !(plan.lattice_spacing > 0.0)) {
    double h = kInf;
    for (std::size_t d = 0; d < out_grid.dim(); ++d) h = std::min(h, out_grid.spacing(d));
    plan.lattice_spacing = h;
  }
  const PointSolver solver(u, l, t, plan);
  std::vector<PointSolution> pts(out_grid.size());
  detail::parallel_for(out_grid.size(), [&](std::size_t i) { pts[i] = solver.solve(out_grid.point(i)); });

  HopfLaxSolution sol;
  sol.grid = out_grid;
  sol.t = t;
  sol.search_radius_used = solver.radius();
  sol.resolution = solver.resolution();
  sol.merge_radius = solver.merge_radius();
  const std::size_t n = out_grid.dim();
  sol.values.resize(pts.size());
  sol.argmin.resize(pts.size() * n);
  sol.near_begin.assign(1, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sol.values[i] = pts[i].value;
    for (std::size_t d = 0; d < n; ++d) sol.argmin[i * n + d] = pts[i].argmin[d];
    for (std::size_t k = 0; k < pts[i].near.size(); ++k) {
      for (std::size_t d = 0; d < n; ++d) sol.near_offsets.push_back(pts[i].near[k][d]);
      sol.near_gaps.push_back(pts[i].gaps[k]);
    }
    sol.near_begin.push_back(sol.near_gaps.size());
  }
  return sol;
}

namespace {

std::vector<Point> sorted_unique(std::vector<Point> v) {
  std::sort(v.begin(), v.end(), [](const Point& a, const Point& b) {
    const double na = a.norm(), nb = b.norm();
    if (na != nb) return na < nb;
    return lex_less(a, b);
  });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Groups the offsets by single linkage (t|a - b| <= radius) and reports
// whether the groups agree on DL; the argmin's group stands for itself.
std::optional<Point> agreed_gradient(const std::vector<Point>& offsets, const Point& argmin, const Lagrangian& l,
                                     double t, double radius) {
  const std::size_t m = offsets.size();
  std::vector<std::size_t> parent(m);
  for (std::size_t i = 0; i < m; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (t * (offsets[i] - offsets[j]).norm() <= radius) parent[find(i)] = find(j);
  std::size_t home = m;
  for (std::size_t i = 0; i < m; ++i)
    if (offsets[i] == argmin) home = find(i);
  const Point g0 = l.grad(argmin);
  for (std::size_t i = 0; i < m; ++i) {
    if (find(i) == home) continue;
    const Point g = l.grad(offsets[i]);
    if ((g - g0).norm() > 1e-6 * (1.0 + g0.norm())) return std::nullopt;
  }
  return -1.0 * g0;
}

}  // namespace

std::vector<Point> minimizer_set(const HopfLaxSolution& sol, std::size_t i, double tol) {
  if (!(tol >= 0.0)) throw Error("minimizer_set needs tol >= 0");
  if (i >= sol.size()) throw Error("minimizer_set: point index off the grid");
  std::vector<Point> out{sol.offset(i)};
  for (std::size_t k = 0; k < sol.near_count(i); ++k)
    if (sol.near_gap(i, k) <= tol) out.push_back(sol.near_offset(i, k));
  return sorted_unique(std::move(out));
}

std::vector<Point> minimizer_set(const HopfLaxSolution& sol, const Point& x, double tol) {
  return minimizer_set(sol, sol.grid.locate(x), tol);
}

std::optional<Point> gradient_at(const PointSolution& ps, const Lagrangian& l, double t, double merge_radius,
                                 double tol) {
  std::vector<Point> offs{ps.argmin};
  for (std::size_t k = 0; k < ps.near.size(); ++k)
    if (ps.gaps[k] <= tol) offs.push_back(ps.near[k]);
  return agreed_gradient(offs, ps.argmin, l, t, merge_radius);
}

GradientResult gradient_from_minimizers(const HopfLaxSolution& sol, const Lagrangian& l) {
  const std::size_t n = sol.dim();
  GradientResult res;
  res.grad = VectorField(sol.grid);
  res.nondiff.assign(sol.size(), 0);
  const double radius = sol.merge_radius > 0.0 ? sol.merge_radius : 2.0 * sol.resolution;
  double bad = 0.0, total = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const double tol = 1e-8 * (1.0 + std::abs(sol.values[i]));
    std::vector<Point> offs{sol.offset(i)};
    for (std::size_t k = 0; k < sol.near_count(i); ++k)
      if (sol.near_gap(i, k) <= tol) offs.push_back(sol.near_offset(i, k));
    const Point a = sol.offset(i);
    auto g = agreed_gradient(offs, a, l, sol.t, radius);
    const Point val = g ? *g : -1.0 * l.grad(a);
    for (std::size_t d = 0; d < n; ++d) res.grad.at(i)[d] = val[d];
    const double w = sol.grid.weight(i);
    total += w;
    if (!g) {
      res.nondiff[i] = 1;
      bad += w;
    }
  }
  res.nondiff_fraction = total > 0.0 ? bad / total : 0.0;
  return res;
}

double directional_derivative(const Field& u, const Lagrangian& l, double t, const Point& x, const Point& gamma,
                              double tol, SearchPlan plan) {
  if (std::abs(gamma.norm() - 1.0) > 1e-9) throw Error("direction must be a unit vector");
  if (!(tol >= 0.0)) throw Error("directional_derivative needs tol >= 0");
  if (!u.is_tabulated() && !(plan.lattice_spacing > 0.0)) plan.lattice_spacing = t * 1e-2;
  const PointSolver solver(u, l, t, plan);
  const PointSolution ps = solver.solve(x);
  double best = -dot(l.grad(ps.argmin), gamma);
  for (std::size_t k = 0; k < ps.near.size(); ++k)
    if (ps.gaps[k] <= tol) best = std::min(best, -dot(l.grad(ps.near[k]), gamma));
  return best;
}

}  // namespace hopflax
