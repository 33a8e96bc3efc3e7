#include "hopflax/moreau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace hopflax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Visits every axis-aligned line of the grid along axis d, passing the linear
// index of its first point.
template <class Fn>
void for_each_line(const Grid& g, std::size_t d, Fn&& fn) {
  const std::size_t lines = g.size() / g.count(d);
  const std::size_t stride = g.stride(d);
  detail::parallel_for(lines, [&](std::size_t k) {
    // split k into the part below stride and the part above the axis
    const std::size_t low = k % stride;
    const std::size_t high = k / stride;
    fn(high * stride * g.count(d) + low);
  });
}

HopfLaxSolution finish(const Field& u, const Lagrangian& l, double t, const std::vector<std::size_t>& src) {
  const Grid& g = u.grid();
  const std::size_t n = g.dim();
  HopfLaxSolution sol;
  sol.grid = g;
  sol.t = t;
  sol.values.resize(g.size());
  sol.argmin.resize(g.size() * n);
  sol.near_begin.resize(g.size() + 1);
  double rmax = 0.0, h = kInf;
  for (std::size_t d = 0; d < n; ++d) h = std::min(h, g.spacing(d));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.point(i);
    Point a = g.point(src[i]) - x;
    a *= 1.0 / t;
    const double la = l.eval(a);
    sol.values[i] = la == 0.0 ? u.values()[src[i]] : u.values()[src[i]] + t * la;
    for (std::size_t d = 0; d < n; ++d) sol.argmin[i * n + d] = a[d];
    sol.near_begin[i + 1] = i + 1;
    sol.near_offsets.insert(sol.near_offsets.end(), a.span().begin(), a.span().end());
    sol.near_gaps.push_back(0.0);
    rmax = std::max(rmax, a.norm());
  }
  sol.search_radius_used = rmax;
  sol.resolution = h;
  sol.merge_radius = 2.0 * h;
  return sol;
}

}  // namespace

ParabolaEnvelope parabola_envelope(const std::vector<double>& c, const std::vector<double>& f, double t) {
  const std::size_t m = c.size();
  ParabolaEnvelope env;
  if (m == 0) return env;
  std::vector<std::size_t> v(m);
  std::vector<double> z(m + 1);
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto cross = [&](std::size_t q, std::size_t p) {
    return t * (f[q] - f[p]) / (c[q] - c[p]) + 0.5 * (c[q] + c[p]);
  };
  for (std::size_t q = 1; q < m; ++q) {
    double s = cross(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = cross(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  env.sites.assign(v.begin(), v.begin() + static_cast<long>(k + 1));
  env.breaks.assign(z.begin(), z.begin() + static_cast<long>(k + 2));
  return env;
}

HopfLaxSolution moreau_quadratic(const Field& u, double t) {
  if (!(t > 0.0)) throw Error("moreau_quadratic needs t > 0");
  const Grid& g = u.grid();
  std::vector<double> f = u.values();
  std::vector<std::size_t> src(g.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = i;

  for (std::size_t d = 0; d < g.dim(); ++d) {
    const std::size_t m = g.count(d), stride = g.stride(d);
    std::vector<double> nf(f.size());
    std::vector<std::size_t> nsrc(src.size());
    for_each_line(g, d, [&](std::size_t first) {
      std::vector<double> c(m), line(m);
      for (std::size_t i = 0; i < m; ++i) {
        c[i] = g.coordinate(d, i);
        line[i] = f[first + i * stride];
      }
      const ParabolaEnvelope env = parabola_envelope(c, line, t);
      std::size_t k = 0;
      for (std::size_t i = 0; i < m; ++i) {
        while (env.breaks[k + 1] < c[i]) ++k;
        const std::size_t j = env.sites[k];
        const double dx = c[i] - c[j];
        nf[first + i * stride] = line[j] + dx * dx / (2.0 * t);
        nsrc[first + i * stride] = src[first + j * stride];
      }
    });
    f.swap(nf);
    src.swap(nsrc);
  }
  return finish(u, Kernel::quadratic(), t, src);
}

HopfLaxSolution hopf_lax_separable(const Field& u, const Lagrangian& l, double t) {
  if (!(t > 0.0)) throw Error("hopf_lax_separable needs t > 0");
  const Grid& g = u.grid();
  const auto parts = l.separable_parts(g.dim());
  if (!parts) throw Error("hopf_lax_separable needs a separable Lagrangian (" + l.describe() + ")");
  std::vector<double> f = u.values();
  std::vector<std::size_t> src(g.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = i;

  for (std::size_t d = 0; d < g.dim(); ++d) {
    const std::size_t m = g.count(d), stride = g.stride(d);
    // cost of moving j - i cells: t k_d((j - i) h / t)
    std::vector<double> cost(2 * m - 1);
    for (std::size_t k = 0; k < cost.size(); ++k) {
      const double a[1] = {(static_cast<double>(k) - static_cast<double>(m - 1)) * g.spacing(d) / t};
      const double kv = (*parts)[d].eval(std::span<const double>(a, 1));
      cost[k] = kv == 0.0 ? 0.0 : t * kv;
    }
    std::vector<double> nf(f.size());
    std::vector<std::size_t> nsrc(src.size());
    for_each_line(g, d, [&](std::size_t first) {
      std::vector<double> line(m);
      for (std::size_t i = 0; i < m; ++i) line[i] = f[first + i * stride];
      std::vector<std::size_t> arg(m);
      auto value = [&](std::size_t i, std::size_t j) { return line[j] + cost[j + m - 1 - i]; };
      struct Task {
        std::size_t xlo, xhi, ylo, yhi;
      };
      std::vector<Task> stack{{0, m - 1, 0, m - 1}};
      while (!stack.empty()) {
        const Task tk = stack.back();
        stack.pop_back();
        const std::size_t mid = tk.xlo + (tk.xhi - tk.xlo) / 2;
        std::size_t best = tk.ylo;
        double bv = value(mid, best);
        for (std::size_t j = tk.ylo + 1; j <= tk.yhi; ++j) {
          const double v = value(mid, j);
          if (v < bv) {
            bv = v;
            best = j;
          }
        }
        arg[mid] = best;
        if (mid > tk.xlo) stack.push_back({tk.xlo, mid - 1, tk.ylo, best});
        if (mid < tk.xhi) stack.push_back({mid + 1, tk.xhi, best, tk.yhi});
      }
      for (std::size_t i = 0; i < m; ++i) {
        nf[first + i * stride] = value(i, arg[i]);
        nsrc[first + i * stride] = src[first + arg[i] * stride];
      }
    });
    f.swap(nf);
    src.swap(nsrc);
  }
  return finish(u, l, t, src);
}

std::pair<HopfLaxSolution, HopfLaxSolution> semigroup_compose(const Field& u, double t, double s) {
  if (!(t > 0.0) || !(s > 0.0)) throw Error("semigroup_compose needs t, s > 0");
  const Grid& g = u.grid();
  if (g.dim() != 1) throw Error("semigroup_compose supports 1D fields");
  HopfLaxSolution whole = moreau_quadratic(u, t + s);

  const std::size_t m = g.count(0);
  std::vector<double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = g.coordinate(0, i);
  const ParabolaEnvelope env = parabola_envelope(c, u.values(), t);
  // piece k is the parabola of site k on [breaks[k], breaks[k+1]] clipped to the box
  HopfLaxSolution comp;
  comp.grid = g;
  comp.t = s;
  comp.values.resize(m);
  comp.argmin.resize(m);
  comp.near_begin.resize(m + 1);
  comp.resolution = g.spacing(0);
  comp.merge_radius = 2.0 * g.spacing(0);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = c[i];
    double best = kInf, zbest = x;
    for (std::size_t k = 0; k < env.sites.size(); ++k) {
      const double lo = std::max(env.breaks[k], g.lo(0));
      const double hi = std::min(env.breaks[k + 1], g.hi(0));
      if (lo > hi) continue;
      const double y = c[env.sites[k]];
      const double fy = u.values()[env.sites[k]];
      const double z = std::clamp((s * y + t * x) / (t + s), lo, hi);
      const double v = fy + (z - y) * (z - y) / (2.0 * t) + (x - z) * (x - z) / (2.0 * s);
      if (v < best) {
        best = v;
        zbest = z;
      }
    }
    comp.values[i] = best;
    comp.argmin[i] = (zbest - x) / s;
    comp.near_begin[i + 1] = i + 1;
    comp.near_offsets.push_back(comp.argmin[i]);
    comp.near_gaps.push_back(0.0);
    comp.search_radius_used = std::max(comp.search_radius_used, std::abs(comp.argmin[i]));
  }
  return {std::move(whole), std::move(comp)};
}

}  // namespace hopflax
