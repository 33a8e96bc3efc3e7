#include "hopflax/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

namespace hopflax {

std::vector<std::size_t> lower_hull(const std::vector<double>& p, const std::vector<double>& h) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      // drop b when it lies on or above the chord a-i
      const double cross = (p[b] - p[a]) * (h[i] - h[a]) - (h[b] - h[a]) * (p[i] - p[a]);
      if (cross <= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  return hull;
}

Conjugate1D legendre_1d(const std::vector<double>& p, const std::vector<double>& h, const std::vector<double>& q) {
  if (p.size() < 2 || p.size() != h.size()) throw Error("legendre_1d needs at least 2 matching samples");
  if (q.empty()) throw Error("legendre_1d needs a nonempty q grid");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!(p[i] > p[i - 1])) throw Error("legendre_1d samples must be strictly increasing in p");
  for (std::size_t j = 1; j < q.size(); ++j)
    if (q[j] < q[j - 1]) throw Error("legendre_1d q grid must be sorted");

  const auto hull = lower_hull(p, h);
  std::vector<double> slope(hull.size() - 1);
  for (std::size_t k = 0; k + 1 < hull.size(); ++k)
    slope[k] = (h[hull[k + 1]] - h[hull[k]]) / (p[hull[k + 1]] - p[hull[k]]);

  Conjugate1D out;
  out.q = q;
  out.values.resize(q.size());
  out.trusted.resize(q.size());
  out.slope_lo = slope.front();
  out.slope_hi = slope.back();
  std::size_t k = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    // vertex k is the maximizer while q lies in [slope[k-1], slope[k]]
    while (k < slope.size() && q[j] > slope[k]) ++k;
    const std::size_t v = hull[k];
    out.values[j] = p[v] * q[j] - h[v];
    out.trusted[j] = q[j] >= out.slope_lo && q[j] <= out.slope_hi;
  }
  return out;
}

Conjugate1D legendre_1d(const Kernel& h_samples, const Grid& q_grid) {
  if (h_samples.kind() != KernelKind::Tabulated1D) throw Error("legendre_1d expects tabulated samples");
  if (q_grid.dim() != 1) throw Error("legendre_1d expects a 1D q grid");
  std::vector<double> q(q_grid.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = q_grid.coordinate(0, j);
  return legendre_1d(h_samples.knots(), h_samples.knot_values(), q);
}

std::vector<double> legendre_1d_brute(const std::vector<double>& p, const std::vector<double>& h,
                                      const std::vector<double>& q) {
  std::vector<double> out(q.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < q.size(); ++j)
    for (std::size_t i = 0; i < p.size(); ++i) out[j] = std::max(out[j], p[i] * q[j] - h[i]);
  return out;
}

std::size_t ConjugateND::trusted_count() const {
  return static_cast<std::size_t>(std::count(trusted.begin(), trusted.end(), 1));
}

namespace {

ConjugateND conjugate_separable(const std::vector<Kernel>& parts, const Grid& p_box, const Grid& q_grid) {
  const std::size_t n = q_grid.dim();
  std::vector<Conjugate1D> axes;
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<double> p(p_box.count(d)), h(p_box.count(d)), q(q_grid.count(d));
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = p_box.coordinate(d, i);
      const double x[1] = {p[i]};
      h[i] = parts[d].eval(std::span<const double>(x, 1));
    }
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = q_grid.coordinate(d, j);
    axes.push_back(legendre_1d(p, h, q));
  }
  std::vector<double> values(q_grid.size());
  std::vector<char> trusted(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const auto idx = q_grid.multi_index(i);
    double v = 0.0;
    bool ok = true;
    for (std::size_t d = 0; d < n; ++d) {
      v += axes[d].values[idx[d]];
      ok = ok && axes[d].trusted[idx[d]];
    }
    values[i] = v;
    trusted[i] = ok;
  }
  return {Field::tabulated(q_grid, std::move(values)), std::move(trusted)};
}

ConjugateND conjugate_brute(const Kernel& h, const Grid& p_box, const Grid& q_grid) {
  std::vector<double> hp(p_box.size());
  std::vector<Point> pts(p_box.size());
  for (std::size_t i = 0; i < p_box.size(); ++i) {
    pts[i] = p_box.point(i);
    hp[i] = h.eval(pts[i]);
  }
  std::vector<double> values(q_grid.size());
  std::vector<char> trusted(q_grid.size());
  for (std::size_t j = 0; j < q_grid.size(); ++j) {
    const Point q = q_grid.point(j);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = dot(pts[i], q) - hp[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    values[j] = best;
    trusted[j] = !p_box.is_boundary(arg);
  }
  return {Field::tabulated(q_grid, std::move(values)), std::move(trusted)};
}

}  // namespace

ConjugateND legendre_nd(const Kernel& h, const Grid& p_box, const Grid& q_grid, ConjugateMode mode) {
  if (p_box.dim() != q_grid.dim()) throw Error("p box and q grid dimensions differ");
  if (!h.accepts(p_box.dim())) throw Error("Hamiltonian dimension does not match the p box");
  auto parts = h.separable_parts(p_box.dim());
  if (mode == ConjugateMode::Separable && !parts) throw Error("Hamiltonian is not separable");
  if (mode == ConjugateMode::Brute || (mode == ConjugateMode::Auto && !parts)) return conjugate_brute(h, p_box, q_grid);
  return conjugate_separable(*parts, p_box, q_grid);
}

namespace {

struct Table {
  std::vector<double> q, v;

  double value(double x) const {
    if (x < q.front() || x > q.back()) return std::numeric_limits<double>::infinity();
    auto it = std::upper_bound(q.begin(), q.end(), x);
    const std::size_t j = std::min(static_cast<std::size_t>(it - q.begin()), q.size() - 1);
    const std::size_t i = j - 1;
    const double w = (x - q[i]) / (q[j] - q[i]);
    return (1.0 - w) * v[i] + w * v[j];
  }
  double slope(double x) const {
    const double c = std::clamp(x, q.front(), q.back());
    auto it = std::upper_bound(q.begin(), q.end(), c);
    const std::size_t j = std::min(static_cast<std::size_t>(it - q.begin()), q.size() - 1);
    const std::size_t i = j - 1;
    return (v[j] - v[i]) / (q[j] - q[i]);
  }
};

// Sample nodes on [-p_max, p_max]: uniform on the inner [-8, 8] part and
// log-spaced beyond, so wide boxes keep resolution near the origin.
std::vector<double> profile_nodes(double p_max, std::size_t samples) {
  const double inner = std::min(p_max, 8.0);
  const std::size_t half = samples / 2;
  std::vector<double> pos;
  if (p_max > inner) {
    const std::size_t outer = half / 2, lin = half - outer;
    for (std::size_t i = 1; i <= lin; ++i) pos.push_back(inner * static_cast<double>(i) / static_cast<double>(lin));
    const double ratio = std::log(p_max / inner);
    for (std::size_t i = 1; i <= outer; ++i)
      pos.push_back(inner * std::exp(ratio * static_cast<double>(i) / static_cast<double>(outer)));
  } else {
    for (std::size_t i = 1; i <= half; ++i) pos.push_back(inner * static_cast<double>(i) / static_cast<double>(half));
  }
  std::vector<double> p;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) p.push_back(-*it);
  p.push_back(0.0);
  p.insert(p.end(), pos.begin(), pos.end());
  return p;
}

// Conjugate of the piecewise-linear interpolant of h. That conjugate is
// itself piecewise linear with kinks exactly at the hull slopes, so
// tabulating it there is lossless.
Conjugate1D conjugate_profile(const std::function<double(double)>& h, double p_max, std::size_t samples) {
  const std::vector<double> p = profile_nodes(p_max, samples);
  std::vector<double> hv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    hv[i] = h(p[i]);
    if (!std::isfinite(hv[i])) throw Error("conjugate_kernel: H is not finite on the sampled box");
  }
  const auto hull = lower_hull(p, hv);
  std::vector<double> q;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const double sl = (hv[hull[k + 1]] - hv[hull[k]]) / (p[hull[k + 1]] - p[hull[k]]);
    if (q.empty() || sl > q.back()) q.push_back(sl);
  }
  if (q.size() < 2) throw Error("conjugate_kernel: H has fewer than two distinct slopes on the box");
  return legendre_1d(p, hv, q);
}

}  // namespace

NumericConjugate conjugate_kernel(const Kernel& h, std::size_t n, double p_max, std::size_t samples) {
  if (!(p_max > 0.0)) throw Error("conjugate_kernel needs p_max > 0");
  if (samples < 3) throw Error("conjugate_kernel needs at least 3 samples");
  if (!h.accepts(n)) throw Error("conjugate_kernel: dimension mismatch");
  NumericConjugate out;
  if (h.is_radial()) {
    const Conjugate1D c = conjugate_profile([&](double x) { return h.radial(std::abs(x)); }, p_max, samples);
    auto table = std::make_shared<Table>();
    for (std::size_t i = 0; i < c.q.size(); ++i)
      if (c.q[i] >= 0.0) {
        table->q.push_back(c.q[i]);
        table->v.push_back(c.values[i]);
      }
    if (table->q.front() > 0.0) {
      table->q.insert(table->q.begin(), 0.0);
      table->v.insert(table->v.begin(), -h.radial(0.0));
    }
    out.trusted_radius = std::min(-c.slope_lo, c.slope_hi);
    out.kernel = Kernel::radial_custom(
        "conj(" + h.describe() + ")", [table](double r) { return table->value(r); },
        [table](double r) { return table->slope(r); });
    return out;
  }
  const auto parts = h.separable_parts(n);
  if (!parts) throw Error("conjugate_kernel needs a radial or separable Hamiltonian");
  std::vector<Kernel> conj;
  out.trusted_radius = std::numeric_limits<double>::infinity();
  for (const Kernel& part : *parts) {
    const Conjugate1D c = conjugate_profile(
        [&](double x) {
          const double a[1] = {x};
          return part.eval(std::span<const double>(a, 1));
        },
        p_max, samples);
    conj.push_back(Kernel::tabulated(c.q, c.values));
    out.trusted_radius = std::min(out.trusted_radius, std::min(-c.slope_lo, c.slope_hi));
  }
  auto shared = std::make_shared<std::vector<Kernel>>(conj);
  out.kernel = Kernel::custom(
      "conj(" + h.describe() + ")", n,
      [shared](std::span<const double> q) {
        double s = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) s += (*shared)[d].eval(q.subspan(d, 1));
        return s;
      },
      [shared](std::span<const double> q, std::span<double> g) {
        for (std::size_t d = 0; d < q.size(); ++d) (*shared)[d].grad(q.subspan(d, 1), g.subspan(d, 1));
      },
      conj);
  return out;
}

}  // namespace hopflax
