#include "hopflax/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hopflax {

Field Field::tabulated(Grid grid, std::vector<double> values, std::optional<double> bound) {
  if (values.size() != grid.size()) throw Error("value count does not match grid size");
  double sup = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("tabulated field has a non-finite value");
    sup = std::max(sup, std::abs(v));
  }
  if (bound && *bound < sup) throw Error("declared bound is below sup|u|");
  Field f;
  f.repr_ = TabulatedField{std::move(grid), std::move(values)};
  f.bound_ = bound.value_or(sup);
  return f;
}

Field Field::closed_form(ClosedFormField form, double bound) {
  if (!form.value) throw Error("closed-form field needs an evaluator");
  if (form.dim == 0 || form.dim > kMaxDim) throw Error("closed-form field dimension out of range");
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw Error("closed-form field needs a finite bound");
  for (const Point& c : form.critical_points)
    if (c.size() != form.dim) throw Error("critical point dimension mismatch");
  Field f;
  f.repr_ = std::move(form);
  f.bound_ = bound;
  return f;
}

const TabulatedField& Field::table() const {
  if (const auto* t = std::get_if<TabulatedField>(&repr_)) return *t;
  throw Error("field is not tabulated");
}

const ClosedFormField& Field::closed() const {
  if (const auto* c = std::get_if<ClosedFormField>(&repr_)) return *c;
  throw Error("field is not closed-form");
}

std::size_t Field::dim() const {
  return is_tabulated() ? table().grid.dim() : closed().dim;
}

double Field::value_at(const Point& x) const {
  if (!is_tabulated()) return closed().value(x.span());
  const Grid& g = table().grid;
  const auto& v = table().values;
  const std::size_t n = g.dim();
  std::array<std::size_t, kMaxDim> base{};
  std::array<double, kMaxDim> w{};
  for (std::size_t d = 0; d < n; ++d) {
    const double top = static_cast<double>(g.count(d) - 1);
    const double f = std::clamp((x[d] - g.lo(d)) / g.spacing(d), 0.0, top);
    const std::size_t i0 = std::min(static_cast<std::size_t>(f), g.count(d) - 2);
    base[d] = i0;
    w[d] = f - static_cast<double>(i0);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double weight = 1.0;
    std::size_t k = 0;
    for (std::size_t d = 0; d < n; ++d) {
      const bool up = (corner >> d) & 1U;
      weight *= up ? w[d] : 1.0 - w[d];
      k += (base[d] + (up ? 1 : 0)) * g.stride(d);
    }
    if (weight != 0.0) acc += weight * v[k];
  }
  return acc;
}

bool Field::has_gradient() const { return !is_tabulated() && static_cast<bool>(closed().gradient); }

Point Field::gradient_at(const Point& x) const {
  if (!has_gradient()) throw Error("field has no analytic gradient");
  Point g(dim());
  closed().gradient(x.span(), g.span());
  return g;
}

std::span<const Point> Field::critical_points() const {
  if (is_tabulated()) return {};
  return closed().critical_points;
}

double VectorField::magnitude(std::size_t i) const {
  double s = 0.0;
  for (double c : at(i)) s += c * c;
  return std::sqrt(s);
}

Field sample(const Field& f, const Grid& grid) {
  if (f.dim() != grid.dim()) throw Error("field and grid dimensions differ");
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    const double v = f.value_at(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite field value at (";
      for (std::size_t d = 0; d < x.size(); ++d) msg << (d ? ", " : "") << x[d];
      msg << ")";
      throw Error(msg.str());
    }
    values[i] = v;
  }
  return Field::tabulated(grid, std::move(values), std::max(f.bound(), 0.0));
}

VectorField gradient_fd(const Field& u) {
  const Grid& g = u.grid();
  const auto& v = u.values();
  for (std::size_t d = 0; d < g.dim(); ++d)
    if (g.count(d) < 3) throw Error("gradient_fd needs at least 3 points per axis");
  VectorField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.multi_index(i);
    for (std::size_t d = 0; d < g.dim(); ++d) {
      const std::size_t s = g.stride(d);
      const double h = g.spacing(d);
      const std::size_t k = idx[d];
      double dv;
      if (k == 0)
        dv = (-3.0 * v[i] + 4.0 * v[i + s] - v[i + 2 * s]) / (2.0 * h);
      else if (k + 1 == g.count(d))
        dv = (3.0 * v[i] - 4.0 * v[i - s] + v[i - 2 * s]) / (2.0 * h);
      else
        dv = (v[i + s] - v[i - s]) / (2.0 * h);
      out.at(i)[d] = dv;
    }
  }
  return out;
}

VectorField sample_gradient(const Field& u, const Grid& grid) {
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point gx = u.gradient_at(grid.point(i));
    std::copy(gx.span().begin(), gx.span().end(), out.at(i).begin());
  }
  return out;
}

namespace {

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error("lp_norm needs a finite p >= 1");
}

}  // namespace

double lp_norm(const VectorField& v, double p) {
  check_exponent(p);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.grid.size(); ++i) {
    const double m = v.magnitude(i);
    if (m != 0.0) acc += std::pow(m, p) * v.grid.weight(i);
  }
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const Field& u, double p) {
  check_exponent(p);
  const Grid& g = u.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = std::abs(u.values()[i]);
    if (m != 0.0) acc += std::pow(m, p) * g.weight(i);
  }
  return std::pow(acc, 1.0 / p);
}

VectorField difference(const VectorField& a, const VectorField& b) {
  if (!(a.grid == b.grid)) throw Error("vector fields live on different grids");
  VectorField out(a.grid);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = a.data[k] - b.data[k];
  return out;
}

Field magnitude_power(const VectorField& v, double power) {
  std::vector<double> values(v.grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::pow(v.magnitude(i), power);
  return Field::tabulated(v.grid, std::move(values));
}

Field maximal_function(const Field& u, std::span<const double> radii_in) {
  if (radii_in.empty()) throw Error("maximal_function needs at least one radius");
  const Grid& g = u.grid();
  const std::size_t n = g.dim();
  std::vector<double> radii(radii_in.begin(), radii_in.end());
  std::sort(radii.begin(), radii.end());
  if (!(radii.front() > 0.0)) throw Error("maximal_function radii must be positive");
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < n; ++d) hmin = std::min(hmin, g.spacing(d));
  if (radii.back() < hmin) throw Error("maximal_function needs a radius of at least one grid spacing");

  // Offsets within the largest ball, sorted by centre distance.
  struct Offset {
    std::array<long, kMaxDim> k;
    double dist;
  };
  std::vector<Offset> stencil;
  std::array<long, kMaxDim> reach{};
  for (std::size_t d = 0; d < n; ++d) reach[d] = static_cast<long>(std::floor(radii.back() / g.spacing(d)));
  std::array<long, kMaxDim> k{};
  for (std::size_t d = 0; d < n; ++d) k[d] = -reach[d];
  while (true) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < n; ++d) r2 += std::pow(static_cast<double>(k[d]) * g.spacing(d), 2);
    const double r = std::sqrt(r2);
    if (r <= radii.back()) stencil.push_back({k, r});
    std::size_t d = 0;
    for (; d < n; ++d) {
      if (++k[d] <= reach[d]) break;
      k[d] = -reach[d];
    }
    if (d == n) break;
  }
  std::stable_sort(stencil.begin(), stencil.end(), [](const Offset& a, const Offset& b) { return a.dist < b.dist; });

  const auto& v = u.values();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.multi_index(i);
    double sum = 0.0;
    std::size_t count = 0;
    double best = std::abs(v[i]);
    std::size_t next_radius = 0;
    for (std::size_t s = 0; s < stencil.size(); ++s) {
      const Offset& o = stencil[s];
      while (next_radius < radii.size() && o.dist > radii[next_radius]) {
        if (count > 0) best = std::max(best, sum / static_cast<double>(count));
        ++next_radius;
      }
      bool inside = true;
      std::size_t j = 0;
      for (std::size_t d = 0; d < n && inside; ++d) {
        const long c = static_cast<long>(idx[d]) + o.k[d];
        if (c < 0 || c >= static_cast<long>(g.count(d))) inside = false;
        else j += static_cast<std::size_t>(c) * g.stride(d);
      }
      if (inside) {
        sum += std::abs(v[j]);
        ++count;
      }
    }
    if (count > 0) best = std::max(best, sum / static_cast<double>(count));
    out[i] = best;
  }
  return Field::tabulated(g, std::move(out));
}

double oscillation(const Field& u) {
  if (u.is_tabulated()) {
    const auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
    return *hi - *lo;
  }
  const ClosedFormField& c = u.closed();
  if (!c.support_radius) throw Error("oscillation of a closed-form field needs a support radius");
  const double R = *c.support_radius;
  const std::size_t n = c.dim;
  const std::size_t per_axis =
      std::max<std::size_t>(3, static_cast<std::size_t>(std::pow(65536.0, 1.0 / static_cast<double>(n))));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto visit = [&](const Point& x) {
    const double v = c.value(x.span());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  const Grid box = Grid::uniform(n, -R, R, per_axis);
  for (std::size_t i = 0; i < box.size(); ++i) visit(box.point(i));
  for (const Point& p : c.critical_points) visit(p);
  Point outside(n);
  outside[0] = 2.0 * R + 1.0;
  visit(outside);
  return hi - lo;
}

}  // namespace hopflax
