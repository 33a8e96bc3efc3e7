#include "hopflax/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "numfmt.hpp"

namespace hopflax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

Kernel Kernel::quadratic(double coef) {
  if (!(coef > 0.0)) throw Error("quadratic kernel needs coef > 0");
  Kernel k;
  k.kind_ = KernelKind::Quadratic;
  k.coefs_ = {coef};
  return k;
}

Kernel Kernel::power_radial(double q, double coef) {
  if (!(q > 1.0) || !std::isfinite(q)) throw Error("power kernel needs exponent q > 1");
  if (!(coef > 0.0)) throw Error("power kernel needs coef > 0");
  Kernel k;
  k.kind_ = KernelKind::PowerRadial;
  k.exps_ = {q};
  k.coefs_ = {coef};
  return k;
}

Kernel Kernel::exponential_radial() {
  Kernel k;
  k.kind_ = KernelKind::ExponentialRadial;
  return k;
}

Kernel Kernel::axis_power(std::vector<double> exponents, std::vector<double> coefs) {
  if (exponents.empty() || exponents.size() > kMaxDim) throw Error("axis kernel needs 1..4 exponents");
  if (coefs.empty()) coefs.assign(exponents.size(), 1.0);
  if (coefs.size() != exponents.size()) throw Error("axis kernel exponent/coef count mismatch");
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (!(exponents[i] > 1.0) || !std::isfinite(exponents[i])) throw Error("axis kernel exponents must exceed 1");
    if (!(coefs[i] > 0.0)) throw Error("axis kernel coefs must be positive");
  }
  Kernel k;
  k.kind_ = KernelKind::AxisPower;
  k.exps_ = std::move(exponents);
  k.coefs_ = std::move(coefs);
  return k;
}

Kernel Kernel::tabulated(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() < 2 || knots.size() != values.size()) throw Error("tabulated kernel needs >= 2 matching samples");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) throw Error("tabulated kernel samples must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1])) throw Error("tabulated kernel knots must increase strictly");
  }
  Kernel k;
  k.kind_ = KernelKind::Tabulated1D;
  k.knots_ = std::move(knots);
  k.vals_ = std::move(values);
  return k;
}

Kernel Kernel::radial_custom(std::string name, std::function<double(double)> phi,
                             std::function<double(double)> dphi) {
  if (!phi || !dphi) throw Error("radial kernel needs a profile and its slope");
  Kernel k;
  k.kind_ = KernelKind::RadialCustom;
  k.custom_ = std::make_shared<const Custom>(Custom{std::move(name), 0, std::move(phi), std::move(dphi), {}, {}, {}});
  return k;
}

Kernel Kernel::custom(std::string name, std::size_t dim, std::function<double(std::span<const double>)> eval,
                      std::function<void(std::span<const double>, std::span<double>)> grad,
                      std::optional<std::vector<Kernel>> parts) {
  if (dim == 0 || dim > kMaxDim) throw Error("custom kernel dimension out of range");
  if (!eval || !grad) throw Error("custom kernel needs eval and grad");
  Kernel k;
  k.kind_ = KernelKind::Custom;
  k.custom_ = std::make_shared<const Custom>(Custom{std::move(name), dim, {}, {}, std::move(eval), std::move(grad), std::move(parts)});
  return k;
}

std::optional<std::size_t> Kernel::dim() const {
  switch (kind_) {
    case KernelKind::AxisPower: return exps_.size();
    case KernelKind::Tabulated1D: return 1;
    case KernelKind::Custom: return custom_->dim;
    default: return std::nullopt;
  }
}

bool Kernel::is_radial() const {
  return kind_ == KernelKind::Quadratic || kind_ == KernelKind::PowerRadial ||
         kind_ == KernelKind::ExponentialRadial || kind_ == KernelKind::RadialCustom;
}

double Kernel::radial(double r) const {
  switch (kind_) {
    case KernelKind::Quadratic: return 0.5 * coefs_[0] * r * r;
    case KernelKind::PowerRadial: return coefs_[0] * std::pow(r, exps_[0]);
    case KernelKind::ExponentialRadial:
      return r <= 1.0 ? 0.5 * std::numbers::e * r * r : std::exp(r) - 0.5 * std::numbers::e;
    case KernelKind::RadialCustom: return custom_->phi(r);
    default: throw Error("kernel is not radial");
  }
}

double Kernel::radial_slope(double r) const {
  switch (kind_) {
    case KernelKind::Quadratic: return coefs_[0] * r;
    case KernelKind::PowerRadial: return coefs_[0] * exps_[0] * std::pow(r, exps_[0] - 1.0);
    case KernelKind::ExponentialRadial: return r <= 1.0 ? std::numbers::e * r : std::exp(r);
    case KernelKind::RadialCustom: return custom_->dphi(r);
    default: throw Error("kernel is not radial");
  }
}

double Kernel::eval(std::span<const double> a) const {
  if (!accepts(a.size())) throw Error("kernel dimension mismatch");
  switch (kind_) {
    case KernelKind::AxisPower: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += coefs_[i] * std::pow(std::abs(a[i]), exps_[i]);
      return s;
    }
    case KernelKind::Tabulated1D: {
      const double x = a[0];
      if (x < knots_.front() || x > knots_.back()) return kInf;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      std::size_t j = static_cast<std::size_t>(it - knots_.begin());
      if (j >= knots_.size()) return vals_.back();
      const std::size_t i = j - 1;
      const double w = (x - knots_[i]) / (knots_[j] - knots_[i]);
      return (1.0 - w) * vals_[i] + w * vals_[j];
    }
    case KernelKind::Custom: return custom_->eval(a);
    default: return radial(norm(a));
  }
}

void Kernel::grad(std::span<const double> a, std::span<double> out) const {
  if (!accepts(a.size()) || out.size() != a.size()) throw Error("kernel dimension mismatch");
  switch (kind_) {
    case KernelKind::AxisPower:
      for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = coefs_[i] * exps_[i] * std::pow(std::abs(a[i]), exps_[i] - 1.0) * sign(a[i]);
      return;
    case KernelKind::Tabulated1D: {
      const double x = std::clamp(a[0], knots_.front(), knots_.back());
      auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      std::size_t j = std::min(static_cast<std::size_t>(it - knots_.begin()), knots_.size() - 1);
      const std::size_t i = j - 1;
      out[0] = (vals_[j] - vals_[i]) / (knots_[j] - knots_[i]);
      return;
    }
    case KernelKind::Custom: custom_->grad(a, out); return;
    default: {
      const double r = norm(a);
      if (r == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      const double s = radial_slope(r) / r;
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    }
  }
}

Point Kernel::grad(const Point& a) const {
  Point g(a.size());
  grad(a.span(), g.span());
  return g;
}

std::optional<std::vector<Kernel>> Kernel::separable_parts(std::size_t n) const {
  if (!accepts(n)) return std::nullopt;
  std::vector<Kernel> parts;
  switch (kind_) {
    case KernelKind::Quadratic:
      for (std::size_t d = 0; d < n; ++d) parts.push_back(axis_power({2.0}, {0.5 * coefs_[0]}));
      return parts;
    case KernelKind::PowerRadial:
      if (n == 1) return std::vector<Kernel>{axis_power({exps_[0]}, {coefs_[0]})};
      return std::nullopt;
    case KernelKind::AxisPower:
      for (std::size_t d = 0; d < n; ++d) parts.push_back(axis_power({exps_[d]}, {coefs_[d]}));
      return parts;
    case KernelKind::Tabulated1D:
      return std::vector<Kernel>{*this};
    case KernelKind::ExponentialRadial:
    case KernelKind::RadialCustom:
      if (n == 1) return std::vector<Kernel>{*this};
      return std::nullopt;
    case KernelKind::Custom:
      return custom_->parts;
  }
  return std::nullopt;
}

double Kernel::ray_crossing(std::span<const double> u, double level) const {
  if (level <= 0.0) return 0.0;
  std::vector<double> a(u.size());
  auto along = [&](double r) {
    for (std::size_t i = 0; i < u.size(); ++i) a[i] = r * u[i];
    return eval(a);
  };
  double hi = 1.0;
  while (!(along(hi) >= level)) {
    hi *= 2.0;
    if (hi > 1e12) throw Error("kernel is not superlinear along a sampled ray (" + describe() + ")");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (along(mid) >= level ? hi : lo) = mid;
  }
  return hi;
}

std::string Kernel::describe() const {
  using detail::fmt;
  switch (kind_) {
    case KernelKind::Quadratic:
      return coefs_[0] == 1.0 ? "quadratic" : "quadratic:c=" + fmt(coefs_[0]);
    case KernelKind::PowerRadial:
      return "power:q=" + fmt(exps_[0]) + (coefs_[0] == 1.0 ? "" : ",c=" + fmt(coefs_[0]));
    case KernelKind::ExponentialRadial: return "exp-radial";
    case KernelKind::AxisPower: {
      std::string s = "aniso:";
      for (std::size_t i = 0; i < exps_.size(); ++i)
        s += (i ? ",s" + std::to_string(i + 1) : std::string("s")) + "=" + fmt(exps_[i]);
      for (std::size_t i = 0; i < coefs_.size(); ++i)
        if (coefs_[i] != 1.0) s += ",c" + (i ? std::to_string(i + 1) : std::string()) + "=" + fmt(coefs_[i]);
      return s;
    }
    case KernelKind::Tabulated1D:
      return "tab:" + std::to_string(knots_.size()) + "-samples";
    case KernelKind::RadialCustom:
    case KernelKind::Custom:
      return custom_->name;
  }
  return "?";
}

double power_conjugate_coef(double s) {
  if (!(s > 1.0)) throw Error("power_conjugate_coef needs s > 1");
  return ((s - 1.0) / s) * std::pow(1.0 / s, 1.0 / (s - 1.0));
}

}  // namespace hopflax
