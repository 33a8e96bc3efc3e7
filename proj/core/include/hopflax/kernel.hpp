#ifndef HOPFLAX_KERNEL_HPP
#define HOPFLAX_KERNEL_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hopflax/grid.hpp"

namespace hopflax {

enum class KernelKind { Quadratic, PowerRadial, ExponentialRadial, AxisPower, Tabulated1D, RadialCustom, Custom };

/// Convex kernel used both as a Lagrangian L and as a Hamiltonian H.
///
///   Quadratic          coef |a|^2 / 2
///   PowerRadial        coef |a|^q
///   ExponentialRadial  (e/2)|a|^2 on B(0,1), e^{|a|} - e/2 outside
///   AxisPower          sum_i coef_i |a_i|^{s_i}   (one term per axis)
///   Tabulated1D        piecewise-linear interpolant, +inf outside its range
///   RadialCustom       phi(|a|) for a user profile phi (e.g. a numeric conjugate)
///   Custom             user eval/grad on a fixed dimension
///
/// Radial kinds accept points of any dimension; AxisPower and Tabulated1D
/// have a fixed dimension.
class Kernel {
 public:
  static Kernel quadratic(double coef = 1.0);
  static Kernel power_radial(double q, double coef = 1.0);
  static Kernel exponential_radial();
  static Kernel axis_power(std::vector<double> exponents, std::vector<double> coefs = {});
  /// L(x, y) = |x|^s + |y|^{s2}.
  static Kernel anisotropic(double s, double s2) { return axis_power({s, s2}); }
  static Kernel tabulated(std::vector<double> knots, std::vector<double> values);
  static Kernel radial_custom(std::string name, std::function<double(double)> phi,
                              std::function<double(double)> dphi);
  static Kernel custom(std::string name, std::size_t dim, std::function<double(std::span<const double>)> eval,
                       std::function<void(std::span<const double>, std::span<double>)> grad,
                       std::optional<std::vector<Kernel>> parts = std::nullopt);

  KernelKind kind() const { return kind_; }
  /// Fixed dimension, or nullopt for radial kernels.
  std::optional<std::size_t> dim() const;
  bool accepts(std::size_t n) const { return !dim() || *dim() == n; }

  double eval(std::span<const double> a) const;
  void grad(std::span<const double> a, std::span<double> out) const;
  double eval(const Point& a) const { return eval(a.span()); }
  Point grad(const Point& a) const;

  /// Radial profile phi with L(a) = phi(|a|); radial kinds only.
  bool is_radial() const;
  double radial(double r) const;
  double radial_slope(double r) const;

  /// Per-axis 1D kernels k_d with L(a) = sum_d k_d(a_d), when L splits that way.
  std::optional<std::vector<Kernel>> separable_parts(std::size_t n) const;

  /// Smallest radius R with eval(r u) >= level for r >= R along the unit
  /// direction u. Throws when no such radius is found below 1e12.
  double ray_crossing(std::span<const double> u, double level) const;

  /// Canonical spec string, e.g. "power:q=3" (see parse_kernel).
  std::string describe() const;

  const std::vector<double>& exponents() const { return exps_; }
  const std::vector<double>& coefs() const { return coefs_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& knot_values() const { return vals_; }

 private:
  KernelKind kind_ = KernelKind::Quadratic;
  std::vector<double> exps_, coefs_, knots_, vals_;
  struct Custom {
    std::string name;
    std::size_t dim = 0;
    std::function<double(double)> phi, dphi;
    std::function<double(std::span<const double>)> eval;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    std::optional<std::vector<Kernel>> parts;
  };
  std::shared_ptr<const Custom> custom_;
};

using Lagrangian = Kernel;
using Hamiltonian = Kernel;

/// C(s) = ((s-1)/s) (1/s)^{1/(s-1)}: the conjugate of |x|^s is C(s)|p|^{s/(s-1)}.
double power_conjugate_coef(double s);

}  // namespace hopflax

#endif  // HOPFLAX_KERNEL_HPP
