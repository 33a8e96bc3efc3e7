#ifndef HOPFLAX_FIELD_HPP
#define HOPFLAX_FIELD_HPP

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hopflax/grid.hpp"

namespace hopflax {

using ScalarFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

struct TabulatedField {
  Grid grid;
  std::vector<double> values;
};

/// A field given by an evaluator. Critical points are locations the solver
/// must always consider as candidates (cusps, bump centres) because no
/// affordable lattice would hit them.
struct ClosedFormField {
  std::size_t dim = 1;
  ScalarFn value;
  GradientFn gradient;  // may be empty
  std::vector<Point> critical_points;
  std::optional<double> support_radius;  // field is constant outside B(0, R)
};

/// Bounded scalar initial datum. The bound is a known upper bound on sup|u|.
class Field {
 public:
  static Field tabulated(Grid grid, std::vector<double> values, std::optional<double> bound = std::nullopt);
  static Field closed_form(ClosedFormField form, double bound);

  bool is_tabulated() const { return std::holds_alternative<TabulatedField>(repr_); }
  const TabulatedField& table() const;
  const ClosedFormField& closed() const;
  std::size_t dim() const;
  double bound() const { return bound_; }

  const Grid& grid() const { return table().grid; }
  const std::vector<double>& values() const { return table().values; }

  /// Point evaluation. Tabulated fields interpolate multilinearly inside the
  /// box and take the nearest boundary value outside it.
  double value_at(const Point& x) const;

  /// Analytic gradient when available (closed form with a gradient).
  bool has_gradient() const;
  Point gradient_at(const Point& x) const;

  std::span<const Point> critical_points() const;

 private:
  std::variant<TabulatedField, ClosedFormField> repr_;
  double bound_ = 0.0;
};

/// n components per grid point, stored point-major.
struct VectorField {
  Grid grid;
  std::vector<double> data;

  VectorField() = default;
  explicit VectorField(Grid g) : grid(std::move(g)), data(grid.size() * grid.dim(), 0.0) {}

  std::size_t components() const { return grid.dim(); }
  std::span<double> at(std::size_t i) { return {data.data() + i * components(), components()}; }
  std::span<const double> at(std::size_t i) const { return {data.data() + i * components(), components()}; }
  double magnitude(std::size_t i) const;
};

Field sample(const Field& f, const Grid& grid);

/// Second-order finite differences: central inside, one-sided at the edges.
VectorField gradient_fd(const Field& u);

/// Analytic gradient of a closed-form field sampled on a grid.
VectorField sample_gradient(const Field& u, const Grid& grid);

double lp_norm(const VectorField& v, double p);
double lp_norm(const Field& u, double p);

VectorField difference(const VectorField& a, const VectorField& b);

/// Pointwise Euclidean magnitude raised to `power` as a tabulated field.
Field magnitude_power(const VectorField& v, double power);

/// Discrete centred Hardy-Littlewood maximal function of |u|: the pointwise
/// maximum over the given radii of the average of |u| over grid points within
/// each radius (centre distance). The point itself is always one of the
/// averages, so M u >= |u|.
Field maximal_function(const Field& u, std::span<const double> radii);

/// sup u - inf u. Closed-form fields are sampled densely on their support box,
/// at every critical point and at one exterior point.
double oscillation(const Field& u);

}  // namespace hopflax

#endif  // HOPFLAX_FIELD_HPP
