#ifndef HOPFLAX_HOPF_LAX_HPP
#define HOPFLAX_HOPF_LAX_HPP

#include <optional>
#include <utility>
#include <vector>

#include "hopflax/field.hpp"
#include "hopflax/kernel.hpp"

namespace hopflax {

/// u_t on a grid, with the chosen offset a* = (y* - x)/t per point and the
/// near-minimizing offsets found within the capture tolerance.
struct HopfLaxSolution {
  Grid grid;
  double t = 0.0;
  double search_radius_used = 0.0;
  double resolution = 0.0;    // finest candidate spacing in y
  double merge_radius = 0.0;  // near-minimizers closer than this in y are one minimizer
  std::vector<double> values;
  std::vector<double> argmin;              // dim entries per point
  std::vector<std::size_t> near_begin;     // CSR row starts, size() + 1 entries
  std::vector<double> near_offsets;        // dim entries per near-minimizer
  std::vector<double> near_gaps;           // objective minus values[i]

  std::size_t dim() const { return grid.dim(); }
  std::size_t size() const { return values.size(); }
  Point offset(std::size_t i) const { return Point(std::span<const double>(argmin.data() + i * dim(), dim())); }
  std::size_t near_count(std::size_t i) const { return near_begin[i + 1] - near_begin[i]; }
  Point near_offset(std::size_t i, std::size_t k) const {
    return Point(std::span<const double>(near_offsets.data() + (near_begin[i] + k) * dim(), dim()));
  }
  double near_gap(std::size_t i, std::size_t k) const { return near_gaps[near_begin[i] + k]; }
};

struct SearchPlan {
  /// Window radius R_t in offset space; negative means "derive from
  /// search_radius(oscillation(u), l, t)".
  double radius = -1.0;
  /// Accept a radius below the derived one.
  bool override_radius = false;
  /// Candidate lattice spacing in y for closed-form fields; 0 means the
  /// output grid's smallest spacing.
  double lattice_spacing = 0.0;
  /// Coarse-to-fine levels around the incumbents (closed-form fields only).
  int levels = 3;
  std::size_t max_seeds = 4;
  /// Near-minimizer tolerance, relative: tol = rel_tol * (1 + |u_t(x)|).
  double rel_tol = 1e-8;
  /// Candidates are recorded up to capture_factor * tol above the minimum.
  double capture_factor = 100.0;
  std::size_t max_near = 64;
  /// Cap on the coarse lattice size per output point.
  std::size_t max_lattice = 4'000'000;
};

/// Smallest R with t L(a) > 2 osc for every |a| >= R (bisection along a ray;
/// for non-radial kernels the maximum over the axes and extra sampled
/// directions).
double search_radius(double osc, const Lagrangian& l, double t);

struct PointSolution {
  double value = 0.0;
  Point argmin;
  std::vector<Point> near;     // sorted by gap, then |a|
  std::vector<double> gaps;
};

/// Evaluates inf_a u(x + t a) + t L(a) at single points. Holds an index of
/// the field's critical points so repeated queries stay cheap.
class PointSolver {
 public:
  PointSolver(const Field& u, const Lagrangian& l, double t, SearchPlan plan);

  PointSolution solve(const Point& x) const;
  double radius() const { return radius_; }
  double resolution() const;
  /// Two coarse lattice steps in y (two grid steps for tabulated fields):
  /// distinct seeds are never closer than this.
  double merge_radius() const;
  const SearchPlan& plan() const { return plan_; }
  double objective(const Point& x, const Point& a) const;

 private:
  struct Candidate;
  void tabulated_candidates(const Point& x, std::vector<Candidate>& out) const;
  void lattice_candidates(const Point& x, std::vector<Candidate>& out) const;
  void critical_candidates(const Point& x, std::vector<Candidate>& out) const;
  void refine(const Point& x, std::vector<Candidate>& all) const;

  const Field& u_;
  Lagrangian l_;
  double t_;
  SearchPlan plan_;
  double radius_ = 0.0;
  // bucket index over critical points
  double cell_ = 0.0;
  std::vector<std::vector<long>> keys_;
  std::vector<std::size_t> order_;
};

HopfLaxSolution hopf_lax_brute(const Field& u, const Lagrangian& l, double t, const Grid& out_grid,
                               SearchPlan plan = {});

/// Offsets whose objective is within tol of the minimum at grid point index i,
/// deduplicated and sorted by |a|. Never empty.
std::vector<Point> minimizer_set(const HopfLaxSolution& sol, std::size_t i, double tol);
std::vector<Point> minimizer_set(const HopfLaxSolution& sol, const Point& x, double tol);

struct GradientResult {
  VectorField grad;
  std::vector<char> nondiff;
  double nondiff_fraction = 0.0;  // quadrature-weighted share of the box
};

/// Du_t(x) = -DL(a*) where every near-minimizer agrees on DL; other points
/// are flagged. Near-minimizers are first grouped by single linkage at the
/// solution's merge radius in y; each group counts as one minimizer.
GradientResult gradient_from_minimizers(const HopfLaxSolution& sol, const Lagrangian& l);

/// Same rule at a single solved point; nullopt when the minimizers disagree.
std::optional<Point> gradient_at(const PointSolution& ps, const Lagrangian& l, double t, double merge_radius,
                                 double tol);

/// inf over the tol-minimizer set of -DL(a) . gamma.
double directional_derivative(const Field& u, const Lagrangian& l, double t, const Point& x, const Point& gamma,
                              double tol, SearchPlan plan = {});

}  // namespace hopflax

#endif  // HOPFLAX_HOPF_LAX_HPP
