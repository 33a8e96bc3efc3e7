#ifndef HOPFLAX_MOREAU_HPP
#define HOPFLAX_MOREAU_HPP

#include <utility>
#include <vector>

#include "hopflax/hopf_lax.hpp"

namespace hopflax {

/// Lower envelope of the parabolas f_i + (x - c_i)^2 / (2t) over sorted
/// centres c_i: the surviving centre indices and the breakpoints between them
/// (breaks.size() == sites.size() + 1, outer entries are -inf / +inf).
struct ParabolaEnvelope {
  std::vector<std::size_t> sites;
  std::vector<double> breaks;
};
ParabolaEnvelope parabola_envelope(const std::vector<double>& c, const std::vector<double>& f, double t);

/// u_t(x) = min_y u(y) + |x - y|^2 / (2t) over all grid points, one envelope
/// pass per axis. Only the chosen minimizer is recorded per point.
HopfLaxSolution moreau_quadratic(const Field& u, double t);

/// Per-axis inf-convolution for kernels L(a) = sum_d k_d(a_d) with convex
/// k_d. The leftmost argmin is monotone in x, so each line is solved by
/// divide and conquer in O(N log N).
HopfLaxSolution hopf_lax_separable(const Field& u, const Lagrangian& l, double t);

/// (u_{t+s}, (u_t)_s) for 1D tabulated u and L = |a|^2/2. The outer step
/// minimizes over the continuous envelope of u_t on the box rather than its
/// grid samples, so both sides agree up to rounding wherever the composed
/// minimizer stays inside the box.
std::pair<HopfLaxSolution, HopfLaxSolution> semigroup_compose(const Field& u, double t, double s);

}  // namespace hopflax

#endif  // HOPFLAX_MOREAU_HPP
