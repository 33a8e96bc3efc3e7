#ifndef HOPFLAX_LEGENDRE_HPP
#define HOPFLAX_LEGENDRE_HPP

#include <vector>

#include "hopflax/field.hpp"
#include "hopflax/kernel.hpp"

namespace hopflax {

/// Discrete conjugate L(q) = max_i (p_i q - h_i) on a q grid. Values are only
/// faithful for q in [slope_lo, slope_hi], the slope range of the lower hull
/// of the samples; `trusted` flags the q points inside it.
struct Conjugate1D {
  std::vector<double> q;
  std::vector<double> values;
  std::vector<char> trusted;
  double slope_lo = 0.0;
  double slope_hi = 0.0;

  Kernel as_kernel() const { return Kernel::tabulated(q, values); }
};

/// Lower convex hull of (p_i, h_i) via the monotone chain; returns vertex indices.
std::vector<std::size_t> lower_hull(const std::vector<double>& p, const std::vector<double>& h);

/// O(N + M) hull march. p must be strictly increasing, q nondecreasing.
Conjugate1D legendre_1d(const std::vector<double>& p, const std::vector<double>& h, const std::vector<double>& q);
Conjugate1D legendre_1d(const Kernel& h_samples, const Grid& q_grid);

/// O(N M) reference.
std::vector<double> legendre_1d_brute(const std::vector<double>& p, const std::vector<double>& h,
                                      const std::vector<double>& q);

enum class ConjugateMode { Auto, Separable, Brute };

struct ConjugateND {
  Field values;
  std::vector<char> trusted;
  std::size_t trusted_count() const;
};

/// Conjugate of h sampled on p_box, evaluated on q_grid. The separable path
/// composes legendre_1d per axis; the brute path maximizes over all samples
/// and trusts a q only when its maximizer lies off the box boundary.
ConjugateND legendre_nd(const Kernel& h, const Grid& p_box, const Grid& q_grid,
                        ConjugateMode mode = ConjugateMode::Auto);

/// A numeric conjugate packaged as a kernel: radial inputs give a radial
/// profile, separable ones a per-axis sum of tabulated conjugates. Values are
/// faithful for |q| (radial) or every |q_d| (separable) up to trusted_radius
/// and +inf past the tabulated range.
struct NumericConjugate {
  Kernel kernel;
  double trusted_radius = 0.0;
};
NumericConjugate conjugate_kernel(const Kernel& h, std::size_t n, double p_max, std::size_t samples = 20001);

}  // namespace hopflax

#endif  // HOPFLAX_LEGENDRE_HPP
