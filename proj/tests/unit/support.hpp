#ifndef HOPFLAX_TEST_SUPPORT_HPP
#define HOPFLAX_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hopflax/field.hpp"

namespace hopflax::test {

inline Field tabulate(const Grid& g, auto&& f, std::optional<double> bound = std::nullopt) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i));
  return Field::tabulated(g, std::move(v), bound);
}

// Smooth random field: a few random Gaussian bumps, flat near the box edge.
inline Field random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-0.5, 0.5), amp(-1.0, 1.0), w(0.05, 0.3);
  struct Bump {
    Point c;
    double a, w;
  };
  std::vector<Bump> bumps;
  for (int k = 0; k < 4; ++k) {
    Point p(g.dim());
    for (std::size_t d = 0; d < g.dim(); ++d) p[d] = c(rng);
    bumps.push_back({p, amp(rng), w(rng)});
  }
  return tabulate(g, [&](const Point& x) {
    double s = 0.0;
    for (const Bump& b : bumps) s += b.a * std::exp(-std::pow((x - b.c).norm() / b.w, 2));
    return s;
  });
}

// Unstructured random values (non-smooth).
inline Field noise_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = d(rng);
  return Field::tabulated(g, std::move(v));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace hopflax::test

#endif
