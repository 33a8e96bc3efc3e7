#ifndef HOPFLAX_GRID_HPP
#define HOPFLAX_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopflax {

/// Raised for every contract violation in the library (bad arguments,
/// violated construction invariants, unreadable files).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxDim = 4;

/// Small fixed-capacity point / vector in R^n, n <= kMaxDim.
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t n) : n_(n) {
    if (n > kMaxDim) throw Error("dimension exceeds kMaxDim");
  }
  Point(std::initializer_list<double> xs) : Point(xs.size()) {
    std::size_t i = 0;
    for (double x : xs) c_[i++] = x;
  }
  explicit Point(std::span<const double> xs) : Point(xs.size()) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] = xs[i];
  }

  std::size_t size() const { return n_; }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }
  std::span<const double> span() const { return {c_.data(), n_}; }
  std::span<double> span() { return {c_.data(), n_}; }

  double norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += c_[i] * c_[i];
    return std::sqrt(s);
  }

  Point& operator+=(const Point& o) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.n_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t n_ = 0;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Uniform tensor grid on the box [lo, hi] with points_per_axis samples per
/// axis, both endpoints included. Linear indices are row-major: the last axis
/// varies fastest.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> counts);

  static Grid uniform(std::size_t dim, double lo, double hi, std::size_t count);
  static Grid line(double lo, double hi, std::size_t count) { return uniform(1, lo, hi, count); }

  std::size_t dim() const { return lo_.size(); }
  std::size_t size() const { return size_; }
  double lo(std::size_t d) const { return lo_[d]; }
  double hi(std::size_t d) const { return hi_[d]; }
  std::size_t count(std::size_t d) const { return counts_[d]; }
  double spacing(std::size_t d) const { return h_[d]; }
  std::size_t stride(std::size_t d) const { return strides_[d]; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  /// Product of spacings.
  double cell_volume() const;

  /// Quadrature weight of a point: its cell clipped to the box.
  double weight(std::size_t linear) const;

  double coordinate(std::size_t d, std::size_t i) const { return lo_[d] + static_cast<double>(i) * h_[d]; }
  Point point(std::size_t linear) const;
  std::array<std::size_t, kMaxDim> multi_index(std::size_t linear) const;
  std::size_t linear_index(std::span<const std::size_t> idx) const;

  /// Index of the grid point that coincides with x (within 1e-9 of a cell),
  /// or throws when x is not a grid point.
  std::size_t locate(const Point& x) const;

  bool contains(const Point& x) const;
  bool is_boundary(std::size_t linear) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<double> lo_, hi_, h_;
  std::vector<std::size_t> counts_, strides_;
  std::size_t size_ = 0;
};

}  // namespace hopflax

#endif  // HOPFLAX_GRID_HPP
