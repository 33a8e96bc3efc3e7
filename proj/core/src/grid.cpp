#include "hopflax/grid.hpp"

#include <limits>

namespace hopflax {

Grid::Grid(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> counts)
    : lo_(std::move(lo)), hi_(std::move(hi)), counts_(std::move(counts)) {
  const std::size_t n = lo_.size();
  if (n == 0 || n > kMaxDim) throw Error("grid dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (hi_.size() != n || counts_.size() != n) throw Error("grid bounds and counts disagree in dimension");
  h_.resize(n);
  strides_.resize(n);
  size_ = 1;
  for (std::size_t d = 0; d < n; ++d) {
    if (!(lo_[d] < hi_[d])) throw Error("grid axis " + std::to_string(d) + " needs lo < hi");
    if (counts_[d] < 2) throw Error("grid axis " + std::to_string(d) + " needs at least 2 points");
    h_[d] = (hi_[d] - lo_[d]) / static_cast<double>(counts_[d] - 1);
    if (size_ > std::numeric_limits<std::size_t>::max() / counts_[d]) throw Error("grid too large");
    size_ *= counts_[d];
  }
  std::size_t s = 1;
  for (std::size_t d = n; d-- > 0;) {
    strides_[d] = s;
    s *= counts_[d];
  }
}

Grid Grid::uniform(std::size_t dim, double lo, double hi, std::size_t count) {
  return Grid(std::vector<double>(dim, lo), std::vector<double>(dim, hi), std::vector<std::size_t>(dim, count));
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : h_) v *= h;
  return v;
}

double Grid::weight(std::size_t linear) const {
  double w = 1.0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const std::size_t i = (linear / strides_[d]) % counts_[d];
    w *= (i == 0 || i + 1 == counts_[d]) ? 0.5 * h_[d] : h_[d];
  }
  return w;
}

Point Grid::point(std::size_t linear) const {
  Point x(dim());
  for (std::size_t d = 0; d < dim(); ++d) x[d] = coordinate(d, (linear / strides_[d]) % counts_[d]);
  return x;
}

std::array<std::size_t, kMaxDim> Grid::multi_index(std::size_t linear) const {
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t d = 0; d < dim(); ++d) idx[d] = (linear / strides_[d]) % counts_[d];
  return idx;
}

std::size_t Grid::linear_index(std::span<const std::size_t> idx) const {
  std::size_t k = 0;
  for (std::size_t d = 0; d < dim(); ++d) k += idx[d] * strides_[d];
  return k;
}

std::size_t Grid::locate(const Point& x) const {
  if (x.size() != dim()) throw Error("point dimension does not match grid");
  std::size_t k = 0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double f = (x[d] - lo_[d]) / h_[d];
    const double r = std::round(f);
    if (std::abs(f - r) > 1e-9 || r < 0 || r > static_cast<double>(counts_[d] - 1))
      throw Error("point is not on the grid");
    k += static_cast<std::size_t>(r) * strides_[d];
  }
  return k;
}

bool Grid::contains(const Point& x) const {
  for (std::size_t d = 0; d < dim(); ++d)
    if (x[d] < lo_[d] || x[d] > hi_[d]) return false;
  return true;
}

bool Grid::is_boundary(std::size_t linear) const {
  for (std::size_t d = 0; d < dim(); ++d) {
    const std::size_t i = (linear / strides_[d]) % counts_[d];
    if (i == 0 || i + 1 == counts_[d]) return true;
  }
  return false;
}

}  // namespace hopflax
