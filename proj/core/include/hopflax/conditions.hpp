#ifndef HOPFLAX_CONDITIONS_HPP
#define HOPFLAX_CONDITIONS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hopflax/kernel.hpp"

namespace hopflax {

enum class ConditionId { Aina, Paha2, Paha3 };
enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(ConditionId id);
std::string to_string(Verdict v);

/// Radii plus sphere directions. The directions are the 2n coordinate axes
/// followed by `random_directions` uniform unit vectors drawn from `seed`.
struct SamplePlan {
  std::size_t dim = 1;
  std::vector<double> radii;
  std::size_t random_directions = 0;
  std::uint64_t seed = 0;

  std::vector<Point> directions() const;
};

/// Log-uniformly spaced radii on [rmin, rmax] (inclusive).
SamplePlan log_plan(std::size_t dim, double rmin, double rmax, std::size_t count, std::size_t random_directions,
                    std::uint64_t seed = 20240917);

struct RadiusSample {
  double radius = 0.0;
  double value = 0.0;  // the per-radius extremum of the checked ratio
};

struct ConditionReport {
  ConditionId id = ConditionId::Aina;
  SamplePlan plan;
  std::vector<RadiusSample> per_radius;
  double extremum = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> warnings;
};

/// sup |DL(x)| |x| / L(x). Holds unless the per-radius sup grows by more than
/// 2% between the two largest radii.
ConditionReport check_growth_ratio(const Kernel& l, const SamplePlan& plan);

/// inf H(2x) / H(x). Fails when the inf is <= 2 or when the margin over 2
/// has decayed, monotonically toward the largest radius, below 10% of its
/// maximum; inconclusive below 25%; holds otherwise.
ConditionReport check_doubling(const Kernel& h, const SamplePlan& plan);

/// sup / inf of H over each sphere. Fails when the per-radius ratio grows by
/// more than 2% toward either end of the radius range.
ConditionReport check_quasi_radial(const Kernel& h, const SamplePlan& plan);

}  // namespace hopflax

#endif  // HOPFLAX_CONDITIONS_HPP
