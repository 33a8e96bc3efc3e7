#ifndef HOPFLAX_EXPERIMENT_HPP
#define HOPFLAX_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hopflax/report.hpp"

namespace hopflax {

inline constexpr const char* kExperimentIds[] = {"converge",     "bump-blowup", "exp-blowup",
                                                 "aniso-blowup", "conditions",  "transform-check"};

struct ExperimentConfig {
  std::string id = "converge";
  std::string field = "bump";
  std::string lagrangian = "quadratic";
  std::string hamiltonian = "quadratic";
  std::size_t n = 1;
  double p = 2.0;
  double alpha = 0.6;
  double s = 3.0;
  double s2 = 2.0;
  int kmin = 2;
  int kmax = 3;
  /// t_j = base^-j for j = tmax_exp .. tmin_exp.
  double base = 2.0;
  int tmax_exp = 1;
  int tmin_exp = 7;
  std::size_t res = 0;  // points per axis; 0 picks a default for n
  double box = 2.0;     // half-width of the output box
  int levels = 6;
  std::size_t samples = 64;
  std::uint64_t seed = 20240917;
  bool timing = false;
  std::string format = "csv";
  std::string out;
  std::string expect;  // expected verdict; empty means the experiment's default

  std::vector<double> times() const;
  void validate() const;
  nlohmann::json to_json() const;
};

/// The preset for an experiment id.
ExperimentConfig defaults_for(const std::string& id);
/// Sets one key ("tmin-exp" and "tmin_exp" are the same key).
void apply_setting(ExperimentConfig& cfg, std::string key, const std::string& value);
void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

/// The verdict the paper predicts for a configuration.
std::string expected_verdict(const ExperimentConfig& cfg);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

/// Resolution rule: the median of |y* - x| over points with a nonzero offset
/// must span at least 4 candidate steps. Points with zero offset are ignored;
/// if every offset is zero the row is trusted.
bool offsets_resolved(std::vector<double> displacements, double resolution);

ConvergenceReport run_convergence(const ExperimentConfig& cfg);
ConvergenceReport run_divergence(const ExperimentConfig& cfg);
ConditionBundle run_conditions(const ExperimentConfig& cfg);
SummaryReport run_transform_check(const ExperimentConfig& cfg);

/// Runs cfg.id and renders it in cfg.format; verdict and expected are
/// returned alongside the bytes.
struct ExperimentOutput {
  std::string bytes;
  std::string verdict;
  std::string expected;
};
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace hopflax

#endif  // HOPFLAX_EXPERIMENT_HPP
