#ifndef HOPFLAX_REPORT_HPP
#define HOPFLAX_REPORT_HPP

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hopflax/conditions.hpp"

namespace hopflax {

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(std::string_view name);

struct ReportRow {
  double t = 0.0;
  double norm_grad_ut = 0.0;
  double norm_diff = 0.0;
  double nondiff_fraction = 0.0;
  double runtime_ms = 0.0;
  bool trusted = true;
  nlohmann::json extras = nlohmann::json::object();

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Rows are ordered by decreasing t.
struct ConvergenceReport {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  double reference_norm = 0.0;  // ||Du||_p
  std::vector<ReportRow> rows;
  std::string slope_metric;
  std::optional<double> slope;
  std::string verdict;
  std::string expected;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> warnings;

  friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;
};

struct ConditionBundle {
  std::string hamiltonian;
  std::string lagrangian;
  double trusted_radius = 0.0;
  ConditionReport aina, paha2, paha3;
  bool consistent = true;
  std::string verdict;
  std::string expected;
};

/// A result without rows (transform-check): a verdict plus free-form data.
struct SummaryReport {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json data = nlohmann::json::object();
  std::string verdict;
  std::string expected;
};

/// CSV header: t,norm_grad_ut,norm_diff,nondiff_fraction,runtime_ms
std::string to_csv(const ConvergenceReport& r);
nlohmann::json to_json(const ConvergenceReport& r);
/// Rows only: the CSV carries nothing else.
std::vector<ReportRow> rows_from_csv(std::string_view text);
ConvergenceReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const ConditionBundle& b);
/// condition,radius,value rows for the three reports.
std::string to_csv(const ConditionBundle& b);

nlohmann::json to_json(const SummaryReport& r);

std::string render(const ConvergenceReport& r, ReportFormat f);
std::string render(const ConditionBundle& b, ReportFormat f);
std::string render(const SummaryReport& r, ReportFormat f);

/// Writes bytes to path; throws on an unwritable path. Convergence reports
/// without rows are rejected.
void emit_report(const ConvergenceReport& r, ReportFormat f, const std::string& path);
void write_text(const std::string& path, const std::string& bytes);

}  // namespace hopflax

#endif  // HOPFLAX_REPORT_HPP
