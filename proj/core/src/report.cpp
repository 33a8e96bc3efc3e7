#include "hopflax/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "numfmt.hpp"

namespace hopflax {

namespace {

using nlohmann::json;
using detail::fmt;

constexpr const char* kCsvHeader = "t,norm_grad_ut,norm_diff,nondiff_fraction,runtime_ms";

// JSON has no inf/nan; keep them as strings so the round trip is exact.
json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

double unnum(const json& j) {
  if (j.is_string()) return detail::parse_double(j.get<std::string>());
  return j.get<double>();
}

json plan_json(const SamplePlan& p) {
  return {{"dim", p.dim}, {"radii", p.radii}, {"random_directions", p.random_directions}, {"seed", p.seed}};
}

}  // namespace

ReportFormat parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error("unknown report format '" + std::string(name) + "' (csv or json)");
}

std::string to_csv(const ConvergenceReport& r) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& row : r.rows) {
    out += fmt(row.t) + ',' + fmt(row.norm_grad_ut) + ',' + fmt(row.norm_diff) + ',' + fmt(row.nondiff_fraction) +
           ',' + fmt(row.runtime_ms) + '\n';
  }
  return out;
}

json to_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"t", num(row.t)},
                    {"norm_grad_ut", num(row.norm_grad_ut)},
                    {"norm_diff", num(row.norm_diff)},
                    {"nondiff_fraction", num(row.nondiff_fraction)},
                    {"runtime_ms", num(row.runtime_ms)},
                    {"trusted", row.trusted},
                    {"extras", row.extras}});
  }
  return {{"experiment", r.experiment},
          {"config", r.config},
          {"provenance", r.provenance},
          {"reference_norm", num(r.reference_norm)},
          {"rows", rows},
          {"slope_metric", r.slope_metric},
          {"slope", r.slope ? num(*r.slope) : json(nullptr)},
          {"verdict", r.verdict},
          {"expected", r.expected},
          {"summary", r.summary},
          {"warnings", r.warnings}};
}

std::vector<ReportRow> rows_from_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error("CSV report header mismatch");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(detail::parse_double(cell));
    if (cells.size() != 5) throw Error("CSV report row needs 5 cells: " + line);
    ReportRow row;
    row.t = cells[0];
    row.norm_grad_ut = cells[1];
    row.norm_diff = cells[2];
    row.nondiff_fraction = cells[3];
    row.runtime_ms = cells[4];
    rows.push_back(std::move(row));
  }
  return rows;
}

ConvergenceReport report_from_json(const json& j) {
  ConvergenceReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config");
  r.provenance = j.at("provenance");
  r.reference_norm = unnum(j.at("reference_norm"));
  for (const auto& jr : j.at("rows")) {
    ReportRow row;
    row.t = unnum(jr.at("t"));
    row.norm_grad_ut = unnum(jr.at("norm_grad_ut"));
    row.norm_diff = unnum(jr.at("norm_diff"));
    row.nondiff_fraction = unnum(jr.at("nondiff_fraction"));
    row.runtime_ms = unnum(jr.at("runtime_ms"));
    row.trusted = jr.at("trusted").get<bool>();
    row.extras = jr.at("extras");
    r.rows.push_back(std::move(row));
  }
  r.slope_metric = j.at("slope_metric").get<std::string>();
  if (!j.at("slope").is_null()) r.slope = unnum(j.at("slope"));
  r.verdict = j.at("verdict").get<std::string>();
  r.expected = j.at("expected").get<std::string>();
  r.summary = j.at("summary");
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

json to_json(const ConditionReport& r) {
  json per = json::array();
  for (const auto& s : r.per_radius) per.push_back({{"radius", num(s.radius)}, {"value", num(s.value)}});
  return {{"condition", to_string(r.id)},
          {"plan", plan_json(r.plan)},
          {"per_radius", per},
          {"extremum", num(r.extremum)},
          {"verdict", to_string(r.verdict)},
          {"warnings", r.warnings}};
}

json to_json(const ConditionBundle& b) {
  return {{"experiment", "conditions"},
          {"hamiltonian", b.hamiltonian},
          {"lagrangian", b.lagrangian},
          {"trusted_radius", num(b.trusted_radius)},
          {"aina", to_json(b.aina)},
          {"paha2", to_json(b.paha2)},
          {"paha3", to_json(b.paha3)},
          {"consistent", b.consistent},
          {"verdict", b.verdict},
          {"expected", b.expected}};
}

std::string to_csv(const ConditionBundle& b) {
  std::string out = "condition,radius,value\n";
  for (const ConditionReport* r : {&b.paha2, &b.paha3, &b.aina})
    for (const auto& s : r->per_radius) out += to_string(r->id) + ',' + fmt(s.radius) + ',' + fmt(s.value) + '\n';
  return out;
}

json to_json(const SummaryReport& r) {
  return {{"experiment", r.experiment},
          {"config", r.config},
          {"data", r.data},
          {"verdict", r.verdict},
          {"expected", r.expected}};
}

std::string render(const ConvergenceReport& r, ReportFormat f) {
  if (r.rows.empty()) throw Error("report has no rows");
  return f == ReportFormat::Csv ? to_csv(r) : to_json(r).dump(2) + '\n';
}

std::string render(const ConditionBundle& b, ReportFormat f) {
  return f == ReportFormat::Csv ? to_csv(b) : to_json(b).dump(2) + '\n';
}

std::string render(const SummaryReport& r, ReportFormat f) {
  if (f == ReportFormat::Csv) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : r.data.items())
      if (v.is_primitive()) out += k + ',' + (v.is_string() ? v.get<std::string>() : v.dump()) + '\n';
    out += "verdict," + r.verdict + '\n';
    return out;
  }
  return to_json(r).dump(2) + '\n';
}

void write_text(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << bytes;
  if (!os) throw Error("write failed: " + path);
}

void emit_report(const ConvergenceReport& r, ReportFormat f, const std::string& path) {
  write_text(path, render(r, f));
}

}  // namespace hopflax
