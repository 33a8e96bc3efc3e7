#include "hopflax/field_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "numfmt.hpp"

namespace hopflax {

namespace {

using detail::fmt;

constexpr const char* kFieldMagic = "# hopflax field v1";
constexpr const char* kSolutionMagic = "# hopflax solution v1";

void write_header(std::ostream& os, const Grid& g) {
  os << "dim " << g.dim() << '\n';
  os << "lo";
  for (double v : g.lo()) os << ' ' << fmt(v);
  os << "\nhi";
  for (double v : g.hi()) os << ' ' << fmt(v);
  os << "\ncounts";
  for (std::size_t c : g.counts()) os << ' ' << c;
  os << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // next non-empty, non-comment line
  std::string next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    throw Error("unexpected end of file after line " + std::to_string(lineno_));
  }

  std::vector<std::string> keyed(const std::string& key) {
    std::istringstream ss(next());
    std::string k;
    ss >> k;
    if (k != key) throw Error("line " + std::to_string(lineno_) + ": expected '" + key + "', found '" + k + "'");
    std::vector<std::string> out;
    for (std::string w; ss >> w;) out.push_back(w);
    return out;
  }

  void magic(const char* expected) {
    std::string line;
    if (!std::getline(is_, line)) throw Error("empty file");
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw Error(std::string("bad header, expected '") + expected + "'");
  }

  std::size_t lineno() const { return lineno_; }

 private:
  std::istream& is_;
  std::size_t lineno_ = 0;
};

Grid read_grid(LineReader& in) {
  const auto dim = in.keyed("dim");
  if (dim.size() != 1) throw Error("dim line needs one value");
  const std::size_t n = std::stoul(dim[0]);
  auto reals = [&](const char* key) {
    const auto w = in.keyed(key);
    if (w.size() != n) throw Error(std::string(key) + " line needs " + std::to_string(n) + " values");
    std::vector<double> v;
    for (const auto& s : w) v.push_back(detail::parse_double(s));
    return v;
  };
  auto lo = reals("lo");
  auto hi = reals("hi");
  const auto cw = in.keyed("counts");
  if (cw.size() != n) throw Error("counts line needs " + std::to_string(n) + " values");
  std::vector<std::size_t> counts;
  for (const auto& s : cw) counts.push_back(std::stoul(s));
  return Grid(std::move(lo), std::move(hi), std::move(counts));
}

double read_scalar(LineReader& in, const char* key) {
  const auto w = in.keyed(key);
  if (w.size() != 1) throw Error(std::string(key) + " line needs one value");
  return detail::parse_double(w[0]);
}

}  // namespace

void write_field(std::ostream& os, const Field& u) {
  if (!u.is_tabulated()) throw Error("only tabulated fields can be written; sample it first");
  os << kFieldMagic << '\n';
  write_header(os, u.grid());
  os << "bound " << fmt(u.bound()) << "\nvalues\n";
  for (double v : u.values()) os << fmt(v) << '\n';
}

Field read_field(std::istream& is) {
  LineReader in(is);
  in.magic(kFieldMagic);
  Grid g = read_grid(in);
  const double bound = read_scalar(in, "bound");
  in.keyed("values");
  std::vector<double> values(g.size());
  for (auto& v : values) v = detail::parse_double(in.next());
  return Field::tabulated(std::move(g), std::move(values), bound);
}

void write_solution(std::ostream& os, const HopfLaxSolution& sol) {
  os << kSolutionMagic << '\n';
  write_header(os, sol.grid);
  os << "t " << fmt(sol.t) << "\nsearch_radius " << fmt(sol.search_radius_used) << "\nresolution "
     << fmt(sol.resolution) << "\nmerge_radius " << fmt(sol.merge_radius) << "\npoints\n";
  const std::size_t n = sol.dim();
  for (std::size_t i = 0; i < sol.size(); ++i) {
    os << fmt(sol.values[i]);
    for (std::size_t d = 0; d < n; ++d) os << ' ' << fmt(sol.argmin[i * n + d]);
    os << '\n';
  }
}

HopfLaxSolution read_solution(std::istream& is) {
  LineReader in(is);
  in.magic(kSolutionMagic);
  HopfLaxSolution sol;
  sol.grid = read_grid(in);
  sol.t = read_scalar(in, "t");
  sol.search_radius_used = read_scalar(in, "search_radius");
  sol.resolution = read_scalar(in, "resolution");
  sol.merge_radius = read_scalar(in, "merge_radius");
  in.keyed("points");
  const std::size_t n = sol.grid.dim();
  sol.values.resize(sol.grid.size());
  sol.argmin.resize(sol.grid.size() * n);
  sol.near_begin.resize(sol.grid.size() + 1);
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    std::istringstream ss(in.next());
    std::vector<double> row;
    for (std::string w; ss >> w;) row.push_back(detail::parse_double(w));
    if (row.size() != n + 1) throw Error("solution line " + std::to_string(in.lineno()) + " needs value and offset");
    sol.values[i] = row[0];
    for (std::size_t d = 0; d < n; ++d) {
      sol.argmin[i * n + d] = row[d + 1];
      sol.near_offsets.push_back(row[d + 1]);
    }
    sol.near_gaps.push_back(0.0);
    sol.near_begin[i + 1] = i + 1;
  }
  return sol;
}

void save_field(const std::string& path, const Field& u) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_field(os, u);
  if (!os) throw Error("write failed: " + path);
}

Field load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_field(is);
}

void save_solution(const std::string& path, const HopfLaxSolution& sol) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_solution(os, sol);
  if (!os) throw Error("write failed: " + path);
}

HopfLaxSolution load_solution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return read_solution(is);
}

}  // namespace hopflax
