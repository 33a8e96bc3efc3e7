#include "hopflax/spec_parse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hopflax/field_io.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/pathology.hpp"
#include "numfmt.hpp"

namespace hopflax {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "name:rest" -> (name, rest)
std::pair<std::string, std::string> split_head(std::string_view spec) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) return {std::string(spec), ""};
  return {std::string(spec.substr(0, colon)), std::string(spec.substr(colon + 1))};
}

void allow_only(const std::map<std::string, std::string>& params, std::initializer_list<const char*> keys,
                std::string_view what) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw Error("unknown parameter '" + k + "' in " + std::string(what));
  }
}

}  // namespace

std::map<std::string, std::string> parse_params(std::string_view text) {
  std::map<std::string, std::string> out;
  text = trim(text);
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw Error("expected key=value, got '" + std::string(item) + "'");
    out[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
  }
  return out;
}

double param_double(const std::map<std::string, std::string>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : detail::parse_double(it->second);
}

long param_int(const std::map<std::string, std::string>& params, const std::string& key, long fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = detail::parse_double(it->second);
  if (v != std::floor(v)) throw Error(key + " must be an integer");
  return static_cast<long>(v);
}

Kernel parse_kernel(std::string_view spec, std::size_t n) {
  auto [name, rest] = split_head(spec);
  if (name == "conj") {
    double p_max = 20.0;
    std::string inner = rest;
    if (inner.rfind("pmax=", 0) == 0) {
      const auto colon = inner.find(':');
      if (colon == std::string::npos) throw Error("conj:pmax=P needs ':<spec>' after it");
      p_max = detail::parse_double(std::string_view(inner).substr(5, colon - 5));
      inner = inner.substr(colon + 1);
    }
    const Kernel h = parse_kernel(inner, n);
    const std::size_t dim = h.dim().value_or(n == 0 ? 1 : n);
    return conjugate_kernel(h, dim, p_max).kernel;
  }
  if (name == "tab") {
    if (rest.empty()) throw Error("tab: needs a file path");
    auto [a, l] = read_two_column(rest);
    return Kernel::tabulated(std::move(a), std::move(l));
  }
  const auto params = parse_params(rest);
  if (name == "quadratic") {
    allow_only(params, {"c"}, spec);
    return Kernel::quadratic(param_double(params, "c", 1.0));
  }
  if (name == "power") {
    allow_only(params, {"q", "c"}, spec);
    if (!params.count("q")) throw Error("power kernel needs q");
    return Kernel::power_radial(param_double(params, "q", 2.0), param_double(params, "c", 1.0));
  }
  if (name == "exp-radial") {
    if (!params.empty()) throw Error("exp-radial takes no parameters");
    return Kernel::exponential_radial();
  }
  if (name == "aniso" || name == "aniso-h") {
    allow_only(params, {"s", "s2", "s3", "s4", "c", "c2", "c3", "c4"}, spec);
    std::vector<double> exps, coefs;
    for (std::size_t i = 0; i < kMaxDim; ++i) {
      const std::string sk = i == 0 ? "s" : "s" + std::to_string(i + 1);
      const std::string ck = i == 0 ? "c" : "c" + std::to_string(i + 1);
      if (!params.count(sk)) {
        if (params.count(ck)) throw Error(ck + " given without " + sk);
        break;
      }
      const double s = param_double(params, sk, 2.0);
      if (name == "aniso") {
        exps.push_back(s);
        coefs.push_back(param_double(params, ck, 1.0));
      } else {
        if (params.count(ck)) throw Error("aniso-h derives its coefficients; drop " + ck);
        exps.push_back(s / (s - 1.0));
        coefs.push_back(power_conjugate_coef(s));
      }
    }
    if (exps.empty()) throw Error(name + " needs at least s");
    return Kernel::axis_power(std::move(exps), std::move(coefs));
  }
  throw Error("unknown kernel '" + std::string(spec) + "'");
}

Field smooth_bump(std::size_t n, double radius) {
  if (n == 0 || n > kMaxDim) throw Error("bump dimension out of range");
  if (!(radius > 0.0)) throw Error("bump radius must be positive");
  ClosedFormField f;
  f.dim = n;
  const double r2 = radius * radius;
  f.value = [r2](std::span<const double> x) {
    double z = 0.0;
    for (double v : x) z += v * v;
    z /= r2;
    return z < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z)) : 0.0;
  };
  f.gradient = [r2](std::span<const double> x, std::span<double> g) {
    double z = 0.0;
    for (double v : x) z += v * v;
    z /= r2;
    double s = 0.0;
    if (z < 1.0) {
      const double u = std::exp(1.0 - 1.0 / (1.0 - z));
      if (u > 0.0) s = -2.0 * u / ((1.0 - z) * (1.0 - z) * r2);
    }
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * x[i];
  };
  f.critical_points = {Point(n)};
  f.support_radius = radius;
  return Field::closed_form(std::move(f), 1.0);
}

Field constant_field(std::size_t n, double c) {
  if (n == 0 || n > kMaxDim) throw Error("constant field dimension out of range");
  ClosedFormField f;
  f.dim = n;
  f.value = [c](std::span<const double>) { return c; };
  f.gradient = [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
  f.support_radius = 1.0;
  return Field::closed_form(std::move(f), std::abs(c));
}

Field parse_field(std::string_view spec, std::size_t n) {
  auto [name, rest] = split_head(spec);
  if (name == "file") {
    if (rest.empty()) throw Error("file: needs a path");
    Field u = load_field(rest);
    if (n != 0 && u.dim() != n) throw Error("field file dimension " + std::to_string(u.dim()) + " != n");
    return u;
  }
  const auto params = parse_params(rest);
  if (name == "bump") {
    allow_only(params, {"r"}, spec);
    return smooth_bump(n, param_double(params, "r", 1.0));
  }
  if (name == "const") {
    allow_only(params, {"c"}, spec);
    return constant_field(n, param_double(params, "c", 0.0));
  }
  if (name == "grid-bump") {
    allow_only(params, {"n", "kmax"}, spec);
    GridBumpSpec g;
    g.n = static_cast<std::size_t>(param_int(params, "n", n == 0 ? 2 : static_cast<long>(n)));
    g.k_max = static_cast<int>(param_int(params, "kmax", g.k_max));
    return build_grid_bump(g);
  }
  if (name == "exponential") {
    allow_only(params, {"n", "p", "alpha", "kmin", "kmax"}, spec);
    ExponentialSpec e;
    e.n = static_cast<std::size_t>(param_int(params, "n", n == 0 ? 3 : static_cast<long>(n)));
    e.p = param_double(params, "p", e.p);
    e.alpha = param_double(params, "alpha", e.alpha);
    e.k_min = static_cast<int>(param_int(params, "kmin", e.k_min));
    e.k_max = static_cast<int>(param_int(params, "kmax", e.k_max));
    return build_exponential(e);
  }
  if (name == "anisotropic") {
    allow_only(params, {"s", "s2", "p", "alpha"}, spec);
    AnisotropicSpec a;
    a.s = param_double(params, "s", a.s);
    a.s2 = param_double(params, "s2", a.s2);
    a.p = param_double(params, "p", a.p);
    a.alpha = param_double(params, "alpha", a.alpha);
    return build_anisotropic(a);
  }
  throw Error("unknown field '" + std::string(spec) + "'");
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read config " + path);
  std::map<std::string, std::string> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw Error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(v.substr(0, eq)));
    if (key.empty()) throw Error(path + ":" + std::to_string(lineno) + ": empty key");
    out[key] = std::string(trim(v.substr(eq + 1)));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> read_two_column(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  std::vector<double> a, b;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (char& c : line)
      if (c == ',' || c == ';') c = ' ';
    std::istringstream ss(line);
    std::vector<std::string> words;
    for (std::string w; ss >> w;) words.push_back(w);
    if (words.empty()) continue;
    if (words.size() != 2) throw Error(path + ":" + std::to_string(lineno) + ": expected two columns");
    a.push_back(detail::parse_double(words[0]));
    b.push_back(detail::parse_double(words[1]));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace hopflax
