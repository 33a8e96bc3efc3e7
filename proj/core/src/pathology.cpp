#include "hopflax/pathology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hopflax {

double unit_sphere_area(std::size_t n) {
  const double h = 0.5 * static_cast<double>(n);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double unit_ball_volume(std::size_t n) { return unit_sphere_area(n) / static_cast<double>(n); }

namespace {

double pow4(double e) { return std::pow(4.0, e); }

// Simpson's rule on [a, b] with an even panel count.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

}  // namespace

// ------------------------------------------------------------------ grid bumps

std::size_t GridBumpSpec::count(int k) const {
  return static_cast<std::size_t>(std::llround(std::pow(std::pow(4.0, k) + 1.0, static_cast<double>(n))));
}
double GridBumpSpec::spacing(int k) const { return pow4(-k); }
double GridBumpSpec::outer_radius(int k) const { return pow4(-k) / 100.0; }
double GridBumpSpec::depth(int k) const { return std::ldexp(1.0, -k); }

double GridBumpSpec::log_ratio(int k) const {
  // 2^-k omega^{1/n} L^{(1-n)/n} = 2^-k / N_k  =>  L = omega^{1/(n-1)} N_k^{n/(n-1)}
  const double nn = static_cast<double>(n);
  return std::pow(unit_sphere_area(n), 1.0 / (nn - 1.0)) *
         std::pow(static_cast<double>(count(k)), nn / (nn - 1.0));
}

double GridBumpSpec::log_inner_radius(int k) const { return std::log(outer_radius(k)) - log_ratio(k); }

double GridBumpSpec::inner_radius(int k) const {
  const double lr = log_inner_radius(k);
  if (lr < std::log(std::numeric_limits<double>::min()))
    throw Error("bump plateau radius underflows at level " + std::to_string(k) +
                ": required ln(rho_k) = " + std::to_string(lr));
  return std::exp(lr);
}

double GridBumpSpec::profile_norm(int k) const {
  const double nn = static_cast<double>(n);
  return depth(k) * std::pow(unit_sphere_area(n), 1.0 / nn) * std::pow(log_ratio(k), (1.0 - nn) / nn);
}

double GridBumpSpec::exceptional_measure() const {
  double m = 0.0;
  for (int k = 1; k <= k_max; ++k)
    m += static_cast<double>(count(k)) * unit_ball_volume(n) * std::pow(2.0 * outer_radius(k), static_cast<double>(n));
  return m;
}

void GridBumpSpec::validate() const {
  if (n < 2 || n > kMaxDim) throw Error("grid-bump construction needs 2 <= n <= 4");
  if (k_max < 1 || k_max > 8) throw Error("grid-bump construction needs 1 <= k_max <= 8");
  for (int k = 1; k <= k_max; ++k)
    if (outer_radius(k) > spacing(k) / 100.0 * (1.0 + 1e-12)) throw Error("bump radius exceeds 4^-k / 100");
  if (!(exceptional_measure() < 0.5)) throw Error("exceptional set B has measure >= 1/2");
}

double bump_profile(const GridBumpSpec& spec, int k, double rho) {
  const double r = spec.outer_radius(k);
  if (rho >= r) return 0.0;
  if (rho <= 0.0) return -spec.depth(k);
  return bump_profile_log(spec, k, std::log(r / rho));
}

double bump_profile_slope(const GridBumpSpec& spec, int k, double rho) {
  const double r = spec.outer_radius(k);
  if (rho >= r || rho <= 0.0) return 0.0;
  const double L = spec.log_ratio(k);
  if (std::log(r / rho) >= L) return 0.0;
  return spec.depth(k) / (L * rho);
}

double bump_profile_log(const GridBumpSpec& spec, int k, double s) {
  if (s <= 0.0) return 0.0;
  return -spec.depth(k) * std::min(1.0, s / spec.log_ratio(k));
}

double bump_profile_norm_quadrature(const GridBumpSpec& spec, int k, std::size_t panels) {
  // rho = r e^{-s}: |g'(rho)|^n omega rho^{n-1} d rho = |dg/ds|^n omega ds
  const double nn = static_cast<double>(spec.n);
  const double omega = unit_sphere_area(spec.n);
  const double L = spec.log_ratio(k);
  const double ds = L * 1e-6;
  auto integrand = [&](double s) {
    const double lo = std::max(s - ds, 0.0), hi = std::min(s + ds, L);
    const double slope = (bump_profile_log(spec, k, hi) - bump_profile_log(spec, k, lo)) / (hi - lo);
    return std::pow(std::abs(slope), nn) * omega;
  };
  return std::pow(simpson(integrand, 0.0, L, panels), 1.0 / nn);
}

namespace {

struct LevelHit {
  double value;
  int k;
  Point centre;
};

// Nearest centre of level k and the bump value there.
LevelHit level_value(const GridBumpSpec& spec, int k, std::span<const double> x) {
  const double m = std::pow(4.0, k);
  Point a(x.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a[i] = std::clamp(std::round(x[i] * m), 0.0, m) / m;
    d2 += (x[i] - a[i]) * (x[i] - a[i]);
  }
  return {bump_profile(spec, k, std::sqrt(d2)), k, a};
}

}  // namespace

Field build_grid_bump(const GridBumpSpec& spec) {
  spec.validate();
  ClosedFormField f;
  f.dim = spec.n;
  f.value = [spec](std::span<const double> x) {
    double v = 0.0;
    for (int k = 1; k <= spec.k_max; ++k) v = std::min(v, level_value(spec, k, x).value);
    return v;
  };
  f.gradient = [spec](std::span<const double> x, std::span<double> g) {
    LevelHit best{0.0, 0, Point(x.size())};
    for (int k = 1; k <= spec.k_max; ++k) {
      LevelHit h = level_value(spec, k, x);
      if (h.value < best.value) best = h;
    }
    std::fill(g.begin(), g.end(), 0.0);
    if (best.k == 0) return;
    Point z = Point(x) - best.centre;
    const double rho = z.norm();
    if (rho == 0.0) return;
    const double slope = bump_profile_slope(spec, best.k, rho);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = slope * z[i] / rho;
  };
  const int m = static_cast<int>(std::llround(std::pow(4.0, spec.k_max)));
  const Grid lattice = Grid::uniform(spec.n, 0.0, 1.0, static_cast<std::size_t>(m + 1));
  for (std::size_t i = 0; i < lattice.size(); ++i) f.critical_points.push_back(lattice.point(i));
  f.support_radius = std::sqrt(static_cast<double>(spec.n)) * (1.0 + spec.outer_radius(1)) + 1e-9;
  return Field::closed_form(std::move(f), 0.5);
}

int quartic_window(double t) {
  if (!(t > 0.0) || t > 1.0) throw Error("quartic window needs 0 < t <= 1");
  const double x = -std::log(t) / std::log(4.0);
  return std::max(1, static_cast<int>(std::ceil(x - 1e-9)));
}

BadSet predicted_bad_set(const GridBumpSpec& spec, double t) {
  spec.validate();
  BadSet b;
  b.spec = spec;
  b.j = quartic_window(t);
  if (3 * b.j > 4 * spec.k_max) throw Error("window index j beyond the truncation (j <= 4 k_max / 3)");
  b.k0 = (3 * b.j) / 4;
  const double nn = static_cast<double>(spec.n);
  b.radius_j = 2.0 * pow4(-5.0 * b.j / 6.0);
  b.gradient_bound = pow4(b.j / 6.0);
  b.measure_estimate = unit_ball_volume(spec.n) * std::pow(2.0, nn) * std::pow(pow4(0.75 * b.j - 5.0 * b.j / 6.0), nn);
  b.measure_union = b.k0 >= 1 ? static_cast<double>(spec.count(b.k0)) * unit_ball_volume(spec.n) * std::pow(b.radius_j, nn)
                              : unit_ball_volume(spec.n) * std::pow(b.radius_j, nn);
  return b;
}

bool BadSet::in_B(const Point& x) const {
  for (int k = 1; k <= spec.k_max; ++k) {
    const LevelHit h = level_value(spec, k, x.span());
    if ((x - h.centre).norm() < 2.0 * spec.outer_radius(k)) return true;
  }
  return false;
}

bool BadSet::in_Bj(const Point& x) const {
  const LevelHit h = level_value(spec, k0, x.span());
  return (x - h.centre).norm() < radius_j;
}

// ----------------------------------------------------------------- exponential

double ExponentialSpec::C(int k) const {
  const double nn = static_cast<double>(n);
  return std::pow(2.0, k * (alpha - 1.0 + nn / p)) / std::pow(static_cast<double>(k), 3.0 / (2.0 * p));
}

double ExponentialSpec::ball_radius(int k) const { return k * std::ldexp(1.0, -k); }
double ExponentialSpec::piece_radius(int k) const { return std::ldexp(1.0, -k); }

Point ExponentialSpec::centre(int k) const {
  double c = ball_radius(k_min);
  for (int j = k_min; j < k; ++j) c += ball_radius(j) + ball_radius(j + 1);
  Point x(n);
  x[0] = c;
  return x;
}

double ExponentialSpec::r0(int k, double t) const { return t * std::log(std::pow(t, alpha - 1.0) * C(k) / 2.0); }

double ExponentialSpec::seminorm_power(int k) const {
  const double nn = static_cast<double>(n);
  return unit_sphere_area(n) * std::pow(alpha, p) / (nn + (alpha - 1.0) * p) * std::pow(static_cast<double>(k), -1.5);
}

double ExponentialSpec::seminorm_power_quadrature(int k, std::size_t panels) const {
  const Field u = build_exponential(*this);
  const Point c = centre(k);
  const double R = piece_radius(k);
  const double nn = static_cast<double>(n);
  // rho = R v^4 tames the rho^{(alpha-1)p+n-1} singularity at the centre
  auto integrand = [&](double v) {
    if (v == 0.0) return 0.0;
    const double rho = R * v * v * v * v;
    Point x = c;
    x[0] += rho;
    const double g = u.gradient_at(x).norm();
    return std::pow(g, p) * unit_sphere_area(n) * std::pow(rho, nn - 1.0) * 4.0 * R * v * v * v;
  };
  return simpson(integrand, 0.0, 1.0, panels);
}

void ExponentialSpec::validate() const {
  if (n < 1 || n > kMaxDim) throw Error("exponential construction needs 1 <= n <= 4");
  if (!(p > static_cast<double>(n))) throw Error("exponential construction needs p > n");
  if (!(alpha > 0.5 && alpha < 1.0)) throw Error("exponential construction needs alpha in (1/2, 1)");
  if (!((alpha - 1.0) * p + static_cast<double>(n) > 0.0)) throw Error("exponential construction needs (alpha-1)p + n > 0");
  if (k_min < 1 || k_max < k_min || k_max > 40) throw Error("exponential construction needs 1 <= k_min <= k_max <= 40");
  for (int k = k_min; k <= k_max; ++k)
    if (!(C(k) > 0.0)) throw Error("C_k must be positive");
}

Field build_exponential(const ExponentialSpec& spec) {
  spec.validate();
  struct Piece {
    Point centre;
    double C, R, shift, ball;
  };
  std::vector<Piece> pieces;
  for (int k = spec.k_min; k <= spec.k_max; ++k) {
    const double R = spec.piece_radius(k);
    pieces.push_back({spec.centre(k), spec.C(k), R, spec.C(k) * std::pow(R, spec.alpha), spec.ball_radius(k)});
  }
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
    if ((pieces[i + 1].centre - pieces[i].centre).norm() < pieces[i].ball + pieces[i + 1].ball - 1e-15)
      throw Error("exponential construction balls overlap");
  const double alpha = spec.alpha;
  ClosedFormField f;
  f.dim = spec.n;
  f.value = [pieces, alpha](std::span<const double> x) {
    const Point z(x);
    for (const Piece& pc : pieces) {
      const double r = (z - pc.centre).norm();
      if (r < pc.R) return pc.C * std::pow(r, alpha) - pc.shift;
    }
    return 0.0;
  };
  f.gradient = [pieces, alpha](std::span<const double> x, std::span<double> g) {
    const Point z(x);
    std::fill(g.begin(), g.end(), 0.0);
    for (const Piece& pc : pieces) {
      const Point d = z - pc.centre;
      const double r = d.norm();
      if (r < pc.R && r > 0.0) {
        const double s = pc.C * alpha * std::pow(r, alpha - 1.0) / r;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = s * d[i];
        return;
      }
    }
  };
  double bound = 0.0;
  for (const Piece& pc : pieces) {
    f.critical_points.push_back(pc.centre);
    bound = std::max(bound, pc.shift);
  }
  f.support_radius = pieces.back().centre.norm() + pieces.back().ball;
  return Field::closed_form(std::move(f), bound);
}

// ----------------------------------------------------------------- anisotropic

double AnisotropicSpec::beta() const {
  return (s - 1.0) / (s - alpha) + (s2 - 1.0) / (s2 - alpha) + p * (s - 1.0) * (alpha - 1.0) / (s - alpha);
}

bool AnisotropicSpec::beta_negative_by_equivalence() const {
  return (s2 - 1.0) * (s - alpha) + (s - 1.0) * (s2 - alpha) < p * (s - 1.0) * (1.0 - alpha) * (s2 - alpha);
}

double AnisotropicSpec::c1() const { return std::pow(2.0 * s, -1.0 / (s - alpha)); }
double AnisotropicSpec::c2() const { return std::pow(2.0 * s2, -1.0 / (s2 - alpha)); }
double AnisotropicSpec::q_half_x(double t) const { return c1() * std::pow(t, (s - 1.0) / (s - alpha)); }
double AnisotropicSpec::q_half_y(double t) const { return c2() * std::pow(t, (s2 - 1.0) / (s2 - alpha)); }

void AnisotropicSpec::validate() const {
  if (!(s > s2 && s2 > 1.0)) throw Error("anisotropic construction needs s > s2 > 1");
  if (!(p > 2.0)) throw Error("anisotropic construction needs p > 2");
  if (!(alpha > (p - 2.0) / p && alpha < 1.0)) throw Error("anisotropic construction needs alpha in ((p-2)/p, 1)");
}

Field build_anisotropic(const AnisotropicSpec& spec) {
  spec.validate();
  const double alpha = spec.alpha;
  auto taper = [](double r) { return r <= 1.0 ? 1.0 : (r >= 2.0 ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * (r - 1.0)))); };
  auto taper_slope = [](double r) {
    return (r <= 1.0 || r >= 2.0) ? 0.0 : -0.5 * std::numbers::pi * std::sin(std::numbers::pi * (r - 1.0));
  };
  ClosedFormField f;
  f.dim = 2;
  f.value = [=](std::span<const double> x) {
    const double r = std::hypot(x[0], x[1]);
    return r >= 2.0 ? 0.0 : std::pow(r, alpha) * taper(r);
  };
  f.gradient = [=](std::span<const double> x, std::span<double> g) {
    const double r = std::hypot(x[0], x[1]);
    g[0] = g[1] = 0.0;
    if (r == 0.0 || r >= 2.0) return;
    const double d = alpha * std::pow(r, alpha - 1.0) * taper(r) + std::pow(r, alpha) * taper_slope(r);
    g[0] = d * x[0] / r;
    g[1] = d * x[1] / r;
  };
  f.critical_points.push_back(Point{0.0, 0.0});
  f.support_radius = 2.0;
  return Field::closed_form(std::move(f), std::pow(2.0, alpha));
}

// ------------------------------------------------------------------ provenance

nlohmann::json provenance(const GridBumpSpec& spec) {
  nlohmann::json j;
  j["construction"] = "grid-bump";
  j["n"] = spec.n;
  j["k_max"] = spec.k_max;
  j["exceptional_measure"] = spec.exceptional_measure();
  nlohmann::json levels = nlohmann::json::array();
  for (int k = 1; k <= spec.k_max; ++k) {
    levels.push_back({{"k", k},
                      {"N_k", spec.count(k)},
                      {"r_k", spec.outer_radius(k)},
                      {"log_r_over_rho_k", spec.log_ratio(k)},
                      {"ln_rho_k", spec.log_inner_radius(k)},
                      {"depth", spec.depth(k)},
                      {"grad_norm_n", spec.profile_norm(k)},
                      {"grad_norm_bound", spec.depth(k) / static_cast<double>(spec.count(k))}});
  }
  j["levels"] = levels;
  return j;
}

nlohmann::json provenance(const ExponentialSpec& spec) {
  nlohmann::json j;
  j["construction"] = "exponential";
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["alpha"] = spec.alpha;
  nlohmann::json levels = nlohmann::json::array();
  for (int k = spec.k_min; k <= spec.k_max; ++k) {
    const double t = std::ldexp(1.0, -k);
    const double t2 = std::ldexp(1.0, -k + 1);
    levels.push_back({{"k", k},
                      {"C_k", spec.C(k)},
                      {"r_k", spec.ball_radius(k)},
                      {"centre_x", spec.centre(k)[0]},
                      {"r0_at_2^-k", spec.r0(k, t)},
                      {"r0_at_2^-k+1", spec.r0(k, t2)},
                      {"r0_positive_on_window", spec.r0(k, t) > 0.0 && spec.r0(k, t2) > 0.0},
                      {"seminorm_p_power", spec.seminorm_power(k)}});
  }
  j["levels"] = levels;
  return j;
}

nlohmann::json provenance(const AnisotropicSpec& spec) {
  return {{"construction", "anisotropic"}, {"s", spec.s},        {"s2", spec.s2},
          {"p", spec.p},                   {"alpha", spec.alpha}, {"beta", spec.beta()},
          {"beta_negative_by_equivalence", spec.beta_negative_by_equivalence()},
          {"c1", spec.c1()},               {"c2", spec.c2()}};
}

}  // namespace hopflax
