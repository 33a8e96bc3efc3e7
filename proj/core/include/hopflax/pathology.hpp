#ifndef HOPFLAX_PATHOLOGY_HPP
#define HOPFLAX_PATHOLOGY_HPP

#include <nlohmann/json.hpp>
#include <vector>

#include "hopflax/field.hpp"

namespace hopflax {

/// Surface area of the unit sphere in R^n (omega_{n-1}).
double unit_sphere_area(std::size_t n);
/// Volume of the unit ball in R^n.
double unit_ball_volume(std::size_t n);

// ---------------------------------------------------------------- grid bumps

/// Level k places a bump g^k at every point of A_k = {i / 4^k}^n in [0,1]^n.
/// g^k is the truncated-log cusp
///   g^k(rho) = -2^-k min(1, ln(r_k / rho) / L_k)  for rho < r_k, 0 outside,
/// with L_k = ln(r_k / rho_k) sized so that ||Dg^k||_n = 2^-k / N_k exactly.
struct GridBumpSpec {
  std::size_t n = 2;
  int k_max = 3;

  std::size_t count(int k) const;           // N_k = (4^k + 1)^n
  double spacing(int k) const;              // 4^-k
  double outer_radius(int k) const;         // r_k = 4^-k / 100
  double log_ratio(int k) const;            // L_k = ln(r_k / rho_k)
  double inner_radius(int k) const;         // rho_k; throws when it underflows
  double log_inner_radius(int k) const;     // ln rho_k, always representable
  double depth(int k) const;                // 2^-k
  double profile_norm(int k) const;         // closed-form ||Dg^k||_n
  double exceptional_measure() const;       // sum of |B(a, 2 r_k)| over all centres

  void validate() const;
};

/// g^k at distance rho from its centre.
double bump_profile(const GridBumpSpec& spec, int k, double rho);
/// g^k at rho = r_k e^{-s}; usable where rho itself would underflow.
double bump_profile_log(const GridBumpSpec& spec, int k, double s);
/// d g^k / d rho (zero on the plateau and outside the support).
double bump_profile_slope(const GridBumpSpec& spec, int k, double rho);
/// ||Dg^k||_n by quadrature over the annulus rho_k < rho < r_k, in the
/// variable s = ln(r_k / rho).
double bump_profile_norm_quadrature(const GridBumpSpec& spec, int k, std::size_t panels = 4096);

/// u = min_k f^k with f^k = sum_{a in A_k} g^k(. - a); critical points A_kmax.
Field build_grid_bump(const GridBumpSpec& spec);

/// B union B_j for the quartic window t in [4^-j, 4^-j+1], with
/// B_j = union over A_{floor(3j/4)} of balls of radius 2 * 4^{-5j/6}, and the
/// predicted lower bound 4^{j/6} for |Du_t| off that set.
struct BadSet {
  GridBumpSpec spec;
  int j = 0;
  int k0 = 0;
  double radius_j = 0.0;
  double gradient_bound = 0.0;
  double measure_estimate = 0.0;  // omega_n 2^n (4^{3j/4} 4^{-5j/6})^n
  double measure_union = 0.0;     // N_{k0} |B(0, radius_j)|

  bool in_B(const Point& x) const;
  bool in_Bj(const Point& x) const;
  bool contains(const Point& x) const { return in_B(x) || in_Bj(x); }
};

/// The window index j with 4^-j <= t <= 4^-j+1; throws beyond j <= 4 k_max / 3.
int quartic_window(double t);
BadSet predicted_bad_set(const GridBumpSpec& spec, double t);

// --------------------------------------------------------------- exponential

/// u^k = C_k (|x|^alpha - 2^{-k alpha}) on B(x_k, 2^-k) and 0 elsewhere, for
/// k in [k_min, k_max], with C_k = 2^{k(alpha - 1 + n/p)} / k^{3/(2p)} and
/// disjoint balls B(x_k, r_k), r_k = k 2^-k, centred along the first axis.
struct ExponentialSpec {
  std::size_t n = 3;
  double p = 4.0;
  double alpha = 0.6;
  int k_min = 2;
  int k_max = 6;

  double C(int k) const;
  double ball_radius(int k) const;   // r_k = k 2^-k
  double piece_radius(int k) const;  // 2^-k
  Point centre(int k) const;
  /// r_0(t) = t ln(t^{alpha-1} C_k / 2).
  double r0(int k, double t) const;
  /// ||Du^k||_p^p in closed form: omega_{n-1} alpha^p / (n + (alpha-1)p) * k^{-3/2}.
  double seminorm_power(int k) const;
  double seminorm_power_quadrature(int k, std::size_t panels = 4096) const;

  void validate() const;
};

Field build_exponential(const ExponentialSpec& spec);

// --------------------------------------------------------------- anisotropic

/// u(z) = |z|^alpha on B(0,1), times a cosine taper to 0 on 1 <= |z| <= 2.
struct AnisotropicSpec {
  double s = 3.0;
  double s2 = 2.0;
  double p = 4.0;
  double alpha = 0.51;

  double beta() const;
  /// (s'-1)(s-alpha) + (s-1)(s'-alpha) < p (s-1)(1-alpha)(s'-alpha).
  bool beta_negative_by_equivalence() const;
  /// Half-widths of Q at time t with c1 = (2s)^{-1/(s-alpha)}, c2 = (2s')^{-1/(s'-alpha)};
  /// inside Q the origin is the unique minimizer of the Hopf-Lax objective.
  double c1() const;
  double c2() const;
  double q_half_x(double t) const;
  double q_half_y(double t) const;

  void validate() const;
};

Field build_anisotropic(const AnisotropicSpec& spec);

// ---------------------------------------------------------------- provenance

nlohmann::json provenance(const GridBumpSpec& spec);
nlohmann::json provenance(const ExponentialSpec& spec);
nlohmann::json provenance(const AnisotropicSpec& spec);

}  // namespace hopflax

#endif  // HOPFLAX_PATHOLOGY_HPP
