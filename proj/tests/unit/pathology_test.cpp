#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hopflax/field.hpp"
#include "hopflax/pathology.hpp"

using namespace hopflax;

TEST_SUITE("pathology") {

TEST_CASE("sphere and ball constants") {
  CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("grid-bump bookkeeping") {
  const GridBumpSpec one{2, 1};
  CHECK(one.count(1) == 25);
  const GridBumpSpec spec{2, 3};
  spec.validate();
  for (int k = 1; k <= 3; ++k) {
    CHECK(spec.outer_radius(k) <= spec.spacing(k) / 100.0 * (1.0 + 1e-12));
    CHECK(bump_profile(spec, k, 0.0) == doctest::Approx(-std::pow(2.0, -k)));
    CHECK(bump_profile(spec, k, spec.outer_radius(k)) == 0.0);
    CHECK(bump_profile(spec, k, 2.0 * spec.outer_radius(k)) == 0.0);
    CHECK(spec.profile_norm(k) <= std::pow(2.0, -k) / static_cast<double>(spec.count(k)) * (1.0 + 1e-12));
    CHECK(bump_profile_norm_quadrature(spec, k) == doctest::Approx(spec.profile_norm(k)).epsilon(1e-6));
    CHECK(spec.log_inner_radius(k) < std::log(spec.outer_radius(k)));
  }
  CHECK(spec.exceptional_measure() < 0.5);
  // radially nondecreasing
  const int k = 1;
  double prev = -1.0;
  for (double s = 40.0; s >= 0.0; s -= 0.5) {
    const double v = bump_profile_log(spec, k, s);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("grid-bump norm stays below one") {
  const GridBumpSpec spec{2, 3};
  double total = 0.0;
  for (int k = 1; k <= spec.k_max; ++k) total += static_cast<double>(spec.count(k)) * bump_profile_norm_quadrature(spec, k);
  CHECK(total <= 1.0);
}

TEST_CASE("grid-bump field values") {
  const GridBumpSpec spec{2, 2};
  const Field u = build_grid_bump(spec);
  CHECK(u.value_at(Point{0.5, 0.5}) == doctest::Approx(-0.5));  // level-1 centre
  CHECK(u.value_at(Point{0.0625, 0.125}) == doctest::Approx(-0.25));  // level-2 only
  CHECK(u.value_at(Point{0.13, 0.31}) == 0.0);
  CHECK(u.critical_points().size() >= spec.count(2));
  // bounded in [-1/2, 0] and continuous across a bump edge
  const double r = spec.outer_radius(2);
  double worst = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double x = 0.0625 + r * (0.9 + 0.2 * i / 4000.0);
    const double a = u.value_at(Point{x, 0.125}), b = u.value_at(Point{x + r * 0.2 / 4000.0, 0.125});
    CHECK(a >= -0.5);
    CHECK(a <= 0.0);
    worst = std::max(worst, std::abs(a - b));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("predicted bad set") {
  const GridBumpSpec spec{2, 3};
  const BadSet b2 = predicted_bad_set(spec, std::pow(4.0, -2));
  CHECK(b2.j == 2);
  CHECK(b2.gradient_bound == doctest::Approx(std::pow(4.0, 1.0 / 3.0)));
  CHECK(b2.contains(Point{0.25, 0.75}));
  CHECK(b2.in_B(Point{0.0625, 0.125}));
  double prev = INFINITY;
  for (int j = 1; j <= 4; ++j) {
    const BadSet b = predicted_bad_set(spec, std::pow(4.0, -j));
    CHECK(b.measure_estimate < prev);
    prev = b.measure_estimate;
  }
  CHECK(quartic_window(0.1) == 2);
  CHECK_THROWS_AS(predicted_bad_set(spec, std::pow(4.0, -6)), Error);
}

TEST_CASE("exponential construction constants") {
  const ExponentialSpec spec{3, 4.0, 0.6, 2, 6};
  spec.validate();
  CHECK(spec.C(2) == doctest::Approx(std::pow(2.0, 0.7) / std::pow(2.0, 0.375)).epsilon(1e-12));
  CHECK(spec.C(2) == doctest::Approx(1.2527).epsilon(1e-4));
  CHECK(spec.r0(4, 1.0 / 16.0) == doctest::Approx(0.054).epsilon(0.01));
  const Field u = build_exponential(spec);
  for (int k = 2; k <= 6; ++k) {
    CHECK(u.value_at(spec.centre(k)) == doctest::Approx(-spec.C(k) * std::pow(2.0, -k * 0.6)).epsilon(1e-12));
    CHECK(spec.r0(k, std::pow(2.0, -k)) > 0.0);
    CHECK(spec.seminorm_power_quadrature(k) == doctest::Approx(spec.seminorm_power(k)).epsilon(0.02));
    CHECK(spec.seminorm_power(k) * std::pow(k, 1.5) == doctest::Approx(spec.seminorm_power(2) * std::pow(2.0, 1.5)));
  }
  for (int k = 2; k < 6; ++k)
    CHECK((spec.centre(k + 1) - spec.centre(k)).norm() >= spec.ball_radius(k) + spec.ball_radius(k + 1));
  CHECK(u.value_at(Point{-5.0, 0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS((ExponentialSpec{3, 2.0, 0.6, 2, 6}.validate()), Error);
}

TEST_CASE("anisotropic construction") {
  const AnisotropicSpec spec{3.0, 2.0, 4.0, 0.51};
  spec.validate();
  CHECK(spec.beta() == doctest::Approx(-0.100).epsilon(0.01));
  CHECK(spec.beta_negative_by_equivalence());
  const AnisotropicSpec control{3.0, 2.0, 4.0, 0.55};
  CHECK(control.beta() == doctest::Approx(0.037).epsilon(0.02));
  CHECK_FALSE(control.beta_negative_by_equivalence());
  // sign of beta matches the equivalent inequality across alpha
  for (double a = 0.505; a < 1.0; a += 0.01) {
    const AnisotropicSpec s{3.0, 2.0, 4.0, a};
    CHECK((s.beta() < 0.0) == s.beta_negative_by_equivalence());
  }
  const Field u = build_anisotropic(spec);
  CHECK(u.value_at(Point{0.0, 0.0}) == 0.0);
  CHECK(u.value_at(Point{0.6, 0.8}) == doctest::Approx(1.0));
  CHECK(u.value_at(Point{2.5, 0.0}) == 0.0);
  CHECK(spec.q_half_x(0.5) == doctest::Approx(spec.c1() * std::pow(0.5, 2.0 / 2.49)));
  CHECK_THROWS_AS((AnisotropicSpec{3.0, 2.0, 4.0, 0.4}.validate()), Error);
  CHECK_THROWS_AS((AnisotropicSpec{2.0, 3.0, 4.0, 0.6}.validate()), Error);
}

TEST_CASE("anisotropic data is in W^{1,4} exactly above alpha = 1/2") {
  auto norms = [](double alpha, double p) {
    const Field u = build_anisotropic(AnisotropicSpec{3.0, 2.0, p, alpha});
    std::vector<double> out;
    for (std::size_t m : {64, 128, 256, 512}) out.push_back(lp_norm(sample_gradient(u, Grid::uniform(2, -1.0, 1.0, m)), 4.0));
    return out;
  };
  const auto in = norms(0.75, 4.0);
  CHECK(in.back() / in[in.size() - 2] < 1.02);
  const auto out = norms(0.3, 2.5);  // alpha below (4-2)/4
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i] / out[i - 1] > 1.1);
}

TEST_CASE("provenance records the derived constants") {
  const auto g = provenance(GridBumpSpec{2, 2});
  CHECK(g.dump().find("N_k") != std::string::npos);
  const auto e = provenance(ExponentialSpec{});
  CHECK(e.dump().find("C_k") != std::string::npos);
  const auto a = provenance(AnisotropicSpec{});
  CHECK(a.at("beta").get<double>() == doctest::Approx(AnisotropicSpec{}.beta()));
}

}
