#include <doctest.h>

#include <cmath>
#include <random>

#include "hopflax/conditions.hpp"
#include "hopflax/kernel.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/spec_parse.hpp"

using namespace hopflax;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> apply(const std::vector<double>& x, auto&& f) {
  std::vector<double> y;
  for (double v : x) y.push_back(f(v));
  return y;
}

}  // namespace

TEST_SUITE("duality") {

TEST_CASE("kernel catalog basics") {
  for (const Kernel& k : {Kernel::quadratic(), Kernel::power_radial(3.0), Kernel::exponential_radial(),
                          Kernel::anisotropic(3.0, 2.0)}) {
    const Point zero(2);
    CHECK(k.eval(zero) == 0.0);
    CHECK(k.grad(zero).norm() == 0.0);
    // superlinear along a ray
    const Point far{30.0, 40.0};
    CHECK(k.eval(far) / far.norm() > 10.0 * k.eval(Point{0.6, 0.8}));
  }
  const Kernel e = Kernel::exponential_radial();
  // C1 join at |a| = 1
  CHECK(e.radial_slope(1.0 - 1e-9) == doctest::Approx(e.radial_slope(1.0 + 1e-9)).epsilon(1e-6));
  CHECK(e.radial(1.0 - 1e-9) == doctest::Approx(e.radial(1.0 + 1e-9)).epsilon(1e-6));
  CHECK(e.radial_slope(3.0) == doctest::Approx(std::exp(3.0)));
  CHECK(power_conjugate_coef(2.0) == doctest::Approx(0.25));
  CHECK(power_conjugate_coef(3.0) == doctest::Approx((2.0 / 3.0) * std::sqrt(1.0 / 3.0)));
}

TEST_CASE("kernel convexity spot checks on random segments") {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> d(-3.0, 3.0), lam(0.0, 1.0);
  for (const Kernel& k : {Kernel::quadratic(), Kernel::power_radial(1.5), Kernel::exponential_radial(),
                          Kernel::anisotropic(3.0, 2.0), parse_kernel("aniso-h:s=3,s2=2")}) {
    for (int i = 0; i < 200; ++i) {
      const Point a{d(rng), d(rng)}, b{d(rng), d(rng)};
      const double l = lam(rng);
      const Point m = l * a + (1.0 - l) * b;
      CHECK(k.eval(m) <= l * k.eval(a) + (1.0 - l) * k.eval(b) + 1e-12 * (1.0 + k.eval(a) + k.eval(b)));
    }
  }
}

TEST_CASE("hull march agrees with brute force") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const auto p = linspace(-3.0, 3.0, 301);
  std::vector<double> h;
  for (double x : p) h.push_back(x * x * x * x / 4.0 + 0.3 * d(rng));  // non-convex samples
  const auto q = linspace(-20.0, 20.0, 401);
  const Conjugate1D c = legendre_1d(p, h, q);
  const auto brute = legendre_1d_brute(p, h, q);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(c.values[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  CHECK_THROWS_AS(legendre_1d(std::vector<double>{}, std::vector<double>{}, q), Error);
}

TEST_CASE("one-dimensional conjugates") {
  const auto p = linspace(-4.0, 4.0, 801);
  const auto q = linspace(-3.0, 3.0, 61);
  const Conjugate1D quad = legendre_1d(p, apply(p, [](double x) { return x * x / 2.0; }), q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(quad.trusted[i]);
    CHECK(quad.values[i] == doctest::Approx(q[i] * q[i] / 2.0).epsilon(1e-4));
  }
  const auto q1 = std::vector<double>{1.0};
  const Conjugate1D quart = legendre_1d(p, apply(p, [](double x) { return x * x * x * x / 4.0; }), q1);
  CHECK(quart.values[0] == doctest::Approx(0.75).epsilon(1e-3));

  const auto h = apply(p, [](double x) { return std::cosh(x); });
  const auto hc = apply(h, [](double v) { return v + 2.5; });
  const Conjugate1D a = legendre_1d(p, h, q), b = legendre_1d(p, hc, q);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(b.values[i] == doctest::Approx(a.values[i] - 2.5).epsilon(1e-14));

  // q beyond the slope range is flagged
  const Conjugate1D wide = legendre_1d(p, apply(p, [](double x) { return x * x / 2.0; }), std::vector<double>{-5.0, 0.0, 5.0});
  CHECK_FALSE(wide.trusted[0]);
  CHECK(wide.trusted[1]);
  CHECK_FALSE(wide.trusted[2]);
}

TEST_CASE("double conjugate of convex samples reproduces them") {
  const auto p = linspace(-2.0, 2.0, 401);
  const double hstep = p[1] - p[0];
  for (auto f : {+[](double x) { return x * x / 2.0; }, +[](double x) { return std::exp(x) - x; },
                 +[](double x) { return std::pow(std::abs(x), 3.0); }}) {
    const auto h = apply(p, f);
    const Conjugate1D c = legendre_1d(p, h, linspace(-20.0, 20.0, 20001));
    const Conjugate1D cc = legendre_1d(c.q, c.values, p);
    // interpolation bound: max |f''| h^2 / 8 on the grid
    double f2 = 0.0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) f2 = std::max(f2, std::abs(h[i + 1] - 2 * h[i] + h[i - 1]) / (hstep * hstep));
    const double bound = f2 * hstep * hstep / 8.0 + f2 * std::pow(40.0 / 20000.0, 2) / 8.0;
    for (std::size_t i = 20; i + 20 < p.size(); ++i) CHECK(std::abs(cc.values[i] - h[i]) <= 2.0 * bound + 1e-12);
  }
}

TEST_CASE("double conjugate of non-convex samples is a minorant") {
  const auto p = linspace(-2.0, 2.0, 201);
  const auto h = apply(p, [](double x) { return std::cos(3.0 * x) + x * x; });
  const Conjugate1D c = legendre_1d(p, h, linspace(-30.0, 30.0, 6001));
  const Conjugate1D cc = legendre_1d(c.q, c.values, p);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(cc.values[i] <= h[i] + 1e-12);
}

TEST_CASE("conjugation reverses order and satisfies Young-Fenchel") {
  const auto p = linspace(-3.0, 3.0, 601);
  const auto q = linspace(-2.0, 2.0, 81);
  const auto h1 = apply(p, [](double x) { return x * x / 2.0; });
  const auto h2 = apply(p, [](double x) { return x * x / 2.0 + 0.1 * x * x * x * x; });
  const Conjugate1D c1 = legendre_1d(p, h1, q), c2 = legendre_1d(p, h2, q);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(c1.values[i] >= c2.values[i] - 1e-14);
  for (std::size_t i = 0; i < p.size(); i += 7)
    for (std::size_t j = 0; j < q.size(); ++j) CHECK(p[i] * q[j] <= c1.values[j] + h1[i] + 1e-12);
}

TEST_CASE("n-dimensional conjugates: separable and brute paths agree") {
  const Grid pbox = Grid::uniform(2, -3.0, 3.0, 61);
  const Grid qgrid = Grid::uniform(2, -2.0, 2.0, 21);
  const Kernel h = Kernel::quadratic();
  const ConjugateND sep = legendre_nd(h, pbox, qgrid, ConjugateMode::Separable);
  const ConjugateND brute = legendre_nd(h, pbox, qgrid, ConjugateMode::Brute);
  for (std::size_t i = 0; i < qgrid.size(); ++i) {
    CHECK(sep.values.values()[i] == doctest::Approx(brute.values.values()[i]).epsilon(1e-10));
    const Point x = qgrid.point(i);
    CHECK(sep.values.values()[i] == doctest::Approx(x.norm() * x.norm() / 2.0).epsilon(1e-2));
  }
  CHECK(sep.trusted_count() == qgrid.size());
}

TEST_CASE("conjugate of |x|^3 + |y|^2 is C(3)|x|^1.5 + C(2)|y|^2") {
  const Grid pbox = Grid::uniform(2, -4.0, 4.0, 801);
  const Grid qgrid = Grid::uniform(2, -3.0, 3.0, 61);
  const ConjugateND c = legendre_nd(Kernel::anisotropic(3.0, 2.0), pbox, qgrid, ConjugateMode::Separable);
  const double c3 = power_conjugate_coef(3.0), c2 = power_conjugate_coef(2.0);
  CHECK(c2 == doctest::Approx(0.25));
  double peak = 0.0;
  for (std::size_t i = 0; i < qgrid.size(); ++i) {
    const Point x = qgrid.point(i);
    peak = std::max(peak, c3 * std::pow(std::abs(x[0]), 1.5) + c2 * x[1] * x[1]);
  }
  for (std::size_t i = 0; i < qgrid.size(); ++i) {
    const Point x = qgrid.point(i);
    const double exact = c3 * std::pow(std::abs(x[0]), 1.5) + c2 * x[1] * x[1];
    if (c.trusted[i] && exact >= 0.01 * peak) CHECK(std::abs(c.values.values()[i] - exact) <= 0.01 * exact);
  }
  // and legendre_1d of |y|^2 alone gives |y|^2/4
  const auto p = linspace(-8.0, 8.0, 1601);
  const Conjugate1D y = legendre_1d(p, apply(p, [](double v) { return v * v; }), std::vector<double>{-2.0, 1.0, 3.0});
  CHECK(y.values[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(y.values[1] == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(y.values[2] == doctest::Approx(2.25).epsilon(1e-4));
}

TEST_CASE("numeric conjugate kernels") {
  const NumericConjugate q = conjugate_kernel(Kernel::quadratic(), 2, 20.0);
  CHECK(q.trusted_radius >= 19.0);
  for (double r : {0.5, 2.0, 9.0}) CHECK(q.kernel.radial(r) == doctest::Approx(r * r / 2.0).epsilon(1e-3));
  const NumericConjugate a = conjugate_kernel(parse_kernel("aniso-h:s=3,s2=2"), 2, 20.0);
  const Point x{1.2, -0.7};
  CHECK(a.kernel.eval(x) == doctest::Approx(std::pow(1.2, 3.0) + 0.49).epsilon(1e-3));
}

TEST_CASE("growth ratio condition") {
  const SamplePlan plan = log_plan(2, 0.5, 50.0, 9, 8);
  const ConditionReport q = check_growth_ratio(Kernel::quadratic(), plan);
  CHECK(q.verdict == Verdict::Holds);
  CHECK(q.extremum == doctest::Approx(2.0));
  const ConditionReport pw = check_growth_ratio(Kernel::power_radial(3.5), plan);
  CHECK(pw.verdict == Verdict::Holds);
  CHECK(pw.extremum == doctest::Approx(3.5));
  const ConditionReport e = check_growth_ratio(Kernel::exponential_radial(), log_plan(3, 5.0, 60.0, 9, 4));
  CHECK(e.verdict == Verdict::Fails);
  // L = e^r - e/2 past the join
  for (const auto& s : e.per_radius)
    CHECK(s.value == doctest::Approx(s.radius * std::exp(s.radius) / (std::exp(s.radius) - std::exp(1.0) / 2.0)).epsilon(1e-9));
}

TEST_CASE("doubling condition") {
  const SamplePlan plan = log_plan(2, 0.5, 1e4, 15, 16);
  const ConditionReport q = check_doubling(Kernel::quadratic(), plan);
  CHECK(q.verdict == Verdict::Holds);
  CHECK(q.extremum == doctest::Approx(4.0));
  const ConditionReport a = check_doubling(parse_kernel("aniso-h:s=3,s2=2"), plan);
  CHECK(a.verdict == Verdict::Holds);
  CHECK(a.extremum == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-9));

  // |x| log(1 + |x|): the ratio tends to 2 from above
  const auto knots = linspace(-1e6, 1e6, 2000001);
  const auto vals = apply(knots, [](double x) { return std::abs(x) * std::log1p(std::abs(x)); });
  const ConditionReport xl = check_doubling(Kernel::tabulated(knots, vals), log_plan(1, 1.0, 4e5, 12, 0));
  CHECK(xl.verdict != Verdict::Holds);
  CHECK(xl.per_radius.back().value < xl.per_radius.front().value);
}

TEST_CASE("quasi-radial condition") {
  const SamplePlan plan = log_plan(2, 0.5, 1e6, 25, 16);
  const ConditionReport r = check_quasi_radial(Kernel::power_radial(1.7), plan);
  CHECK(r.verdict == Verdict::Holds);
  CHECK(r.extremum == doctest::Approx(1.0));
  const ConditionReport a = check_quasi_radial(parse_kernel("aniso-h:s=3,s2=2"), plan);
  CHECK(a.verdict == Verdict::Fails);
  // ratio ~ C(2) r^2 / (C(3) r^1.5) at large r
  const auto& last = a.per_radius.back();
  const auto& prev = a.per_radius[a.per_radius.size() - 5];
  CHECK(std::log(last.value / prev.value) / std::log(last.radius / prev.radius) == doctest::Approx(0.5).epsilon(0.02));

  const Kernel skew = Kernel::custom(
      "skew", 2, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] + 0.5 * x[0] * x[0]; },
      [](std::span<const double> x, std::span<double> g) {
        g[0] = 3.0 * x[0];
        g[1] = 2.0 * x[1];
      });
  const ConditionReport s = check_quasi_radial(skew, plan);
  CHECK(s.verdict == Verdict::Holds);
  CHECK(s.extremum == doctest::Approx(1.5));
}

TEST_CASE("condition reports are reproducible from their plan") {
  const SamplePlan plan = log_plan(2, 0.5, 100.0, 7, 12, 99);
  const Kernel h = parse_kernel("aniso-h:s=3,s2=2");
  const ConditionReport a = check_quasi_radial(h, plan), b = check_quasi_radial(h, plan);
  REQUIRE(a.per_radius.size() == b.per_radius.size());
  for (std::size_t i = 0; i < a.per_radius.size(); ++i) CHECK(a.per_radius[i].value == b.per_radius[i].value);
  CHECK(a.verdict == b.verdict);
  const auto d1 = plan.directions(), d2 = plan.directions();
  REQUIRE(d1.size() == 4 + 12);
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == d2[i]);
}

TEST_CASE("kernel specs parse") {
  CHECK(parse_kernel("quadratic").describe() == Kernel::quadratic().describe());
  CHECK(parse_kernel("power:q=3").kind() == KernelKind::PowerRadial);
  CHECK(parse_kernel("exp-radial").kind() == KernelKind::ExponentialRadial);
  const Kernel a = parse_kernel("aniso:s=3,s2=2");
  CHECK(a.eval(Point{2.0, 3.0}) == doctest::Approx(17.0));
  CHECK_THROWS_AS(parse_kernel("nonsense"), Error);
  CHECK_THROWS_AS(parse_kernel("power:q=0.5"), Error);
}

}
