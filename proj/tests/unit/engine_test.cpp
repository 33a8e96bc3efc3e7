#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hopflax/field_io.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/moreau.hpp"
#include "hopflax/spec_parse.hpp"
#include "support.hpp"

using namespace hopflax;
using hopflax::test::max_abs_diff;
using hopflax::test::tabulate;

namespace {

// 2 - min(|x|, 2): two symmetric minimizers at x = 0.
Field tent(double h = 0.01) {
  return tabulate(Grid::line(-4.0, 4.0, static_cast<std::size_t>(std::lround(8.0 / h)) + 1),
                  [](const Point& x) { return 2.0 - std::min(std::abs(x[0]), 2.0); });
}

// Dense brute force over every grid point of the field, no refinement.
double dense_min(const Field& u, const Lagrangian& l, double t, const Point& x) {
  double best = INFINITY;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    const Point y = u.grid().point(i);
    best = std::min(best, u.values()[i] + t * l.eval((1.0 / t) * (y - x)));
  }
  return best;
}

// A window covering every grid point.
SearchPlan whole_grid() {
  SearchPlan plan;
  plan.radius = 1e9;
  return plan;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("search radius") {
  CHECK(search_radius(2.0, Kernel::quadratic(), 0.1) == doctest::Approx(std::sqrt(80.0)).epsilon(1e-9));
  CHECK(search_radius(0.0, Kernel::quadratic(), 0.1) == 0.0);
  // t L(R) = 2 osc with L = e^R - e/2 on the exponential branch
  CHECK(search_radius(1.0, Kernel::exponential_radial(), 0.5) ==
        doctest::Approx(std::log(4.0 + std::exp(1.0) / 2.0)).epsilon(1e-9));
  const double ra = search_radius(1.0, Kernel::anisotropic(3.0, 2.0), 0.5);
  // the |y|^2 axis needs 0.5 R^2 = 2; off-axis directions need slightly more
  CHECK(ra >= 2.0);
  CHECK(ra <= 2.1);
  CHECK_THROWS_AS(search_radius(1.0, Kernel::quadratic(), 0.0), Error);
}

TEST_CASE("constant data is a fixed point") {
  const Grid g = Grid::uniform(2, -1.0, 1.0, 9);
  const Field c = tabulate(g, [](const Point&) { return 1.25; });
  for (const Kernel& l : {Kernel::quadratic(), Kernel::anisotropic(3.0, 2.0), Kernel::exponential_radial()}) {
    const HopfLaxSolution sol = hopf_lax_brute(c, l, 0.3, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(sol.values[i] == 1.25);
      CHECK(sol.offset(i).norm() == 0.0);
      const auto set = minimizer_set(sol, i, 1e-8);
      REQUIRE(set.size() == 1);
      CHECK(set[0].norm() == 0.0);
    }
    const GradientResult gr = gradient_from_minimizers(sol, l);
    for (double v : gr.grad.data) CHECK(v == 0.0);
  }
  CHECK(max_abs_diff(moreau_quadratic(c, 0.3).values, std::vector<double>(g.size(), 1.25)) == 0.0);
  CHECK(max_abs_diff(hopf_lax_separable(c, Kernel::anisotropic(3.0, 2.0), 0.3).values,
                     std::vector<double>(g.size(), 1.25)) == 0.0);
}

TEST_CASE("Moreau envelope of min(|x|, 1)") {
  const Field u = tabulate(Grid::line(-4.0, 4.0, 801), [](const Point& x) { return std::min(std::abs(x[0]), 1.0); });
  const HopfLaxSolution sol = hopf_lax_brute(u, Kernel::quadratic(), 0.5, u.grid());
  const std::size_t i25 = u.grid().locate(Point{0.25}), i1 = u.grid().locate(Point{1.0});
  CHECK(sol.values[i25] == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(sol.values[i1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(1.0 + 0.5 * sol.offset(i1)[0] == doctest::Approx(0.5).epsilon(1e-12));
  // closed form: x^2/(2t) for |x| <= t, |x| - t/2 up to the plateau
  for (double x : {-0.3, 0.1, 0.6, 0.9})
    CHECK(sol.values[u.grid().locate(Point{x})] ==
          doctest::Approx(std::abs(x) <= 0.5 ? x * x : std::abs(x) - 0.25).epsilon(1e-12));
}

TEST_CASE("tent maximum has two minimizers at the origin") {
  const Field u = tent();
  const Kernel l = Kernel::quadratic();
  const double t = 0.2;
  const HopfLaxSolution sol = hopf_lax_brute(u, l, t, u.grid());
  const std::size_t o = u.grid().locate(Point{0.0});
  CHECK(sol.values[o] == doctest::Approx(1.9).epsilon(1e-12));
  const auto set = minimizer_set(sol, o, 1e-8);
  REQUIRE(set.size() == 2);
  CHECK(std::abs(set[0][0]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(set[0][0] * set[1][0] == doctest::Approx(-1.0).epsilon(1e-9));
  // tie-break: smallest |a|, then lexicographic
  CHECK(sol.offset(o)[0] < 0.0);

  const GradientResult gr = gradient_from_minimizers(sol, l);
  CHECK(gr.nondiff[o]);
  CHECK_FALSE(gr.nondiff[u.grid().locate(Point{0.5})]);
  CHECK(gr.nondiff_fraction < 0.01);

  for (double g : {1.0, -1.0}) {
    const double d = directional_derivative(u, l, t, Point{0.0}, Point{g}, 1e-8);
    CHECK(d == doctest::Approx(-1.0).epsilon(1e-9));
    const std::size_t side = u.grid().locate(Point{g * 0.05});
    CHECK((sol.values[side] - sol.values[o]) / 0.05 == doctest::Approx(-1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(directional_derivative(u, l, t, Point{0.0}, Point{2.0}, 1e-8), Error);
}

TEST_CASE("smooth convex data has singleton minimizer sets") {
  const Field u = tabulate(Grid::line(-2.0, 2.0, 201), [](const Point& x) { return std::cosh(x[0]); });
  const HopfLaxSolution sol = hopf_lax_brute(u, Kernel::quadratic(), 0.25, u.grid());
  for (std::size_t i = 0; i < u.grid().size(); ++i) CHECK(minimizer_set(sol, i, 1e-8).size() == 1);
  CHECK_THROWS_AS(minimizer_set(sol, Point{0.013}, 1e-8), Error);
}

TEST_CASE("quadratic gradient is (x - y*)/t") {
  const Field u = test::random_field(Grid::uniform(2, -1.0, 1.0, 33), 4);
  const double t = 0.125;
  const HopfLaxSolution sol = hopf_lax_brute(u, Kernel::quadratic(), t, u.grid());
  const GradientResult gr = gradient_from_minimizers(sol, Kernel::quadratic());
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    const Point a = sol.offset(i);
    const Point x = u.grid().point(i);
    const Point ystar = x + t * a;
    for (std::size_t d = 0; d < 2; ++d) CHECK(gr.grad.at(i)[d] == doctest::Approx((x[d] - ystar[d]) / t).epsilon(1e-12));
  }
}

TEST_CASE("solution invariants: domination, argmin consistency, window") {
  const Grid g = Grid::uniform(2, -1.0, 1.0, 25);
  const Field u = test::random_field(g, 9);
  for (const Kernel& l : {Kernel::quadratic(), Kernel::power_radial(3.0), Kernel::anisotropic(3.0, 2.0)}) {
    const HopfLaxSolution sol = hopf_lax_brute(u, l, 0.2, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(sol.values[i] <= u.values()[i] + 1e-12);
      const Point a = sol.offset(i);
      CHECK(a.norm() <= sol.search_radius_used + 1e-12);
      const double obj = u.value_at(g.point(i) + 0.2 * a) + 0.2 * l.eval(a);
      CHECK(std::abs(obj - sol.values[i]) <= 1e-10);
    }
  }
}

TEST_CASE("u_t is nonincreasing in t") {
  const Grid g = Grid::line(-1.0, 1.0, 129);
  const Field u = test::noise_field(g, 21);
  std::vector<double> prev = u.values();
  for (double t : {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}) {
    const HopfLaxSolution sol = hopf_lax_brute(u, Kernel::power_radial(1.5), t, g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(sol.values[i] <= prev[i] + 1e-12);
    prev = sol.values;
  }
}

TEST_CASE("discrete Lipschitz constant is bounded by sup |DL| over the window") {
  const Grid g = Grid::line(-1.0, 1.0, 257);
  const Field u = test::noise_field(g, 2);
  const Kernel l = Kernel::quadratic();
  for (double t : {0.05, 0.2}) {
    const HopfLaxSolution sol = hopf_lax_brute(u, l, t, g);
    double lip = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) lip = std::max(lip, std::abs(sol.values[i] - sol.values[i - 1]) / g.spacing(0));
    const double bound = l.grad(Point{sol.search_radius_used}).norm();
    CHECK(lip <= bound + 0.5 * g.spacing(0) / t);
  }
}

TEST_CASE("closed-form data: critical points are always candidates") {
  const Field u = smooth_bump(2, 0.5);
  SearchPlan plan;
  plan.lattice_spacing = 0.05;
  const PointSolver solver(u, Kernel::quadratic(), 0.01, plan);
  // the bump minimum sits exactly at the origin, off any coarse lattice around x
  const PointSolution ps = solver.solve(Point{0.0013, -0.0007});
  CHECK(ps.value <= u.value_at(Point{0.0013, -0.0007}));
  CHECK(std::abs(solver.objective(Point{0.0013, -0.0007}, ps.argmin) - ps.value) <= 1e-12);
  CHECK(solver.merge_radius() == doctest::Approx(0.1));
}

TEST_CASE("Moreau fast path equals brute force") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Field u = test::noise_field(Grid::line(-1.0, 1.0, 64), seed);
    for (double t : {0.01, 0.1, 1.0}) {
      const HopfLaxSolution fast = moreau_quadratic(u, t);
      const HopfLaxSolution slow = hopf_lax_brute(u, Kernel::quadratic(), t, u.grid(), whole_grid());
      CHECK(max_abs_diff(fast.values, slow.values) <= 1e-12);
      for (std::size_t i = 0; i < u.grid().size(); i += 9)
        CHECK(fast.values[i] == doctest::Approx(dense_min(u, Kernel::quadratic(), t, u.grid().point(i))).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(moreau_quadratic(test::noise_field(Grid::line(0, 1, 5), 1), 0.0), Error);
}

TEST_CASE("quadratic inf-convolution splits over axes") {
  const Grid g = Grid::uniform(2, -1.0, 1.0, 33);
  auto f = [](double x) { return std::sin(4.0 * x); };
  auto h = [](double y) { return std::abs(y) - y * y; };
  const Field u = tabulate(g, [&](const Point& p) { return f(p[0]) + h(p[1]); });
  const Grid line = Grid::line(-1.0, 1.0, 33);
  const HopfLaxSolution fx = moreau_quadratic(tabulate(line, [&](const Point& p) { return f(p[0]); }), 0.2);
  const HopfLaxSolution hy = moreau_quadratic(tabulate(line, [&](const Point& p) { return h(p[0]); }), 0.2);
  const HopfLaxSolution both = moreau_quadratic(u, 0.2);
  for (std::size_t i = 0; i < 33; ++i)
    for (std::size_t j = 0; j < 33; ++j) CHECK(both.values[i * 33 + j] == doctest::Approx(fx.values[i] + hy.values[j]).epsilon(1e-10));
}

TEST_CASE("separable fast path equals brute force") {
  const Grid g = Grid::uniform(2, -1.0, 1.0, 33);
  const Field bump = sample(smooth_bump(2, 0.6), g);
  const Kernel l = Kernel::anisotropic(3.0, 2.0);
  for (double t : {0.05, 0.3}) {
    const HopfLaxSolution fast = hopf_lax_separable(bump, l, t);
    const HopfLaxSolution slow = hopf_lax_brute(bump, l, t, g, whole_grid());
    CHECK(max_abs_diff(fast.values, slow.values) <= 1e-8);
  }
  const Field noise = test::noise_field(g, 8);
  CHECK(max_abs_diff(hopf_lax_separable(noise, Kernel::quadratic(), 0.1).values, moreau_quadratic(noise, 0.1).values) <= 1e-12);
  CHECK_THROWS_AS(hopf_lax_separable(noise, Kernel::power_radial(3.0), 0.1), Error);
}

TEST_CASE("semigroup property for quadratic L") {
  for (std::uint64_t seed : {4u, 5u}) {
    const Field u = test::random_field(Grid::line(-1.0, 1.0, 201), seed);
    const auto [whole, comp] = semigroup_compose(u, 0.1, 0.1);
    double dev = 0.0;
    for (std::size_t i = 20; i + 20 < u.grid().size(); ++i) dev = std::max(dev, std::abs(whole.values[i] - comp.values[i]));
    CHECK(dev <= 1e-9);
  }
  const Field c = tabulate(Grid::line(-1.0, 1.0, 51), [](const Point&) { return -0.5; });
  const auto [a, b] = semigroup_compose(c, 0.2, 0.05);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.values[i] == -0.5);
    CHECK(b.values[i] == doctest::Approx(-0.5).epsilon(1e-15));
  }
  const Field u = test::random_field(Grid::line(-1.0, 1.0, 201), 6);
  const auto [us, tiny] = semigroup_compose(u, 1e-9, 0.1);
  CHECK(max_abs_diff(us.values, tiny.values) <= 1e-6);
  CHECK_THROWS_AS(semigroup_compose(u, 0.0, 0.1), Error);
}

TEST_CASE("solution files round-trip") {
  const Field u = tent(0.05);
  const HopfLaxSolution sol = hopf_lax_brute(u, Kernel::quadratic(), 0.2, u.grid());
  std::stringstream ss;
  write_solution(ss, sol);
  const HopfLaxSolution back = read_solution(ss);
  CHECK(back.grid == sol.grid);
  CHECK(back.values == sol.values);
  CHECK(back.argmin == sol.argmin);
  CHECK(back.merge_radius == sol.merge_radius);
}

}
