#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace apshear;

namespace {

ContinuationConfig short_run(int steps) {
  ContinuationConfig c;
  c.max_steps = steps;
  return c;
}

}  // namespace

TEST_SUITE("continuation") {
  TEST_CASE("max_steps = 0 returns only the converged seed") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    int seen = 0;
    const auto b = run_branch(short_run(0), m, f, g, 0.25, PointCallback<double>([&](const auto&) { ++seen; }));
    REQUIRE(b.points.size() == 1);
    CHECK(seen == 1);
    CHECK(b.termination == Termination::max_steps);
    CHECK(b.points[0].field.lambda == 0.0625);
    CHECK(b.points[0].diagnostics.residual_norm <= 1e-10);
    CHECK(b.points[0].s == 0.0);
  }

  TEST_CASE("predictor extrapolates collinear points exactly") {
    const auto g = build_grid(10.0, 40, 16);
    std::mt19937 rng(3);
    const auto a = test::random_smooth_field(g, 0.1, rng);
    auto b = a;
    b.flat() *= 1.5;
    b.lambda = 0.2;
    const auto t = secant_tangent(a, b, 0.9);
    CHECK(arclength_norm_sq(g, t.t_u, t.t_lambda, 0.9) == doctest::Approx(1.0).epsilon(1e-13));
    const double len = std::sqrt(arclength_norm_sq(g, Vec<double>(b.flat() - a.flat()), b.lambda - a.lambda, 0.9));
    const auto p = predict(b, t, len);
    // One secant length beyond b lies at 2 b - a.
    CHECK(p.lambda == doctest::Approx(0.3).epsilon(1e-13));
    CHECK((p.flat() - (2.0 * b.flat() - a.flat())).cwiseAbs().maxCoeff() <= 1e-13);
  }

  TEST_CASE("a zero secant falls back to the lambda direction") {
    const auto g = build_grid(10.0, 40, 16);
    std::mt19937 rng(4);
    const auto a = test::random_smooth_field(g, 0.1, rng);
    const auto t = secant_tangent(a, a, 0.9);
    CHECK(t.t_u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.t_lambda > 0.0);
    CHECK(arclength_norm_sq(g, t.t_u, t.t_lambda, 0.9) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("branch properties over the first steps") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    const auto b = run_branch(short_run(14), m, f, g, 0.25);
    REQUIRE(b.points.size() >= 12);

    CHECK(b.points[1].field.lambda > b.points[0].field.lambda);
    for (std::size_t k = 1; k < b.points.size(); ++k) {
      CHECK(b.points[k].s > b.points[k - 1].s);
      CHECK(b.points[k].diagnostics.residual_norm <= 1e-10);
      CHECK(b.points[k].diagnostics.nodal.all());
      CHECK(b.points[k].field.lambda > 0.0);
      CHECK(b.points[k].field.lambda < 1.0);
    }
    for (std::size_t k = 10; k < b.points.size(); ++k) CHECK(b.points[k].field.lambda >= 1e-3);

    SUBCASE("resuming from two saved points reproduces the run") {
      const int i = 6;
      const auto r = resume_branch(short_run(14), m, f, b.points[i - 1], b.points[i], b.seed_width, i);
      REQUIRE(r.points.size() == b.points.size() - i);
      for (std::size_t k = 0; k < r.points.size(); ++k) {
        const auto& x = r.points[k];
        const auto& y = b.points[i + k];
        CHECK(x.field.lambda == y.field.lambda);
        CHECK(x.s == y.s);
        CHECK(x.field.grid == y.field.grid);
        CHECK((x.field.u == y.field.u).all());
      }
      CHECK(r.termination == b.termination);
    }
  }

  TEST_CASE("invalid configuration is rejected before any work") {
    auto c = short_run(10);
    c.ds_min = 1.0;
    c.ds_init = 0.1;
    CHECK_THROWS_AS(run_branch(c, test::reference_model_i(), test::reference_force_i(), build_grid(60.0, 240, 32), 0.25),
                    ValidationError);
    auto d = short_run(10);
    d.theta = 1.0;
    CHECK_FALSE(d.problems().empty());
  }

  TEST_CASE("Model II stops on the ellipticity margin") {
    ContinuationConfig c;
    c.ds_init = c.ds_max = 0.02;
    c.max_steps = 60;
    const auto m = test::softening_model_ii();
    const auto b = run_branch(c, m, make_force<double>({}), build_grid(40.0, 240, 32), 0.2);
    CHECK(b.termination == Termination::margin_stop);
    CHECK(b.points.size() >= 10);
    CHECK(b.points.back().diagnostics.e_min <= 0.2);
    for (std::size_t k = 0; k + 1 < b.points.size(); ++k) CHECK(b.points[k].diagnostics.e_min > 0.2);
  }
}
