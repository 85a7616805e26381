#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace apshear;

TEST_SUITE("nonlinear_solver") {
  TEST_CASE("zero field is returned unchanged") {
    const auto g = build_grid(20.0, 40, 16);
    const auto r = newton_fixed_lambda(SolutionField<double>::zeros(g, 0.3), test::reference_model_i(),
                                       test::reference_force_i());
    CHECK(r.iterations <= 1);
    CHECK(r.field.u.abs().maxCoeff() == 0.0);
  }

  TEST_CASE("seed at eps = 0.1 converges quickly and keeps the clamp bitwise") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    const auto seed = homoclinic_seed(make_seed_parameters(m, f, 0.1), g);
    const auto r = newton_fixed_lambda(seed, m, f);
    CHECK(r.iterations <= 8);
    CHECK(r.residual <= 1e-10);
    CHECK(r.field.lambda == seed.lambda);
    for (int i = 0; i <= g.Nx; ++i) CHECK(std::signbit(r.field.u(i, g.Ny)) == false);
    CHECK((r.field.u.row(g.Nx) == 0.0).all());
    CHECK((r.field.u.col(g.Ny) == 0.0).all());
  }

  TEST_CASE("nonpositive lambda is a precondition error") {
    const auto g = build_grid(20.0, 40, 16);
    CHECK_THROWS_AS(newton_fixed_lambda(SolutionField<double>::zeros(g, -0.5), test::reference_model_i(),
                                        test::reference_force_i()),
                    DomainError);
  }

  TEST_CASE("a linear problem takes one step") {
    std::mt19937 rng(17);
    const auto g = build_grid(8.0, 32, 16);
    const auto guess = test::random_smooth_field(g, 0.5, rng);
    const auto r = newton_fixed_lambda(guess, test::linear_law(), make_force<double>({}));
    CHECK(r.iterations == 1);
    CHECK(r.field.u.abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("quadratic convergence once the residual is small") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    for (double eps : {0.2, 0.3}) {
      const auto r = newton_fixed_lambda(homoclinic_seed(make_seed_parameters(m, f, eps), g), m, f);
      int checked = 0;
      for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
        if (r.history[k] > 1e-3 || r.history[k + 1] < 1e-13) continue;
        CHECK(r.history[k + 1] <= 50.0 * r.history[k] * r.history[k]);
        ++checked;
      }
      CHECK(checked >= 1);
    }
  }

  TEST_CASE("non-convergence carries the residual history") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto seed = homoclinic_seed(make_seed_parameters(m, f, 0.3), build_grid(60.0, 240, 32));
    NewtonSettings s;
    s.max_iterations = 1;
    try {
      (void)newton_fixed_lambda(seed, m, f, s);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.history.size() == 2);
      CHECK(e.history[1] < e.history[0]);
    }
  }

  TEST_CASE("arclength corrector") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    const auto base = newton_fixed_lambda(homoclinic_seed(make_seed_parameters(m, f, 0.2), g), m, f).field;
    const auto t = seed_tangent(m, f, g, 0.2, 0.9);

    SUBCASE("ds = 0 at a converged point returns it") {
      ArclengthConstraint<double> c{base, t.t_u, t.t_lambda, 0.0, 0.9};
      const auto r = newton_arclength(base, c, m, f);
      CHECK(r.iterations == 0);
      CHECK((r.field.u == base.u).all());
      CHECK(r.field.lambda == base.lambda);
    }
    SUBCASE("the sign of ds sets the direction of lambda") {
      for (double ds : {0.05, -0.05}) {
        ArclengthConstraint<double> c{base, t.t_u, t.t_lambda, ds, 0.9};
        const auto r = newton_arclength(predict(base, t, ds), c, m, f);
        CHECK(r.residual <= 1e-10);
        CHECK((r.field.lambda - base.lambda) * ds > 0);
        // The converged point satisfies the normalization.
        const double n = 0.9 * weighted_dot(g, r.field.flat() - base.flat(), t.t_u) +
                         0.1 * (r.field.lambda - base.lambda) * t.t_lambda - ds;
        CHECK(std::abs(n) <= 1e-9);
      }
    }
    SUBCASE("malformed constraints are rejected") {
      ArclengthConstraint<double> c{base, 2.0 * t.t_u, t.t_lambda, 0.1, 0.9};
      CHECK_THROWS_AS(newton_arclength(base, c, m, f), DomainError);
      const auto other = SolutionField<double>::zeros(build_grid(30.0, 120, 32), 0.1);
      ArclengthConstraint<double> c2{other, Vec<double>::Zero(other.grid.nodes()), 1 / std::sqrt(0.1), 0.1, 0.9};
      CHECK_THROWS_AS(newton_arclength(base, c2, m, f), DomainError);
    }
  }
}
