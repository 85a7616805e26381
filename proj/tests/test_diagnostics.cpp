#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace apshear;

namespace {

SolutionField<double> cos_sech(const StripGrid<double>& g, double amp, double lambda) {
  auto f = SolutionField<double>::zeros(g, lambda);
  for (int j = 0; j <= g.Ny; ++j)
    for (int i = 0; i <= g.Nx; ++i) f.u(i, j) = amp * std::cos(g.y(j)) / std::cosh(g.x(i));
  f.clamp();
  return f;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("zero field") {
    const auto g = build_grid(20.0, 80, 16);
    const auto z = SolutionField<double>::zeros(g, 0.3);
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto H = hamiltonian_profile(z, m, f);
    CHECK(H.max_dev == 0.0);
    const auto s = shape_metrics(z, m);
    CHECK(s.amplitude == 0.0);
    CHECK(s.width_half == 0.0);
    CHECK(s.sup_grad_sq == 0.0);
    CHECK(s.e_min == 1.0);
    const auto b = analytic_bound_checks(z, m, f, m.xi1);
    CHECK(b.l6.pass);
    CHECK(b.lambda_inequality.pass);
    CHECK(b.gradient.pass);
    CHECK_THROWS_AS(shape_metrics(z, m, 1.0), DomainError);
  }

  TEST_CASE("Hamiltonian of an x-independent field is the same on every column") {
    const auto g = build_grid(20.0, 80, 32);
    auto u = SolutionField<double>::zeros(g, 0.4);
    for (int j = 0; j <= g.Ny; ++j)
      for (int i = 0; i <= g.Nx; ++i) u.u(i, j) = 0.7 * std::cos(g.y(j));
    u.clamp();
    const auto H = hamiltonian_profile(u, test::reference_model_i(), test::reference_force_i());
    for (int i = 1; i <= g.Nx - 2; ++i) CHECK(std::abs(H.H[i] - H.H[0]) <= 1e-14);
    CHECK(H.H[0] != 0.0);
  }

  TEST_CASE("nodal pattern of the seed and of a flat field") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    const auto seed = homoclinic_seed(make_seed_parameters(m, f, 0.1), g);
    CHECK(nodal_check(seed).all());

    auto flat = SolutionField<double>::zeros(g, 0.1);
    for (int j = 0; j <= g.Ny; ++j)
      for (int i = 0; i < g.Nx; ++i) flat.u(i, j) = std::cos(g.y(j));
    flat.clamp();
    const auto n = nodal_check(flat);
    CHECK_FALSE(n.ux_negative_interior);
    CHECK(n.uy_negative_interior);
    CHECK_FALSE(n.all());
  }

  TEST_CASE("seed width at half height") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(60.0, 240, 32);
    const auto seed = homoclinic_seed(make_seed_parameters(m, f, 0.1), g);
    const auto s = shape_metrics(seed, m);
    // sech(eps x*) = 1/2 gives 2 x* = 2 acosh(2) / eps; linear interpolation costs O(hx^2 eps^2).
    CHECK(s.width_half == doctest::Approx(2.0 * std::acosh(2.0) / 0.1).epsilon(1e-4));
    CHECK(s.width_half == doctest::Approx(26.339).epsilon(1e-4));
    CHECK(s.amplitude == seed.u(0, 0));
  }

  TEST_CASE("L6 bound threshold for the reference law") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(20.0, 80, 32);
    const auto b = analytic_bound_checks(cos_sech(g, 0.2, 0.5), m, f, m.xi1);
    REQUIRE(b.l6.applicable);
    const double rhs = (0.3 + 0.05 * std::numbers::pi) * std::cbrt(std::numbers::pi) / 0.2;
    CHECK(b.l6.rhs == doctest::Approx(rhs).epsilon(1e-14));
    CHECK(b.l6.rhs == doctest::Approx(3.3472).epsilon(1e-4));
    CHECK(b.l6.pass);
    // Model II has no such bounds.
    CHECK_FALSE(analytic_bound_checks(cos_sech(g, 0.2, 0.5), test::softening_model_ii(), make_force<double>({}), 0.5)
                    .l6.applicable);
  }

  TEST_CASE("load inequality sign") {
    const auto m = test::reference_model_i();
    const auto f = test::reference_force_i();
    const auto g = build_grid(20.0, 80, 32);
    // Below lambda = 1 both terms are nonpositive.
    const auto a = analytic_bound_checks(cos_sech(g, 10.0, 0.5), m, f, m.xi1);
    CHECK(a.lambda_inequality.lhs < 0.0);
    CHECK(a.lambda_inequality.pass);
    // Above lambda = 1 a small amplitude makes the quadratic term win.
    const auto b = analytic_bound_checks(cos_sech(g, 0.1, 1.5), m, f, m.xi1);
    CHECK(b.lambda_inequality.lhs > 0.0);
    CHECK_FALSE(b.lambda_inequality.pass);
    // Exact quadratures: int cos^2 = pi/2, int cos^4 = 3 pi / 8 over (-pi/2, pi/2).
    const double lhs = 0.5 * 0.01 * std::numbers::pi / 2 - 0.05 * 1e-4 * 3 * std::numbers::pi / 8;
    CHECK(b.lambda_inequality.lhs == doctest::Approx(lhs).epsilon(1e-3));
  }

  TEST_CASE("transversal profiles") {
    SUBCASE("mu = 0 gives the trivial state") {
      const auto p = limiting_profile(test::reference_model_i(), test::reference_force_i(), 0.2, 0.0, 32);
      CHECK(p.trivial);
      CHECK(p.U.cwiseAbs().maxCoeff() == 0.0);
      CHECK_THROWS_AS(limiting_profile(test::reference_model_i(), test::reference_force_i(), 0.0, 0.3, 32),
                      DomainError);
    }
    SUBCASE("linear law at lambda = 0 shoots cos(y)") {
      const auto s = shoot_transversal(test::linear_law(), make_force<double>({}), 0.0, 0.8, 32);
      REQUIRE(s.valid);
      CHECK(std::abs(s.end_value) <= 1e-8);
      CHECK(s.U[16] == doctest::Approx(0.8 * std::cos(std::numbers::pi / 4)).epsilon(1e-8));
    }
    SUBCASE("softening law has a state with negative front identity") {
      const auto m = test::softening_model_ii();
      const auto f = make_force<double>({});
      const auto p = limiting_profile(m, f, 0.1, 0.35, 64);
      CHECK_FALSE(p.trivial);
      CHECK(p.mu > 0.0);
      CHECK(std::abs(p.U[64]) == 0.0);
      CHECK(front_identity(p, m, f) < 0.0);
    }
    SUBCASE("front identity equals minus twice the transversal Hamiltonian on a solution") {
      const auto m = test::reference_model_i();
      const auto f = test::reference_force_i();
      const auto p = limiting_profile(m, f, 0.14, 1.1, 128);
      const double fi = front_identity(p, m, f), th = transversal_hamiltonian(p, m, f);
      CHECK(std::abs(fi + 2 * th) <= 1e-6 * (std::abs(fi) + std::abs(th)) + 1e-9);
    }
  }

  TEST_CASE("center profile comparison") {
    const auto g = build_grid(20.0, 80, 32);
    const auto z = SolutionField<double>::zeros(g, 0.2);
    const auto triv = limiting_profile(test::reference_model_i(), test::reference_force_i(), 0.2, 0.0, 32);
    CHECK(compare_center_profile(z, triv) == 0.0);
    const auto u = cos_sech(g, 0.5, 0.2);
    CHECK(compare_center_profile(u, triv) == doctest::Approx(1.0).epsilon(1e-14));
    const auto other = limiting_profile(test::reference_model_i(), test::reference_force_i(), 0.2, 0.0, 16);
    CHECK_THROWS_AS(compare_center_profile(u, other), DomainError);
  }
}
