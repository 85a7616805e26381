#pragma once

// Structural checks evaluated at a discrete equilibrium: the x-invariant
// Hamiltonian, the nodal sign pattern, level-set width and ellipticity margin,
// the a-priori bounds for Model I, and the x-independent limit state U(y).

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "apshear/constitutive.hpp"
#include "apshear/discretization.hpp"
#include "apshear/grid.hpp"

namespace apshear {

struct NodalFlags {
  bool ux_negative_interior = true;
  bool uy_negative_interior = true;
  bool uxx_negative_on_L = true;
  bool uxy_positive_on_T = true;
  bool uyy_negative_on_M = true;

  bool all() const {
    return ux_negative_interior && uy_negative_interior && uxx_negative_on_L && uxy_positive_on_T &&
           uyy_negative_on_M;
  }
};

struct BoundCheck {
  bool applicable = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

struct BoundReport {
  BoundCheck l6;                // |u_y(0,.)|_6^2 <= |c1 + b1 pi/2| pi^(1/3) / c2
  BoundCheck lambda_inequality; // (lambda-1)|u(0,.)|_2^2 + (b1/2)|u(0,.)|_4^4 <= 0, lhs holds the value
  BoundCheck gradient;          // |grad u|_0^2 <= 2 u(0,0)^2 / xi1 * max|b(u, lambda)|
};

struct ShapeMetrics {
  double amplitude = 0.0;
  double width_half = 0.0;
  double sup_grad_sq = 0.0;
  double e_min = 1.0;
  double e_min_x = 0.0, e_min_y = 0.0;
};

struct DiagnosticsRecord {
  double lambda = 0.0;
  double amplitude = 0.0;
  double width_half = 0.0;
  double sup_grad_sq = 0.0;
  double e_min = 1.0;
  double e_min_x = 0.0, e_min_y = 0.0;
  double H_max_dev = 0.0;
  double residual_norm = 0.0;
  NodalFlags nodal;
  BoundReport bounds;
  std::optional<double> front_gap;
};

template <typename Scalar>
struct TransversalProfile {
  Scalar lambda{};
  Scalar mu{};      // U(0)
  Scalar hy{};
  Vec<Scalar> U;    // on y_j = j hy, j = 0..Ny
  Vec<Scalar> Uy;
  bool trivial = false;
};

template <typename Scalar>
struct HamiltonianProfile {
  Vec<Scalar> H;  // one value per column x_i
  Scalar max_dev{};
};

namespace detail {

/// Composite trapezoid over [0, pi/2] doubled to the full interval by evenness.
template <typename Scalar, typename V>
Scalar trapezoid_full(const V& v, Scalar hy) {
  const auto n = v.size() - 1;
  Scalar s = (v[0] + v[n]) / Scalar(2);
  for (Eigen::Index j = 1; j < n; ++j) s += v[j];
  return Scalar(2) * hy * s;
}

template <typename Scalar>
Scalar node_ux(const SolutionField<Scalar>& f, int i, int j) {
  const auto& g = f.grid;
  if (i == 0) return Scalar(0);
  if (i == g.Nx) return (Scalar(3) * f.u(i, j) - Scalar(4) * f.u(i - 1, j) + f.u(i - 2, j)) / (Scalar(2) * g.hx);
  return (f.u(i + 1, j) - f.u(i - 1, j)) / (Scalar(2) * g.hx);
}

template <typename Scalar>
Scalar node_uy(const SolutionField<Scalar>& f, int i, int j) {
  const auto& g = f.grid;
  if (j == 0) return Scalar(0);
  if (j == g.Ny) return (Scalar(3) * f.u(i, j) - Scalar(4) * f.u(i, j - 1) + f.u(i, j - 2)) / (Scalar(2) * g.hy);
  return (f.u(i, j + 1) - f.u(i, j - 1)) / (Scalar(2) * g.hy);
}

}  // namespace detail

/// H(x) = int (W(|grad u|^2)/2 - W'(|grad u|^2) u_x^2 + B(u, lambda)) dy per grid column.
template <typename Scalar>
HamiltonianProfile<Scalar> hamiltonian_profile(const SolutionField<Scalar>& field,
                                               const ConstitutiveModel<Scalar>& model,
                                               const BodyForce<Scalar>& force) {
  const auto& g = field.grid;
  HamiltonianProfile<Scalar> out{Vec<Scalar>::Zero(g.Nx + 1), Scalar(0)};
  Vec<Scalar> integrand(g.Ny + 1);
  for (int i = 0; i <= g.Nx; ++i) {
    for (int j = 0; j <= g.Ny; ++j) {
      const Scalar ux = detail::node_ux(field, i, j);
      const Scalar uy = detail::node_uy(field, i, j);
      const auto e = evaluate_energy(model, ux * ux + uy * uy);
      integrand[j] = e.W / Scalar(2) - e.Wp * ux * ux + evaluate_body_force(force, field.u(i, j), field.lambda).Bint;
    }
    out.H[i] = detail::trapezoid_full(integrand, g.hy);
    out.max_dev = std::max(out.max_dev, std::abs(out.H[i]));
  }
  return out;
}

/// Strict signs of difference quotients; evenness supplies the values across x = 0 and y = 0.
template <typename Scalar>
NodalFlags nodal_check(const SolutionField<Scalar>& field) {
  const auto& g = field.grid;
  const auto& u = field.u;
  NodalFlags f;
  for (int j = 0; j < g.Ny; ++j)
    for (int i = 1; i < g.Nx; ++i)
      if (!(u(i + 1, j) - u(i - 1, j) < Scalar(0))) f.ux_negative_interior = false;
  for (int j = 1; j < g.Ny; ++j)
    for (int i = 0; i < g.Nx; ++i)
      if (!(u(i, j + 1) - u(i, j - 1) < Scalar(0))) f.uy_negative_interior = false;
  // x = 0 column: u_xx = 2 (u_1 - u_0) / hx^2 with the mirror node u_{-1} = u_1.
  for (int j = 0; j < g.Ny; ++j)
    if (!(u(1, j) - u(0, j) < Scalar(0))) f.uxx_negative_on_L = false;
  // y = pi/2 row: one-sided second-order u_y, centred in x.
  auto uy_top = [&](int i) { return Scalar(3) * u(i, g.Ny) - Scalar(4) * u(i, g.Ny - 1) + u(i, g.Ny - 2); };
  for (int i = 1; i < g.Nx; ++i)
    if (!(uy_top(i + 1) - uy_top(i - 1) > Scalar(0))) f.uxy_positive_on_T = false;
  // y = 0 row: u_yy = 2 (u_1 - u_0) / hy^2.
  for (int i = 0; i < g.Nx; ++i)
    if (!(u(i, 1) - u(i, 0) < Scalar(0))) f.uyy_negative_on_M = false;
  return f;
}

/// Amplitude, level-set width along y = 0 at height sigma u(0,0), and the gradient/margin extremes over flux samples.
template <typename Scalar>
ShapeMetrics shape_metrics(const SolutionField<Scalar>& field, const ConstitutiveModel<Scalar>& model,
                           Scalar sigma = Scalar(0.5)) {
  if (!(sigma > Scalar(0) && sigma < Scalar(1))) throw DomainError("width level sigma must lie in (0, 1)");
  const auto& g = field.grid;
  ShapeMetrics m;
  m.amplitude = static_cast<double>(field.u.maxCoeff());
  const Scalar peak = field.u(0, 0);
  if (peak > Scalar(0)) {
    const Scalar level = sigma * peak;
    Scalar xstar = g.L;
    for (int i = 1; i <= g.Nx; ++i) {
      if (field.u(i, 0) <= level) {
        const Scalar a = field.u(i - 1, 0), b = field.u(i, 0);
        xstar = g.x(i - 1) + (a - level) / (a - b) * g.hx;
        break;
      }
    }
    m.width_half = static_cast<double>(Scalar(2) * xstar);
  }
  Scalar qmax(0);
  Scalar emin = std::numeric_limits<Scalar>::infinity();
  detail::for_each_face(field, [&](const Face<Scalar>& f) {
    qmax = std::max(qmax, f.q);
    const Scalar e = evaluate_energy(model, f.q).margin;
    if (e < emin) {
      emin = e;
      m.e_min_x = static_cast<double>(f.x);
      m.e_min_y = static_cast<double>(f.y);
    }
  });
  m.sup_grad_sq = static_cast<double>(qmax);
  m.e_min = static_cast<double>(emin);
  return m;
}

/// The L^6 gradient bound, the load inequality behind the upper bound on lambda, and the
/// P-function gradient estimate, all on the x = 0 column.
template <typename Scalar>
BoundReport analytic_bound_checks(const SolutionField<Scalar>& field, const ConstitutiveModel<Scalar>& model,
                                  const BodyForce<Scalar>& force, Scalar xi1) {
  const auto& g = field.grid;
  BoundReport rep;
  if (model.kind != ModelKind::ModelI) return rep;

  const Scalar pi = std::numbers::pi_v<Scalar>;
  Vec<Scalar> uy6(g.Ny + 1), u2(g.Ny + 1), u4(g.Ny + 1);
  for (int j = 0; j <= g.Ny; ++j) {
    const Scalar uy = detail::node_uy(field, 0, j);
    const Scalar u = field.u(0, j);
    uy6[j] = std::pow(uy, 6);
    u2[j] = u * u;
    u4[j] = u * u * u * u;
  }
  if (model.c2() > Scalar(0)) {
    rep.l6.applicable = true;
    rep.l6.lhs = static_cast<double>(std::cbrt(detail::trapezoid_full(uy6, g.hy)));
    rep.l6.rhs = static_cast<double>(std::abs(model.c1() + force.b1() / Scalar(2) * pi) * std::cbrt(pi) / model.c2());
    rep.l6.pass = rep.l6.lhs <= rep.l6.rhs;
  }

  rep.lambda_inequality.applicable = true;
  rep.lambda_inequality.lhs =
      static_cast<double>((field.lambda - Scalar(1)) * detail::trapezoid_full(u2, g.hy) +
                          force.b1() / Scalar(2) * detail::trapezoid_full(u4, g.hy));
  rep.lambda_inequality.rhs = 0.0;
  rep.lambda_inequality.pass = rep.lambda_inequality.lhs <= 0.0;

  if (xi1 > Scalar(0)) {
    Scalar qmax(0);
    detail::for_each_face(field, [&](const Face<Scalar>& f) { qmax = std::max(qmax, f.q); });
    Scalar bmax(0);
    for (Eigen::Index k = 0; k < field.u.size(); ++k)
      bmax = std::max(bmax, std::abs(evaluate_body_force(force, field.u.data()[k], field.lambda).b));
    const Scalar peak = field.u(0, 0);
    rep.gradient.applicable = true;
    rep.gradient.lhs = static_cast<double>(qmax);
    rep.gradient.rhs = static_cast<double>(Scalar(2) * peak * peak / xi1 * bmax);
    rep.gradient.pass = rep.gradient.lhs <= rep.gradient.rhs;
  }
  return rep;
}

template <typename Scalar>
struct ShootResult {
  bool valid = false;   // false when the slope left the elliptic range
  Scalar end_value{};   // U(pi/2)
  Vec<Scalar> U, Uy;
};

/// Integrates (W'(U_y^2) U_y)_y = b(U, lambda) from y = 0 with U(0) = mu, U_y(0) = 0,
/// written as U' = p, p' = b(U) / margin(p^2). RK4 with `substeps` steps per grid cell.
template <typename Scalar>
ShootResult<Scalar> shoot_transversal(const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& force,
                                      Scalar lambda, Scalar mu, int Ny, int substeps = 8) {
  const Scalar hy = std::numbers::pi_v<Scalar> / Scalar(2) / Scalar(Ny);
  const Scalar h = hy / Scalar(substeps);
  const Scalar q1 = detail::ellipticity_limit(model);
  ShootResult<Scalar> out;
  out.U.resize(Ny + 1);
  out.Uy.resize(Ny + 1);
  Scalar U = mu, p(0);
  out.U[0] = U;
  out.Uy[0] = p;
  bool ok = true;
  auto rhs = [&](Scalar Uv, Scalar pv, Scalar& dU, Scalar& dp) {
    const Scalar q = pv * pv;
    if (!(q < q1)) {
      ok = false;
      dU = dp = Scalar(0);
      return;
    }
    const Scalar e = evaluate_energy(model, q).margin;
    if (!(e > Scalar(0))) {
      ok = false;
      dU = dp = Scalar(0);
      return;
    }
    dU = pv;
    dp = evaluate_body_force(force, Uv, lambda).b / e;
  };
  for (int j = 0; j < Ny && ok; ++j) {
    for (int s = 0; s < substeps && ok; ++s) {
      Scalar a1, b1, a2, b2, a3, b3, a4, b4;
      rhs(U, p, a1, b1);
      rhs(U + h / 2 * a1, p + h / 2 * b1, a2, b2);
      rhs(U + h / 2 * a2, p + h / 2 * b2, a3, b3);
      rhs(U + h * a3, p + h * b3, a4, b4);
      U += h / Scalar(6) * (a1 + Scalar(2) * a2 + Scalar(2) * a3 + a4);
      p += h / Scalar(6) * (b1 + Scalar(2) * b2 + Scalar(2) * b3 + b4);
      using std::isfinite;
      if (!isfinite(U) || !isfinite(p)) ok = false;
    }
    out.U[j + 1] = U;
    out.Uy[j + 1] = p;
  }
  out.valid = ok;
  out.end_value = U;
  return out;
}

/// Nontrivial even solution of the transversal equation with U(+-pi/2) = 0, the
/// root of the shooting map closest to mu_init.
template <typename Scalar>
TransversalProfile<Scalar> limiting_profile(const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& force,
                                            Scalar lambda, Scalar mu_init, int Ny, int substeps = 8) {
  if (!(lambda > Scalar(0))) throw DomainError("limiting profile needs lambda > 0");
  if (mu_init < Scalar(0)) throw DomainError("mu_init must be nonnegative");
  TransversalProfile<Scalar> prof;
  prof.lambda = lambda;
  prof.hy = std::numbers::pi_v<Scalar> / Scalar(2) / Scalar(Ny);
  if (mu_init == Scalar(0)) {
    prof.mu = Scalar(0);
    prof.U = Vec<Scalar>::Zero(Ny + 1);
    prof.Uy = Vec<Scalar>::Zero(Ny + 1);
    prof.trivial = true;
    return prof;
  }

  auto S = [&](Scalar mu) { return shoot_transversal(model, force, lambda, mu, Ny, substeps); };
  const Scalar tol = Scalar(1e-13);

  // Walk outward from mu_init on both sides; the first sign change found is the nearest root.
  const Scalar step = Scalar(0.02) * mu_init;
  std::optional<std::pair<Scalar, Scalar>> bracket;
  auto s0 = S(mu_init);
  if (s0.valid && std::abs(s0.end_value) <= tol) bracket = std::make_pair(mu_init, mu_init);
  ShootResult<Scalar> prev_up = s0, prev_dn = s0;
  Scalar mu_up = mu_init, mu_dn = mu_init;
  for (int k = 1; k <= 400 && !bracket; ++k) {
    const Scalar up = mu_init + Scalar(k) * step;
    auto su = S(up);
    if (su.valid && prev_up.valid && (su.end_value > 0) != (prev_up.end_value > 0)) bracket = std::make_pair(mu_up, up);
    prev_up = su;
    mu_up = up;
    const Scalar dn = mu_init - Scalar(k) * step;
    if (!bracket && dn > Scalar(0)) {
      auto sd = S(dn);
      if (sd.valid && prev_dn.valid && (sd.end_value > 0) != (prev_dn.end_value > 0))
        bracket = std::make_pair(dn, mu_dn);
      prev_dn = sd;
      mu_dn = dn;
    }
  }
  if (!bracket) throw DomainError("no nontrivial transversal state near mu_init");

  // Illinois regula falsi.
  Scalar a = bracket->first, b = bracket->second;
  ShootResult<Scalar> best = S(a);
  if (a != b) {
    Scalar fa = best.end_value, fb = S(b).end_value;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      const Scalar c = (a * fb - b * fa) / (fb - fa);
      best = S(c);
      const Scalar fc = best.end_value;
      if (std::abs(fc) <= tol || std::abs(b - a) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * b) {
        a = c;
        break;
      }
      if ((fc > 0) == (fb > 0)) {
        b = c;
        fb = fc;
        if (side == -1) fa /= 2;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb /= 2;
        side = 1;
      }
    }
    prof.mu = a;
    best = S(a);
    if (!best.valid || std::abs(best.end_value) > Scalar(1e-10)) throw DomainError("transversal shooting did not converge");
  } else {
    prof.mu = a;
  }
  prof.U = best.U;
  prof.Uy = best.Uy;
  prof.U[Ny] = Scalar(0);
  return prof;
}

/// int (W'(U_y^2) U_y^2 - W(U_y^2) + b(U) U - 2 B(U)) dy over the full interval.
template <typename Scalar>
Scalar front_identity(const TransversalProfile<Scalar>& prof, const ConstitutiveModel<Scalar>& model,
                      const BodyForce<Scalar>& force) {
  Vec<Scalar> v(prof.U.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const Scalar q = prof.Uy[j] * prof.Uy[j];
    const auto e = evaluate_energy(model, q);
    const auto b = evaluate_body_force(force, prof.U[j], prof.lambda);
    v[j] = e.Wp * q - e.W + b.b * prof.U[j] - Scalar(2) * b.Bint;
  }
  return detail::trapezoid_full(v, prof.hy);
}

/// int (W(U_y^2)/2 + B(U)) dy: the Hamiltonian of the x-independent extension of U.
template <typename Scalar>
Scalar transversal_hamiltonian(const TransversalProfile<Scalar>& prof, const ConstitutiveModel<Scalar>& model,
                               const BodyForce<Scalar>& force) {
  Vec<Scalar> v(prof.U.size());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = evaluate_energy(model, prof.Uy[j] * prof.Uy[j]).W / Scalar(2) +
           evaluate_body_force(force, prof.U[j], prof.lambda).Bint;
  return detail::trapezoid_full(v, prof.hy);
}

/// max_j |u(0, y_j) - U(y_j)| / max u.
template <typename Scalar>
Scalar compare_center_profile(const SolutionField<Scalar>& field, const TransversalProfile<Scalar>& prof) {
  const auto& g = field.grid;
  if (prof.U.size() != g.Ny + 1 || std::abs(prof.hy - g.hy) > Scalar(1e-12) * g.hy)
    throw DomainError("profile and field use different y-grids");
  Scalar gap(0);
  for (int j = 0; j <= g.Ny; ++j) gap = std::max(gap, std::abs(field.u(0, j) - prof.U[j]));
  const Scalar amp = field.u.maxCoeff();
  return amp > Scalar(0) ? gap / amp : gap;
}

/// Full record for one field; the gradient bound uses xi1 (ignored unless positive).
template <typename Scalar>
DiagnosticsRecord diagnose(const SolutionField<Scalar>& field, const ConstitutiveModel<Scalar>& model,
                           const BodyForce<Scalar>& force, Scalar xi1, Scalar sigma, double residual_norm) {
  DiagnosticsRecord d;
  d.lambda = static_cast<double>(field.lambda);
  const auto m = shape_metrics(field, model, sigma);
  d.amplitude = m.amplitude;
  d.width_half = m.width_half;
  d.sup_grad_sq = m.sup_grad_sq;
  d.e_min = m.e_min;
  d.e_min_x = m.e_min_x;
  d.e_min_y = m.e_min_y;
  d.H_max_dev = static_cast<double>(hamiltonian_profile(field, model, force).max_dev);
  d.residual_norm = residual_norm;
  d.nodal = nodal_check(field);
  d.bounds = analytic_bound_checks(field, model, force, xi1);
  return d;
}

}  // namespace apshear
