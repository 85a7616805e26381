#pragma once

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <vector>

#include "apshear/discretization.hpp"

namespace apshear {

struct NewtonSettings {
  double tol_residual = 1e-10;  // on max|R| / (1 + max|u|)
  int max_iterations = 25;
  double backtrack = 0.5;
  double min_step = 1.0 / 1024.0;
};

template <typename Scalar>
struct NewtonResult {
  SolutionField<Scalar> field;
  int iterations = 0;
  Scalar residual{};             // final scaled residual
  std::vector<Scalar> history;   // scaled residual before each step and at exit
};

/// Reference point, unit tangent and step of the pseudo-arclength normalization
///   theta <u - u*, t_u>_w + (1 - theta) (lambda - lambda*) t_lambda = ds.
template <typename Scalar>
struct ArclengthConstraint {
  SolutionField<Scalar> reference;
  Vec<Scalar> t_u;
  Scalar t_lambda{};
  Scalar ds{};
  Scalar theta = Scalar(0.9);
};

/// hx hy weighted discrete inner product.
template <typename Scalar, typename A, typename B>
Scalar weighted_dot(const StripGrid<Scalar>& g, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return g.hx * g.hy * a.dot(b);
}

/// theta |t_u|_w^2 + (1 - theta) t_lambda^2, the squared norm used for tangents and steps.
template <typename Scalar, typename A>
Scalar arclength_norm_sq(const StripGrid<Scalar>& g, const Eigen::MatrixBase<A>& t_u, Scalar t_lambda, Scalar theta) {
  return theta * weighted_dot(g, t_u, t_u) + (Scalar(1) - theta) * t_lambda * t_lambda;
}

template <typename Scalar>
Scalar scaled_residual(const Vec<Scalar>& r, const SolutionField<Scalar>& field) {
  return r.template lpNorm<Eigen::Infinity>() / (Scalar(1) + field.u.abs().maxCoeff());
}

namespace detail {

template <typename Scalar>
class LinearSolve {
 public:
  void factor(const SparseOperator<Scalar>& J) {
    lu_.analyzePattern(J);
    lu_.factorize(J);
    if (lu_.info() != Eigen::Success) throw SingularJacobian();
  }
  Vec<Scalar> solve(const Vec<Scalar>& rhs) {
    Vec<Scalar> x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !x.allFinite()) throw SingularJacobian();
    return x;
  }

 private:
  Eigen::SparseLU<SparseOperator<Scalar>, Eigen::COLAMDOrdering<int>> lu_;
};

template <typename Scalar>
void zero_clamped(const StripGrid<Scalar>& g, Vec<Scalar>& v) {
  for (int j = 0; j <= g.Ny; ++j) v[g.index(g.Nx, j)] = Scalar(0);
  for (int i = 0; i <= g.Nx; ++i) v[g.index(i, g.Ny)] = Scalar(0);
}

}  // namespace detail

/// Damped Newton for the equilibrium equations at the field's own lambda.
template <typename Scalar>
NewtonResult<Scalar> newton_fixed_lambda(const SolutionField<Scalar>& guess, const ConstitutiveModel<Scalar>& model,
                                         const BodyForce<Scalar>& force, const NewtonSettings& settings = {}) {
  if (!(guess.lambda > Scalar(0))) throw DomainError("load parameter lambda must be positive");
  check_field(guess);
  const auto& g = guess.grid;

  NewtonResult<Scalar> out{guess, 0, Scalar(0), {}};
  Vec<Scalar> r = assemble_residual(out.field, model, force);
  Scalar res = scaled_residual(r, out.field);
  out.history.push_back(res);
  detail::LinearSolve<Scalar> solver;

  while (res > Scalar(settings.tol_residual)) {
    if (out.iterations >= settings.max_iterations)
      throw ConvergenceError("Newton did not converge at fixed lambda", {out.history.begin(), out.history.end()});
    solver.factor(assemble_jacobian(out.field, model, force));
    Vec<Scalar> d = solver.solve(-r);
    detail::zero_clamped(g, d);

    const Scalar merit = r.norm();
    Scalar t(1);
    for (;;) {
      SolutionField<Scalar> trial = out.field;
      trial.flat() += t * d;
      bool ok = false;
      Vec<Scalar> r_trial;
      try {
        r_trial = assemble_residual(trial, model, force);
        ok = r_trial.allFinite() && r_trial.norm() < merit;
      } catch (const EllipticityExceeded&) {
      }
      if (ok) {
        out.field = std::move(trial);
        r = std::move(r_trial);
        break;
      }
      t *= Scalar(settings.backtrack);
      if (t < Scalar(settings.min_step))
        throw ConvergenceError("Newton line search exhausted", {out.history.begin(), out.history.end()});
    }
    ++out.iterations;
    res = scaled_residual(r, out.field);
    out.history.push_back(res);
  }
  out.residual = res;
  return out;
}

/// Newton on the bordered system [R(u, lambda); N(u, lambda)] by block elimination:
/// one factorization of dR/du and two solves per step.
template <typename Scalar>
NewtonResult<Scalar> newton_arclength(const SolutionField<Scalar>& guess, const ArclengthConstraint<Scalar>& c,
                                      const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& force,
                                      const NewtonSettings& settings = {}) {
  check_field(guess);
  const auto& g = guess.grid;
  if (!(c.reference.grid == g) || c.t_u.size() != g.nodes())
    throw DomainError("arclength constraint lives on a different grid");
  if (std::abs(arclength_norm_sq(g, c.t_u, c.t_lambda, c.theta) - Scalar(1)) > Scalar(1e-8))
    throw DomainError("arclength tangent is not normalized");

  const Scalar theta = c.theta;
  auto constraint = [&](const SolutionField<Scalar>& f) {
    return theta * weighted_dot(g, f.flat() - c.reference.flat(), c.t_u) +
           (Scalar(1) - theta) * (f.lambda - c.reference.lambda) * c.t_lambda - c.ds;
  };
  const Scalar n_tol = Scalar(settings.tol_residual) * (Scalar(1) + std::abs(c.ds));

  NewtonResult<Scalar> out{guess, 0, Scalar(0), {}};
  Vec<Scalar> r = assemble_residual(out.field, model, force);
  Scalar n = constraint(out.field);
  Scalar res = scaled_residual(r, out.field);
  out.history.push_back(res);
  detail::LinearSolve<Scalar> solver;

  while (res > Scalar(settings.tol_residual) || std::abs(n) > n_tol) {
    if (out.iterations >= settings.max_iterations)
      throw ConvergenceError("arclength corrector did not converge", {out.history.begin(), out.history.end()});
    solver.factor(assemble_jacobian(out.field, model, force));
    Vec<Scalar> z1 = solver.solve(-r);
    Vec<Scalar> z2 = solver.solve(-residual_lambda_derivative(out.field));
    detail::zero_clamped(g, z1);
    detail::zero_clamped(g, z2);
    const Scalar denom = (Scalar(1) - theta) * c.t_lambda + theta * weighted_dot(g, z2, c.t_u);
    if (!(std::abs(denom) > std::numeric_limits<Scalar>::epsilon())) throw SingularJacobian();
    const Scalar dl = (-n - theta * weighted_dot(g, z1, c.t_u)) / denom;
    const Vec<Scalar> du = z1 + dl * z2;

    const Scalar merit = std::sqrt(r.squaredNorm() + n * n);
    Scalar t(1);
    for (;;) {
      SolutionField<Scalar> trial = out.field;
      trial.flat() += t * du;
      trial.lambda += t * dl;
      bool ok = false;
      Vec<Scalar> r_trial;
      Scalar n_trial{};
      try {
        r_trial = assemble_residual(trial, model, force);
        n_trial = constraint(trial);
        ok = r_trial.allFinite() && std::sqrt(r_trial.squaredNorm() + n_trial * n_trial) < merit;
      } catch (const EllipticityExceeded&) {
      }
      if (ok) {
        out.field = std::move(trial);
        r = std::move(r_trial);
        n = n_trial;
        break;
      }
      t *= Scalar(settings.backtrack);
      if (t < Scalar(settings.min_step))
        throw ConvergenceError("step too large: arclength line search exhausted",
                               {out.history.begin(), out.history.end()});
    }
    ++out.iterations;
    res = scaled_residual(r, out.field);
    out.history.push_back(res);
  }
  out.residual = res;
  return out;
}

}  // namespace apshear
