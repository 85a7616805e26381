#pragma once

// Leading-order centerline dynamics of small homoclinic equilibria:
//   v'' = eps^2 v + (3 (b1 + 2 c1) / 4) v^3,
// rescaled (x = X/eps, v = eps V) to the planar system V' = W, W' = V - k V^3.

#include <cmath>
#include <vector>

#include "apshear/constitutive.hpp"
#include "apshear/grid.hpp"

namespace apshear {

template <typename Scalar>
struct PlanarState {
  Scalar V{}, W{}, X{};
};

template <typename Scalar>
struct SeedParameters {
  Scalar epsilon{};
  Scalar alpha{};   // homoclinic amplitude, alpha^2 = 8 / (3 |b1 + 2 c1|)
  Scalar lambda{};  // = epsilon^2
};

/// Amplitude for which alpha * eps * sech(eps x) solves the cubic centerline ODE.
template <typename Scalar>
Scalar seed_amplitude(Scalar c1, Scalar b1) {
  const Scalar g = b1 + Scalar(2) * c1;
  if (!(g < Scalar(0))) throw DomainError("front regime (b1 + 2 c1 >= 0), no homoclinic seed");
  return std::sqrt(Scalar(8) / (Scalar(3) * std::abs(g)));
}

/// The constant 2 / sqrt(3 |b1 + 2 c1|); smaller than seed_amplitude by sqrt(2). Kept for run metadata.
template <typename Scalar>
Scalar stated_amplitude(Scalar c1, Scalar b1) {
  return Scalar(2) / std::sqrt(Scalar(3) * std::abs(b1 + Scalar(2) * c1));
}

template <typename Scalar>
SeedParameters<Scalar> make_seed_parameters(const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& f,
                                            Scalar epsilon) {
  if (!(epsilon > Scalar(0))) throw DomainError("seed epsilon must be positive");
  return {epsilon, seed_amplitude(model.c1(), f.b1()), epsilon * epsilon};
}

/// u = alpha eps sech(eps x) cos(y) at lambda = eps^2, clamped on the boundary.
template <typename Scalar>
SolutionField<Scalar> homoclinic_seed(const SeedParameters<Scalar>& p, const StripGrid<Scalar>& grid) {
  if (!(p.alpha > Scalar(0)) || !(p.epsilon > Scalar(0))) throw DomainError("invalid seed parameters");
  auto field = SolutionField<Scalar>::zeros(grid, p.lambda);
  for (int j = 0; j < grid.Ny; ++j) {
    const Scalar cy = std::cos(grid.y(j));
    for (int i = 0; i < grid.Nx; ++i)
      field.u(i, j) = p.alpha * p.epsilon / std::cosh(p.epsilon * grid.x(i)) * cy;
  }
  return field;
}

/// Planar vector field at leading order; the O(eps) remainder is not modelled.
template <typename Scalar>
PlanarState<Scalar> rhs_planar(const PlanarState<Scalar>& s, Scalar /*eps*/, Scalar k) {
  return {s.W, s.V - k * s.V * s.V * s.V, Scalar(1)};
}

template <typename Scalar>
PlanarState<Scalar> closed_form_orbit(Scalar X, Scalar k) {
  if (!(k > Scalar(0))) throw DomainError("planar coefficient k must be positive");
  const Scalar a = std::sqrt(Scalar(2) / k);
  const Scalar sech = Scalar(1) / std::cosh(X);
  return {a * sech, -a * sech * std::tanh(X), X};
}

/// W^2/2 - V^2/2 + k V^4/4; zero on the homoclinic orbit.
template <typename Scalar>
Scalar planar_first_integral(const PlanarState<Scalar>& s, Scalar k) {
  return s.W * s.W / Scalar(2) - s.V * s.V / Scalar(2) + k * s.V * s.V * s.V * s.V / Scalar(4);
}

/// Classical RK4 from s0.X to X_end; the step is shrunk slightly so the end point is hit exactly.
template <typename Scalar>
std::vector<PlanarState<Scalar>> integrate_planar(const PlanarState<Scalar>& s0, Scalar eps, Scalar k, Scalar X_end,
                                                  Scalar h) {
  if (!(h > Scalar(0))) throw DomainError("step h must be positive");
  const Scalar span = X_end - s0.X;
  if (std::abs(span) / h > Scalar(1e7)) throw DomainError("too many RK4 steps requested");
  const long n = std::max(1L, static_cast<long>(std::ceil(static_cast<double>(std::abs(span) / h) - 1e-9)));
  const Scalar dt = span / Scalar(n);

  std::vector<PlanarState<Scalar>> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back(s0);
  PlanarState<Scalar> s = s0;
  auto axpy = [](const PlanarState<Scalar>& a, Scalar t, const PlanarState<Scalar>& d) {
    return PlanarState<Scalar>{a.V + t * d.V, a.W + t * d.W, a.X + t};
  };
  for (long step = 0; step < n; ++step) {
    const auto k1 = rhs_planar(s, eps, k);
    const auto k2 = rhs_planar(axpy(s, dt / 2, k1), eps, k);
    const auto k3 = rhs_planar(axpy(s, dt / 2, k2), eps, k);
    const auto k4 = rhs_planar(axpy(s, dt, k3), eps, k);
    s.V += dt / Scalar(6) * (k1.V + Scalar(2) * k2.V + Scalar(2) * k3.V + k4.V);
    s.W += dt / Scalar(6) * (k1.W + Scalar(2) * k2.W + Scalar(2) * k3.W + k4.W);
    s.X = s0.X + Scalar(step + 1) * dt;
    if (!(std::hypot(s.V, s.W) <= Scalar(1e6)))
      throw DomainError("planar trajectory diverged (left the homoclinic neighbourhood)");
    out.push_back(s);
  }
  return out;
}

}  // namespace apshear
