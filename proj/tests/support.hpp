#pragma once

#include <random>

#include "apshear/continuation.hpp"

namespace test {

using namespace apshear;

/// W = q - 0.3 q^2 + 0.2 q^3, b = (lambda - 1) z - 0.1 z^3.
inline ConstitutiveModel<double> reference_model_i() {
  auto m = make_model<double>({1.0, -0.3, 0.2}, ModelKind::ModelI);
  apply_report(m, verify_hypotheses(m, make_force<double>({-0.1}), 2000));
  return m;
}
inline BodyForce<double> reference_force_i() { return make_force<double>({-0.1}); }

/// W = q - 0.5 q^2, b = (lambda - 1) z.
inline ConstitutiveModel<double> softening_model_ii() {
  auto m = make_model<double>({1.0, -0.5}, ModelKind::ModelII);
  apply_report(m, verify_hypotheses(m, make_force<double>({}), 2000));
  return m;
}

inline ConstitutiveModel<double> linear_law() { return make_model<double>({1.0}, ModelKind::ModelI); }

/// Smooth even field with random mode amplitudes, clamped.
inline SolutionField<double> random_smooth_field(const StripGrid<double>& g, double lambda, std::mt19937& rng,
                                                 double scale = 0.3) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double a = scale * (1.0 + 0.5 * U(rng)), b = 0.3 * U(rng), c = 0.2 * U(rng);
  const double w = 0.5 + 0.3 * U(rng);
  auto f = SolutionField<double>::zeros(g, lambda);
  for (int j = 0; j <= g.Ny; ++j)
    for (int i = 0; i <= g.Nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      f.u(i, j) = a * std::cos(y) / std::cosh(w * x) * (1.0 + b * std::cos(2 * y) + c * std::cos(0.3 * x));
    }
  f.clamp();
  return f;
}

}  // namespace test
