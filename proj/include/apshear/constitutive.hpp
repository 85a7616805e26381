#pragma once

// Strain-energy laws W(q), q = |grad u|^2, and odd polynomial live loads b(z, lambda)
// for generalized neo-Hookean anti-plane shear, with the structural checks that
// separate the uniformly elliptic class (Model I) from the softening class (Model II).

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "apshear/errors.hpp"

namespace apshear {

enum class ModelKind { ModelI, ModelII };

inline const char* to_string(ModelKind k) { return k == ModelKind::ModelI ? "model_i" : "model_ii"; }

/// Polynomial strain energy W(q) = sum_{i>=1} C_i q^i with C_1 = 1.
template <typename Scalar>
struct ConstitutiveModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector coeffs;  // coeffs[0] = C_1 = 1, coeffs[1] = c_1, coeffs[2] = c_2, ...
  ModelKind kind = ModelKind::ModelI;
  Scalar q_probe_max = Scalar(10);
  Scalar xi1 = Scalar(0);       // sampled ellipticity floor (Model I)
  std::optional<Scalar> q1;     // ellipticity-loss shear (Model II)

  Scalar c1() const { return coeffs.size() > 1 ? coeffs[1] : Scalar(0); }
  Scalar c2() const { return coeffs.size() > 2 ? coeffs[2] : Scalar(0); }
};

template <typename Scalar>
ConstitutiveModel<Scalar> make_model(std::vector<Scalar> coeffs, ModelKind kind,
                                     Scalar q_probe_max = Scalar(10)) {
  if (coeffs.empty() || coeffs.front() != Scalar(1))
    throw DomainError("strain energy must be normalized with C_1 = 1");
  ConstitutiveModel<Scalar> m;
  m.coeffs = Eigen::Map<const typename ConstitutiveModel<Scalar>::Vector>(
      coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  m.kind = kind;
  m.q_probe_max = q_probe_max;
  return m;
}

/// Odd live load b(z, lambda) = (lambda - 1) z + b_1 z^3 + b_2 z^5 + b_3 z^7.
template <typename Scalar>
struct BodyForce {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector odd_coeffs;  // odd_coeffs[k] multiplies z^(2k+3)

  Scalar b1() const { return odd_coeffs.size() > 0 ? odd_coeffs[0] : Scalar(0); }
};

template <typename Scalar>
BodyForce<Scalar> make_force(std::vector<Scalar> odd_coeffs) {
  if (odd_coeffs.size() > 3) throw DomainError("body force limited to odd degree <= 7");
  BodyForce<Scalar> f;
  f.odd_coeffs = Eigen::Map<const typename BodyForce<Scalar>::Vector>(
      odd_coeffs.data(), static_cast<Eigen::Index>(odd_coeffs.size()));
  return f;
}

template <typename Scalar>
struct EnergyValues {
  Scalar W, Wp, Wpp, margin;
};

template <typename Scalar>
struct ForceValues {
  Scalar b, bz, Bint;
};

namespace detail {

template <typename Scalar>
void require_finite(Scalar v, const char* what) {
  using std::isfinite;
  if (!isfinite(v)) throw DomainError(std::string("non-finite ") + what);
}

}  // namespace detail

/// W, W', W'' and the ellipticity margin W'(q) + 2 q W''(q) by Horner's scheme.
template <typename Scalar>
EnergyValues<Scalar> evaluate_energy(const ConstitutiveModel<Scalar>& model, Scalar q) {
  detail::require_finite(q, "shear q");
  if (q < Scalar(0)) throw DomainError("shear q must be nonnegative");
  const auto n = model.coeffs.size();
  Scalar W(0), Wp(0), Wpp(0);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const Scalar i = Scalar(k + 1);
    const Scalar c = model.coeffs[k];
    W = W * q + c;
    Wp = Wp * q + i * c;
    if (k >= 1) Wpp = Wpp * q + i * (i - 1) * c;
  }
  W *= q;
  return {W, Wp, Wpp, Wp + Scalar(2) * q * Wpp};
}

/// d/dq of the ellipticity margin, 3 W'' + 2 q W'''.
template <typename Scalar>
Scalar margin_slope(const ConstitutiveModel<Scalar>& model, Scalar q) {
  Scalar Wpp(0), Wppp(0);
  for (Eigen::Index k = model.coeffs.size() - 1; k >= 1; --k) {
    const Scalar i = Scalar(k + 1);
    Wpp = Wpp * q + i * (i - 1) * model.coeffs[k];
    if (k >= 2) Wppp = Wppp * q + i * (i - 1) * (i - 2) * model.coeffs[k];
  }
  return Scalar(3) * Wpp + Scalar(2) * q * Wppp;
}

template <typename Scalar>
ForceValues<Scalar> evaluate_body_force(const BodyForce<Scalar>& f, Scalar z, Scalar lambda) {
  detail::require_finite(z, "displacement z");
  detail::require_finite(lambda, "load parameter");
  const Scalar z2 = z * z;
  Scalar b = (lambda - Scalar(1)) * z;
  Scalar bz = lambda - Scalar(1);
  Scalar B = (lambda - Scalar(1)) * z2 / Scalar(2);
  Scalar ze = z2;  // z^(2k+2)
  for (Eigen::Index k = 0; k < f.odd_coeffs.size(); ++k) {
    const Scalar p = Scalar(2 * k + 3);
    const Scalar c = f.odd_coeffs[k];
    b += c * ze * z;
    bz += p * c * ze;
    B += c * ze * z2 / (p + Scalar(1));
    ze *= z2;
  }
  return {b, bz, B};
}

/// Second z-derivative of b; independent of lambda.
template <typename Scalar>
Scalar body_force_curvature(const BodyForce<Scalar>& f, Scalar z) {
  Scalar out(0);
  for (Eigen::Index k = 0; k < f.odd_coeffs.size(); ++k) {
    const int p = 2 * static_cast<int>(k) + 3;
    out += Scalar(p * (p - 1)) * f.odd_coeffs[k] * std::pow(z, Scalar(p - 2));
  }
  return out;
}

/// Uniform samples on [0, hi] merged with Chebyshev-Lobatto points clustered at both ends.
template <typename Scalar>
std::vector<Scalar> probe_points(Scalar hi, int samples) {
  std::vector<Scalar> pts;
  pts.reserve(2 * static_cast<std::size_t>(samples) + 2);
  for (int k = 0; k <= samples; ++k) pts.push_back(hi * Scalar(k) / Scalar(samples));
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int k = 0; k <= samples; ++k)
    pts.push_back(hi * (Scalar(1) - std::cos(pi * Scalar(k) / Scalar(samples))) / Scalar(2));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// First positive root of the ellipticity margin, |margin(q1)| <= 1e-12.
template <typename Scalar>
Scalar find_ellipticity_root(const ConstitutiveModel<Scalar>& model, int samples = 2000) {
  if (model.kind != ModelKind::ModelII) throw DomainError("ellipticity root requested for a Model I law");
  const auto pts = probe_points(model.q_probe_max, samples);
  Scalar lo = pts.front();
  Scalar hi(-1);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (evaluate_energy(model, pts[k]).margin <= Scalar(0)) {
      lo = pts[k - 1];
      hi = pts[k];
      break;
    }
  }
  if (hi < Scalar(0))
    throw DomainError("not a Model II law: ellipticity margin never vanishes on [0, q_probe_max]");
  const Scalar tol(1e-12);
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (evaluate_energy(model, mid).margin > Scalar(0))
      lo = mid;
    else
      hi = mid;
  }
  Scalar q = (lo + hi) / Scalar(2);
  // Newton polish; keeps the bracket.
  for (int it = 0; it < 5; ++it) {
    const Scalar m = evaluate_energy(model, q).margin;
    if (std::abs(m) <= tol) break;
    const Scalar s = margin_slope(model, q);
    if (s == Scalar(0)) break;
    const Scalar next = q - m / s;
    if (next < lo || next > hi) break;
    q = next;
  }
  if (std::abs(evaluate_energy(model, q).margin) > tol)
    throw DomainError("ellipticity root did not reach tolerance");
  return q;
}

struct Violation {
  std::string condition;
  double location;  // q or z
  double value;
};

struct HypothesisReport {
  bool passed = true;
  std::vector<Violation> violations;
  double xi1 = 0.0;
  std::optional<double> q1;
};

/// Samples the structural hypotheses of the chosen model class. Violations are data.
template <typename Scalar>
HypothesisReport verify_hypotheses(const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& f,
                                   int samples) {
  if (samples < 100) throw DomainError("hypothesis verification needs at least 100 samples");
  HypothesisReport rep;
  auto flag = [&](const char* id, Scalar where, Scalar value) {
    rep.violations.push_back({id, static_cast<double>(where), static_cast<double>(value)});
  };

  if (model.coeffs.size() == 0 || model.coeffs[0] != Scalar(1)) flag("normalization", Scalar(0), Scalar(0));
  if (!(model.c1() < Scalar(0))) flag("c1_negative", Scalar(0), model.c1());
  if (!(f.b1() <= Scalar(0))) flag("b1_nonpositive", Scalar(0), f.b1());
  if (!(f.b1() + Scalar(2) * model.c1() < Scalar(0)))
    flag("homoclinic_regime", Scalar(0), f.b1() + Scalar(2) * model.c1());

  const auto qs = probe_points(model.q_probe_max, samples);
  const Scalar z_max = std::numbers::pi_v<Scalar> / Scalar(2) * std::sqrt(model.q_probe_max);
  const auto zs = probe_points(z_max, samples);

  // b(z) - (lambda - 1) z - b_1 z^3 >= 0 for z >= 0: only the tail beyond z^3 matters.
  for (Scalar z : zs) {
    Scalar tail(0);
    for (Eigen::Index k = 1; k < f.odd_coeffs.size(); ++k)
      tail += f.odd_coeffs[k] * std::pow(z, Scalar(2 * k + 3));
    if (tail < Scalar(0)) {
      flag("force_lower_bound", z, tail);
      break;
    }
  }

  if (model.kind == ModelKind::ModelI) {
    Scalar xi = std::numeric_limits<Scalar>::infinity();
    for (Scalar q : qs) {
      const Scalar m = evaluate_energy(model, q).margin;
      xi = std::min(xi, m);
      if (m <= Scalar(0)) flag("uniform_ellipticity", q, m);
    }
    rep.xi1 = static_cast<double>(xi);
    // W(q) >= q + c1 q^2 + c2 q^3, i.e. the quartic-and-higher tail is nonnegative.
    for (Scalar q : qs) {
      Scalar tail(0);
      for (Eigen::Index k = model.coeffs.size() - 1; k >= 3; --k) tail = (tail + model.coeffs[k]) * q;
      tail *= q * q * q;
      if (tail < Scalar(0)) {
        flag("energy_growth", q, tail);
        break;
      }
    }
  } else {
    try {
      const Scalar q1 = find_ellipticity_root(model);
      rep.q1 = static_cast<double>(q1);
      for (Scalar q : qs) {
        if (q > q1 * (Scalar(1) - Scalar(1e-6))) break;
        const Scalar m = evaluate_energy(model, q).margin;
        if (m <= Scalar(0)) flag("ellipticity_before_q1", q, m);
      }
    } catch (const DomainError&) {
      flag("ellipticity_loss", model.q_probe_max, evaluate_energy(model, model.q_probe_max).margin);
    }
    for (Scalar q : qs) {
      if (q == Scalar(0)) continue;
      const auto e = evaluate_energy(model, q);
      const Scalar d = q * e.Wp - e.W;
      if (!(d < Scalar(0))) {
        flag("shear_damping", q, d);
        break;
      }
    }
    for (Scalar z : zs) {
      const Scalar c = body_force_curvature(f, z);
      if (c > Scalar(0)) {
        flag("force_concavity", z, c);
        break;
      }
    }
  }
  rep.passed = rep.violations.empty();
  return rep;
}

/// Fills xi1 / q1 on the model from a passing report.
template <typename Scalar>
void apply_report(ConstitutiveModel<Scalar>& model, const HypothesisReport& rep) {
  model.xi1 = Scalar(rep.xi1);
  if (rep.q1) model.q1 = Scalar(*rep.q1);
}

}  // namespace apshear
