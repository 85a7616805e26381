#pragma once

// Pseudo-arclength branch tracing from the small-amplitude homoclinic seed.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apshear/constitutive.hpp"
#include "apshear/diagnostics.hpp"
#include "apshear/newton.hpp"
#include "apshear/reduced_ode.hpp"

namespace apshear {

template <typename Scalar>
struct BranchPoint {
  SolutionField<Scalar> field;
  Scalar s{};
  DiagnosticsRecord diagnostics;
  int newton_iterations = 0;
  Scalar ds_next{};  // step size the tracer would try next from this point
};

struct ContinuationConfig {
  double ds_init = 0.05;
  double ds_min = 1e-4;
  double ds_max = 2.0;
  int max_steps = 200;
  double theta = 0.9;
  double margin_stop = 0.2;        // Model II: stop once e_min <= margin_stop
  double width_stop_factor = 5.0;  // Model I: stop once width >= factor * seed width
  double lambda_max = 1.0;
  NewtonSettings newton;
  int fast_iterations = 3;         // step doubles after at most this many corrector iterations
  double sigma = 0.5;
  double truncation_tol = 1e-6;    // |u(0.9 L, 0)| > tol * u(0,0) triggers a domain extension
  double extension_factor = 1.5;
  double L_max = 600.0;
  double lambda_floor = 1e-3;

  std::vector<std::string> problems() const {
    std::vector<std::string> p;
    if (!(ds_min > 0 && ds_min <= ds_init && ds_init <= ds_max)) p.push_back("need 0 < ds_min <= ds_init <= ds_max");
    if (max_steps < 0) p.push_back("max_steps must be >= 0");
    if (!(theta > 0 && theta < 1)) p.push_back("theta must lie in (0, 1)");
    if (!(margin_stop > 0 && margin_stop < 1)) p.push_back("margin_stop must lie in (0, 1)");
    if (!(width_stop_factor > 1)) p.push_back("width_stop_factor must exceed 1");
    if (!(lambda_max > 0)) p.push_back("lambda_max must be positive");
    if (!(sigma > 0 && sigma < 1)) p.push_back("sigma must lie in (0, 1)");
    if (!(newton.tol_residual > 0)) p.push_back("newton tolerance must be positive");
    if (newton.max_iterations < 1) p.push_back("newton max_iterations must be >= 1");
    if (!(truncation_tol > 0)) p.push_back("truncation_tol must be positive");
    if (!(extension_factor > 1)) p.push_back("extension_factor must exceed 1");
    if (!(lambda_floor > 0)) p.push_back("lambda_floor must be positive");
    return p;
  }
};

enum class Termination { margin_stop, width_stop, lambda_out_of_bounds, max_steps, ds_underflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::margin_stop: return "margin_stop";
    case Termination::width_stop: return "width_stop";
    case Termination::lambda_out_of_bounds: return "lambda_out_of_bounds";
    case Termination::max_steps: return "max_steps";
    case Termination::ds_underflow: return "ds_underflow";
  }
  return "unknown";
}

struct BranchEvent {
  enum class Kind { corrector_failure, nodal_rejection, domain_extension };
  Kind kind;
  int step;  // index of the point being attempted
  double ds;
  std::string detail;
};

inline const char* to_string(BranchEvent::Kind k) {
  switch (k) {
    case BranchEvent::Kind::corrector_failure: return "corrector_failure";
    case BranchEvent::Kind::nodal_rejection: return "nodal_rejection";
    case BranchEvent::Kind::domain_extension: return "domain_extension";
  }
  return "unknown";
}

template <typename Scalar>
struct Branch {
  std::vector<BranchPoint<Scalar>> points;
  Termination termination = Termination::max_steps;
  std::vector<BranchEvent> events;
  Scalar seed_width{};

  int count(BranchEvent::Kind k, int from_step = 0) const {
    int n = 0;
    for (const auto& e : events) n += e.kind == k && e.step >= from_step;
    return n;
  }
};

template <typename Scalar>
struct Tangent {
  Vec<Scalar> t_u;
  Scalar t_lambda{};
};

template <typename Scalar>
Tangent<Scalar> lambda_tangent(const StripGrid<Scalar>& g, Scalar theta) {
  return {Vec<Scalar>::Zero(g.nodes()), Scalar(1) / std::sqrt(Scalar(1) - theta)};
}

/// Unit secant through two points on the same grid; a zero secant falls back to the pure lambda direction.
template <typename Scalar>
Tangent<Scalar> secant_tangent(const SolutionField<Scalar>& prev, const SolutionField<Scalar>& last, Scalar theta) {
  if (!(prev.grid == last.grid)) throw DomainError("secant needs both points on one grid");
  Tangent<Scalar> t{last.flat() - prev.flat(), last.lambda - prev.lambda};
  const Scalar n2 = arclength_norm_sq(last.grid, t.t_u, t.t_lambda, theta);
  if (!(n2 > Scalar(0))) return lambda_tangent(last.grid, theta);
  const Scalar n = std::sqrt(n2);
  t.t_u /= n;
  t.t_lambda /= n;
  return t;
}

/// Derivative of the seed family in epsilon, by the difference of the seeds at eps and 1.1 eps.
template <typename Scalar>
Tangent<Scalar> seed_tangent(const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& force,
                             const StripGrid<Scalar>& g, Scalar eps, Scalar theta) {
  const auto a = homoclinic_seed(make_seed_parameters(model, force, eps), g);
  const auto b = homoclinic_seed(make_seed_parameters(model, force, Scalar(1.1) * eps), g);
  return secant_tangent(a, b, theta);
}

/// Euler predictor along the tangent.
template <typename Scalar>
SolutionField<Scalar> predict(const SolutionField<Scalar>& last, const Tangent<Scalar>& t, Scalar ds) {
  SolutionField<Scalar> guess = last;
  guess.flat() += ds * t.t_u;
  guess.lambda += ds * t.t_lambda;
  guess.clamp();
  return guess;
}

template <typename Scalar>
BranchPoint<Scalar> make_branch_point(SolutionField<Scalar> field, Scalar s, int iterations, Scalar residual,
                                      Scalar ds_next, const ConstitutiveModel<Scalar>& model,
                                      const BodyForce<Scalar>& force, const ContinuationConfig& cfg) {
  BranchPoint<Scalar> p{std::move(field), s, {}, iterations, ds_next};
  p.diagnostics = diagnose(p.field, model, force, model.xi1, Scalar(cfg.sigma), static_cast<double>(residual));
  return p;
}

template <typename Scalar>
using PointCallback = std::function<void(const BranchPoint<Scalar>&)>;

namespace detail {

template <typename Scalar>
bool truncation_pressure(const SolutionField<Scalar>& f, double tol) {
  const auto& g = f.grid;
  const int i = static_cast<int>(std::lround(0.9 * g.Nx));
  return std::abs(f.u(i, 0)) > Scalar(tol) * std::abs(f.u(0, 0));
}

template <typename Scalar>
std::optional<Termination> stop_reason(const BranchPoint<Scalar>& p, const ConstitutiveModel<Scalar>& model,
                                       const ContinuationConfig& cfg, Scalar seed_width) {
  if (model.kind == ModelKind::ModelII && p.diagnostics.e_min <= cfg.margin_stop) return Termination::margin_stop;
  if (model.kind == ModelKind::ModelI && p.diagnostics.width_half >= cfg.width_stop_factor * seed_width)
    return Termination::width_stop;
  return std::nullopt;
}

/// Continues `branch` whose last two points (or the last point and `first_tangent`) define the secant.
template <typename Scalar>
void trace(Branch<Scalar>& branch, std::optional<Tangent<Scalar>> first_tangent, const ContinuationConfig& cfg,
           const ConstitutiveModel<Scalar>& model, const BodyForce<Scalar>& force, const PointCallback<Scalar>& on_point,
           int step_offset = 0) {
  const Scalar theta(cfg.theta);
  SolutionField<Scalar> prev_field = branch.points.size() > 1 ? branch.points[branch.points.size() - 2].field
                                                               : branch.points.back().field;
  const auto& last_grid = branch.points.back().field.grid;
  if (prev_field.grid.L < last_grid.L) prev_field = extend_domain(prev_field, last_grid.L, Scalar(cfg.lambda_floor));
  Scalar ds = branch.points.back().ds_next;

  for (;;) {
    auto& last = branch.points.back();
    const int step = step_offset + static_cast<int>(branch.points.size());
    if (step > cfg.max_steps) {
      branch.termination = Termination::max_steps;
      return;
    }
    const Tangent<Scalar> t = first_tangent ? *first_tangent : secant_tangent(prev_field, last.field, theta);

    std::optional<NewtonResult<Scalar>> sol;
    while (!sol) {
      if (ds < Scalar(cfg.ds_min)) {
        branch.termination = Termination::ds_underflow;
        return;
      }
      try {
        ArclengthConstraint<Scalar> c{last.field, t.t_u, t.t_lambda, ds, theta};
        auto r = newton_arclength(predict(last.field, t, ds), c, model, force, cfg.newton);
        if (!(nodal_check(r.field).all())) {
          branch.events.push_back({BranchEvent::Kind::nodal_rejection, step, static_cast<double>(ds), ""});
          ds /= 2;
          continue;
        }
        sol = std::move(r);
      } catch (const Error& e) {
        branch.events.push_back({BranchEvent::Kind::corrector_failure, step, static_cast<double>(ds), e.what()});
        ds /= 2;
      }
    }

    if (!(sol->field.lambda > Scalar(0)) || !(sol->field.lambda < Scalar(cfg.lambda_max))) {
      branch.termination = Termination::lambda_out_of_bounds;
      return;
    }

    const Scalar ds_next = sol->iterations <= cfg.fast_iterations ? std::min(Scalar(2) * ds, Scalar(cfg.ds_max)) : ds;
    prev_field = last.field;
    branch.points.push_back(make_branch_point(std::move(sol->field), last.s + ds, sol->iterations, sol->residual,
                                              ds_next, model, force, cfg));
    first_tangent.reset();
    auto& added = branch.points.back();
    ds = ds_next;
    if (on_point) on_point(added);

    if (auto why = stop_reason(added, model, cfg, branch.seed_width)) {
      branch.termination = *why;
      return;
    }

    if (truncation_pressure(added.field, cfg.truncation_tol) && added.field.grid.L < Scalar(cfg.L_max)) {
      const Scalar L_new = std::min(added.field.grid.L * Scalar(cfg.extension_factor), Scalar(cfg.L_max));
      auto ext = extend_domain(added.field, L_new, Scalar(cfg.lambda_floor));
      prev_field = extend_domain(prev_field, L_new, Scalar(cfg.lambda_floor));
      try {
        auto r = newton_fixed_lambda(ext, model, force, cfg.newton);
        ext = std::move(r.field);
      } catch (const Error&) {
        // keep the extrapolated tail; the next corrector repairs it
      }
      added.field = std::move(ext);
      branch.events.push_back({BranchEvent::Kind::domain_extension, step, static_cast<double>(ds),
                               "L -> " + std::to_string(static_cast<double>(added.field.grid.L))});
    }
  }
}

}  // namespace detail

/// Converges the seed at lambda = eps^2, then steps along the branch with lambda initially increasing.
template <typename Scalar>
Branch<Scalar> run_branch(const ContinuationConfig& cfg, const ConstitutiveModel<Scalar>& model_in,
                          const BodyForce<Scalar>& force, const StripGrid<Scalar>& grid, Scalar seed_epsilon,
                          const PointCallback<Scalar>& on_point = {}) {
  if (auto p = cfg.problems(); !p.empty()) throw ValidationError(p);
  const auto rep = verify_hypotheses(model_in, force, 2000);
  if (!rep.passed) {
    std::vector<std::string> v;
    for (const auto& x : rep.violations) v.push_back("hypothesis violated: " + x.condition);
    throw ValidationError(v);
  }
  // A caller-supplied xi1 (already checked against the sampled floor) takes precedence.
  ConstitutiveModel<Scalar> model = model_in;
  if (!(model.xi1 > Scalar(0))) model.xi1 = Scalar(rep.xi1);
  if (!model.q1 && rep.q1) model.q1 = Scalar(*rep.q1);

  const auto seed = homoclinic_seed(make_seed_parameters(model, force, seed_epsilon), grid);
  auto r = newton_fixed_lambda(seed, model, force, cfg.newton);
  Branch<Scalar> branch;
  branch.points.push_back(
      make_branch_point(std::move(r.field), Scalar(0), r.iterations, r.residual, Scalar(cfg.ds_init), model, force, cfg));
  branch.seed_width = Scalar(branch.points.front().diagnostics.width_half);
  if (on_point) on_point(branch.points.front());
  if (cfg.max_steps == 0) {
    branch.termination = Termination::max_steps;
    return branch;
  }
  detail::trace(branch, std::optional{seed_tangent(model, force, grid, seed_epsilon, Scalar(cfg.theta))}, cfg, model,
                force, on_point);
  return branch;
}

/// Restarts from two saved consecutive points; the continuation reproduces the original run.
/// `last_index` is the index of `last` in the original branch, so step counting and events line up.
/// The returned branch starts at `last`.
template <typename Scalar>
Branch<Scalar> resume_branch(const ContinuationConfig& cfg, const ConstitutiveModel<Scalar>& model,
                             const BodyForce<Scalar>& force, const BranchPoint<Scalar>& prev,
                             const BranchPoint<Scalar>& last, Scalar seed_width, int last_index,
                             const PointCallback<Scalar>& on_point = {}) {
  if (auto p = cfg.problems(); !p.empty()) throw ValidationError(p);
  if (last_index < 1) throw DomainError("resume needs a point with a predecessor");
  Branch<Scalar> branch;
  branch.seed_width = seed_width;
  branch.points = {prev, last};
  detail::trace(branch, std::optional<Tangent<Scalar>>{}, cfg, model, force, on_point, last_index - 1);
  branch.points.erase(branch.points.begin());
  return branch;
}

}  // namespace apshear
