#pragma once

// Conservative finite differences for
//   div(W'(|grad u|^2) grad u) - b(u, lambda) = 0
// on the quarter strip. Fluxes live on cell faces; the tangential derivative on a
// face is the mean of the two adjacent cell-centred quotients, which keeps the
// stencil at 3x3 nodes. Reflection ghosts implement evenness in x and y.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <limits>
#include <vector>

#include "apshear/constitutive.hpp"
#include "apshear/grid.hpp"

namespace apshear {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using SparseOperator = Eigen::SparseMatrix<Scalar>;

/// One flux sample: position, normal and tangential difference quotients, |grad u|^2.
template <typename Scalar>
struct Face {
  bool x_normal;
  int ai, aj;  // lower node along the normal
  int bi, bj;  // upper node along the normal
  Scalar x, y;
  Scalar normal, tangent, q;
  Scalar hn, ht;
  // Nodes entering the tangential quotient, with their signs (before the 1/(4 ht) factor).
  std::array<std::array<int, 2>, 4> tan_nodes;
  std::array<Scalar, 4> tan_sign;
};

namespace detail {

inline int reflect(int k) { return k < 0 ? -k : k; }

/// Visits every face touching a free node: x-faces (i+1/2, j) and y-faces (i, j+1/2)
/// for 0 <= i < Nx, 0 <= j < Ny. Faces across the symmetry lines are mirror images
/// of these and are not visited.
template <typename Scalar, typename Visitor>
void for_each_face(const SolutionField<Scalar>& field, Visitor&& visit) {
  const auto& g = field.grid;
  const auto& u = field.u;
  auto at = [&](int i, int j) { return u(reflect(i), reflect(j)); };
  const Scalar quarter_hy = Scalar(4) * g.hy;
  const Scalar quarter_hx = Scalar(4) * g.hx;

  for (int j = 0; j < g.Ny; ++j) {
    for (int i = 0; i < g.Nx; ++i) {
      Face<Scalar> f;
      f.x_normal = true;
      f.ai = i, f.aj = j, f.bi = i + 1, f.bj = j;
      f.x = g.x(i) + g.hx / Scalar(2);
      f.y = g.y(j);
      f.hn = g.hx;
      f.ht = g.hy;
      f.normal = (at(i + 1, j) - at(i, j)) / g.hx;
      f.tan_nodes = {{{i, j + 1}, {i + 1, j + 1}, {i, j - 1}, {i + 1, j - 1}}};
      f.tan_sign = {Scalar(1), Scalar(1), Scalar(-1), Scalar(-1)};
      f.tangent = (at(i, j + 1) + at(i + 1, j + 1) - at(i, j - 1) - at(i + 1, j - 1)) / quarter_hy;
      f.q = f.normal * f.normal + f.tangent * f.tangent;
      visit(f);
    }
  }
  for (int j = 0; j < g.Ny; ++j) {
    for (int i = 0; i < g.Nx; ++i) {
      Face<Scalar> f;
      f.x_normal = false;
      f.ai = i, f.aj = j, f.bi = i, f.bj = j + 1;
      f.x = g.x(i);
      f.y = g.y(j) + g.hy / Scalar(2);
      f.hn = g.hy;
      f.ht = g.hx;
      f.normal = (at(i, j + 1) - at(i, j)) / g.hy;
      f.tan_nodes = {{{i + 1, j}, {i + 1, j + 1}, {i - 1, j}, {i - 1, j + 1}}};
      f.tan_sign = {Scalar(1), Scalar(1), Scalar(-1), Scalar(-1)};
      f.tangent = (at(i + 1, j) + at(i + 1, j + 1) - at(i - 1, j) - at(i - 1, j + 1)) / quarter_hx;
      f.q = f.normal * f.normal + f.tangent * f.tangent;
      visit(f);
    }
  }
}

template <typename Scalar>
Scalar ellipticity_limit(const ConstitutiveModel<Scalar>& model) {
  if (model.kind != ModelKind::ModelII) return std::numeric_limits<Scalar>::infinity();
  return model.q1 ? *model.q1 : find_ellipticity_root(model);
}

template <typename Scalar>
void guard(const Face<Scalar>& f, Scalar q1) {
  if (f.q >= q1)
    throw EllipticityExceeded(static_cast<double>(f.x), static_cast<double>(f.y), static_cast<double>(f.q),
                              static_cast<double>(q1));
}

/// Weight of a face flux in the balance of its lower node: the mirrored face on the
/// symmetry line carries the opposite flux, doubling the contribution.
template <typename Scalar>
Scalar lower_weight(const Face<Scalar>& f) {
  const bool on_mirror = f.x_normal ? f.ai == 0 : f.aj == 0;
  return on_mirror ? Scalar(2) : Scalar(1);
}

}  // namespace detail

/// Nonlinear residual; clamped rows hold u itself (identically zero on valid fields).
template <typename Scalar>
Vec<Scalar> assemble_residual(const SolutionField<Scalar>& field, const ConstitutiveModel<Scalar>& model,
                              const BodyForce<Scalar>& force) {
  const auto& g = field.grid;
  const Scalar q1 = detail::ellipticity_limit(model);
  Vec<Scalar> r = Vec<Scalar>::Zero(g.nodes());

  detail::for_each_face(field, [&](const Face<Scalar>& f) {
    detail::guard(f, q1);
    const Scalar flux = evaluate_energy(model, f.q).Wp * f.normal / f.hn;
    r[g.index(f.ai, f.aj)] += detail::lower_weight(f) * flux;
    if (!g.clamped(f.bi, f.bj)) r[g.index(f.bi, f.bj)] -= flux;
  });

  for (int j = 0; j <= g.Ny; ++j)
    for (int i = 0; i <= g.Nx; ++i) {
      const auto k = g.index(i, j);
      if (g.clamped(i, j))
        r[k] = field.u(i, j);
      else
        r[k] -= evaluate_body_force(force, field.u(i, j), field.lambda).b;
    }
  return r;
}

/// Exact derivative of assemble_residual with respect to the nodal values.
template <typename Scalar>
SparseOperator<Scalar> assemble_jacobian(const SolutionField<Scalar>& field, const ConstitutiveModel<Scalar>& model,
                                         const BodyForce<Scalar>& force) {
  const auto& g = field.grid;
  const Scalar q1 = detail::ellipticity_limit(model);
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(g.nodes()) * 26);

  detail::for_each_face(field, [&](const Face<Scalar>& f) {
    detail::guard(f, q1);
    const auto e = evaluate_energy(model, f.q);
    // flux = W'(n^2 + t^2) n
    const Scalar d_normal = (e.Wp + Scalar(2) * e.Wpp * f.normal * f.normal) / f.hn;
    const Scalar d_tangent = Scalar(2) * e.Wpp * f.normal * f.tangent;

    std::array<std::pair<Eigen::Index, Scalar>, 6> terms;
    terms[0] = {g.index(f.bi, f.bj), d_normal / f.hn};
    terms[1] = {g.index(detail::reflect(f.ai), detail::reflect(f.aj)), -d_normal / f.hn};
    for (int k = 0; k < 4; ++k) {
      const auto [ti, tj] = f.tan_nodes[k];
      terms[2 + k] = {g.index(detail::reflect(ti), detail::reflect(tj)),
                      d_tangent * f.tan_sign[k] / (Scalar(4) * f.ht) / f.hn};
    }
    const auto row_a = g.index(f.ai, f.aj);
    const Scalar wa = detail::lower_weight(f);
    const bool b_free = !g.clamped(f.bi, f.bj);
    const auto row_b = g.index(f.bi, f.bj);
    for (const auto& [col, v] : terms) {
      trip.emplace_back(row_a, col, wa * v);
      if (b_free) trip.emplace_back(row_b, col, -v);
    }
  });

  for (int j = 0; j <= g.Ny; ++j)
    for (int i = 0; i <= g.Nx; ++i) {
      const auto k = g.index(i, j);
      if (g.clamped(i, j))
        trip.emplace_back(k, k, Scalar(1));
      else
        trip.emplace_back(k, k, -evaluate_body_force(force, field.u(i, j), field.lambda).bz);
    }

  SparseOperator<Scalar> J(g.nodes(), g.nodes());
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

/// d(residual)/d(lambda) = -d b/d lambda = -u on free nodes.
template <typename Scalar>
Vec<Scalar> residual_lambda_derivative(const SolutionField<Scalar>& field) {
  Vec<Scalar> d = -field.flat();
  const auto& g = field.grid;
  for (int j = 0; j <= g.Ny; ++j) d[g.index(g.Nx, j)] = Scalar(0);
  for (int i = 0; i <= g.Nx; ++i) d[g.index(i, g.Ny)] = Scalar(0);
  return d;
}

template <typename Scalar>
struct FaceSample {
  Scalar x, y, q;
};

/// |grad u|^2 at every flux sample, in visiting order.
template <typename Scalar>
std::vector<FaceSample<Scalar>> face_samples(const SolutionField<Scalar>& field) {
  std::vector<FaceSample<Scalar>> out;
  out.reserve(2 * static_cast<std::size_t>(field.grid.Nx) * field.grid.Ny);
  detail::for_each_face(field, [&](const Face<Scalar>& f) { out.push_back({f.x, f.y, f.q}); });
  return out;
}

}  // namespace apshear
