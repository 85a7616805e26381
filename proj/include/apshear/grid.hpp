#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apshear/errors.hpp"

namespace apshear {

/// Uniform tensor grid on the quarter strip [0, L] x [0, pi/2].
///
/// The reduced domain stands in for the full strip R x (-pi/2, pi/2) through evenness
/// in x and y: the faces x = 0 and y = 0 are reflection lines, x = L and y = pi/2 are
/// clamped.
template <typename Scalar>
struct StripGrid {
  Scalar L{};
  int Nx = 0, Ny = 0;
  Scalar hx{}, hy{};

  Scalar x(int i) const { return i == Nx ? L : Scalar(i) * hx; }
  Scalar y(int j) const { return j == Ny ? std::numbers::pi_v<Scalar> / Scalar(2) : Scalar(j) * hy; }

  Eigen::Index nodes() const { return Eigen::Index(Nx + 1) * Eigen::Index(Ny + 1); }
  /// Column-major flat index, matching the storage of SolutionField::u.
  Eigen::Index index(int i, int j) const { return Eigen::Index(i) + Eigen::Index(Nx + 1) * j; }
  bool clamped(int i, int j) const { return i == Nx || j == Ny; }

  bool operator==(const StripGrid&) const = default;
};

template <typename Scalar>
StripGrid<Scalar> build_grid(Scalar L, int Nx, int Ny) {
  using std::isfinite;
  if (!(L > Scalar(0)) || !isfinite(L)) throw DomainError("grid half-length L must be positive");
  if (Nx < 16 || Ny < 16) throw DomainError("grid needs Nx, Ny >= 16");
  StripGrid<Scalar> g;
  g.L = L;
  g.Nx = Nx;
  g.Ny = Ny;
  g.hx = L / Scalar(Nx);
  g.hy = std::numbers::pi_v<Scalar> / Scalar(2) / Scalar(Ny);
  return g;
}

/// Nodal displacement on a StripGrid together with the load parameter.
template <typename Scalar>
struct SolutionField {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  StripGrid<Scalar> grid;
  Array u;  // (Nx + 1) x (Ny + 1)
  Scalar lambda{};

  static SolutionField zeros(const StripGrid<Scalar>& g, Scalar lambda) {
    return {g, Array::Zero(g.Nx + 1, g.Ny + 1), lambda};
  }

  auto flat() { return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(u.data(), u.size()); }
  auto flat() const { return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(u.data(), u.size()); }

  /// Zeros the clamped row y = pi/2 and column x = L.
  void clamp() {
    u.row(grid.Nx).setZero();
    u.col(grid.Ny).setZero();
  }
};

template <typename Scalar>
void check_field(const SolutionField<Scalar>& f) {
  if (f.u.rows() != f.grid.Nx + 1 || f.u.cols() != f.grid.Ny + 1)
    throw DomainError("field shape does not match its grid");
  if (!f.u.allFinite()) throw DomainError("field contains non-finite values");
  if ((f.u.row(f.grid.Nx) != Scalar(0)).any() || (f.u.col(f.grid.Ny) != Scalar(0)).any())
    throw DomainError("field violates the clamped boundary condition");
}

/// Grows the truncation length keeping hx. Nodes at and beyond the old clamp are filled
/// from the last interior column with an exponential tail of rate sqrt(max(lambda, floor)).
template <typename Scalar>
SolutionField<Scalar> extend_domain(const SolutionField<Scalar>& field, Scalar L_new,
                                    Scalar lambda_floor = Scalar(1e-3)) {
  const auto& g = field.grid;
  if (!(L_new > g.L)) throw DomainError("extend_domain needs L_new > L");
  const int Nx_new = static_cast<int>(std::lround(static_cast<double>(L_new / g.hx)));
  if (Nx_new <= g.Nx) throw DomainError("extension shorter than one cell");
  auto grid = build_grid(Scalar(Nx_new) * g.hx, Nx_new, g.Ny);
  grid.hx = g.hx;

  SolutionField<Scalar> out = SolutionField<Scalar>::zeros(grid, field.lambda);
  out.u.topRows(g.Nx) = field.u.topRows(g.Nx);
  const Scalar rate = std::sqrt(std::max(field.lambda, lambda_floor));
  const int anchor = g.Nx - 1;
  for (int i = g.Nx; i < Nx_new; ++i) {
    const Scalar decay = std::exp(-rate * Scalar(i - anchor) * g.hx);
    out.u.row(i) = field.u.row(anchor) * decay;
  }
  out.clamp();
  return out;
}

/// Truncates to the first Nx_new cells and re-imposes the clamp at the new end.
template <typename Scalar>
SolutionField<Scalar> restrict_domain(const SolutionField<Scalar>& field, int Nx_new) {
  const auto& g = field.grid;
  if (Nx_new >= g.Nx || Nx_new < 16) throw DomainError("restrict_domain needs 16 <= Nx_new < Nx");
  auto grid = build_grid(Scalar(Nx_new) * g.hx, Nx_new, g.Ny);
  grid.hx = g.hx;
  SolutionField<Scalar> out{grid, field.u.topRows(Nx_new + 1), field.lambda};
  out.clamp();
  return out;
}

}  // namespace apshear
