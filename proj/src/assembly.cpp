#include "assembly.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "exprelax/kernels.hpp"

namespace exprelax::detail {

namespace {

using Triplet = Eigen::Triplet<double>;

// One face-gradient row: (u[plus] - u[minus]) / h, or nothing on a boundary face.
struct FaceRow {
  bool active = false;
  int minus = 0;
  int plus = 0;
  double inv_h = 0.0;
};

FaceRow xrow(const Grid& g, int i, int j) {
  if (i == 0 || i == g.cells(0)) return {};
  return {true, static_cast<int>(g.index(i - 1, j)), static_cast<int>(g.index(i, j)),
          1.0 / g.h(0)};
}

FaceRow yrow(const Grid& g, int i, int j) {
  if (g.dim() < 2 || j == 0 || j == g.cells(1)) return {};
  return {true, static_cast<int>(g.index(i, j - 1)), static_cast<int>(g.index(i, j)),
          1.0 / g.h(1)};
}

double row_value(const FaceRow& r, const ScalarField& u) {
  return r.active ? (u[r.plus] - u[r.minus]) * r.inv_h : 0.0;
}

// Adds scale * a^T b (rows a, b) to the triplet list.
void add_outer(std::vector<Triplet>& t, const FaceRow& a, const FaceRow& b, double scale) {
  if (!a.active || !b.active || scale == 0.0) return;
  const std::array<std::pair<int, double>, 2> ea{{{a.plus, a.inv_h}, {a.minus, -a.inv_h}}};
  const std::array<std::pair<int, double>, 2> eb{{{b.plus, b.inv_h}, {b.minus, -b.inv_h}}};
  for (const auto& [ia, va] : ea)
    for (const auto& [ib, vb] : eb) t.emplace_back(ia, ib, scale * va * vb);
}

}  // namespace

SparseMatrix neg_laplacian_matrix(const Grid& g) {
  const int n = static_cast<int>(g.num_cells());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * 5);
  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i <= g.cells(0); ++i) add_outer(t, xrow(g, i, j), xrow(g, i, j), 1.0);
  }
  if (g.dim() == 2) {
    for (int j = 0; j <= g.cells(1); ++j)
      for (int i = 0; i < g.cells(0); ++i) add_outer(t, yrow(g, i, j), yrow(g, i, j), 1.0);
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SparseMatrix p_laplacian_jacobian(const ScalarField& u, const Grid& g, const FluxParams& fp) {
  // Hessian of sum_q (1/nq) (1/p)(|B_q u|^2 + eps^2)^(p/2), per unit volume:
  // sum_q (1/nq) B_q^T c_q [I + (p-2) g g^T / (|g|^2 + eps^2)] B_q.
  const int n = static_cast<int>(g.num_cells());
  const bool two_d = g.dim() == 2;
  const double nq = two_d ? 4.0 : 2.0;
  const double p = fp.p;
  const double e2 = fp.eps_g * fp.eps_g;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * (two_d ? 64 : 8));

  auto add_quadrant = [&](const FaceRow& a, const FaceRow& b) {
    const double ga = row_value(a, u);
    const double gb = row_value(b, u);
    // Floor keeps the unregularized Jacobian finite; the residual itself is unaffected.
    const double base = std::max(ga * ga + gb * gb + e2, 1e-24);
    const double c = (p == 2.0) ? 1.0 : std::pow(base, 0.5 * (p - 2.0));
    const double k = (p - 2.0) / base;
    add_outer(t, a, a, c * (1.0 + k * ga * ga) / nq);
    add_outer(t, b, b, c * (1.0 + k * gb * gb) / nq);
    add_outer(t, a, b, c * k * ga * gb / nq);
    add_outer(t, b, a, c * k * ga * gb / nq);
  };

  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) {
      const FaceRow e = xrow(g, i + 1, j), w = xrow(g, i, j);
      if (!two_d) {
        add_quadrant(e, FaceRow{});
        add_quadrant(w, FaceRow{});
        continue;
      }
      const FaceRow nn = yrow(g, i, j + 1), s = yrow(g, i, j);
      add_quadrant(e, nn);
      add_quadrant(e, s);
      add_quadrant(w, nn);
      add_quadrant(w, s);
    }
  }
  SparseMatrix J(n, n);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

double roundoff_floor(const SparseMatrix& J, const Vector& x, const Vector& b) {
  const Vector ax = x.cwiseAbs();
  Vector row = b.cwiseAbs();
  for (Eigen::Index k = 0; k < J.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(J, k); it; ++it)
      row[it.row()] += std::abs(it.value()) * ax[it.col()];
  return 16.0 * std::numeric_limits<double>::epsilon() * row.maxCoeff();
}

SparseMatrix diagonal_matrix(const Vector& d) {
  const auto n = d.size();
  SparseMatrix D(n, n);
  D.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i) D.insert(i, i) = d[i];
  D.makeCompressed();
  return D;
}

}  // namespace exprelax::detail
