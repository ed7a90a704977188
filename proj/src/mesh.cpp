#include "exprelax/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "layout.hpp"

namespace exprelax {

Grid::Grid(int dim, std::span<const double> extent, std::span<const int> cells) : dim_(dim) {
  if (dim != 1 && dim != 2)
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (extent.size() != static_cast<std::size_t>(dim) ||
      cells.size() != static_cast<std::size_t>(dim))
    throw ConfigError("grid extent and cells need one entry per axis");
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
      throw ConfigError("grid extent must be positive on every axis");
    if (cells[a] < 2) throw ConfigError("grid needs at least 2 cells per axis");
    extent_[a] = extent[a];
    cells_[a] = cells[a];
    h_[a] = extent[a] / cells[a];
  }
}

std::size_t Grid::num_faces(int axis) const {
  if (axis >= dim_) return 0;
  if (axis == 0) return static_cast<std::size_t>(cells_[0] + 1) * cells_[1];
  return static_cast<std::size_t>(cells_[0]) * (cells_[1] + 1);
}

Grid make_grid(int dim, std::span<const double> extent, std::span<const int> cells) {
  return Grid(dim, extent, cells);
}

ScalarField::ScalarField(const Grid& g, double fill)
    : shape_{g.cells(0), g.cells(1)}, values_(g.num_cells(), fill) {}

ScalarField::ScalarField(const Grid& g, std::vector<double> values)
    : shape_{g.cells(0), g.cells(1)}, values_(std::move(values)) {
  if (values_.size() != g.num_cells())
    throw ContractError("field length does not match the grid cell count");
}

bool ScalarField::conforms(const Grid& g) const {
  return shape_[0] == g.cells(0) && shape_[1] == g.cells(1) && values_.size() == g.num_cells();
}

ScalarField& ScalarField::operator+=(const ScalarField& rhs) {
  if (rhs.shape_ != shape_) throw ContractError("field shape mismatch in +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& rhs) {
  if (rhs.shape_ != shape_) throw ContractError("field shape mismatch in -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField lhs, const ScalarField& rhs) { return lhs += rhs; }
ScalarField operator-(ScalarField lhs, const ScalarField& rhs) { return lhs -= rhs; }
ScalarField operator*(double s, ScalarField f) { return f *= s; }

FaceField::FaceField(const Grid& g) : shape{g.cells(0), g.cells(1)} {
  axis[0].assign(g.num_faces(0), 0.0);
  axis[1].assign(g.num_faces(1), 0.0);
}

bool FaceField::conforms(const Grid& g) const {
  return shape[0] == g.cells(0) && shape[1] == g.cells(1) && axis[0].size() == g.num_faces(0) &&
         axis[1].size() == g.num_faces(1);
}

double FaceField::boundary_max_abs() const {
  const int nx = shape[0], ny = shape[1];
  double m = 0.0;
  if (!axis[0].empty()) {
    for (int j = 0; j < ny; ++j) {
      m = std::max(m, std::abs(axis[0][static_cast<std::size_t>(nx + 1) * j]));
      m = std::max(m, std::abs(axis[0][nx + static_cast<std::size_t>(nx + 1) * j]));
    }
  }
  if (!axis[1].empty()) {
    for (int i = 0; i < nx; ++i) {
      m = std::max(m, std::abs(axis[1][i]));
      m = std::max(m, std::abs(axis[1][i + static_cast<std::size_t>(nx) * ny]));
    }
  }
  return m;
}

bool FaceField::boundary_is_zero() const { return boundary_max_abs() == 0.0; }

void require_conforming(const ScalarField& f, const Grid& g, const char* what) {
  if (!f.conforms(g)) throw ContractError(std::string(what) + ": field does not conform to grid");
}

double integrate(const ScalarField& f, const Grid& g) {
  require_conforming(f, g, "integrate");
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * g.cell_volume();
}

FaceField face_gradient(const ScalarField& f, const Grid& g) {
  require_conforming(f, g, "face_gradient");
  FaceField q(g);
  kernels::parallel::face_gradient(detail::layout_of(g), f.values(), q.axis[0], q.axis[1]);
  return q;
}

ScalarField divergence(const FaceField& q, const Grid& g) {
  if (!q.conforms(g)) throw ContractError("divergence: face field does not conform to grid");
  if (!q.boundary_is_zero())
    throw ContractError("divergence: boundary faces must carry zero flux");
  ScalarField out(g);
  kernels::parallel::divergence(detail::layout_of(g), q.axis[0], q.axis[1], out.values());
  return out;
}

ScalarField neumann_laplacian(const ScalarField& f, const Grid& g) {
  return divergence(face_gradient(f, g), g);
}

double lp_norm(const ScalarField& f, const Grid& g, double p) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm requires p >= 1");
  require_conforming(f, g, "lp_norm");
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * g.cell_volume());
  }
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

double face_inner(const FaceField& a, const FaceField& b, const Grid& g) {
  double s = 0.0;
  for (int ax = 0; ax < 2; ++ax)
    for (std::size_t k = 0; k < a.axis[ax].size(); ++k) s += a.axis[ax][k] * b.axis[ax][k];
  return s * g.cell_volume();
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double inner(const ScalarField& a, const ScalarField& b, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cell_volume();
}

}  // namespace exprelax
