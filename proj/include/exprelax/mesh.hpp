#pragma once

// Uniform cell-centered grids on an axis-aligned box, the cell/face fields that
// live on them, and the discrete calculus used by every other module.
//
// Face layout: axis-0 faces are indexed i + (nx+1)*j with i in [0, nx]; axis-1
// faces are indexed i + nx*j with j in [0, ny]. Boundary faces always carry 0,
// which is how the zero-flux (Neumann) condition is imposed.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "exprelax/errors.hpp"

namespace exprelax {

class Grid {
 public:
  Grid(int dim, std::span<const double> extent, std::span<const int> cells);

  int dim() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double h(int axis) const { return h_[axis]; }

  std::size_t num_cells() const {
    return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
  }
  std::size_t num_faces(int axis) const;
  double cell_volume() const { return h_[0] * h_[1]; }
  double domain_volume() const { return extent_[0] * extent_[1]; }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells_[0]) * j;
  }
  double center(int axis, int i) const { return (i + 0.5) * h_[axis]; }

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  // Unused trailing axes hold a single unit cell so volumes and indices stay uniform.
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> extent_{1.0, 1.0};
  std::array<double, 2> h_{1.0, 1.0};
};

Grid make_grid(int dim, std::span<const double> extent, std::span<const int> cells);

/// One real per cell center.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0);
  ScalarField(const Grid& g, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::array<int, 2>& shape() const { return shape_; }

  bool conforms(const Grid& g) const;
  bool operator==(const ScalarField& other) const = default;

  ScalarField& operator+=(const ScalarField& rhs);
  ScalarField& operator-=(const ScalarField& rhs);
  ScalarField& operator*=(double s);

 private:
  std::array<int, 2> shape_{0, 0};
  std::vector<double> values_;
};

ScalarField operator+(ScalarField lhs, const ScalarField& rhs);
ScalarField operator-(ScalarField lhs, const ScalarField& rhs);
ScalarField operator*(double s, ScalarField f);

/// Face-centered values, one array per axis including boundary faces.
struct FaceField {
  FaceField() = default;
  explicit FaceField(const Grid& g);

  std::array<std::vector<double>, 2> axis;
  std::array<int, 2> shape{0, 0};

  bool conforms(const Grid& g) const;
  bool boundary_is_zero() const;
  /// Largest |value| sitting on a boundary face.
  double boundary_max_abs() const;
};

double integrate(const ScalarField& f, const Grid& g);
FaceField face_gradient(const ScalarField& f, const Grid& g);
ScalarField divergence(const FaceField& q, const Grid& g);
ScalarField neumann_laplacian(const ScalarField& f, const Grid& g);
double lp_norm(const ScalarField& f, const Grid& g, double p);

/// Sum over faces of weight * a * b, face weight = cell volume.
double face_inner(const FaceField& a, const FaceField& b, const Grid& g);
double max_abs(const ScalarField& f);
/// sum_i vol * a_i * b_i
double inner(const ScalarField& a, const ScalarField& b, const Grid& g);

void require_conforming(const ScalarField& f, const Grid& g, const char* what);

}  // namespace exprelax
