#pragma once

// Data-parallel inner loops of the discrete calculus. Every kernel exists twice:
// `serial` is the plain reference used by tests, `parallel` is the OpenMP
// version the library dispatches to. Both are elementwise (no reductions), so
// their results are bit-identical for any thread count.

#include <span>

namespace exprelax::kernels {

struct Layout {
  int nx = 0;
  int ny = 1;
  double hx = 1.0;
  double hy = 1.0;
  bool two_d = false;

  int quadrants_per_cell() const { return two_d ? 4 : 2; }
};

// Quadrant numbering inside a cell: 2D uses (E,N), (E,S), (W,N), (W,S); 1D uses E, W.
// A quadrant pairs one axis-0 face with one axis-1 face of the same cell.

namespace serial {
void face_gradient(const Layout& L, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy);
void divergence(const Layout& L, std::span<const double> qx, std::span<const double> qy,
                std::span<double> out);
/// Squared gradient magnitude per quadrant.
void quadrant_norms(const Layout& L, std::span<const double> gx, std::span<const double> gy,
                    std::span<double> sq);
/// Regularized flux: each face's gradient times the mean quadrant coefficient
/// (s + eps^2)^((p-2)/2) over the quadrants that touch it.
void p_flux(const Layout& L, std::span<const double> gx, std::span<const double> gy,
            std::span<const double> sq, double p, double eps, std::span<double> fx,
            std::span<double> fy);
}  // namespace serial

namespace parallel {
void face_gradient(const Layout& L, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy);
void divergence(const Layout& L, std::span<const double> qx, std::span<const double> qy,
                std::span<double> out);
void quadrant_norms(const Layout& L, std::span<const double> gx, std::span<const double> gy,
                    std::span<double> sq);
void p_flux(const Layout& L, std::span<const double> gx, std::span<const double> gy,
            std::span<const double> sq, double p, double eps, std::span<double> fx,
            std::span<double> fy);
}  // namespace parallel

/// (s + eps^2)^((p-2)/2), with the value 0 where s + eps^2 == 0 and p < 2.
double flux_coefficient(double sq, double p, double eps);

}  // namespace exprelax::kernels
