#include "exprelax/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace exprelax::kernels {

double flux_coefficient(double sq, double p, double eps) {
  if (p == 2.0) return 1.0;
  const double base = sq + eps * eps;
  if (base == 0.0) return 0.0;
  return std::pow(base, 0.5 * (p - 2.0));
}

namespace {

inline std::size_t xface(const Layout& L, int i, int j) {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(L.nx + 1) * j;
}
inline std::size_t yface(const Layout& L, int i, int j) {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(L.nx) * j;
}
inline std::size_t cell(const Layout& L, int i, int j) {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(L.nx) * j;
}

}  // namespace

namespace serial {

void face_gradient(const Layout& L, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy) {
  for (int j = 0; j < L.ny; ++j) {
    gx[xface(L, 0, j)] = 0.0;
    gx[xface(L, L.nx, j)] = 0.0;
    for (int i = 1; i < L.nx; ++i)
      gx[xface(L, i, j)] = (f[cell(L, i, j)] - f[cell(L, i - 1, j)]) / L.hx;
  }
  if (!L.two_d) return;
  for (int i = 0; i < L.nx; ++i) {
    gy[yface(L, i, 0)] = 0.0;
    gy[yface(L, i, L.ny)] = 0.0;
    for (int j = 1; j < L.ny; ++j)
      gy[yface(L, i, j)] = (f[cell(L, i, j)] - f[cell(L, i, j - 1)]) / L.hy;
  }
}

void divergence(const Layout& L, std::span<const double> qx, std::span<const double> qy,
                std::span<double> out) {
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      double d = (qx[xface(L, i + 1, j)] - qx[xface(L, i, j)]) / L.hx;
      if (L.two_d) d += (qy[yface(L, i, j + 1)] - qy[yface(L, i, j)]) / L.hy;
      out[cell(L, i, j)] = d;
    }
  }
}

void quadrant_norms(const Layout& L, std::span<const double> gx, std::span<const double> gy,
                    std::span<double> sq) {
  const int nq = L.quadrants_per_cell();
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const std::size_t c = cell(L, i, j) * nq;
      const double e = gx[xface(L, i + 1, j)];
      const double w = gx[xface(L, i, j)];
      if (!L.two_d) {
        sq[c + 0] = e * e;
        sq[c + 1] = w * w;
        continue;
      }
      const double n = gy[yface(L, i, j + 1)];
      const double s = gy[yface(L, i, j)];
      sq[c + 0] = e * e + n * n;
      sq[c + 1] = e * e + s * s;
      sq[c + 2] = w * w + n * n;
      sq[c + 3] = w * w + s * s;
    }
  }
}

void p_flux(const Layout& L, std::span<const double> gx, std::span<const double> gy,
            std::span<const double> sq, double p, double eps, std::span<double> fx,
            std::span<double> fy) {
  const int nq = L.quadrants_per_cell();
  auto coef = [&](int i, int j, int q) {
    return flux_coefficient(sq[cell(L, i, j) * nq + q], p, eps);
  };
  for (int j = 0; j < L.ny; ++j) {
    fx[xface(L, 0, j)] = 0.0;
    fx[xface(L, L.nx, j)] = 0.0;
    for (int i = 1; i < L.nx; ++i) {
      double c;
      if (L.two_d)
        c = 0.25 * (coef(i - 1, j, 0) + coef(i - 1, j, 1) + coef(i, j, 2) + coef(i, j, 3));
      else
        c = 0.5 * (coef(i - 1, j, 0) + coef(i, j, 1));
      fx[xface(L, i, j)] = c * gx[xface(L, i, j)];
    }
  }
  if (!L.two_d) return;
  for (int i = 0; i < L.nx; ++i) {
    fy[yface(L, i, 0)] = 0.0;
    fy[yface(L, i, L.ny)] = 0.0;
    for (int j = 1; j < L.ny; ++j) {
      const double c =
          0.25 * (coef(i, j - 1, 0) + coef(i, j - 1, 2) + coef(i, j, 1) + coef(i, j, 3));
      fy[yface(L, i, j)] = c * gy[yface(L, i, j)];
    }
  }
}

}  // namespace serial

namespace parallel {

void face_gradient(const Layout& L, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy) {
  const int nx = L.nx, ny = L.ny;
  const std::ptrdiff_t nfx = static_cast<std::ptrdiff_t>(nx + 1) * ny;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nfx; ++k) {
    const int i = static_cast<int>(k % (nx + 1));
    const int j = static_cast<int>(k / (nx + 1));
    gx[k] = (i == 0 || i == nx) ? 0.0 : (f[cell(L, i, j)] - f[cell(L, i - 1, j)]) / L.hx;
  }
  if (!L.two_d) return;
  const std::ptrdiff_t nfy = static_cast<std::ptrdiff_t>(nx) * (ny + 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nfy; ++k) {
    const int i = static_cast<int>(k % nx);
    const int j = static_cast<int>(k / nx);
    gy[k] = (j == 0 || j == ny) ? 0.0 : (f[cell(L, i, j)] - f[cell(L, i, j - 1)]) / L.hy;
  }
}

void divergence(const Layout& L, std::span<const double> qx, std::span<const double> qy,
                std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(L.nx) * L.ny;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int i = static_cast<int>(k % L.nx);
    const int j = static_cast<int>(k / L.nx);
    double d = (qx[xface(L, i + 1, j)] - qx[xface(L, i, j)]) / L.hx;
    if (L.two_d) d += (qy[yface(L, i, j + 1)] - qy[yface(L, i, j)]) / L.hy;
    out[k] = d;
  }
}

void quadrant_norms(const Layout& L, std::span<const double> gx, std::span<const double> gy,
                    std::span<double> sq) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(L.nx) * L.ny;
  const int nq = L.quadrants_per_cell();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int i = static_cast<int>(k % L.nx);
    const int j = static_cast<int>(k / L.nx);
    const double e = gx[xface(L, i + 1, j)];
    const double w = gx[xface(L, i, j)];
    double* out = sq.data() + k * nq;
    if (L.two_d) {
      const double nn = gy[yface(L, i, j + 1)];
      const double s = gy[yface(L, i, j)];
      out[0] = e * e + nn * nn;
      out[1] = e * e + s * s;
      out[2] = w * w + nn * nn;
      out[3] = w * w + s * s;
    } else {
      out[0] = e * e;
      out[1] = w * w;
    }
  }
}

void p_flux(const Layout& L, std::span<const double> gx, std::span<const double> gy,
            std::span<const double> sq, double p, double eps, std::span<double> fx,
            std::span<double> fy) {
  const int nx = L.nx, ny = L.ny;
  const int nq = L.quadrants_per_cell();
  const std::ptrdiff_t nfx = static_cast<std::ptrdiff_t>(nx + 1) * ny;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nfx; ++k) {
    const int i = static_cast<int>(k % (nx + 1));
    const int j = static_cast<int>(k / (nx + 1));
    if (i == 0 || i == nx) {
      fx[k] = 0.0;
      continue;
    }
    const double* left = sq.data() + cell(L, i - 1, j) * nq;
    const double* right = sq.data() + cell(L, i, j) * nq;
    double c;
    if (L.two_d)
      c = 0.25 * (flux_coefficient(left[0], p, eps) + flux_coefficient(left[1], p, eps) +
                  flux_coefficient(right[2], p, eps) + flux_coefficient(right[3], p, eps));
    else
      c = 0.5 * (flux_coefficient(left[0], p, eps) + flux_coefficient(right[1], p, eps));
    fx[k] = c * gx[k];
  }
  if (!L.two_d) return;
  const std::ptrdiff_t nfy = static_cast<std::ptrdiff_t>(nx) * (ny + 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nfy; ++k) {
    const int i = static_cast<int>(k % nx);
    const int j = static_cast<int>(k / nx);
    if (j == 0 || j == ny) {
      fy[k] = 0.0;
      continue;
    }
    const double* below = sq.data() + cell(L, i, j - 1) * nq;
    const double* above = sq.data() + cell(L, i, j) * nq;
    const double c =
        0.25 * (flux_coefficient(below[0], p, eps) + flux_coefficient(below[2], p, eps) +
                flux_coefficient(above[1], p, eps) + flux_coefficient(above[3], p, eps));
    fy[k] = c * gy[k];
  }
}

}  // namespace parallel

}  // namespace exprelax::kernels
