#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "exprelax/mesh.hpp"

namespace testing {

inline exprelax::Grid grid1(int n, double L = 1.0) {
  const std::vector<double> e{L};
  const std::vector<int> c{n};
  return exprelax::Grid(1, e, c);
}

inline exprelax::Grid grid2(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  const std::vector<double> e{lx, ly};
  const std::vector<int> c{nx, ny};
  return exprelax::Grid(2, e, c);
}

// Rough field: independent N(0, scale^2) values per cell.
inline exprelax::ScalarField noise(const exprelax::Grid& g, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  exprelax::ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng);
  return f;
}

// Smooth field a0 + a1 cos(pi x) + a2 cos(2 pi y) + a3 cos(pi x) cos(pi y) on the unit box.
inline exprelax::ScalarField smooth(const exprelax::Grid& g, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  double a[4];
  for (double& v : a) v = scale * n(rng);
  a[0] *= 0.2;
  exprelax::ScalarField f(g);
  for (int j = 0; j < g.cells(1); ++j)
    for (int i = 0; i < g.cells(0); ++i) {
      const double x = g.center(0, i) / g.extent(0);
      const double y = g.dim() == 2 ? g.center(1, j) / g.extent(1) : 0.0;
      f[g.index(i, j)] = a[0] + a[1] * std::cos(M_PI * x) + a[2] * std::cos(2 * M_PI * y) +
                         a[3] * std::cos(M_PI * x) * std::cos(M_PI * y);
    }
  return f;
}

inline exprelax::ScalarField constant(const exprelax::Grid& g, double c) {
  return exprelax::ScalarField(g, c);
}

inline exprelax::ScalarField cosine(const exprelax::Grid& g, double amplitude = 1.0) {
  exprelax::ScalarField f(g);
  for (int j = 0; j < g.cells(1); ++j)
    for (int i = 0; i < g.cells(0); ++i)
      f[g.index(i, j)] = amplitude * std::cos(M_PI * g.center(0, i) / g.extent(0));
  return f;
}

inline double max_diff(const exprelax::ScalarField& a, const exprelax::ScalarField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace testing
