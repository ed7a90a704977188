#include "exprelax/operators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "exprelax/kernels.hpp"
#include "layout.hpp"

namespace exprelax {

void FluxParams::validate() const {
  if (!(p > 1.0 && p <= 2.0)) throw ConfigError("p must lie in (1,2]");
  if (!(eps_g >= 0.0) || !std::isfinite(eps_g)) throw ConfigError("eps_g must be >= 0");
}

namespace {

kernels::Layout layout_of_faces(const FaceField& q) {
  return {q.shape[0], q.shape[1], 1.0, 1.0, !q.axis[1].empty()};
}

std::vector<double> quadrant_norms(const FaceField& q, const kernels::Layout& L) {
  std::vector<double> sq(static_cast<std::size_t>(L.nx) * L.ny * L.quadrants_per_cell());
  kernels::parallel::quadrant_norms(L, q.axis[0], q.axis[1], sq);
  return sq;
}

double quadrant_energy(const ScalarField& u, const Grid& g, double p, double eps) {
  const FaceField q = face_gradient(u, g);
  const auto L = detail::layout_of(g);
  const std::vector<double> sq = quadrant_norms(q, L);
  const double e2 = eps * eps;
  double s = 0.0;
  for (double v : sq) s += std::pow(v + e2, 0.5 * p);
  return s * g.cell_volume() / L.quadrants_per_cell() / p;
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// |x|^(p-2) x, zero at the origin
std::vector<double> power_field(std::span<const double> x, double p) {
  const double n = norm(x);
  std::vector<double> out(x.size(), 0.0);
  if (n == 0.0) return out;
  const double c = std::pow(n, p - 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i];
  return out;
}

void require_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("gap functions need vectors of equal length");
}

}  // namespace

FaceField p_flux(const FaceField& q, const FluxParams& fp) {
  fp.validate();
  const auto L = layout_of_faces(q);
  const std::vector<double> sq = quadrant_norms(q, L);
  FaceField out = q;
  kernels::parallel::p_flux(L, q.axis[0], q.axis[1], sq, fp.p, fp.eps_g, out.axis[0],
                            out.axis[1]);
  return out;
}

ScalarField p_laplacian(const ScalarField& u, const Grid& g, const FluxParams& fp) {
  return divergence(p_flux(face_gradient(u, g), fp), g);
}

double p_dirichlet_energy(const ScalarField& u, const Grid& g, double p) {
  if (!(p >= 1.0)) throw ConfigError("p_dirichlet_energy requires p >= 1");
  return quadrant_energy(u, g, p, 0.0);
}

double regularized_p_energy(const ScalarField& u, const Grid& g, const FluxParams& fp) {
  fp.validate();
  return quadrant_energy(u, g, fp.p, fp.eps_g);
}

double convexity_gap(std::span<const double> x, std::span<const double> y, double p) {
  require_same_dim(x, y);
  const std::vector<double> ax = power_field(x, p);
  double lhs = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) lhs += ax[i] * (x[i] - y[i]);
  const double rhs = (std::pow(norm(x), p) - std::pow(norm(y), p)) / p;
  return lhs - rhs;
}

double monotonicity_gap(std::span<const double> x, std::span<const double> y, double p) {
  require_same_dim(x, y);
  const std::vector<double> ax = power_field(x, p);
  const std::vector<double> ay = power_field(y, p);
  double dot = 0.0, dist2 = 0.0, nx2 = 0.0, ny2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dot += (ax[i] - ay[i]) * d;
    dist2 += d * d;
    nx2 += x[i] * x[i];
    ny2 += y[i] * y[i];
  }
  return std::pow(1.0 + nx2 + ny2, 0.5 * (2.0 - p)) * dot - (p - 1.0) * dist2;
}

double log_root_gap(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_root_gap needs a > 0 and b > 0");
  const double r = std::sqrt(std::sqrt(a)) - std::sqrt(std::sqrt(b));
  return (std::sqrt(a) - std::sqrt(b)) * (std::log(a) - std::log(b)) - 4.0 * r * r;
}

}  // namespace exprelax
