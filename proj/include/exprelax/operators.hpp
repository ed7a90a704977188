#pragma once

// The p-Laplacian and its energy on the cell/face discretization, plus the
// pointwise inequalities the a-priori estimates rest on, as signed gaps.
//
// Discrete energy. Each cell is split into quadrants (halves in 1D); a
// quadrant pairs one axis-0 face with one axis-1 face of the cell, and its
// gradient magnitude is |g|^2 = g_x^2 + g_y^2 over those two faces. The energy
// is sum_q (vol/4) * (1/p) |g_q|^p (vol/2 in 1D). The flux on a face is its
// normal gradient times the mean coefficient |g_q|^(p-2) of the quadrants that
// touch it, so div(flux) is exactly the negative gradient of the energy and at
// p = 2 it reduces to the 5-point Neumann Laplacian.

#include <span>

#include "exprelax/mesh.hpp"

namespace exprelax {

struct FluxParams {
  double p = 2.0;
  double eps_g = 1e-8;

  /// Throws ConfigError unless 1 < p <= 2 and eps_g >= 0.
  void validate() const;
};

FaceField p_flux(const FaceField& q, const FluxParams& fp);

/// Returns Delta_p u = div(p_flux(grad u)). Callers negate where the equations need -Delta_p.
ScalarField p_laplacian(const ScalarField& u, const Grid& g, const FluxParams& fp);

/// (1/p) * integral |grad u|^p, unregularized.
double p_dirichlet_energy(const ScalarField& u, const Grid& g, double p);

/// (1/p) * integral (|grad u|^2 + eps_g^2)^(p/2), the functional whose
/// gradient is -p_laplacian(u) with the same eps_g.
double regularized_p_energy(const ScalarField& u, const Grid& g, const FluxParams& fp);

/// |x|^(p-2) x . (x - y) - (|x|^p - |y|^p) / p, with |0|^(p-2) 0 := 0.
double convexity_gap(std::span<const double> x, std::span<const double> y, double p);

/// (1+|x|^2+|y|^2)^((2-p)/2) (|x|^(p-2)x - |y|^(p-2)y).(x-y) - (p-1)|x-y|^2
double monotonicity_gap(std::span<const double> x, std::span<const double> y, double p);

/// (sqrt a - sqrt b)(ln a - ln b) - 4 (a^(1/4) - b^(1/4))^2 for a, b > 0.
double log_root_gap(double a, double b);

}  // namespace exprelax
