#pragma once

// Nonlinear elliptic solves needed by each time step:
//   log-diffusion   -Delta rho + tau ln(rho) = f
//   p-Poisson       -Delta_p u - delta Delta u + tau u = rhs
// both with zero-flux boundaries. Newton solvers are the production path; the
// minimize_* functions are independent descent oracles on the convex energies
// whose stationarity conditions are the same equations.

#include <stdexcept>
#include <string>
#include <vector>

#include "exprelax/mesh.hpp"
#include "exprelax/operators.hpp"

namespace exprelax {

struct NewtonConfig {
  double tol_residual = 1e-10;
  int max_iter = 100;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  /// Positivity safeguard: an accepted update keeps rho_new >= kappa * rho_old.
  double kappa = 0.1;

  void validate() const;
  bool operator==(const NewtonConfig&) const = default;
};

struct EllipticSolution {
  ScalarField field;
  double residual_norm = 0.0;
  int iterations = 0;
  /// Residual level attainable in double precision at the returned iterate,
  /// 16 eps (|J||x| + |b|). Convergence means residual_norm <= max(tol, floor).
  double roundoff_floor = 0.0;
  bool converged = false;
  /// Max-norm residual at each accepted iterate, starting with the initial guess.
  std::vector<double> residual_history;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, ScalarField last_iterate,
                std::vector<double> residual_history)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        residual_history_(std::move(residual_history)) {}

  const ScalarField& last_iterate() const { return last_iterate_; }
  const std::vector<double>& residual_history() const { return residual_history_; }
  double residual_norm() const {
    return residual_history_.empty() ? 0.0 : residual_history_.back();
  }

 private:
  ScalarField last_iterate_;
  std::vector<double> residual_history_;
};

ScalarField residual_log_diffusion(const ScalarField& rho, const ScalarField& f, double tau,
                                   const Grid& g);

/// Damped Newton in rho. Pass `initial` to warm-start; otherwise starts from
/// the constant exp(mean(f)/tau) clipped to [1e-6, 1e6].
EllipticSolution solve_log_diffusion(const ScalarField& f, double tau, const Grid& g,
                                     const NewtonConfig& cfg,
                                     const ScalarField* initial = nullptr);

ScalarField residual_p_poisson(const ScalarField& u, const ScalarField& rhs,
                               const FluxParams& fp, double delta, double tau, const Grid& g);

/// Newton with energy line search; starts from the p = 2 solution unless `initial` is given.
EllipticSolution solve_p_poisson(const ScalarField& rhs, const FluxParams& fp, double delta,
                                 double tau, const Grid& g, const NewtonConfig& cfg,
                                 const ScalarField* initial = nullptr);

/// J(rho) = int 1/2|grad rho|^2 + tau (rho ln rho - rho) - f rho
double log_diffusion_energy(const ScalarField& rho, const ScalarField& f, double tau,
                            const Grid& g);

/// (1/p) int (|grad u|^2+eps^2)^(p/2) + delta/2 int |grad u|^2 + tau/2 int u^2 - int rhs u
double p_poisson_energy(const ScalarField& u, const ScalarField& rhs, const FluxParams& fp,
                        double delta, double tau, const Grid& g);

EllipticSolution minimize_log_diffusion_energy(const ScalarField& f, double tau, const Grid& g,
                                               const NewtonConfig& cfg);

EllipticSolution minimize_p_poisson_energy(const ScalarField& rhs, const FluxParams& fp,
                                           double delta, double tau, const Grid& g,
                                           const NewtonConfig& cfg);

}  // namespace exprelax
