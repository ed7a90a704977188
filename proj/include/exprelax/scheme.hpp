#pragma once

// Implicit time stepping. Each step k solves the coupled stationary system
//   (u_k - u_{k-1})/tau - Delta rho_k + tau ln rho_k = 0
//   -Delta_p u_k - delta Delta u_k + tau u_k       = ln rho_k
// with zero-flux boundaries, tau = T/j serving both as the time step and as the
// penalty coefficient.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "exprelax/elliptic.hpp"
#include "exprelax/mesh.hpp"
#include "exprelax/operators.hpp"

namespace exprelax {

enum class StepSolver {
  /// Damped Newton on the coupled (u, ln rho) system.
  Newton,
  /// Damped fixed-point iteration on the map T (converges only when T contracts, roughly tau > 1).
  Picard,
};

struct SchemeParams {
  double p = 1.5;
  double T = 1.0;
  int j = 16;
  double delta = 0.0;
  double eps_g = 1e-8;
  double fp_tol = 1e-8;
  int fp_max_iter = 200;
  double damping = 1.0;
  StepSolver solver = StepSolver::Newton;
  /// Solve each step for delta = 1e-2, 5e-3, ... down to 1e-6 before the configured delta.
  bool delta_continuation = false;
  NewtonConfig newton;

  double tau() const { return T / j; }
  FluxParams flux() const { return {p, eps_g}; }
  void validate() const;
  bool operator==(const SchemeParams&) const = default;
};

struct StepResult {
  ScalarField u;
  ScalarField rho;
  ScalarField ln_rho;
  int fp_iterations = 0;
  /// Max-norms of the two equations at the returned pair.
  std::array<double, 2> coupled_residuals{0.0, 0.0};
  bool converged = false;
  std::vector<double> history;
};

struct Trajectory {
  Grid grid;
  SchemeParams params;
  ScalarField u0;
  std::vector<StepResult> steps;

  double tau() const { return params.tau(); }
  double time(int k) const { return k * params.tau(); }
  /// u_k for k in [0, steps.size()].
  const ScalarField& u(int k) const { return k == 0 ? u0 : steps[k - 1].u; }
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, int step, std::vector<double> history)
      : std::runtime_error(what), step_(step), history_(std::move(history)) {}
  int step() const { return step_; }
  const std::vector<double>& history() const { return history_; }

 private:
  int step_;
  std::vector<double> history_;
};

struct PicardImage {
  ScalarField u;
  ScalarField rho;
};

/// The map T: solve -Delta rho + tau ln rho = -(w - v)/tau, then
/// -Delta_p u - delta Delta u + tau u = ln rho. Returns u = T(w) and its rho.
PicardImage picard_map(const ScalarField& w, const ScalarField& v, const SchemeParams& params,
                       const Grid& g);

/// Max-norm residuals of the two step equations at (u, ln rho).
std::array<double, 2> coupled_residuals(const ScalarField& u, const ScalarField& ln_rho,
                                        const ScalarField& u_prev, const SchemeParams& params,
                                        const Grid& g);

/// One implicit step from u_prev. `rho_guess` warm-starts the Newton solver.
StepResult rothe_step(const ScalarField& u_prev, const SchemeParams& params, const Grid& g,
                      const ScalarField* rho_guess = nullptr);

Trajectory run_simulation(const ScalarField& u0, const SchemeParams& params, const Grid& g);

struct Interpolants {
  ScalarField u_tilde;  // piecewise linear in t
  ScalarField u_bar;    // piecewise constant
  ScalarField rho_bar;  // piecewise constant
};

/// Values at t in (0, T]; t in (t_{k-1}, t_k] selects step k.
Interpolants eval_interpolants(const Trajectory& traj, double t);

struct RefinementReport {
  std::vector<int> steps;                 // j per level
  std::vector<double> differences;        // ||ubar_{2j} - ubar_j|| in L2(Omega_T), levels-1 entries
  std::vector<double> entropy_totals;     // int int |ln rhobar|
  std::vector<double> rho_min;
  std::vector<Trajectory> trajectories;
};

/// L2(Omega x (0,T)) distance of the piecewise-constant interpolants of a run
/// with j steps and one with 2j steps.
double interpolant_distance(const Trajectory& coarse, const Trajectory& fine);

/// Runs j, 2j, 4j, ... (levels runs, independent, evaluated in parallel).
RefinementReport refinement_study(const ScalarField& u0, const SchemeParams& base, int levels,
                                  const Grid& g);

}  // namespace exprelax
