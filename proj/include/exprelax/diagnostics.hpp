#pragma once

// Integral quantities along a trajectory and checks of the discrete identities
// and estimates they satisfy. Checks return reports; only contract violations throw.

#include <string>
#include <utility>
#include <vector>

#include "exprelax/scheme.hpp"

namespace exprelax {

struct DiagnosticsRecord {
  int k = 0;
  double t = 0.0;
  double energy = 0.0;       // (1/p) int |grad u_k|^p
  double mass_sq = 0.0;      // (tau/2) int u_k^2
  double dissipation = 0.0;  // 4 int |grad sqrt(rho_k)|^2
  double entropy_sq = 0.0;   // tau int (ln rho_k)^2
  double mass = 0.0;         // int u_k
  double entropy_l1 = 0.0;   // int |ln rho_k|
  double rho_min = 0.0;
  double rho_max = 0.0;
};

/// One record per step k = 1..j.
std::vector<DiagnosticsRecord> compute_ledger(const Trajectory& traj);

struct CheckReport {
  bool pass = true;
  /// Smallest slack or largest defect, depending on the check.
  double worst = 0.0;
  int worst_k = 0;
  std::vector<double> per_k;
};

/// Cumulative energy estimate: slack_k = RHS - LHS_k where
/// LHS_k = (1/p) int |grad u_k|^p + (tau/2) int u_k^2
///         + tau sum_{i<=k} (4 int |grad sqrt rho_i|^2 + tau int ln^2 rho_i)
/// and RHS the same first two terms at u_0 (with delta/2 int |grad u|^2 added
/// to both when delta > 0). Passes iff slack_k >= -tol for all k.
CheckReport check_energy_dissipation(const Trajectory& traj, double tol);

/// Defect |(1 + tau^3) int u_k - int u_{k-1}|; passes iff defect <= tol (1 + |int u_{k-1}|).
CheckReport check_mass_recursion(const Trajectory& traj, double tol);

/// Defect |int ln rho_k - tau int u_k|; passes iff defect <= tol.
CheckReport check_entropy_identity(const Trajectory& traj, double tol);

/// For p = 2 and delta = 0: defect between the energy drop E_{k-1} - E_k and
///   tau (<grad rho_k, grad ln rho_k> + tau int ln^2 rho_k) + tau <u_k, u_k - u_{k-1}>
///   + 1/2 |grad (u_k - u_{k-1})|^2,
/// which are equal for an exact step. Throws ContractError for other p or delta.
CheckReport check_first_estimate(const Trajectory& traj, double tol);

/// Per cell, the midpoint-rule value of int_0^T (u_tilde - u_bar) dt against
/// -(tau/2)(u_j - u_0). The integrand is linear on each step, so the rule is exact.
/// per_k holds the single largest cell defect.
CheckReport check_interpolant_identity(const Trajectory& traj, double tol);

struct EntropyL1Report {
  double total = 0.0;       // int int |ln rhobar|
  double root_term = 0.0;   // 2 int int sqrt(rhobar)
  double mass_term = 0.0;   // |tau int int ubar|
  double bound = 0.0;       // root_term + mass_term
  bool flagged = false;     // total > bound + 1e-6
  std::vector<double> per_k;
};

EntropyL1Report check_entropy_l1(const Trajectory& traj);

struct SingularReport {
  double eps_cut = 0.0;
  /// Space-time volume fraction of {rho < eps_cut}.
  double vacuum_fraction = 0.0;
  double entropy_l1_total = 0.0;
  double entropy_sup = 0.0;
  /// int int |ln rho| over {rho >= eps_cut} and over {rho < eps_cut}.
  std::pair<double, double> residual_split{0.0, 0.0};
  double rho_min = 0.0;
  std::vector<double> vacuum_fraction_per_k;
};

SingularReport detect_singular_set(const Trajectory& traj, double eps_cut);

}  // namespace exprelax
