#include "exprelax/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exprelax/errors.hpp"

namespace exprelax {

namespace {

void require_complete(const Trajectory& traj, const char* what) {
  if (traj.steps.size() != static_cast<std::size_t>(traj.params.j))
    throw ContractError(std::string(what) + " needs a complete trajectory");
}

double grad_sq(const ScalarField& f, const Grid& g) {
  const FaceField q = face_gradient(f, g);
  return face_inner(q, q, g);
}

ScalarField sqrt_field(const ScalarField& f) {
  ScalarField r = f;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(f[i]);
  return r;
}

void track_worst_min(CheckReport& r, double v, int k) {
  if (r.per_k.empty() || v < r.worst) {
    r.worst = v;
    r.worst_k = k;
  }
  r.per_k.push_back(v);
}

void track_worst_max(CheckReport& r, double v, int k) {
  if (r.per_k.empty() || v > r.worst) {
    r.worst = v;
    r.worst_k = k;
  }
  r.per_k.push_back(v);
}

}  // namespace

std::vector<DiagnosticsRecord> compute_ledger(const Trajectory& traj) {
  require_complete(traj, "compute_ledger");
  const Grid& g = traj.grid;
  const double tau = traj.tau();
  const double p = traj.params.p;
  std::vector<DiagnosticsRecord> out;
  out.reserve(traj.steps.size());
  for (int k = 1; k <= traj.params.j; ++k) {
    const StepResult& s = traj.steps[k - 1];
    DiagnosticsRecord r;
    r.k = k;
    r.t = traj.time(k);
    r.energy = p_dirichlet_energy(s.u, g, p);
    r.mass_sq = 0.5 * tau * inner(s.u, s.u, g);
    r.dissipation = 4.0 * grad_sq(sqrt_field(s.rho), g);
    r.entropy_sq = tau * inner(s.ln_rho, s.ln_rho, g);
    r.mass = integrate(s.u, g);
    r.entropy_l1 = lp_norm(s.ln_rho, g, 1.0);
    const auto [lo, hi] = std::minmax_element(s.rho.values().begin(), s.rho.values().end());
    r.rho_min = *lo;
    r.rho_max = *hi;
    out.push_back(r);
  }
  return out;
}

CheckReport check_energy_dissipation(const Trajectory& traj, double tol) {
  const auto ledger = compute_ledger(traj);
  const Grid& g = traj.grid;
  const double tau = traj.tau();
  const double delta = traj.params.delta;
  double rhs = p_dirichlet_energy(traj.u0, g, traj.params.p) + 0.5 * tau * inner(traj.u0, traj.u0, g);
  if (delta > 0.0) rhs += 0.5 * delta * grad_sq(traj.u0, g);

  CheckReport rep;
  double accumulated = 0.0;
  for (const DiagnosticsRecord& r : ledger) {
    accumulated += tau * (r.dissipation + r.entropy_sq);
    double lhs = r.energy + r.mass_sq + accumulated;
    if (delta > 0.0) lhs += 0.5 * delta * grad_sq(traj.u(r.k), g);
    track_worst_min(rep, rhs - lhs, r.k);
  }
  rep.pass = rep.per_k.empty() || rep.worst >= -tol;
  return rep;
}

CheckReport check_mass_recursion(const Trajectory& traj, double tol) {
  require_complete(traj, "check_mass_recursion");
  const double tau = traj.tau();
  CheckReport rep;
  double prev = integrate(traj.u0, traj.grid);
  for (int k = 1; k <= traj.params.j; ++k) {
    const double cur = integrate(traj.u(k), traj.grid);
    const double defect = std::abs((1.0 + tau * tau * tau) * cur - prev);
    track_worst_max(rep, defect, k);
    if (defect > tol * (1.0 + std::abs(prev))) rep.pass = false;
    prev = cur;
  }
  return rep;
}

CheckReport check_entropy_identity(const Trajectory& traj, double tol) {
  require_complete(traj, "check_entropy_identity");
  const double tau = traj.tau();
  CheckReport rep;
  for (int k = 1; k <= traj.params.j; ++k) {
    const StepResult& s = traj.steps[k - 1];
    const double defect =
        std::abs(integrate(s.ln_rho, traj.grid) - tau * integrate(s.u, traj.grid));
    track_worst_max(rep, defect, k);
  }
  rep.pass = rep.per_k.empty() || rep.worst <= tol;
  return rep;
}

CheckReport check_first_estimate(const Trajectory& traj, double tol) {
  require_complete(traj, "check_first_estimate");
  if (traj.params.p != 2.0 || traj.params.delta != 0.0)
    throw ContractError("check_first_estimate applies to p = 2, delta = 0 only");
  const Grid& g = traj.grid;
  const double tau = traj.tau();
  CheckReport rep;
  double e_prev = p_dirichlet_energy(traj.u0, g, 2.0);
  for (int k = 1; k <= traj.params.j; ++k) {
    const StepResult& s = traj.steps[k - 1];
    const ScalarField du = s.u - traj.u(k - 1);
    const double e = p_dirichlet_energy(s.u, g, 2.0);
    const double coupling =
        face_inner(face_gradient(s.rho, g), face_gradient(s.ln_rho, g), g) +
        tau * inner(s.ln_rho, s.ln_rho, g);
    const double predicted = tau * coupling + tau * inner(s.u, du, g) + 0.5 * grad_sq(du, g);
    track_worst_max(rep, std::abs((e_prev - e) - predicted), k);
    e_prev = e;
  }
  rep.pass = rep.per_k.empty() || rep.worst <= tol;
  return rep;
}

CheckReport check_interpolant_identity(const Trajectory& traj, double tol) {
  require_complete(traj, "check_interpolant_identity");
  const double tau = traj.tau();
  const int j = traj.params.j;
  ScalarField integral(traj.grid, 0.0);
  for (int k = 1; k <= j; ++k) {
    const Interpolants mid = eval_interpolants(traj, traj.time(k - 1) + 0.5 * tau);
    for (std::size_t c = 0; c < integral.size(); ++c)
      integral[c] += tau * (mid.u_tilde[c] - mid.u_bar[c]);
  }
  CheckReport rep;
  double worst = 0.0;
  for (std::size_t c = 0; c < integral.size(); ++c)
    worst = std::max(worst, std::abs(integral[c] + 0.5 * tau * (traj.u(j)[c] - traj.u0[c])));
  rep.per_k.push_back(worst);
  rep.worst = worst;
  rep.worst_k = j;
  rep.pass = worst <= tol;
  return rep;
}

EntropyL1Report check_entropy_l1(const Trajectory& traj) {
  require_complete(traj, "check_entropy_l1");
  const Grid& g = traj.grid;
  const double tau = traj.tau();
  EntropyL1Report rep;
  double mass_time = 0.0;
  for (const StepResult& s : traj.steps) {
    const double l1 = tau * lp_norm(s.ln_rho, g, 1.0);
    rep.per_k.push_back(l1);
    rep.total += l1;
    rep.root_term += 2.0 * tau * integrate(sqrt_field(s.rho), g);
    mass_time += tau * integrate(s.u, g);
  }
  rep.mass_term = std::abs(tau * mass_time);
  rep.bound = rep.root_term + rep.mass_term;
  rep.flagged = rep.total > rep.bound + 1e-6;
  return rep;
}

SingularReport detect_singular_set(const Trajectory& traj, double eps_cut) {
  require_complete(traj, "detect_singular_set");
  if (!(eps_cut > 0.0)) throw ContractError("eps_cut must be > 0");
  const Grid& g = traj.grid;
  const double tau = traj.tau();
  const double vol = g.cell_volume();
  const double n = static_cast<double>(g.num_cells());

  SingularReport rep;
  rep.eps_cut = eps_cut;
  rep.rho_min = std::numeric_limits<double>::infinity();
  double vacuum_cells = 0.0;
  for (const StepResult& s : traj.steps) {
    double on = 0.0, off = 0.0, count = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
      const double a = std::abs(s.ln_rho[i]);
      rep.entropy_sup = std::max(rep.entropy_sup, a);
      rep.rho_min = std::min(rep.rho_min, s.rho[i]);
      if (s.rho[i] < eps_cut) {
        off += a;
        count += 1.0;
      } else {
        on += a;
      }
    }
    rep.residual_split.first += tau * vol * on;
    rep.residual_split.second += tau * vol * off;
    rep.entropy_l1_total += tau * lp_norm(s.ln_rho, g, 1.0);
    rep.vacuum_fraction_per_k.push_back(count / n);
    vacuum_cells += count;
  }
  rep.vacuum_fraction = vacuum_cells / (n * static_cast<double>(traj.steps.size()));
  return rep;
}

}  // namespace exprelax
