#include "exprelax/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>

#include <Eigen/SparseLU>

#include "assembly.hpp"
#include "exprelax/errors.hpp"

namespace exprelax {

using detail::SparseMatrix;
using detail::Vector;

void SchemeParams::validate() const {
  flux().validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("scheme.T must be > 0");
  if (j < 1) throw ConfigError("scheme.j must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("scheme.delta must be >= 0");
  if (!(eps_g >= 0.0)) throw ConfigError("scheme.eps_g must be >= 0");
  if (p < 2.0 && delta == 0.0 && eps_g == 0.0)
    throw ConfigError("p < 2 with delta = 0 needs eps_g > 0");
  if (!(fp_tol > 0.0)) throw ConfigError("scheme.fp_tol must be > 0");
  if (fp_max_iter < 1) throw ConfigError("scheme.fp_max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("scheme.damping must lie in (0,1]");
  newton.validate();
}

namespace {

ScalarField exp_field(const ScalarField& l) {
  ScalarField r = l;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(l[i]);
  return r;
}

ScalarField log_field(const ScalarField& rho) {
  ScalarField r = rho;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::log(rho[i]);
  return r;
}

ScalarField time_residual(const ScalarField& u, const ScalarField& ln_rho,
                          const ScalarField& u_prev, double tau, const Grid& g) {
  const ScalarField lap = neumann_laplacian(exp_field(ln_rho), g);
  ScalarField r = u;
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = (u[i] - u_prev[i]) / tau - lap[i] + tau * ln_rho[i];
  return r;
}

double sum_squares(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s;
}

struct CoupledState {
  ScalarField u;
  ScalarField l;
  ScalarField r1;
  ScalarField r2;
  double merit = 0.0;
  double res = 0.0;
};

CoupledState evaluate(ScalarField u, ScalarField l, const ScalarField& u_prev, double delta,
                      const SchemeParams& params, const Grid& g) {
  CoupledState s;
  const double tau = params.tau();
  s.r1 = time_residual(u, l, u_prev, tau, g);
  s.r2 = residual_p_poisson(u, l, params.flux(), delta, tau, g);
  s.u = std::move(u);
  s.l = std::move(l);
  s.merit = 0.5 * (sum_squares(s.r1) + sum_squares(s.r2));
  s.res = std::max(max_abs(s.r1), max_abs(s.r2));
  return s;
}

struct CoupledOutcome {
  CoupledState state;
  int iterations = 0;
  bool converged = false;
  std::array<double, 2> floors{0.0, 0.0};
};

// Solves [I/tau, J12; J21, -I] (du, dl) = -F.
Vector block_newton_step(const SparseMatrix& J12, const SparseMatrix& J21, double tau,
                         const Vector& F, int step_index, const std::vector<double>& history) {
  const int n = static_cast<int>(J12.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(J12.nonZeros() + J21.nonZeros()) + 2 * n);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 1.0 / tau);
    t.emplace_back(n + i, n + i, -1.0);
  }
  for (int k = 0; k < J12.outerSize(); ++k)
    for (SparseMatrix::InnerIterator e(J12, k); e; ++e)
      t.emplace_back(e.row(), n + e.col(), e.value());
  for (int k = 0; k < J21.outerSize(); ++k)
    for (SparseMatrix::InnerIterator e(J21, k); e; ++e)
      t.emplace_back(n + e.row(), e.col(), e.value());
  SparseMatrix J(2 * n, 2 * n);
  J.setFromTriplets(t.begin(), t.end());

  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success)
    throw StepFailure("coupled Jacobian factorization failed", step_index, history);
  const Vector d = lu.solve(-F);
  if (!d.allFinite()) throw StepFailure("coupled Newton step is not finite", step_index, history);
  return d;
}

// Damped Newton on F(u, l) = (R1, R2) with merit 1/2 |F|^2.
CoupledOutcome coupled_newton(const ScalarField& u_prev, ScalarField u, ScalarField l,
                              double delta, const SchemeParams& params, const Grid& g,
                              std::vector<double>& history, int step_index) {
  const NewtonConfig& cfg = params.newton;
  const double tau = params.tau();
  const int n = static_cast<int>(g.num_cells());
  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  const SparseMatrix I = detail::diagonal_matrix(Vector::Ones(n));
  const double max_dl = std::log(1.0 / cfg.kappa);
  const double tol = cfg.tol_residual;
  const double accept = params.fp_tol;

  CoupledOutcome out;
  out.state = evaluate(std::move(u), std::move(l), u_prev, delta, params, g);
  history.push_back(out.state.res);

  auto within = [&](const CoupledState& s, double t) {
    return max_abs(s.r1) <= std::max(t, out.floors[0]) &&
           max_abs(s.r2) <= std::max(t, out.floors[1]);
  };

  for (int it = 0;; ++it) {
    CoupledState& s = out.state;
    const ScalarField rho = exp_field(s.l);
    const Vector rho_v = detail::to_vector(rho);
    const SparseMatrix J12 = L * detail::diagonal_matrix(rho_v) + tau * I;
    const SparseMatrix J21 =
        detail::p_laplacian_jacobian(s.u, g, params.flux()) + delta * L + tau * I;

    Vector b1(n);
    for (int i = 0; i < n; ++i)
      b1[i] = (std::abs(s.u[i]) + std::abs(u_prev[i])) / tau + tau * std::abs(s.l[i]);
    out.floors = {detail::roundoff_floor(L, rho_v, b1),
                  detail::roundoff_floor(J21, detail::to_vector(s.u), detail::to_vector(s.l))};
    out.iterations = it;
    if (within(s, tol)) {
      out.converged = true;
      return out;
    }
    if (it == params.fp_max_iter) break;

    Vector F(2 * n);
    F.head(n) = detail::to_vector(s.r1);
    F.tail(n) = detail::to_vector(s.r2);
    const Vector d = block_newton_step(J12, J21, tau, F, step_index, history);

    double step = 1.0;
    // Only increases of ln rho are capped; decreases just move rho toward 0.
    const double dl_max = d.tail(n).maxCoeff();
    if (dl_max > max_dl) step = max_dl / dl_max;

    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.backtrack_factor) {
      ScalarField u_try = s.u;
      ScalarField l_try = s.l;
      for (int i = 0; i < n; ++i) {
        u_try[i] += step * d[i];
        l_try[i] += step * d[n + i];
      }
      CoupledState trial = evaluate(std::move(u_try), std::move(l_try), u_prev, delta, params, g);
      if (!std::isfinite(trial.merit)) continue;
      if (trial.merit <= (1.0 - 2e-4 * step) * s.merit) {
        s = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    history.push_back(s.res);
  }
  out.converged = within(out.state, accept);
  if (!out.converged)
    throw StepFailure("coupled Newton did not reach fp_tol", step_index, history);
  return out;
}

// Newton in l alone, with u = S(l) the p-Poisson solution for right-hand side l.
// Slower than coupled_newton, but the degenerate flux is only ever handled by the
// energy line search of the p-Poisson solver, so nearly flat regions of u cannot
// stall it. Merit 1/2 |R1(S(l), l)|^2.
CoupledOutcome reduced_newton(const ScalarField& u_prev, ScalarField u, ScalarField l,
                              double delta, const SchemeParams& params, const Grid& g,
                              std::vector<double>& history, int step_index) {
  const NewtonConfig& cfg = params.newton;
  const double tau = params.tau();
  const int n = static_cast<int>(g.num_cells());
  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  const SparseMatrix I = detail::diagonal_matrix(Vector::Ones(n));
  const double max_dl = std::log(1.0 / cfg.kappa);

  auto inner_solve = [&](const ScalarField& rhs, const ScalarField& start) {
    return solve_p_poisson(rhs, params.flux(), delta, tau, g, cfg, &start).field;
  };

  CoupledOutcome out;
  try {
    u = inner_solve(l, u);
  } catch (const SolverFailure&) {
    throw StepFailure("p-Poisson solve failed inside the reduced Newton iteration", step_index,
                      history);
  }
  out.state = evaluate(std::move(u), std::move(l), u_prev, delta, params, g);
  history.push_back(out.state.res);

  auto within = [&](const CoupledState& s, double t) {
    return max_abs(s.r1) <= std::max(t, out.floors[0]) &&
           max_abs(s.r2) <= std::max(t, out.floors[1]);
  };

  for (int it = 0;; ++it) {
    CoupledState& s = out.state;
    const Vector rho_v = detail::to_vector(exp_field(s.l));
    const SparseMatrix J12 = L * detail::diagonal_matrix(rho_v) + tau * I;
    const SparseMatrix J21 =
        detail::p_laplacian_jacobian(s.u, g, params.flux()) + delta * L + tau * I;
    Vector b1(n);
    for (int i = 0; i < n; ++i)
      b1[i] = (std::abs(s.u[i]) + std::abs(u_prev[i])) / tau + tau * std::abs(s.l[i]);
    out.floors = {detail::roundoff_floor(L, rho_v, b1),
                  detail::roundoff_floor(J21, detail::to_vector(s.u), detail::to_vector(s.l))};
    out.iterations = it;
    if (within(s, cfg.tol_residual)) {
      out.converged = true;
      return out;
    }
    if (it == params.fp_max_iter) break;

    Vector F = Vector::Zero(2 * n);
    F.head(n) = detail::to_vector(s.r1);
    const Vector d = block_newton_step(J12, J21, tau, F, step_index, history);

    double step = 1.0;
    const double dl_max = d.tail(n).maxCoeff();
    if (dl_max > max_dl) step = max_dl / dl_max;

    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.backtrack_factor) {
      ScalarField l_try = s.l;
      for (int i = 0; i < n; ++i) l_try[i] += step * d[n + i];
      ScalarField u_try;
      try {
        u_try = inner_solve(l_try, s.u);
      } catch (const SolverFailure&) {
        continue;
      }
      CoupledState trial = evaluate(std::move(u_try), std::move(l_try), u_prev, delta, params, g);
      if (!std::isfinite(trial.merit)) continue;
      if (trial.merit <= (1.0 - 2e-4 * step) * s.merit) {
        s = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    history.push_back(s.res);
  }
  out.converged = within(out.state, params.fp_tol);
  if (!out.converged)
    throw StepFailure("reduced Newton did not reach fp_tol", step_index, history);
  return out;
}

// Coupled Newton first; if it stalls, restart from the same point with the reduced iteration.
CoupledOutcome solve_stage(const ScalarField& u_prev, const ScalarField& u, const ScalarField& l,
                           double delta, const SchemeParams& params, const Grid& g,
                           std::vector<double>& history) {
  try {
    return coupled_newton(u_prev, u, l, delta, params, g, history, 0);
  } catch (const StepFailure&) {
    return reduced_newton(u_prev, u, l, delta, params, g, history, 0);
  }
}

StepResult finish(const ScalarField& u, const ScalarField& l, const ScalarField& u_prev,
                  const SchemeParams& params, const Grid& g) {
  StepResult r;
  r.u = u;
  r.ln_rho = l;
  r.rho = exp_field(l);
  r.coupled_residuals = coupled_residuals(u, l, u_prev, params, g);
  return r;
}

StepResult newton_step(const ScalarField& u_prev, const SchemeParams& params, const Grid& g,
                       const ScalarField* ln_rho_guess) {
  // Without a guess start from rho = 1: the balance R1 is then exact at u = u_prev.
  ScalarField l = ln_rho_guess ? *ln_rho_guess : ScalarField(g, 0.0);
  ScalarField u = u_prev;

  std::vector<double> history;
  int iterations = 0;
  if (params.delta_continuation) {
    for (double d = 1e-2; d >= 1e-6 && d > params.delta; d *= 0.5) {
      CoupledOutcome o = solve_stage(u_prev, u, l, d, params, g, history);
      iterations += o.iterations;
      u = std::move(o.state.u);
      l = std::move(o.state.l);
    }
  }
  CoupledOutcome o = solve_stage(u_prev, u, l, params.delta, params, g, history);
  iterations += o.iterations;

  StepResult r = finish(o.state.u, o.state.l, u_prev, params, g);
  r.fp_iterations = iterations;
  r.converged = o.converged;
  r.history = std::move(history);
  return r;
}

StepResult picard_step(const ScalarField& u_prev, const SchemeParams& params, const Grid& g) {
  std::vector<double> history;
  int total = 0;
  for (double theta = params.damping; theta >= 0.125; theta *= 0.5) {
    ScalarField w = u_prev;
    double first_change = -1.0;
    for (int m = 1; m <= params.fp_max_iter; ++m, ++total) {
      PicardImage img;
      try {
        img = picard_map(w, u_prev, params, g);
      } catch (const SolverFailure&) {
        break;
      }
      const double change = max_abs(img.u - w);
      if (first_change < 0.0) first_change = change;
      const ScalarField l = log_field(img.rho);
      const auto res = coupled_residuals(img.u, l, u_prev, params, g);
      history.push_back(std::max(res[0], res[1]));
      if (res[0] <= params.fp_tol && res[1] <= params.fp_tol) {
        StepResult r = finish(img.u, l, u_prev, params, g);
        r.fp_iterations = total + 1;
        r.converged = true;
        r.history = std::move(history);
        return r;
      }
      if (!std::isfinite(change) || change > 1e6 * (1.0 + first_change)) break;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - theta) * w[i] + theta * img.u[i];
    }
  }
  throw StepFailure("fixed-point iteration diverged for every damping >= 0.125", 0, history);
}

}  // namespace

PicardImage picard_map(const ScalarField& w, const ScalarField& v, const SchemeParams& params,
                       const Grid& g) {
  params.validate();
  require_conforming(w, g, "picard_map");
  require_conforming(v, g, "picard_map");
  const double tau = params.tau();
  ScalarField f = w;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = -(w[i] - v[i]) / tau;
  EllipticSolution rho = solve_log_diffusion(f, tau, g, params.newton);
  const ScalarField l = log_field(rho.field);
  EllipticSolution u = solve_p_poisson(l, params.flux(), params.delta, tau, g, params.newton);
  return {std::move(u.field), std::move(rho.field)};
}

std::array<double, 2> coupled_residuals(const ScalarField& u, const ScalarField& ln_rho,
                                        const ScalarField& u_prev, const SchemeParams& params,
                                        const Grid& g) {
  const double tau = params.tau();
  return {max_abs(time_residual(u, ln_rho, u_prev, tau, g)),
          max_abs(residual_p_poisson(u, ln_rho, params.flux(), params.delta, tau, g))};
}

StepResult rothe_step(const ScalarField& u_prev, const SchemeParams& params, const Grid& g,
                      const ScalarField* rho_guess) {
  params.validate();
  require_conforming(u_prev, g, "rothe_step");
  if (params.solver == StepSolver::Picard) return picard_step(u_prev, params, g);
  if (!rho_guess) return newton_step(u_prev, params, g, nullptr);
  require_conforming(*rho_guess, g, "rothe_step rho guess");
  const ScalarField l = log_field(*rho_guess);
  return newton_step(u_prev, params, g, &l);
}

Trajectory run_simulation(const ScalarField& u0, const SchemeParams& params, const Grid& g) {
  params.validate();
  require_conforming(u0, g, "run_simulation");
  Trajectory traj{g, params, u0, {}};
  traj.steps.reserve(static_cast<std::size_t>(params.j));
  for (int k = 1; k <= params.j; ++k) {
    const ScalarField* guess = k > 1 ? &traj.steps.back().ln_rho : nullptr;
    try {
      traj.steps.push_back(params.solver == StepSolver::Picard
                               ? picard_step(traj.u(k - 1), params, g)
                               : newton_step(traj.u(k - 1), params, g, guess));
    } catch (const StepFailure& e) {
      throw StepFailure(std::string(e.what()) + " at step " + std::to_string(k), k, e.history());
    }
  }
  return traj;
}

Interpolants eval_interpolants(const Trajectory& traj, double t) {
  const double tau = traj.tau();
  const int j = static_cast<int>(traj.steps.size());
  if (!(t > 0.0) || !(t <= traj.time(j)))
    throw DomainError("interpolants are defined for t in (0, T]");
  int k = std::clamp(static_cast<int>(std::ceil(t / tau)), 1, j);
  if (k > 1 && t <= traj.time(k - 1)) --k;
  if (k < j && t > traj.time(k)) ++k;
  const double s = (t == traj.time(k)) ? 1.0 : (t - traj.time(k - 1)) / tau;

  const ScalarField& uk = traj.u(k);
  const ScalarField& um = traj.u(k - 1);
  ScalarField ut = uk;
  for (std::size_t i = 0; i < ut.size(); ++i) ut[i] = s * uk[i] + (1.0 - s) * um[i];
  return {std::move(ut), uk, traj.steps[k - 1].rho};
}

double interpolant_distance(const Trajectory& coarse, const Trajectory& fine) {
  if (fine.steps.size() != 2 * coarse.steps.size() || !(fine.grid == coarse.grid) ||
      fine.params.T != coarse.params.T)
    throw ContractError("interpolant_distance needs runs with j and 2j steps on the same grid");
  const double tau = fine.tau();
  const double vol = fine.grid.cell_volume();
  double sum = 0.0;
  for (std::size_t i = 0; i < fine.steps.size(); ++i) {
    const ScalarField& a = fine.steps[i].u;
    const ScalarField& b = coarse.steps[i / 2].u;
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    sum += tau * vol * s;
  }
  return std::sqrt(sum);
}

RefinementReport refinement_study(const ScalarField& u0, const SchemeParams& base, int levels,
                                  const Grid& g) {
  base.validate();
  if (levels < 2) throw ConfigError("refinement needs at least two levels");
  RefinementReport rep;
  std::vector<std::optional<Trajectory>> runs(static_cast<std::size_t>(levels));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(levels));

#pragma omp parallel for schedule(dynamic, 1)
  for (int l = 0; l < levels; ++l) {
    try {
      SchemeParams p = base;
      p.j = base.j << l;
      runs[l] = run_simulation(u0, p, g);
    } catch (...) {
      errors[l] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int l = 0; l < levels; ++l) {
    const Trajectory& tr = *runs[l];
    rep.steps.push_back(tr.params.j);
    double total = 0.0;
    double rmin = std::numeric_limits<double>::infinity();
    for (const StepResult& s : tr.steps) {
      total += tr.tau() * lp_norm(s.ln_rho, g, 1.0);
      for (double r : s.rho.values()) rmin = std::min(rmin, r);
    }
    rep.entropy_totals.push_back(total);
    rep.rho_min.push_back(rmin);
    if (l > 0) rep.differences.push_back(interpolant_distance(*runs[l - 1], tr));
  }
  for (auto& r : runs) rep.trajectories.push_back(std::move(*r));
  return rep;
}

}  // namespace exprelax
