#include "exprelax/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include <Eigen/SparseCholesky>

#include "assembly.hpp"

namespace exprelax {

using detail::SparseMatrix;
using detail::Vector;
using detail::roundoff_floor;

void NewtonConfig::validate() const {
  if (!(tol_residual > 0.0)) throw ConfigError("newton.tol_residual must be > 0");
  if (max_iter < 1) throw ConfigError("newton.max_iter must be >= 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ConfigError("newton.backtrack_factor must lie in (0,1)");
  if (max_backtracks < 0) throw ConfigError("newton.max_backtracks must be >= 0");
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("newton.kappa must lie in (0,1)");
}

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be > 0");
}

void require_delta(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be >= 0");
}

void require_nondegenerate(const FluxParams& fp, double delta) {
  fp.validate();
  if (delta == 0.0 && fp.p < 2.0 && fp.eps_g == 0.0)
    throw ConfigError("p < 2 with delta = 0 needs eps_g > 0");
}

bool all_positive(const ScalarField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v > 0.0; });
}

SparseMatrix log_diffusion_jacobian(const SparseMatrix& L, const ScalarField& rho, double tau) {
  Vector diag(static_cast<Eigen::Index>(rho.size()));
  for (std::size_t i = 0; i < rho.size(); ++i) diag[i] = tau / rho[i];
  return L + detail::diagonal_matrix(diag);
}

Vector solve_spd(const SparseMatrix& A, const Vector& b, const ScalarField& iterate,
                 const std::vector<double>& history) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw SolverFailure("Newton Jacobian factorization failed", iterate, history);
  Vector x = ldlt.solve(b);
  if (!x.allFinite()) throw SolverFailure("Newton step is not finite", iterate, history);
  return x;
}

// Descent oracle shared by both minimizers: limited-memory BFGS with backtracking
// on the energy. Near the optimum the energy change drops below roundoff, and the
// step is then accepted on residual decrease instead.
struct DescentProblem {
  std::function<double(const Vector&)> energy;
  std::function<Vector(const Vector&)> residual;  // per-volume gradient of the energy
  std::function<double(const Vector&, const Vector&)> max_step;
  std::function<double(const Vector&)> floor;
  double volume = 1.0;
};

EllipticSolution descend(const DescentProblem& P, Vector x, const Grid& g,
                         const NewtonConfig& cfg, const char* name) {
  constexpr std::size_t kMemory = 20;
  // Gradient methods need far more iterations than Newton for the same tolerance.
  const int max_iter = cfg.max_iter * 400;
  std::deque<std::pair<Vector, Vector>> memory;

  Vector r = P.residual(x);
  double energy = P.energy(x);
  double rn = r.cwiseAbs().maxCoeff();
  EllipticSolution sol;
  sol.residual_history.push_back(rn);
  auto target = [&] { return std::max(cfg.tol_residual, P.floor(x)); };

  int it = 0;
  for (; it < max_iter && rn > target(); ++it) {
    // Two-loop recursion for d = -H r.
    Vector q = r;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      const auto& [s, y] = memory[m];
      alpha[m] = s.dot(q) / y.dot(s);
      q -= alpha[m] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const auto& [s, y] = memory[m];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[m] - beta) * s;
    }
    Vector d = -q;
    double slope = P.volume * r.dot(d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = -r;
      slope = P.volume * r.dot(d);
    }

    double step = std::min(1.0, P.max_step(x, d));
    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks * 2; ++b, step *= cfg.backtrack_factor) {
      const Vector x_try = x + step * d;
      const double e_try = P.energy(x_try);
      if (!std::isfinite(e_try)) continue;
      Vector r_try = P.residual(x_try);
      const double rn_try = r_try.cwiseAbs().maxCoeff();
      const bool armijo = e_try <= energy + 1e-4 * step * slope;
      // Once energy differences sit in roundoff, fall back to the approximate
      // Wolfe test on the directional derivative, which has no cancellation.
      const bool unresolved = std::abs(e_try - energy) <= 1e-10 * (1.0 + std::abs(energy));
      const double slope_try = P.volume * r_try.dot(d);
      if (!armijo && !(unresolved && slope_try <= -0.8 * slope)) continue;
      memory.emplace_back(x_try - x, r_try - r);
      if (memory.back().first.dot(memory.back().second) <= 0.0) memory.pop_back();
      if (memory.size() > kMemory) memory.pop_front();
      x = x_try;
      r = std::move(r_try);
      energy = e_try;
      rn = rn_try;
      accepted = true;
      break;
    }
    sol.residual_history.push_back(rn);
    if (!accepted) {
      if (memory.empty()) break;
      memory.clear();  // retry once from steepest descent
    }
  }

  sol.field = detail::to_field(x, g);
  sol.residual_norm = rn;
  sol.roundoff_floor = P.floor(x);
  sol.iterations = it;
  sol.converged = rn <= std::max(cfg.tol_residual, sol.roundoff_floor);
  if (!sol.converged)
    throw SolverFailure(std::string(name) + " did not reach the residual tolerance", sol.field,
                        sol.residual_history);
  return sol;
}

}  // namespace

ScalarField residual_log_diffusion(const ScalarField& rho, const ScalarField& f, double tau,
                                   const Grid& g) {
  require_conforming(rho, g, "residual_log_diffusion");
  require_conforming(f, g, "residual_log_diffusion");
  if (!all_positive(rho)) throw DomainError("log-diffusion residual needs rho > 0");
  ScalarField r = neumann_laplacian(rho, g);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -r[i] + tau * std::log(rho[i]) - f[i];
  return r;
}

EllipticSolution solve_log_diffusion(const ScalarField& f, double tau, const Grid& g,
                                     const NewtonConfig& cfg, const ScalarField* initial) {
  require_tau(tau);
  cfg.validate();
  require_conforming(f, g, "solve_log_diffusion");

  ScalarField rho;
  if (initial) {
    require_conforming(*initial, g, "solve_log_diffusion initial guess");
    if (!all_positive(*initial)) throw DomainError("initial rho must be positive");
    rho = *initial;
  } else {
    const double mean = integrate(f, g) / g.domain_volume();
    const double start = std::clamp(std::exp(mean / tau), 1e-6, 1e6);
    rho = ScalarField(g, std::max(start, 1e-6));
  }

  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  const Vector fv = detail::to_vector(f);
  EllipticSolution sol;
  ScalarField r = residual_log_diffusion(rho, f, tau, g);
  double rn = max_abs(r);
  sol.residual_history.push_back(rn);

  int it = 0;
  for (;; ++it) {
    const SparseMatrix J = log_diffusion_jacobian(L, rho, tau);
    sol.roundoff_floor = roundoff_floor(J, detail::to_vector(rho), fv);
    if (rn <= std::max(cfg.tol_residual, sol.roundoff_floor) || it == cfg.max_iter) break;
    const Vector d = solve_spd(J, -detail::to_vector(r), rho, sol.residual_history);

    double step = 1.0;
    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.backtrack_factor) {
      ScalarField trial = rho;
      bool admissible = true;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i] += step * d[i];
        if (!(trial[i] >= cfg.kappa * rho[i])) {
          admissible = false;
          break;
        }
      }
      if (!admissible) continue;
      ScalarField r_try = residual_log_diffusion(trial, f, tau, g);
      const double rn_try = max_abs(r_try);
      if (!(rn_try < rn)) continue;
      rho = std::move(trial);
      r = std::move(r_try);
      rn = rn_try;
      accepted = true;
      break;
    }
    if (!accepted)
      throw SolverFailure("log-diffusion Newton line search stalled", rho,
                          sol.residual_history);
    sol.residual_history.push_back(rn);
  }

  sol.field = std::move(rho);
  sol.residual_norm = rn;
  sol.iterations = it;
  sol.converged = rn <= std::max(cfg.tol_residual, sol.roundoff_floor);
  if (!sol.converged)
    throw SolverFailure("log-diffusion Newton exceeded max_iter", sol.field,
                        sol.residual_history);
  return sol;
}

ScalarField residual_p_poisson(const ScalarField& u, const ScalarField& rhs,
                               const FluxParams& fp, double delta, double tau, const Grid& g) {
  require_conforming(u, g, "residual_p_poisson");
  require_conforming(rhs, g, "residual_p_poisson");
  require_tau(tau);
  require_delta(delta);
  ScalarField r = p_laplacian(u, g, fp);
  r *= -1.0;
  if (delta != 0.0) {
    const ScalarField lap = neumann_laplacian(u, g);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= delta * lap[i];
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += tau * u[i] - rhs[i];
  return r;
}

double log_diffusion_energy(const ScalarField& rho, const ScalarField& f, double tau,
                            const Grid& g) {
  if (!all_positive(rho)) return std::numeric_limits<double>::infinity();
  const FaceField q = face_gradient(rho, g);
  double bulk = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    bulk += tau * (rho[i] * std::log(rho[i]) - rho[i]) - f[i] * rho[i];
  return 0.5 * face_inner(q, q, g) + bulk * g.cell_volume();
}

double p_poisson_energy(const ScalarField& u, const ScalarField& rhs, const FluxParams& fp,
                        double delta, double tau, const Grid& g) {
  double e = regularized_p_energy(u, g, fp);
  if (delta != 0.0) {
    const FaceField q = face_gradient(u, g);
    e += 0.5 * delta * face_inner(q, q, g);
  }
  double bulk = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) bulk += 0.5 * tau * u[i] * u[i] - rhs[i] * u[i];
  return e + bulk * g.cell_volume();
}

EllipticSolution solve_p_poisson(const ScalarField& rhs, const FluxParams& fp, double delta,
                                 double tau, const Grid& g, const NewtonConfig& cfg,
                                 const ScalarField* initial) {
  require_tau(tau);
  require_delta(delta);
  require_nondegenerate(fp, delta);
  cfg.validate();
  require_conforming(rhs, g, "solve_p_poisson");

  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  SparseMatrix shift = detail::diagonal_matrix(Vector::Constant(rhs.size(), tau));
  EllipticSolution sol;

  ScalarField u;
  if (initial) {
    require_conforming(*initial, g, "solve_p_poisson initial guess");
    u = *initial;
  } else {
    const SparseMatrix A = (1.0 + delta) * L + shift;
    u = detail::to_field(solve_spd(A, detail::to_vector(rhs), rhs, {}), g);
  }

  const Vector rhs_v = detail::to_vector(rhs);
  ScalarField r = residual_p_poisson(u, rhs, fp, delta, tau, g);
  double rn = max_abs(r);
  double energy = p_poisson_energy(u, rhs, fp, delta, tau, g);
  sol.residual_history.push_back(rn);

  int it = 0;
  for (;; ++it) {
    const SparseMatrix J = detail::p_laplacian_jacobian(u, g, fp) + delta * L + shift;
    sol.roundoff_floor = roundoff_floor(J, detail::to_vector(u), rhs_v);
    if (rn <= std::max(cfg.tol_residual, sol.roundoff_floor) || it == cfg.max_iter) break;
    const Vector d = solve_spd(J, -detail::to_vector(r), u, sol.residual_history);
    const double slope = g.cell_volume() * detail::to_vector(r).dot(d);

    auto trial_at = [&](double step) {
      ScalarField trial = u;
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += step * d[i];
      return trial;
    };
    auto energy_at = [&](double step) {
      return p_poisson_energy(trial_at(step), rhs, fp, delta, tau, g);
    };
    const double resolution = 1e-13 * (1.0 + std::abs(energy));

    // Largest halving step with sufficient energy decrease (or an unresolvable change).
    double step = 1.0, e_step = 0.0;
    bool found = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.backtrack_factor) {
      e_step = energy_at(step);
      if (e_step <= energy + 1e-4 * step * slope || std::abs(e_step - energy) <= resolution) {
        found = true;
        break;
      }
    }
    if (!found)
      throw SolverFailure("p-Poisson Newton line search stalled", u, sol.residual_history);
    // The degenerate flux makes the full step overshoot (u -> -u near flat regions) while
    // still passing Armijo; keep halving while the energy clearly keeps dropping.
    for (int b = 0; b < cfg.max_backtracks; ++b) {
      const double e_half = energy_at(step * cfg.backtrack_factor);
      if (!(e_half < e_step - resolution)) break;
      step *= cfg.backtrack_factor;
      e_step = e_half;
    }

    // Prefer a step that also lowers the residual max-norm; a few halvings at most.
    bool accepted = false;
    double s_try = step;
    for (int extra = 0; extra <= 3 && !accepted; ++extra, s_try *= cfg.backtrack_factor) {
      ScalarField trial = trial_at(s_try);
      ScalarField r_try = residual_p_poisson(trial, rhs, fp, delta, tau, g);
      const double rn_try = max_abs(r_try);
      if (!(rn_try < rn)) continue;
      energy = p_poisson_energy(trial, rhs, fp, delta, tau, g);
      u = std::move(trial);
      r = std::move(r_try);
      rn = rn_try;
      accepted = true;
    }
    if (!accepted) {
      // Energy decreases but the residual max-norm does not: take the energy step.
      u = trial_at(step);
      r = residual_p_poisson(u, rhs, fp, delta, tau, g);
      rn = max_abs(r);
      energy = e_step;
      accepted = true;
    }
    sol.residual_history.push_back(rn);
  }

  sol.field = std::move(u);
  sol.residual_norm = rn;
  sol.iterations = it;
  sol.converged = rn <= std::max(cfg.tol_residual, sol.roundoff_floor);
  if (!sol.converged)
    throw SolverFailure("p-Poisson Newton exceeded max_iter", sol.field, sol.residual_history);
  return sol;
}

EllipticSolution minimize_log_diffusion_energy(const ScalarField& f, double tau, const Grid& g,
                                               const NewtonConfig& cfg) {
  require_tau(tau);
  cfg.validate();
  require_conforming(f, g, "minimize_log_diffusion_energy");
  DescentProblem P;
  P.volume = g.cell_volume();
  P.energy = [&](const Vector& x) { return log_diffusion_energy(detail::to_field(x, g), f, tau, g); };
  P.residual = [&](const Vector& x) {
    return detail::to_vector(residual_log_diffusion(detail::to_field(x, g), f, tau, g));
  };
  // Projection onto {rho_new >= kappa rho}.
  P.max_step = [&](const Vector& x, const Vector& d) {
    double step = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (d[i] < 0.0) step = std::min(step, (1.0 - cfg.kappa) * x[i] / -d[i]);
    return step;
  };
  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  const Vector fv = detail::to_vector(f);
  P.floor = [&](const Vector& x) {
    return roundoff_floor(log_diffusion_jacobian(L, detail::to_field(x, g), tau), x, fv);
  };
  return descend(P, Vector::Ones(static_cast<Eigen::Index>(f.size())), g, cfg,
                 "log-diffusion energy descent");
}

EllipticSolution minimize_p_poisson_energy(const ScalarField& rhs, const FluxParams& fp,
                                           double delta, double tau, const Grid& g,
                                           const NewtonConfig& cfg) {
  require_tau(tau);
  require_delta(delta);
  require_nondegenerate(fp, delta);
  cfg.validate();
  require_conforming(rhs, g, "minimize_p_poisson_energy");
  DescentProblem P;
  P.volume = g.cell_volume();
  P.energy = [&](const Vector& x) {
    return p_poisson_energy(detail::to_field(x, g), rhs, fp, delta, tau, g);
  };
  P.residual = [&](const Vector& x) {
    return detail::to_vector(residual_p_poisson(detail::to_field(x, g), rhs, fp, delta, tau, g));
  };
  P.max_step = [](const Vector&, const Vector&) { return std::numeric_limits<double>::infinity(); };
  const SparseMatrix L = detail::neg_laplacian_matrix(g);
  const SparseMatrix shift = detail::diagonal_matrix(Vector::Constant(rhs.size(), tau));
  const Vector rhs_v = detail::to_vector(rhs);
  P.floor = [&](const Vector& x) {
    const SparseMatrix J =
        detail::p_laplacian_jacobian(detail::to_field(x, g), g, fp) + delta * L + shift;
    return roundoff_floor(J, x, rhs_v);
  };
  return descend(P, Vector::Zero(static_cast<Eigen::Index>(rhs.size())), g, cfg,
                 "p-Poisson energy descent");
}

}  // namespace exprelax
