#include "exprelax/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "exprelax/diagnostics.hpp"
#include "exprelax/elliptic.hpp"
#include "exprelax/errors.hpp"
#include "exprelax/io.hpp"
#include "exprelax/operators.hpp"

namespace exprelax {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json config_json(const RunConfig& cfg) {
  json c = json::object();
  std::istringstream in(write_config(cfg));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return c;
}

json check_json(const CheckReport& r) {
  return {{"pass", r.pass}, {"worst", number(r.worst)}, {"worst_k", r.worst_k},
          {"per_k", numbers(r.per_k)}};
}

void write_report(const RunConfig& cfg, const json& report) {
  write_file_atomic(fs::path(cfg.out_dir) / "report.json", report.dump(2) + "\n");
}

// Runs `body`; solver failures become a report with exit status 2.
template <class Body>
int guarded(const RunConfig& cfg, const char* command, Body&& body) {
  json report = {{"command", command}, {"config", config_json(cfg)}};
  try {
    cfg.validate();
    const int status = body(report);
    write_report(cfg, report);
    return status;
  } catch (const StepFailure& e) {
    report["pass"] = false;
    report["error"] = {{"kind", "step failure"}, {"message", e.what()},
                       {"step", e.step()}, {"residual_history", numbers(e.history())}};
    write_report(cfg, report);
    return kExitSolverFailure;
  } catch (const SolverFailure& e) {
    report["pass"] = false;
    report["error"] = {{"kind", "solver failure"}, {"message", e.what()},
                       {"residual_history", numbers(e.residual_history())}};
    write_report(cfg, report);
    return kExitSolverFailure;
  } catch (const ConfigError& e) {
    report["pass"] = false;
    report["error"] = {{"kind", "config error"}, {"message", e.what()}};
    write_report(cfg, report);
    return kExitConfigError;
  }
}

json trajectory_checks(const RunConfig& cfg, const Trajectory& tr, bool& pass) {
  json checks = json::object();
  const CheckReport energy = check_energy_dissipation(tr, cfg.tol_energy);
  const CheckReport mass = check_mass_recursion(tr, cfg.tol_mass);
  const CheckReport entropy = check_entropy_identity(tr, cfg.tol_entropy);
  const CheckReport interp = check_interpolant_identity(tr, 1e-12);
  checks["energy_dissipation"] = check_json(energy);
  checks["mass_recursion"] = check_json(mass);
  checks["entropy_identity"] = check_json(entropy);
  checks["interpolant_identity"] = check_json(interp);
  pass = energy.pass && mass.pass && entropy.pass && interp.pass;
  if (tr.params.p == 2.0 && tr.params.delta == 0.0) {
    const CheckReport first = check_first_estimate(tr, 10.0 * tr.params.fp_tol);
    checks["first_estimate"] = check_json(first);
    pass = pass && first.pass;
  }
  const EntropyL1Report l1 = check_entropy_l1(tr);
  checks["entropy_l1"] = {{"total", number(l1.total)},       {"root_term", number(l1.root_term)},
                          {"mass_term", number(l1.mass_term)}, {"bound", number(l1.bound)},
                          {"flagged", l1.flagged}};
  return checks;
}

json solver_summary(const Trajectory& tr) {
  long iterations = 0;
  double r1 = 0.0, r2 = 0.0;
  for (const StepResult& s : tr.steps) {
    iterations += s.fp_iterations;
    r1 = std::max(r1, s.coupled_residuals[0]);
    r2 = std::max(r2, s.coupled_residuals[1]);
  }
  return {{"steps", tr.steps.size()},
          {"tau", number(tr.tau())},
          {"newton_iterations", iterations},
          {"max_residuals", {number(r1), number(r2)}}};
}

bool within_factor_two_of_median(std::vector<double> v) {
  if (v.empty()) return true;
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const double median = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  return std::all_of(v.begin(), v.end(),
                     [&](double x) { return x <= 2.0 * median && 2.0 * x >= median; });
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double pow_norm(std::span<const double> x, double e) {
  const double n = norm2(x);
  return n == 0.0 ? 0.0 : std::pow(n, e);
}

// Seeded sweeps of the three pointwise inequalities; each gap must be
// >= -1e-12 (1 + magnitude of the terms involved).
json inequality_sweep(int dim, std::uint64_t seed, int samples, bool& pass) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  std::uniform_real_distribution<double> log_scale(-8.0, 8.0);
  json out = json::object();
  pass = true;
  for (const auto& [label, p] : {std::pair{"p=1.1", 1.1}, {"p=1.5", 1.5}, {"p=2", 2.0}}) {
    double worst_convexity = 0.0, worst_monotonicity = 0.0;
    for (int s = 0; s < samples; ++s) {
      std::array<double, 2> x{0.0, 0.0}, y{0.0, 0.0};
      const double sx = std::pow(10.0, scale(rng)), sy = std::pow(10.0, scale(rng));
      for (int a = 0; a < dim; ++a) {
        x[a] = sx * normal(rng);
        y[a] = sy * normal(rng);
      }
      const std::span<const double> xs(x.data(), dim), ys(y.data(), dim);
      std::array<double, 2> d{x[0] - y[0], x[1] - y[1]};
      const double dn = norm2(std::span<const double>(d.data(), dim));
      const double conv_mag = pow_norm(xs, p - 1.0) * dn + (pow_norm(xs, p) + pow_norm(ys, p)) / p;
      const double mono_mag =
          std::pow(1.0 + norm2(xs) * norm2(xs) + norm2(ys) * norm2(ys), 0.5 * (2.0 - p)) *
              (pow_norm(xs, p - 1.0) + pow_norm(ys, p - 1.0)) * dn +
          (p - 1.0) * dn * dn;
      worst_convexity = std::min(worst_convexity, convexity_gap(xs, ys, p) / (1.0 + conv_mag));
      worst_monotonicity =
          std::min(worst_monotonicity, monotonicity_gap(xs, ys, p) / (1.0 + mono_mag));
    }
    const bool ok = worst_convexity >= -1e-12 && worst_monotonicity >= -1e-12;
    pass = pass && ok;
    out[label] = {{"pass", ok},
                                    {"worst_relative_convexity_gap", number(worst_convexity)},
                                    {"worst_relative_monotonicity_gap", number(worst_monotonicity)}};
  }
  double worst_log = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double a = std::pow(10.0, log_scale(rng)), b = std::pow(10.0, log_scale(rng));
    const double mag = std::abs(std::sqrt(a) - std::sqrt(b)) * std::abs(std::log(a) - std::log(b)) +
                       4.0 * std::pow(std::pow(a, 0.25) - std::pow(b, 0.25), 2);
    worst_log = std::min(worst_log, log_root_gap(a, b) / (1.0 + mag));
  }
  const bool ok = worst_log >= -1e-12;
  pass = pass && ok;
  out["log_root"] = {{"pass", ok}, {"worst_relative_gap", number(worst_log)}};
  return out;
}

json conservation_sweep(const Grid& g, const FluxParams& fp, std::uint64_t seed, bool& pass) {
  double worst_p = 0.0, worst_lap = 0.0;
  for (int s = 0; s < 100; ++s) {
    InitialCondition ic;
    ic.family = ICFamily::RandomSmooth;
    ic.seed = seed + static_cast<std::uint64_t>(s);
    const ScalarField u = build_initial_condition(ic, g);
    const double scale = 1.0 + lp_norm(u, g, 1.0);
    worst_p = std::max(worst_p, std::abs(integrate(p_laplacian(u, g, fp), g)) / scale);
    worst_lap = std::max(worst_lap, std::abs(integrate(neumann_laplacian(u, g), g)) / scale);
  }
  pass = worst_p <= 1e-12 && worst_lap <= 1e-12;
  return {{"pass", pass},
          {"worst_relative_p_laplacian", number(worst_p)},
          {"worst_relative_laplacian", number(worst_lap)}};
}

json oracle_sweep(const RunConfig& cfg, bool& pass) {
  const int n = cfg.dim == 1 ? 32 : 16;
  const std::array<int, 2> cells{n, n};
  const Grid g(cfg.dim, std::span<const double>(cfg.extent.data(), cfg.dim),
               std::span<const int>(cells.data(), cfg.dim));
  const double tau = 0.1;
  const FluxParams fp = cfg.scheme.flux();
  double worst_log = 0.0, worst_pp = 0.0, worst_estimate = -1e300;
  for (int s = 0; s < 3; ++s) {
    InitialCondition ic;
    ic.family = ICFamily::RandomSmooth;
    ic.amplitude = 0.5;
    ic.seed = cfg.ic.seed + 1000 + static_cast<std::uint64_t>(s);
    const ScalarField f = build_initial_condition(ic, g);
    const EllipticSolution a = solve_log_diffusion(f, tau, g, cfg.scheme.newton);
    const EllipticSolution b = minimize_log_diffusion_energy(f, tau, g, cfg.scheme.newton);
    worst_log = std::max(worst_log, max_abs(a.field - b.field));
    ScalarField l = a.field;
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = std::log(a.field[i]);
    worst_estimate = std::max(worst_estimate, tau * lp_norm(l, g, 2.0) - lp_norm(f, g, 2.0));
    const EllipticSolution c = solve_p_poisson(f, fp, cfg.scheme.delta, tau, g, cfg.scheme.newton);
    const EllipticSolution d =
        minimize_p_poisson_energy(f, fp, cfg.scheme.delta, tau, g, cfg.scheme.newton);
    worst_pp = std::max(worst_pp, max_abs(c.field - d.field));
  }
  pass = worst_log <= 1e-6 && worst_pp <= 1e-6 && worst_estimate <= 1e-8;
  return {{"pass", pass},
          {"max_diff_log_diffusion", number(worst_log)},
          {"max_diff_p_poisson", number(worst_pp)},
          {"max_log_estimate_excess", number(worst_estimate)}};
}

}  // namespace

int cmd_run(const RunConfig& cfg) {
  return guarded(cfg, "run", [&](json& report) {
    const Grid g = cfg.grid();
    const Trajectory tr = run_simulation(build_initial_condition(cfg.ic, g), cfg.scheme, g);
    const fs::path dir(cfg.out_dir);
    write_file_atomic(dir / "ledger.csv", ledger_csv(compute_ledger(tr)));
    if (cfg.fields != FieldOutput::None) {
      const int first = cfg.fields == FieldOutput::All ? 1 : cfg.scheme.j;
      for (int k = first; k <= cfg.scheme.j; ++k)
        write_file_atomic(dir / fields_filename(k), fields_csv(tr, k));
    }
    bool pass = true;
    report["solver"] = solver_summary(tr);
    report["checks"] = trajectory_checks(cfg, tr, pass);
    report["pass"] = pass;
    return pass ? kExitPass : kExitCheckFailure;
  });
}

int cmd_check(const RunConfig& cfg) {
  return guarded(cfg, "check", [&](json& report) {
    const Grid g = cfg.grid();
    json suites = json::object();
    bool ok_ineq = false, ok_cons = false, ok_oracle = false, ok_traj = false;
    suites["inequalities"] = inequality_sweep(cfg.dim, cfg.ic.seed, 10000, ok_ineq);
    suites["inequalities"]["pass"] = ok_ineq;
    suites["conservation"] = conservation_sweep(g, cfg.scheme.flux(), cfg.ic.seed, ok_cons);
    suites["oracle"] = oracle_sweep(cfg, ok_oracle);

    const Trajectory tr = run_simulation(build_initial_condition(cfg.ic, g), cfg.scheme, g);
    json traj = trajectory_checks(cfg, tr, ok_traj);
    traj["pass"] = ok_traj;
    suites["trajectory"] = traj;

    const bool pass = ok_ineq && ok_cons && ok_oracle && ok_traj;
    report["suites"] = suites;
    report["pass"] = pass;
    return pass ? kExitPass : kExitCheckFailure;
  });
}

int cmd_refine(const RunConfig& cfg, int levels) {
  return guarded(cfg, "refine", [&](json& report) {
    if (levels < 2) throw ConfigError("refine needs at least 2 levels");
    const Grid g = cfg.grid();
    const RefinementReport rep =
        refinement_study(build_initial_condition(cfg.ic, g), cfg.scheme, levels, g);
    const fs::path dir(cfg.out_dir);
    for (const Trajectory& tr : rep.trajectories) {
      char name[32];
      std::snprintf(name, sizeof name, "ledger_j%04d.csv", tr.params.j);
      write_file_atomic(dir / name, ledger_csv(compute_ledger(tr)));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < rep.differences.size(); ++i)
      decreasing = decreasing && rep.differences[i] < rep.differences[i - 1];
    const bool bounded = within_factor_two_of_median(rep.entropy_totals);
    report["steps"] = rep.steps;
    report["differences"] = numbers(rep.differences);
    report["entropy_totals"] = numbers(rep.entropy_totals);
    report["rho_min"] = numbers(rep.rho_min);
    report["checks"] = {{"differences_strictly_decreasing", decreasing},
                        {"entropy_within_factor_two_of_median", bounded}};
    report["pass"] = decreasing && bounded;
    return decreasing && bounded ? kExitPass : kExitCheckFailure;
  });
}

int cmd_probe(const RunConfig& cfg) {
  return guarded(cfg, "probe", [&](json& report) {
    const Grid g = cfg.grid();
    const RefinementReport rep =
        refinement_study(build_initial_condition(cfg.ic, g), cfg.scheme, cfg.levels, g);
    json levels = json::array();
    std::vector<double> rho_min, l1, sup;
    for (const Trajectory& tr : rep.trajectories) {
      const SingularReport s = detect_singular_set(tr, cfg.eps_cut);
      rho_min.push_back(s.rho_min);
      l1.push_back(s.entropy_l1_total);
      sup.push_back(s.entropy_sup);
      levels.push_back({{"j", tr.params.j},
                        {"eps_cut", number(s.eps_cut)},
                        {"vacuum_fraction", number(s.vacuum_fraction)},
                        {"entropy_l1_total", number(s.entropy_l1_total)},
                        {"entropy_sup", number(s.entropy_sup)},
                        {"entropy_l1_regular", number(s.residual_split.first)},
                        {"entropy_l1_vacuum", number(s.residual_split.second)},
                        {"rho_min", number(s.rho_min)}});
    }
    auto strictly = [](const std::vector<double>& v, bool up) {
      for (std::size_t i = 1; i < v.size(); ++i)
        if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
      return true;
    };
    const double lo = *std::min_element(l1.begin(), l1.end());
    const double hi = *std::max_element(l1.begin(), l1.end());
    report["levels"] = levels;
    report["signature"] = {{"rho_min_decreasing", strictly(rho_min, false)},
                           {"entropy_sup_increasing", strictly(sup, true)},
                           {"entropy_l1_within_factor_two", hi <= 2.0 * lo}};
    report["pass"] = true;
    return kExitPass;
  });
}

}  // namespace exprelax
