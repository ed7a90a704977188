#include <doctest.h>

#include <cmath>

#include "exprelax/diagnostics.hpp"
#include "support.hpp"

using namespace exprelax;
using testing::grid1;

namespace {

SchemeParams params(double p, double T, int j) {
  SchemeParams s;
  s.p = p;
  s.T = T;
  s.j = j;
  return s;
}

}  // namespace

TEST_CASE("rest trajectory") {
  const Grid g = grid1(16);
  const Trajectory t = run_simulation(ScalarField(g, 0.0), params(1.5, 1.0, 8), g);
  for (const DiagnosticsRecord& r : compute_ledger(t)) {
    CHECK(r.energy == 0.0);
    CHECK(r.dissipation == 0.0);
    CHECK(r.entropy_sq == 0.0);
    CHECK(r.rho_min == 1.0);
    CHECK(r.rho_max == 1.0);
  }
  const CheckReport e = check_energy_dissipation(t, 1e-8);
  CHECK(e.pass);
  for (double v : e.per_k) CHECK(v == 0.0);
  CHECK(check_mass_recursion(t, 1e-12).worst == 0.0);
  CHECK(check_entropy_identity(t, 1e-12).worst == 0.0);
  CHECK(check_entropy_l1(t).total == 0.0);
  const SingularReport s = detect_singular_set(t, 1e-3);
  CHECK(s.vacuum_fraction == 0.0);
  CHECK(s.residual_split.first == 0.0);
  CHECK(s.residual_split.second == 0.0);
}

TEST_CASE("constant trajectory") {
  const Grid g = grid1(16, 2.0);
  const SchemeParams sp = params(1.5, 1.0, 16);
  const double tau = sp.tau();
  const Trajectory t = run_simulation(ScalarField(g, 3.0), sp, g);
  const auto ledger = compute_ledger(t);
  for (const DiagnosticsRecord& r : ledger) {
    CHECK(r.energy == 0.0);
    CHECK(r.mass == doctest::Approx(3.0 * 2.0 / std::pow(1.0 + tau * tau * tau, r.k)).epsilon(1e-12));
  }
  const CheckReport e = check_energy_dissipation(t, 1e-8);
  CHECK(e.pass);
  CHECK(e.worst > 0.0);
  CHECK(check_mass_recursion(t, sp.fp_tol).pass);
  CHECK(check_entropy_identity(t, 1e-12).pass);

  // int int |ln rhobar| = tau * sum_k |Omega| tau u_k for constant data.
  double closed = 0.0;
  for (int k = 1; k <= 16; ++k) closed += tau * 2.0 * tau * 3.0 / std::pow(1.0 + tau * tau * tau, k);
  const EntropyL1Report l1 = check_entropy_l1(t);
  CHECK(l1.total == doctest::Approx(closed).epsilon(1e-10));
  CHECK_FALSE(l1.flagged);
  CHECK(detect_singular_set(t, 1e-3).vacuum_fraction == 0.0);
}

TEST_CASE("cosine trajectory") {
  const Grid g = grid1(64);
  for (double p : {1.5, 2.0}) {
    const SchemeParams sp = params(p, 1.0, 16);
    const Trajectory t = run_simulation(testing::cosine(g), sp, g);
    const auto ledger = compute_ledger(t);
    CHECK(ledger.front().dissipation > 0.0);
    for (const DiagnosticsRecord& r : ledger) {
      CHECK(r.energy >= 0.0);
      CHECK(r.entropy_l1 >= 0.0);
      CHECK(r.rho_min > 0.0);
    }

    const CheckReport e = check_energy_dissipation(t, 1e-8);
    CHECK(e.pass);
    for (std::size_t k = 1; k < e.per_k.size(); ++k) CHECK(e.per_k[k] >= e.per_k[k - 1] - 1e-12);

    CHECK(check_mass_recursion(t, 1e-7).pass);
    CHECK(check_entropy_identity(t, 1e-7).pass);

    // Summing the recursion bounds the total drift.
    const double tau = sp.tau();
    double sup_mass = std::abs(integrate(t.u0, g));
    for (const DiagnosticsRecord& r : ledger) sup_mass = std::max(sup_mass, std::abs(r.mass));
    CHECK(std::abs(ledger.back().mass - integrate(t.u0, g)) <= sp.T * tau * tau * sup_mass + sp.j * 1e-7);

    if (p == 2.0) {
      CHECK(check_first_estimate(t, 1e-10).pass);
    } else {
      CHECK_THROWS_AS(check_first_estimate(t, 1e-10), ContractError);
    }
    CHECK_FALSE(check_entropy_l1(t).flagged);
  }
}

TEST_CASE("ledger is a pure function of the trajectory") {
  const Grid g = grid1(32);
  const Trajectory t = run_simulation(testing::smooth(g, 4), params(1.5, 1.0, 8), g);
  const auto a = compute_ledger(t), b = compute_ledger(t);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].energy == b[i].energy);
    CHECK(a[i].dissipation == b[i].dissipation);
    CHECK(a[i].entropy_l1 == b[i].entropy_l1);
  }
}

TEST_CASE("singular report splits are additive") {
  const Grid g = grid1(64);
  ScalarField u0(g);
  for (int i = 0; i < 64; ++i) u0[i] = 8.0 * std::tanh((g.center(0, i) - 0.5) / 0.05);
  const Trajectory t = run_simulation(u0, params(1.5, 1.0, 8), g);
  for (double cut : {1e-6, 1e-3, 0.5, 2.0}) {
    const SingularReport s = detect_singular_set(t, cut);
    CHECK(s.vacuum_fraction >= 0.0);
    CHECK(s.vacuum_fraction <= 1.0);
    CHECK(s.residual_split.first + s.residual_split.second ==
          doctest::Approx(s.entropy_l1_total).epsilon(1e-12));
    CHECK(s.entropy_sup > 0.0);
  }
  CHECK(detect_singular_set(t, 1e300).vacuum_fraction == 1.0);
  CHECK_THROWS_AS(detect_singular_set(t, 0.0), ContractError);
}

TEST_CASE("incomplete trajectories are rejected") {
  const Grid g = grid1(16);
  Trajectory t = run_simulation(ScalarField(g, 1.0), params(1.5, 1.0, 4), g);
  t.steps.pop_back();
  CHECK_THROWS_AS(compute_ledger(t), ContractError);
  CHECK_THROWS_AS(check_entropy_l1(t), ContractError);
}
