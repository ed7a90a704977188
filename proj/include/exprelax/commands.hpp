#pragma once

// The four command-line actions. Each writes report.json (plus CSV artifacts)
// into cfg.out_dir and returns the process exit status.

#include "exprelax/config.hpp"

namespace exprelax {

enum ExitStatus : int {
  kExitPass = 0,
  kExitCheckFailure = 1,
  kExitSolverFailure = 2,
  kExitConfigError = 3,
};

/// Simulate, write ledger.csv, field snapshots and the trajectory checks.
int cmd_run(const RunConfig& cfg);

/// Operator inequality sweeps, discrete conservation, solver-vs-oracle
/// agreement and the trajectory checks.
int cmd_check(const RunConfig& cfg);

/// Runs j, 2j, ..., 2^(levels-1) j; passes iff the interpolant differences
/// strictly decrease and the entropy totals stay within a factor 2 of their median.
int cmd_refine(const RunConfig& cfg, int levels);

/// Singular-set report per refinement level. Report only: exits 0 once every level completes.
int cmd_probe(const RunConfig& cfg);

}  // namespace exprelax
