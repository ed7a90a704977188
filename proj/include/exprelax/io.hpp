#pragma once

// Locale-independent CSV output and atomic file writes.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "exprelax/diagnostics.hpp"
#include "exprelax/scheme.hpp"

namespace exprelax {

/// 17 significant digits, independent of the global locale.
std::string format_double(double v);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Header k,t,energy,mass_sq,dissipation,entropy_sq,mass,entropy_l1,rho_min,rho_max.
std::string ledger_csv(const std::vector<DiagnosticsRecord>& ledger);

/// Header x[,y],u,rho,ln_rho for step k >= 1, one row per cell in storage order.
std::string fields_csv(const Trajectory& traj, int k);

/// fields_k0007.csv style names.
std::string fields_filename(int k);

}  // namespace exprelax
