#include "exprelax/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "exprelax/errors.hpp"

namespace exprelax {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string ledger_csv(const std::vector<DiagnosticsRecord>& ledger) {
  std::string out = "k,t,energy,mass_sq,dissipation,entropy_sq,mass,entropy_l1,rho_min,rho_max\n";
  for (const DiagnosticsRecord& r : ledger) {
    out += std::to_string(r.k);
    for (double v : {r.t, r.energy, r.mass_sq, r.dissipation, r.entropy_sq, r.mass, r.entropy_l1,
                     r.rho_min, r.rho_max}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string fields_csv(const Trajectory& traj, int k) {
  if (k < 1 || k > static_cast<int>(traj.steps.size()))
    throw ContractError("fields_csv: step index out of range");
  const Grid& g = traj.grid;
  const StepResult& s = traj.steps[k - 1];
  std::string out = g.dim() == 2 ? "x,y,u,rho,ln_rho\n" : "x,u,rho,ln_rho\n";
  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) {
      const std::size_t c = g.index(i, j);
      out += format_double(g.center(0, i));
      if (g.dim() == 2) out += ',' + format_double(g.center(1, j));
      out += ',' + format_double(s.u[c]) + ',' + format_double(s.rho[c]) + ',' +
             format_double(s.ln_rho[c]) + '\n';
    }
  }
  return out;
}

std::string fields_filename(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fields_k%04d.csv", k);
  return buf;
}

}  // namespace exprelax
