#include "exprelax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "exprelax/errors.hpp"

namespace exprelax {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view s) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("cannot parse '" + std::string(s) + "' as a number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError("value must be finite");
  }
  return v;
}

template <class T>
std::array<T, 2> parse_pair(std::string_view s) {
  std::vector<T> items;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    items.push_back(parse_number<T>(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (items.size() == 1) return {items[0], items[0]};
  if (items.size() == 2) return {items[0], items[1]};
  throw ConfigError("expected one or two comma-separated values");
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected true or false");
}

template <class T>
std::string format(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
std::string format_pair(const std::array<T, 2>& a) {
  return format(a[0]) + "," + format(a[1]);
}

std::string_view require_nonempty(std::string_view v) {
  v = trim(v);
  if (v.empty()) throw ConfigError("value must not be empty");
  return v;
}

ICFamily parse_family(std::string_view s) {
  for (ICFamily f : {ICFamily::Constant, ICFamily::Cosine, ICFamily::GaussianBump,
                     ICFamily::StepProfile, ICFamily::RandomSmooth})
    if (to_string(f) == s) return f;
  throw ConfigError("unknown family '" + std::string(s) +
                    "' (constant, cosine, gaussian-bump, step-profile, random-smooth)");
}

FieldOutput parse_fields(std::string_view s) {
  for (FieldOutput f : {FieldOutput::None, FieldOutput::Last, FieldOutput::All})
    if (to_string(f) == s) return f;
  throw ConfigError("expected none, last or all");
}

StepSolver parse_solver(std::string_view s) {
  for (StepSolver f : {StepSolver::Newton, StepSolver::Picard})
    if (to_string(f) == s) return f;
  throw ConfigError("expected newton or picard");
}

void positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be > 0");
}

struct Key {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"grid.dim",
       {[](RunConfig& c, std::string_view v) {
          c.dim = parse_number<int>(v);
          if (c.dim != 1 && c.dim != 2) throw ConfigError("dimension must be 1 or 2");
        },
        [](const RunConfig& c) { return format(c.dim); }}},
      {"grid.cells",
       {[](RunConfig& c, std::string_view v) {
          c.cells = parse_pair<int>(v);
          if (c.cells[0] < 2 || c.cells[1] < 2) throw ConfigError("need at least 2 cells per axis");
        },
        [](const RunConfig& c) { return format_pair(c.cells); }}},
      {"grid.extent",
       {[](RunConfig& c, std::string_view v) {
          c.extent = parse_pair<double>(v);
          positive(std::min(c.extent[0], c.extent[1]), "extent");
        },
        [](const RunConfig& c) { return format_pair(c.extent); }}},
      {"scheme.p",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.p = parse_number<double>(v);
          FluxParams{c.scheme.p, 0.0}.validate();
        },
        [](const RunConfig& c) { return format(c.scheme.p); }}},
      {"scheme.T",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.T = parse_number<double>(v);
          positive(c.scheme.T, "T");
        },
        [](const RunConfig& c) { return format(c.scheme.T); }}},
      {"scheme.j",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.j = parse_number<int>(v);
          if (c.scheme.j < 1) throw ConfigError("j must be >= 1");
        },
        [](const RunConfig& c) { return format(c.scheme.j); }}},
      {"scheme.delta",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.delta = parse_number<double>(v);
          if (c.scheme.delta < 0.0) throw ConfigError("delta must be >= 0");
        },
        [](const RunConfig& c) { return format(c.scheme.delta); }}},
      {"scheme.eps_g",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.eps_g = parse_number<double>(v);
          if (c.scheme.eps_g < 0.0) throw ConfigError("eps_g must be >= 0");
        },
        [](const RunConfig& c) { return format(c.scheme.eps_g); }}},
      {"scheme.fp_tol",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.fp_tol = parse_number<double>(v);
          positive(c.scheme.fp_tol, "fp_tol");
        },
        [](const RunConfig& c) { return format(c.scheme.fp_tol); }}},
      {"scheme.fp_max_iter",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.fp_max_iter = parse_number<int>(v);
          if (c.scheme.fp_max_iter < 1) throw ConfigError("fp_max_iter must be >= 1");
        },
        [](const RunConfig& c) { return format(c.scheme.fp_max_iter); }}},
      {"scheme.damping",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.damping = parse_number<double>(v);
          if (!(c.scheme.damping > 0.0 && c.scheme.damping <= 1.0))
            throw ConfigError("damping must lie in (0,1]");
        },
        [](const RunConfig& c) { return format(c.scheme.damping); }}},
      {"scheme.solver",
       {[](RunConfig& c, std::string_view v) { c.scheme.solver = parse_solver(trim(v)); },
        [](const RunConfig& c) { return std::string(to_string(c.scheme.solver)); }}},
      {"scheme.delta_continuation",
       {[](RunConfig& c, std::string_view v) { c.scheme.delta_continuation = parse_bool(v); },
        [](const RunConfig& c) {
          return std::string(c.scheme.delta_continuation ? "true" : "false");
        }}},
      {"newton.tol_residual",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.newton.tol_residual = parse_number<double>(v);
          positive(c.scheme.newton.tol_residual, "tol_residual");
        },
        [](const RunConfig& c) { return format(c.scheme.newton.tol_residual); }}},
      {"newton.max_iter",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.newton.max_iter = parse_number<int>(v);
          if (c.scheme.newton.max_iter < 1) throw ConfigError("max_iter must be >= 1");
        },
        [](const RunConfig& c) { return format(c.scheme.newton.max_iter); }}},
      {"newton.backtrack_factor",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.newton.backtrack_factor = parse_number<double>(v);
          const double b = c.scheme.newton.backtrack_factor;
          if (!(b > 0.0 && b < 1.0)) throw ConfigError("backtrack_factor must lie in (0,1)");
        },
        [](const RunConfig& c) { return format(c.scheme.newton.backtrack_factor); }}},
      {"newton.max_backtracks",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.newton.max_backtracks = parse_number<int>(v);
          if (c.scheme.newton.max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
        },
        [](const RunConfig& c) { return format(c.scheme.newton.max_backtracks); }}},
      {"newton.kappa",
       {[](RunConfig& c, std::string_view v) {
          c.scheme.newton.kappa = parse_number<double>(v);
          const double k = c.scheme.newton.kappa;
          if (!(k > 0.0 && k < 1.0)) throw ConfigError("kappa must lie in (0,1)");
        },
        [](const RunConfig& c) { return format(c.scheme.newton.kappa); }}},
      {"ic.family",
       {[](RunConfig& c, std::string_view v) { c.ic.family = parse_family(trim(v)); },
        [](const RunConfig& c) { return std::string(to_string(c.ic.family)); }}},
      {"ic.amplitude",
       {[](RunConfig& c, std::string_view v) { c.ic.amplitude = parse_number<double>(v); },
        [](const RunConfig& c) { return format(c.ic.amplitude); }}},
      {"ic.mode",
       {[](RunConfig& c, std::string_view v) {
          c.ic.mode = parse_pair<int>(v);
          if (c.ic.mode[0] < 0 || c.ic.mode[1] < 0) throw ConfigError("modes must be >= 0");
        },
        [](const RunConfig& c) { return format_pair(c.ic.mode); }}},
      {"ic.width",
       {[](RunConfig& c, std::string_view v) {
          c.ic.width = parse_number<double>(v);
          positive(c.ic.width, "width");
        },
        [](const RunConfig& c) { return format(c.ic.width); }}},
      {"ic.center",
       {[](RunConfig& c, std::string_view v) { c.ic.center = parse_pair<double>(v); },
        [](const RunConfig& c) { return format_pair(c.ic.center); }}},
      {"ic.seed",
       {[](RunConfig& c, std::string_view v) { c.ic.seed = parse_number<std::uint64_t>(v); },
        [](const RunConfig& c) { return format(c.ic.seed); }}},
      {"output.dir",
       {[](RunConfig& c, std::string_view v) { c.out_dir = std::string(require_nonempty(v)); },
        [](const RunConfig& c) { return c.out_dir; }}},
      {"output.fields",
       {[](RunConfig& c, std::string_view v) { c.fields = parse_fields(trim(v)); },
        [](const RunConfig& c) { return std::string(to_string(c.fields)); }}},
      {"diag.tol_energy",
       {[](RunConfig& c, std::string_view v) {
          c.tol_energy = parse_number<double>(v);
          positive(c.tol_energy, "tol_energy");
        },
        [](const RunConfig& c) { return format(c.tol_energy); }}},
      {"diag.tol_mass",
       {[](RunConfig& c, std::string_view v) {
          c.tol_mass = parse_number<double>(v);
          positive(c.tol_mass, "tol_mass");
        },
        [](const RunConfig& c) { return format(c.tol_mass); }}},
      {"diag.tol_entropy",
       {[](RunConfig& c, std::string_view v) {
          c.tol_entropy = parse_number<double>(v);
          positive(c.tol_entropy, "tol_entropy");
        },
        [](const RunConfig& c) { return format(c.tol_entropy); }}},
      {"diag.eps_cut",
       {[](RunConfig& c, std::string_view v) {
          c.eps_cut = parse_number<double>(v);
          positive(c.eps_cut, "eps_cut");
        },
        [](const RunConfig& c) { return format(c.eps_cut); }}},
      {"refine.levels",
       {[](RunConfig& c, std::string_view v) {
          c.levels = parse_number<int>(v);
          if (c.levels < 2) throw ConfigError("levels must be >= 2");
        },
        [](const RunConfig& c) { return format(c.levels); }}},
  };
  return table;
}

}  // namespace

std::string_view to_string(ICFamily f) {
  switch (f) {
    case ICFamily::Constant: return "constant";
    case ICFamily::Cosine: return "cosine";
    case ICFamily::GaussianBump: return "gaussian-bump";
    case ICFamily::StepProfile: return "step-profile";
    case ICFamily::RandomSmooth: return "random-smooth";
  }
  return "?";
}

std::string_view to_string(FieldOutput f) {
  switch (f) {
    case FieldOutput::None: return "none";
    case FieldOutput::Last: return "last";
    case FieldOutput::All: return "all";
  }
  return "?";
}

std::string_view to_string(StepSolver s) {
  return s == StepSolver::Picard ? "picard" : "newton";
}

void InitialCondition::validate() const {
  if (!std::isfinite(amplitude)) throw ConfigError("ic.amplitude must be finite");
  if (mode[0] < 0 || mode[1] < 0) throw ConfigError("ic.mode must be >= 0");
  if (!(width > 0.0)) throw ConfigError("ic.width must be > 0");
  for (double c : center)
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("ic.center must lie in [0,1]");
}

Grid RunConfig::grid() const {
  return Grid(dim, std::span<const double>(extent.data(), dim),
              std::span<const int>(cells.data(), dim));
}

void RunConfig::validate() const {
  (void)grid();
  scheme.validate();
  ic.validate();
  if (out_dir.empty()) throw ConfigError("output.dir must not be empty");
  if (levels < 2) throw ConfigError("refine.levels must be >= 2");
}

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected 'key = value', got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& kv) { return kv.first == key; });
    if (it == table.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + key + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string write_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, k] : keys()) out += key + " = " + k.get(cfg) + "\n";
  return out;
}

ScalarField build_initial_condition(const InitialCondition& ic, const Grid& g) {
  ic.validate();
  ScalarField u(g);
  const int d = g.dim();
  auto coord = [&](int axis, int i) { return g.center(axis, i); };

  std::vector<double> coeff;
  constexpr int kModes = 5;
  if (ic.family == ICFamily::RandomSmooth) {
    std::mt19937_64 rng(ic.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int m = 0; m < kModes; ++m)
      for (int n = 0; n < (d == 2 ? kModes : 1); ++n)
        coeff.push_back(ic.amplitude * normal(rng) / (1.0 + m * m + n * n));
  }

  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) {
      const double x = coord(0, i);
      const double y = d == 2 ? coord(1, j) : 0.0;
      const double lx = g.extent(0), ly = g.extent(1);
      double v = 0.0;
      switch (ic.family) {
        case ICFamily::Constant:
          v = ic.amplitude;
          break;
        case ICFamily::Cosine:
          v = ic.amplitude * std::cos(ic.mode[0] * M_PI * x / lx);
          if (d == 2) v *= std::cos(ic.mode[1] * M_PI * y / ly);
          break;
        case ICFamily::GaussianBump: {
          double r2 = (x - ic.center[0] * lx) * (x - ic.center[0] * lx);
          if (d == 2) r2 += (y - ic.center[1] * ly) * (y - ic.center[1] * ly);
          v = ic.amplitude * std::exp(-r2 / (2.0 * ic.width * ic.width));
          break;
        }
        case ICFamily::StepProfile:
          v = ic.amplitude * std::tanh((x - ic.center[0] * lx) / ic.width);
          break;
        case ICFamily::RandomSmooth: {
          std::size_t c = 0;
          for (int m = 0; m < kModes; ++m)
            for (int n = 0; n < (d == 2 ? kModes : 1); ++n)
              v += coeff[c++] * std::cos(m * M_PI * x / lx) * std::cos(n * M_PI * y / ly);
          break;
        }
      }
      u[g.index(i, j)] = v;
    }
  }
  return u;
}

}  // namespace exprelax
