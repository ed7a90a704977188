#pragma once

// Run configuration: flat `key = value` lines with dotted section prefixes,
// '#' starts a comment. Every key is optional; unknown keys are errors.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "exprelax/mesh.hpp"
#include "exprelax/scheme.hpp"

namespace exprelax {

enum class ICFamily { Constant, Cosine, GaussianBump, StepProfile, RandomSmooth };

struct InitialCondition {
  ICFamily family = ICFamily::Cosine;
  double amplitude = 1.0;
  /// Cosine wave numbers per axis: cos(m pi x / L).
  std::array<int, 2> mode{1, 0};
  /// Gaussian standard deviation or tanh ramp width.
  double width = 0.05;
  /// Bump center / ramp location as fractions of the extent.
  std::array<double, 2> center{0.5, 0.5};
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const InitialCondition&) const = default;
};

enum class FieldOutput { None, Last, All };

struct RunConfig {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> cells{64, 64};
  SchemeParams scheme;
  InitialCondition ic;

  std::string out_dir = "out";
  FieldOutput fields = FieldOutput::Last;

  double tol_energy = 1e-8;
  double tol_mass = 1e-7;
  double tol_entropy = 1e-7;
  double eps_cut = 1e-3;

  int levels = 3;

  Grid grid() const;
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending key and line.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Every key, in a fixed order, with shortest round-trip number formatting.
std::string write_config(const RunConfig& cfg);

ScalarField build_initial_condition(const InitialCondition& ic, const Grid& g);

std::string_view to_string(ICFamily f);
std::string_view to_string(FieldOutput f);
std::string_view to_string(StepSolver s);

}  // namespace exprelax
