#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdelay/potential.hpp"
#include "tdelay/solver.hpp"
#include "tdelay/units.hpp"

namespace tdelay {

inline constexpr int kConfigVersion = 1;

/// Linear grid; values already converted to atomic units.
struct Grid {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  std::vector<double> values() const;
};

struct NamedPotential {
  std::string name;
  PotentialSpec spec;
};

/// Experiment configuration, all quantities in atomic units after parsing.
struct RunConfig {
  int version = kConfigVersion;
  units::EnergyUnit energy_unit = units::EnergyUnit::ev;
  units::LengthUnit length_unit = units::LengthUnit::angstrom;
  std::vector<NamedPotential> potentials;  // spectrum/shift-scan/symmetry-test use the first
  std::optional<Grid> energy_grid;
  std::optional<Grid> displacement_grid;
  std::optional<double> energy;
  ToleranceProfile profile = ToleranceProfile::standard;
  std::optional<double> step;              // solver overrides
  std::optional<double> matching_radius;
  std::optional<double> solver_tolerance;
  double symmetry_threshold = 1e-3;
  unsigned threads = 0;
  std::string output;  // empty: stdout

  const NamedPotential& potential() const;
};

/// Parses a config document. Relative file references resolve against `base_dir`.
/// Throws ConfigError with the offending key on any problem.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// A potential description: a preset name ("V1".."V6", "free") or an object with a "kind".
PotentialSpec parse_potential(const nlohmann::json& value, units::EnergyUnit eu, units::LengthUnit lu,
                              const std::filesystem::path& base_dir = ".");

/// Preset name, a JSON file holding a potential object, or a two-column text table "x V".
NamedPotential resolve_potential(const std::string& name_or_path, units::EnergyUnit eu, units::LengthUnit lu);

/// Two-column whitespace-separated table; '#' starts a comment.
std::pair<std::vector<double>, std::vector<double>> read_table(const std::filesystem::path& path);

ToleranceProfile parse_profile(const std::string& name);
const char* to_string(ToleranceProfile profile);

/// Default solver settings for `spec` up to `max_energy`, with the config overrides applied.
SolverSettings solver_settings(const RunConfig& config, const PotentialSpec& spec, double max_energy);

}  // namespace tdelay
