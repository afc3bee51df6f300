// tdelay: S-matrices and time delays for 1D short-range potentials.
//
//   tdelay spectrum      --potential V2 --emin 0.1 --emax 10 --esteps 200
//   tdelay shift-scan    --potential V1 --energy 2 --dxmin -4 --dxmax 4 --dxsteps 41
//   tdelay symmetry-test --potential V3
//   tdelay validate      [--config suite.json]

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tdelay/commands.hpp"
#include "tdelay/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::string output;
  std::string potential;
  std::optional<double> emin, emax, energy, dxmin, dxmax;
  std::optional<std::size_t> esteps, dxsteps;
  std::string profile;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--output", f.output, "output file (default: stdout)");
  cmd->add_option("--potential", f.potential, "V1..V6, free, a .json potential or a two-column table");
  cmd->add_option("--tolerance-profile", f.profile, "strict or default")
      ->check(CLI::IsMember({"strict", "default"}));
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
}

void add_energy_grid(CLI::App* cmd, Flags& f) {
  cmd->add_option("--emin", f.emin, "lowest energy (config units, default eV)");
  cmd->add_option("--emax", f.emax, "highest energy");
  cmd->add_option("--esteps", f.esteps, "number of energies");
}

tdelay::Grid merge_grid(const std::optional<tdelay::Grid>& base, std::optional<double> lo, std::optional<double> hi,
                        std::optional<std::size_t> n, const std::function<double(double)>& convert,
                        tdelay::Grid fallback) {
  tdelay::Grid g = base.value_or(fallback);
  if (lo) g.min = convert(*lo);
  if (hi) g.max = convert(*hi);
  if (n) g.count = *n;
  if (g.count < 3) throw tdelay::ConfigError("grid needs at least 3 points");
  if (!(g.max > g.min)) throw tdelay::ConfigError("grid max must exceed min");
  return g;
}

tdelay::RunConfig build_config(const Flags& f) {
  using namespace tdelay;
  RunConfig c = f.config.empty() ? parse_config(nlohmann::json{{"version", kConfigVersion}}) : load_config(f.config);
  const auto eu = c.energy_unit;
  const auto lu = c.length_unit;
  auto to_e = [eu](double v) { return units::to_hartree(v, eu); };
  auto to_l = [lu](double v) { return units::to_bohr(v, lu); };

  if (!f.potential.empty()) c.potentials = {resolve_potential(f.potential, eu, lu)};
  if (f.emin || f.emax || f.esteps) {
    c.energy_grid = merge_grid(c.energy_grid, f.emin, f.emax, f.esteps, to_e,
                               {units::ev_to_hartree(0.1), units::ev_to_hartree(10.0), 200});
    if (!(c.energy_grid->min > 0.0)) throw ConfigError("energies must be positive");
  }
  if (f.dxmin || f.dxmax || f.dxsteps) {
    c.displacement_grid = merge_grid(c.displacement_grid, f.dxmin, f.dxmax, f.dxsteps, to_l,
                                     {units::angstrom_to_bohr(-4.0), units::angstrom_to_bohr(4.0), 41});
  }
  if (f.energy) {
    if (!(*f.energy > 0.0)) throw ConfigError("--energy must be positive");
    c.energy = to_e(*f.energy);
  }
  if (!f.profile.empty()) c.profile = parse_profile(f.profile);
  if (f.threads) c.threads = *f.threads;
  if (!f.output.empty()) c.output = f.output;
  return c;
}

void emit(const tdelay::RunConfig& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw tdelay::ConfigError("cannot write output file: " + c.output);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-matrices and scattering time delays for 1D short-range potentials"};
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "delays and parameters over an energy grid (CSV)");
  add_common(spectrum, f);
  add_energy_grid(spectrum, f);

  auto* shift = app.add_subcommand("shift-scan", "parameters and delays against potential displacement (CSV)");
  add_common(shift, f);
  shift->add_option("--energy", f.energy, "scattering energy (default 2 eV)");
  shift->add_option("--dxmin", f.dxmin, "smallest displacement (config units, default Angstrom)");
  shift->add_option("--dxmax", f.dxmax, "largest displacement");
  shift->add_option("--dxsteps", f.dxsteps, "number of displacements");

  auto* symmetry = app.add_subcommand("symmetry-test", "intrinsic-symmetry verdict (JSON)");
  add_common(symmetry, f);
  add_energy_grid(symmetry, f);

  auto* validate = app.add_subcommand("validate", "invariant suite (JSON); exit 1 if any check fails");
  add_common(validate, f);
  add_energy_grid(validate, f);
  validate->add_option("--energy", f.energy, "energy of the shift-law check (default 2 eV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? tdelay::kExitOk : tdelay::kExitConfigError;
  }

  try {
    const tdelay::RunConfig c = build_config(f);
    if (spectrum->parsed()) {
      emit(c, tdelay::spectrum_csv(c));
    } else if (shift->parsed()) {
      emit(c, tdelay::shift_scan_csv(c));
    } else if (symmetry->parsed()) {
      emit(c, tdelay::symmetry_report(c).dump(2) + "\n");
    } else {
      const nlohmann::json report = tdelay::validation_report(c);
      emit(c, report.dump(2) + "\n");
      return report.at("passed").get<bool>() ? tdelay::kExitOk : tdelay::kExitValidationFailed;
    }
    return tdelay::kExitOk;
  } catch (const tdelay::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tdelay::kExitConfigError;
  } catch (const tdelay::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return tdelay::kExitNumericalFailure;
  }
}
