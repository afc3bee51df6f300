#include "tdelay/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tdelay/errors.hpp"

namespace tdelay {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing key: ") + key);
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("expected a number for key: ") + key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(std::string("non-finite value for key: ") + key);
  return d;
}

std::optional<double> optional_number(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key);
}

std::vector<double> number_array(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_array()) throw ConfigError(std::string("expected an array for key: ") + key);
  std::vector<double> out;
  for (const json& v : obj.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("non-numeric entry in array: ") + key);
    out.push_back(v.get<double>());
  }
  return out;
}

units::EnergyUnit parse_energy_unit(const std::string& s) {
  const std::string l = lower(s);
  if (l == "ev") return units::EnergyUnit::ev;
  if (l == "hartree" || l == "ha" || l == "au") return units::EnergyUnit::hartree;
  throw ConfigError("unknown energy unit: " + s);
}

units::LengthUnit parse_length_unit(const std::string& s) {
  const std::string l = lower(s);
  if (l == "angstrom" || l == "a") return units::LengthUnit::angstrom;
  if (l == "bohr" || l == "au") return units::LengthUnit::bohr;
  throw ConfigError("unknown length unit: " + s);
}

Grid parse_grid(const json& g, const char* name, double (*convert)(double, int), int unit, bool positive) {
  if (!g.is_object()) throw ConfigError(std::string(name) + " must be an object");
  if (g.contains("spacing") && g.at("spacing") != "linear") {
    throw ConfigError(std::string(name) + ": only linear spacing is supported");
  }
  const double lo = number(g, "min");
  const double hi = number(g, "max");
  if (!g.contains("count") || !g.at("count").is_number_integer()) {
    throw ConfigError(std::string(name) + ": count must be an integer");
  }
  const long count = g.at("count").get<long>();
  if (count < 3) throw ConfigError(std::string(name) + ": count must be at least 3");
  if (!(hi > lo)) throw ConfigError(std::string(name) + ": max must exceed min");
  if (positive && !(lo > 0.0)) throw ConfigError(std::string(name) + ": values must be positive");
  return {convert(lo, unit), convert(hi, unit), static_cast<std::size_t>(count)};
}

double convert_energy(double v, int unit) { return units::to_hartree(v, static_cast<units::EnergyUnit>(unit)); }
double convert_length(double v, int unit) { return units::to_bohr(v, static_cast<units::LengthUnit>(unit)); }

std::string potential_label(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_object() && value.contains("name") && value.at("name").is_string()) return value.at("name");
  if (value.is_object() && value.contains("kind") && value.at("kind").is_string()) return value.at("kind");
  return "custom";
}

}  // namespace

std::vector<double> Grid::values() const {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  if (count > 0) g.back() = max;
  return g;
}

const NamedPotential& RunConfig::potential() const {
  if (potentials.empty()) throw ConfigError("no potential configured");
  return potentials.front();
}

std::pair<std::vector<double>, std::vector<double>> read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table: " + path.string());
  std::vector<double> x;
  std::vector<double> v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a = 0.0;
    double b = 0.0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    x.push_back(a);
    v.push_back(b);
  }
  return {std::move(x), std::move(v)};
}

PotentialSpec parse_potential(const json& value, units::EnergyUnit eu, units::LengthUnit lu, const fs::path& base_dir) {
  if (value.is_string()) return presets::by_name(value.get<std::string>());
  if (!value.is_object() || !value.contains("kind") || !value.at("kind").is_string()) {
    throw ConfigError("potential must be a preset name or an object with a \"kind\"");
  }
  const std::string kind = value.at("kind");
  auto len = [&](const char* key) { return units::to_bohr(number(value, key), lu); };
  auto en = [&](const char* key) { return units::to_hartree(number(value, key), eu); };

  if (kind == "preset") return presets::by_name(value.at("name").get<std::string>());
  if (kind == "gaussian_sum") {
    const double depth = en("depth");
    const double width = len("width");
    std::vector<GaussianTerm> terms;
    if (value.contains("terms")) {
      for (const json& t : value.at("terms")) {
        terms.push_back({number(t, "prefactor"), units::to_bohr(number(t, "center"), lu)});
      }
    } else {
      // prefactors f_{-J}..f_J at centers 2 j d
      const auto f = number_array(value, "prefactors");
      if (f.size() % 2 == 0) throw ConfigError("gaussian_sum: prefactors needs an odd count (j = -J..J)");
      const long half = static_cast<long>(f.size() / 2);
      for (long j = -half; j <= half; ++j) {
        terms.push_back({f[static_cast<std::size_t>(j + half)], 2.0 * static_cast<double>(j) * width});
      }
    }
    return PotentialSpec::gaussian_sum(depth, width, std::move(terms));
  }
  if (kind == "resonance") return PotentialSpec::resonance(len("width"), en("amplitude"));
  if (kind == "sech_well") return PotentialSpec::sech_well(len("width"));
  if (kind == "square_barrier") return PotentialSpec::square_barrier(en("height"), len("half_width"));
  if (kind == "shifted") {
    if (!value.contains("inner")) throw ConfigError("shifted potential needs \"inner\"");
    return PotentialSpec::shifted(parse_potential(value.at("inner"), eu, lu, base_dir), len("dx"));
  }
  if (kind == "tabulated") {
    std::vector<double> x;
    std::vector<double> v;
    if (value.contains("file")) {
      fs::path p = value.at("file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      std::tie(x, v) = read_table(p);
    } else {
      x = number_array(value, "x");
      v = number_array(value, "v");
    }
    for (double& xi : x) xi = units::to_bohr(xi, lu);
    for (double& vi : v) vi = units::to_hartree(vi, eu);
    OutsideTable outside = OutsideTable::zero;
    if (value.contains("outside")) {
      const std::string o = value.at("outside");
      if (o == "zero") {
        outside = OutsideTable::zero;
      } else if (o == "error") {
        outside = OutsideTable::error;
      } else {
        throw ConfigError("tabulated: outside must be \"zero\" or \"error\"");
      }
    }
    return PotentialSpec::tabulated(std::move(x), std::move(v), outside);
  }
  throw ConfigError("unknown potential kind: " + kind);
}

NamedPotential resolve_potential(const std::string& name_or_path, units::EnergyUnit eu, units::LengthUnit lu) {
  const fs::path p(name_or_path);
  if (!fs::exists(p)) return {name_or_path, presets::by_name(name_or_path)};
  if (lower(p.extension().string()) == ".json") {
    std::ifstream in(p);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
    return {potential_label(doc), parse_potential(doc, eu, lu, p.parent_path())};
  }
  auto [x, v] = read_table(p);
  for (double& xi : x) xi = units::to_bohr(xi, lu);
  for (double& vi : v) vi = units::to_hartree(vi, eu);
  return {p.filename().string(), PotentialSpec::tabulated(std::move(x), std::move(v))};
}

ToleranceProfile parse_profile(const std::string& name) {
  if (name == "default" || name == "standard") return ToleranceProfile::standard;
  if (name == "strict") return ToleranceProfile::strict;
  throw ConfigError("unknown tolerance profile: " + name);
}

const char* to_string(ToleranceProfile profile) {
  return profile == ToleranceProfile::strict ? "strict" : "default";
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    if (!doc.contains("version")) throw ConfigError("missing key: version");
    c.version = doc.at("version").get<int>();
    if (c.version != kConfigVersion) {
      throw ConfigError("unsupported config version " + std::to_string(c.version) + " (expected " +
                        std::to_string(kConfigVersion) + ")");
    }
    if (doc.contains("units")) {
      const json& u = doc.at("units");
      if (u.contains("energy")) c.energy_unit = parse_energy_unit(u.at("energy"));
      if (u.contains("length")) c.length_unit = parse_length_unit(u.at("length"));
    }
    const int eu = static_cast<int>(c.energy_unit);
    const int lu = static_cast<int>(c.length_unit);

    if (doc.contains("potential") && doc.contains("potentials")) {
      throw ConfigError("give either \"potential\" or \"potentials\", not both");
    }
    if (doc.contains("potential")) {
      const json& p = doc.at("potential");
      c.potentials.push_back({potential_label(p), parse_potential(p, c.energy_unit, c.length_unit, base_dir)});
    }
    if (doc.contains("potentials")) {
      for (const json& p : doc.at("potentials")) {
        c.potentials.push_back({potential_label(p), parse_potential(p, c.energy_unit, c.length_unit, base_dir)});
      }
    }
    if (doc.contains("energy_grid")) c.energy_grid = parse_grid(doc.at("energy_grid"), "energy_grid", convert_energy, eu, true);
    if (doc.contains("displacement_grid")) {
      c.displacement_grid = parse_grid(doc.at("displacement_grid"), "displacement_grid", convert_length, lu, false);
    }
    if (auto e = optional_number(doc, "energy")) {
      if (!(*e > 0.0)) throw ConfigError("energy must be positive");
      c.energy = units::to_hartree(*e, c.energy_unit);
    }
    if (doc.contains("tolerance_profile")) c.profile = parse_profile(doc.at("tolerance_profile"));
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      if (auto h = optional_number(s, "step")) {
        if (!(*h > 0.0)) throw ConfigError("solver.step must be positive");
        c.step = units::to_bohr(*h, c.length_unit);
      }
      if (auto x = optional_number(s, "matching_radius")) {
        if (!(*x > 0.0)) throw ConfigError("solver.matching_radius must be positive");
        c.matching_radius = units::to_bohr(*x, c.length_unit);
      }
      if (auto t = optional_number(s, "tolerance")) {
        if (!(*t > 0.0)) throw ConfigError("solver.tolerance must be positive");
        c.solver_tolerance = *t;
      }
    }
    if (auto t = optional_number(doc, "symmetry_threshold")) {
      if (!(*t > 0.0)) throw ConfigError("symmetry_threshold must be positive");
      c.symmetry_threshold = *t;
    }
    if (doc.contains("threads")) c.threads = doc.at("threads").get<unsigned>();
    if (doc.contains("output")) c.output = doc.at("output").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

SolverSettings solver_settings(const RunConfig& config, const PotentialSpec& spec, double max_energy) {
  SolverSettings s = default_settings(spec, max_energy, config.profile);
  if (config.step) s.step = *config.step;
  if (config.matching_radius) s.matching_radius = *config.matching_radius;
  if (config.step || config.matching_radius) {
    s.matching_radius = std::ceil(s.matching_radius / s.step - 1e-9) * s.step;
  }
  if (config.solver_tolerance) s.tolerance = *config.solver_tolerance;
  return s;
}

}  // namespace tdelay
