#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tdelay/commands.hpp"
#include "tdelay/config.hpp"
#include "tdelay/errors.hpp"

using namespace tdelay;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TDELAY_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("tdelay_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> row(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

}  // namespace

TEST_CASE("spectrum CSV") {
  const auto r = run("spectrum --potential V2 --emin 0.5 --emax 5 --esteps 12");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 13);
  CHECK(ls[0] ==
        "E_eV,alpha_rad,beta_rad,gamma_rad,alpha_p_fs,beta_p_fs,gamma_p_fs,tau_part_1_fs,tau_part_2_fs,"
        "tau_prop_1_fs,tau_prop_2_fs,tau_avg_fs,c_criterion_rad");
  const auto first = row(ls[1]);
  REQUIRE(first.size() == 13);
  CHECK(first[0] == doctest::Approx(0.5));
  CHECK(row(ls[12])[0] == doctest::Approx(5.0));
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto v = row(ls[i]);
    // Envelope and the average of the proper delays.
    CHECK(v[7] <= v[9] + 1e-6);
    CHECK(v[8] >= v[10] - 1e-6);
    CHECK(v[11] == doctest::Approx(0.5 * (v[9] + v[10])).epsilon(1e-9));
  }
}

TEST_CASE("reruns are byte-identical") {
  const std::string args = "spectrum --potential V4 --emin 1 --emax 3 --esteps 7";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 3");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("free particle delays vanish") {
  const auto r = run("spectrum --potential free --emin 0.5 --emax 2 --esteps 4");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto v = row(ls[i]);
    for (std::size_t j = 7; j <= 11; ++j) CHECK(std::abs(v[j]) < 1e-8);
  }
}

TEST_CASE("output file") {
  const fs::path out = scratch_dir() / "spec.csv";
  const auto r = run("spectrum --potential V1 --emin 1 --emax 2 --esteps 3 --output " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("E_eV,", 0) == 0);
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("spectrum --potential V9").code == 2);
  CHECK(run("spectrum --potential V1 --esteps 2").code == 2);
  CHECK(run("spectrum --potential V1 --emin -1").code == 2);
  CHECK(run("nonsense").code == 2);
  CHECK(run("spectrum --tolerance-profile loose").code == 2);
  const auto bad = write_file("bad_version.json", R"({"version": 7, "potential": "V1"})");
  CHECK(run("spectrum --config " + bad.string()).code == 2);
  const auto garbled = write_file("garbled.json", R"({"version": 1, "potential": )");
  CHECK(run("spectrum --config " + garbled.string()).code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("config file drives a run") {
  const auto cfg = write_file("run.json", R"({
    // comments are allowed
    "version": 1,
    "units": {"energy": "eV", "length": "angstrom"},
    "potential": {"kind": "shifted", "dx": 0.5, "inner": "V1"},
    "energy_grid": {"min": 1.0, "max": 3.0, "count": 5}
  })");
  const auto r = run("spectrum --config " + cfg.string());
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 6);
  // Flags override the file.
  const auto o = run("spectrum --config " + cfg.string() + " --esteps 3");
  CHECK(lines(o.out).size() == 4);
}

TEST_CASE("symmetry-test report") {
  const auto r = run("symmetry-test --potential V3 --emin 0.5 --emax 10 --esteps 60");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("version") == 1);
  CHECK(doc.at("verdict") == "intrinsically-symmetric");
  CHECK(doc.at("x_cen_A").get<double>() == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(doc.at("c_criterion").size() == 60);

  const auto v2 = nlohmann::json::parse(run("symmetry-test --potential V2 --emin 0.5 --emax 10 --esteps 60").out);
  CHECK(v2.at("verdict") == "generically-asymmetric");
  CHECK(v2.at("x_cen_A").is_null());

  const auto v5 = nlohmann::json::parse(run("symmetry-test --potential V5 --emin 0.5 --emax 10 --esteps 20").out);
  CHECK(v5.at("verdict") == "indeterminate-single-channel");
}

TEST_CASE("shift-scan CSV") {
  const auto r = run("shift-scan --potential V2 --energy 2 --dxmin -2 --dxmax 2 --dxsteps 5");
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 6);
  CHECK(ls[0] ==
        "dx_A,alpha_rad,beta_rad,gamma_rad,gamma_p_fs,tau_part_1_fs,tau_part_2_fs,tau_prop_1_fs,tau_prop_2_fs,"
        "shift_residual_rad");
  const auto a = row(ls[1]);
  const auto b = row(ls[5]);
  CHECK(a[0] == doctest::Approx(-2.0));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-8));
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(row(ls[i])[9] < 1e-6);
}

TEST_CASE("tabulated potential from a file") {
  std::ostringstream table;
  table << "# x_A  V_eV\n";
  for (int i = 0; i <= 400; ++i) {
    const double x = -10.0 + 0.05 * i;
    table << x << " " << -2.0 * std::exp(-x * x) << "\n";
  }
  const auto file = write_file("gauss.dat", table.str());
  const auto r = run("spectrum --potential " + file.string() + " --emin 0.5 --emax 4 --esteps 5");
  REQUIRE(r.code == 0);
  const auto g = run("spectrum --emin 0.5 --emax 4 --esteps 5 --potential " +
                     write_file("gauss.json", R"({"kind": "gaussian_sum", "depth": 2, "width": 1, "terms": [{"prefactor": 1, "center": 0}]})")
                         .string());
  REQUIRE(g.code == 0);
  // Interpolated table and analytic Gaussian give close delays.
  const auto lt = lines(r.out);
  const auto lg = lines(g.out);
  for (std::size_t i = 1; i < lt.size(); ++i) {
    CHECK(row(lt[i])[9] == doctest::Approx(row(lg[i])[9]).epsilon(2e-2));
  }
}

TEST_CASE("validate: default suite passes, a coarse step fails") {
  const auto r = run("validate --potential V1 --emin 0.5 --emax 5 --esteps 12");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("passed") == true);
  CHECK(doc.at("checks").size() > 10);

  const auto cfg = write_file("coarse.json", R"({"version": 1, "potential": "V2", "solver": {"step": 0.2},
    "energy_grid": {"min": 0.5, "max": 5, "count": 6}})");
  const auto bad = run("validate --config " + cfg.string());
  CHECK(bad.code == 1);
  CHECK(nlohmann::json::parse(bad.out).at("passed") == false);
}

TEST_CASE("in-process config parsing") {
  using nlohmann::json;
  const auto c = parse_config(json::parse(R"({"version": 1, "potentials": ["V1", "V2"], "energy": 3,
    "units": {"energy": "hartree", "length": "bohr"}, "tolerance_profile": "strict",
    "displacement_grid": {"min": -1, "max": 1, "count": 3}})"));
  CHECK(c.potentials.size() == 2);
  CHECK(c.potentials[1].name == "V2");
  CHECK(*c.energy == 3.0);
  CHECK(c.profile == ToleranceProfile::strict);
  CHECK(c.displacement_grid->values() == std::vector<double>{-1.0, 0.0, 1.0});

  CHECK_THROWS_AS(parse_config(json::parse(R"({"potential": "V1"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 1, "potential": "V1", "potentials": ["V2"]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 1, "energy_grid": {"min": 1, "max": 2, "count": 3, "spacing": "log"}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 1, "energy_grid": {"min": 0, "max": 2, "count": 3}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 1, "energy": "two"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 1, "units": {"energy": "joule"}})")), ConfigError);
  CHECK_THROWS_AS(parse_potential(json::parse(R"({"kind": "gaussian_sum", "depth": 1, "width": 1, "prefactors": [1, 1]})"),
                                  units::EnergyUnit::ev, units::LengthUnit::angstrom),
                  ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(std::nan("")) == "nan");
}
