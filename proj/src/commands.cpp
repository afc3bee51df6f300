#include "tdelay/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tdelay/analysis.hpp"
#include "tdelay/errors.hpp"
#include "tdelay/spectrum.hpp"

namespace tdelay {

using nlohmann::json;

namespace {

std::vector<double> energies_or_default(const RunConfig& c, double lo_ev) {
  if (c.energy_grid) return c.energy_grid->values();
  return linear_grid(units::ev_to_hartree(lo_ev), units::ev_to_hartree(10.0), 200);
}

std::vector<double> displacements_or_default(const RunConfig& c) {
  if (c.displacement_grid) return c.displacement_grid->values();
  return linear_grid(units::angstrom_to_bohr(-4.0), units::angstrom_to_bohr(4.0), 41);
}

double fs(double t) { return units::au_to_fs(t); }

void csv_row(std::ostringstream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_number(v);
    first = false;
  }
  os << '\n';
}

DelaySpectrum spectrum_for(const RunConfig& c, const PotentialSpec& spec, const std::vector<double>& grid,
                           SMatrixFn* fn_out = nullptr, SolverSettings* settings_out = nullptr) {
  check_energy_grid(grid);
  const SolverSettings settings = solver_settings(c, spec, grid.back() + derivative_step(grid.back()));
  SpectrumSettings ss;
  ss.threads = c.threads;
  ss.delay.scheme = settings.derivative;
  const SMatrixFn fn = directional_smatrix(spec, settings);
  if (fn_out) *fn_out = fn;
  if (settings_out) *settings_out = settings;
  return compute_spectrum(fn, grid, ss);
}

bool parity_symmetric(const PotentialSpec& spec) {
  const double scale = std::max(max_abs(spec), 1e-300);
  const double x_max = support_radius(spec);
  for (int i = 1; i <= 4000; ++i) {
    const double x = x_max * i / 4000.0;
    if (std::abs(spec(x) - spec(-x)) > 1e-14 * scale) return false;
  }
  return true;
}

class Report {
 public:
  explicit Report(std::string potential) : potential_(std::move(potential)) {}

  void add(const std::string& name, bool passed, double value, double threshold, const std::string& detail = "") {
    json j{{"check", name}, {"potential", potential_}, {"passed", passed}, {"value", value},
           {"threshold", threshold}};
    if (!detail.empty()) j["detail"] = detail;
    checks_.push_back(std::move(j));
    all_ &= passed;
  }
  void below(const std::string& name, double value, double threshold, const std::string& detail = "") {
    add(name, value < threshold, value, threshold, detail);
  }
  void fail(const std::string& name, const std::string& detail) {
    json j{{"check", name}, {"potential", potential_}, {"passed", false}, {"detail", detail}};
    checks_.push_back(std::move(j));
    all_ = false;
  }

  json& checks() { return checks_; }
  bool passed() const { return all_; }

 private:
  std::string potential_;
  json checks_ = json::array();
  bool all_ = true;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

void validate_potential(const RunConfig& c, const NamedPotential& np, Report& rep) {
  const PotentialSpec& spec = np.spec;
  const std::vector<double> grid = energies_or_default(c, 0.1);
  SMatrixFn fn;
  SolverSettings settings;
  const DelaySpectrum sp = spectrum_for(c, spec, grid, &fn, &settings);

  double flux = 0, recip = 0, phase = 0, unit = 0, sym = 0, recon = 0, sum = 0, sum_beta = 0, herm = 0;
  double env = 0, hf = 0, closed = 0, max_r = 0, collapse = 0, single = 0, asym = 0;
  for (const SpectrumPoint& p : sp.points) {
    const ScatteringAmplitudes a = solve_at_energy(spec, p.energy(), settings);
    const AmplitudeResiduals r = residuals(a);
    flux = std::max({flux, r.flux_left, r.flux_right});
    recip = std::max(recip, r.reciprocity);
    phase = std::max(phase, r.phase_relation);
    max_r = std::max({max_r, std::abs(a.r_l), std::abs(a.r_r)});
    asym = std::max(asym, channel_mixing_variant(a).asymmetry);

    const DelayPoint& pt = p.point;
    unit = std::max(unit, pt.s.unitarity_residual());
    sym = std::max(sym, pt.s.symmetry_residual());
    // An indeterminate gamma carries no information; its reflection part is bounded by sin(alpha).
    const double lost = pt.params.gamma_indeterminate ? 2.0 * std::sin(pt.params.alpha) : 0.0;
    recon = std::max(recon, (rebuild(pt.params, pt.energy).matrix() - pt.s.matrix()).cwiseAbs().maxCoeff() - lost);
    const double b2 = 2.0 * pt.derivs.beta;
    const double tr_part = p.partial[0] + p.partial[1];
    const double tr_prop = p.proper[0] + p.proper[1];
    const double sum_scale = std::max({1.0, std::abs(tr_prop), std::abs(b2)});
    sum = std::max(sum, std::abs(tr_part - tr_prop) / sum_scale);
    sum_beta = std::max({sum_beta, std::abs(tr_part - b2) / sum_scale, std::abs(tr_prop - b2) / sum_scale});
    herm = std::max(herm, pt.q.antihermitian_residual / std::max(1.0, pt.q.q.cwiseAbs().maxCoeff()));
    const double scale = std::max(1.0, std::abs(p.proper[0]));
    for (int j = 0; j < 2; ++j) {
      env = std::max({env, (p.proper[1] - p.partial[j]) / scale, (p.partial[j] - p.proper[0]) / scale});
      if (pt.eig.root > 1e-3) hf = std::max(hf, rel(p.partial[j], p.partial_fd[j]));
      closed = std::max({closed, rel(p.partial[j], p.partial_closed[j]), rel(p.proper[j], p.proper_closed[j])});
    }
    std::array<double, 2> sorted = p.partial;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    collapse = std::max(collapse, std::max(std::abs(sorted[0] - p.proper[0]), std::abs(sorted[1] - p.proper[1])) / scale);
    const auto [lo, hi] = std::minmax({p.partial[0], p.partial[1], p.proper[0], p.proper[1]});
    single = std::max(single, (hi - lo) / scale);
  }
  rep.below("flux", flux, 1e-8);
  rep.below("reciprocity", recip, 1e-8);
  rep.below("phase_relation", phase, 1e-8);
  rep.below("unitarity", unit, 1e-8);
  rep.below("symmetry", sym, 1e-8);
  rep.below("reconstruction", recon, 1e-9);
  rep.below("sum_rule", sum, 1e-8, "partial vs proper trace, relative");
  rep.below("sum_rule_beta", sum_beta, 1e-6, "traces vs 2 beta', relative");
  rep.below("hermiticity", herm, 1e-6);
  rep.below("envelope", std::max(env, 0.0), 1e-6, "relative to max(1, |tau_prop_1|)");
  rep.below("hellmann_feynman_vs_fd", hf, 1e-6);
  rep.below("closed_form_vs_matrix", closed, 1e-6);

  const bool symmetric = parity_symmetric(spec);
  const bool reflectionless = max_r < 1e-6;
  if (symmetric) rep.below("symmetric_collapse", collapse, 1e-6);
  if (reflectionless) rep.below("reflectionless_collapse", single, 1e-6);
  if (symmetric) {
    rep.below("variant_symmetric", asym, 1e-8, "symmetric potential: variant stays symmetric");
  } else if (!reflectionless) {
    rep.add("variant_asymmetric", asym > 1e-8, asym, 1e-8, "expected asymmetric: not a proper S-matrix");
  }

  // Subset checks: cross-solver, step halving and variant trace.
  const std::size_t subset = std::min<std::size_t>(20, grid.size());
  double cross = 0, conv = 0, trace = 0;
  SolverSettings fine = settings;
  fine.step = 0.5 * settings.step;
  for (std::size_t m = 0; m < subset; ++m) {
    const std::size_t i = subset == 1 ? 0 : m * (grid.size() - 1) / (subset - 1);
    const double e = grid[i];
    const SMatrix parity = solve_parity_channels(spec, e, settings);
    cross = std::max(cross, (parity.matrix() - to_parity_basis(sp.points[i].point.s).matrix()).cwiseAbs().maxCoeff());
    if (m % 4 == 0) {
      const ScatteringAmplitudes a = solve_at_energy(spec, e, settings);
      const ScatteringAmplitudes b = solve_at_energy(spec, e, fine);
      conv = std::max({conv, std::abs(a.r_l - b.r_l), std::abs(a.r_r - b.r_r), std::abs(a.t_l - b.t_l),
                       std::abs(a.t_r - b.t_r)});
    }
    const double h = derivative_step(e);
    std::array<SMatrix, 5> variants;
    const std::array<double, 5> off{-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::size_t k = 0; k < 5; ++k) variants[k] = channel_mixing_variant(solve_at_energy(spec, e + off[k] * h, settings)).matrix;
    Stencil st;
    st.energy = e;
    st.step = h;
    st.s = variants;
    const MatrixDerivative dv = s_derivative(st);
    const double tv = lifetime_trace(variants[2], dv.value);
    const double tp = sp.points[i].point.q.trace();
    trace = std::max(trace, std::abs(tv - tp) / std::max(1.0, std::abs(tp)));
  }
  rep.below("cross_solver", cross, 1e-6);
  rep.below("grid_convergence", conv, 1e-6, "step halving");
  rep.below("variant_trace", trace, 1e-8, "relative to max(1, |tr Q|)");

  if (!reflectionless) {
    const double e = c.energy.value_or(units::ev_to_hartree(2.0));
    const ShiftScan scan = shift_scan(spec, e, displacements_or_default(c), c.profile, c.threads);
    rep.below("shift_law", scan.max_shift_residual, 1e-6, "rad, mod 2 pi");
    rep.below("shift_law_derivative", scan.max_gamma_prime_residual, 1e-5);
    rep.below("shift_invariance", std::max(scan.max_alpha_change, scan.max_beta_change), 1e-6, "alpha and beta");
  }
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string spectrum_csv(const RunConfig& c) {
  const NamedPotential& np = c.potential();
  const DelaySpectrum sp = spectrum_for(c, np.spec, energies_or_default(c, 0.1));
  std::ostringstream os;
  os << "E_eV,alpha_rad,beta_rad,gamma_rad,alpha_p_fs,beta_p_fs,gamma_p_fs,tau_part_1_fs,tau_part_2_fs,"
        "tau_prop_1_fs,tau_prop_2_fs,tau_avg_fs,c_criterion_rad\n";
  for (const SpectrumPoint& p : sp.points) {
    const ParamDerivatives& d = p.derivs();
    csv_row(os, {units::hartree_to_ev(p.energy()), p.params.alpha, p.params.beta, p.params.gamma, fs(d.alpha),
                 fs(d.beta), fs(d.gamma), fs(p.partial[0]), fs(p.partial[1]), fs(p.proper[0]), fs(p.proper[1]),
                 fs(d.beta), p.c_criterion});
  }
  return os.str();
}

std::string shift_scan_csv(const RunConfig& c) {
  const NamedPotential& np = c.potential();
  const double e = c.energy.value_or(units::ev_to_hartree(2.0));
  const ShiftScan scan = shift_scan(np.spec, e, displacements_or_default(c), c.profile, c.threads);
  std::ostringstream os;
  os << "dx_A,alpha_rad,beta_rad,gamma_rad,gamma_p_fs,tau_part_1_fs,tau_part_2_fs,tau_prop_1_fs,tau_prop_2_fs,"
        "shift_residual_rad\n";
  for (const ShiftPoint& p : scan.points) {
    csv_row(os, {units::bohr_to_angstrom(p.dx), p.params.alpha, p.params.beta, p.params.gamma,
                 fs(p.point.derivs.gamma), fs(p.partial[0]), fs(p.partial[1]), fs(p.proper[0]), fs(p.proper[1]),
                 p.shift_residual});
  }
  return os.str();
}

json symmetry_report(const RunConfig& c) {
  const NamedPotential& np = c.potential();
  const DelaySpectrum sp = spectrum_for(c, np.spec, energies_or_default(c, 0.5));
  const SymmetryVerdict v = symmetry_test(sp, c.symmetry_threshold);
  json series = json::array();
  for (std::size_t i = 0; i < v.energies.size(); ++i) {
    series.push_back({{"E_eV", units::hartree_to_ev(v.energies[i])},
                      {"c_rad", std::isnan(v.c[i]) ? json(nullptr) : json(v.c[i])}});
  }
  return json{{"version", kConfigVersion},
              {"potential", np.name},
              {"verdict", to_string(v.verdict)},
              {"spread_rad", std::isnan(v.spread) ? json(nullptr) : json(v.spread)},
              {"threshold_rad", v.threshold},
              {"x_cen_A", v.x_cen ? json(units::bohr_to_angstrom(*v.x_cen)) : json(nullptr)},
              {"x_cen_fit_A", units::bohr_to_angstrom(v.x_cen_fit)},
              {"gap_mismatch", v.gap_mismatch},
              {"gaps_coincide", v.gaps_coincide},
              {"excluded_points", v.excluded},
              {"c_criterion", series}};
}

json validation_report(const RunConfig& c) {
  std::vector<NamedPotential> pots = c.potentials;
  if (pots.empty()) {
    for (const std::string& n : presets::names()) {
      if (n != "free") pots.push_back({n, presets::by_name(n)});
    }
  }
  json checks = json::array();
  bool all = true;
  for (const NamedPotential& np : pots) {
    Report rep(np.name);
    try {
      validate_potential(c, np, rep);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rep.fail("numerics", e.what());
    }
    for (json& j : rep.checks()) checks.push_back(std::move(j));
    all &= rep.passed();
  }
  return json{{"version", kConfigVersion}, {"passed", all}, {"checks", checks}};
}

}  // namespace tdelay
