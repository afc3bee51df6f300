#include "tdelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/LU>

#include "tdelay/errors.hpp"

namespace tdelay {

namespace {

constexpr cplx I{0.0, 1.0};

struct Lattice {
  double h;
  long n;  // points x_i = i*h for i in [-n, n]
};

Lattice make_lattice(const SolverSettings& s) {
  const auto n = static_cast<long>(std::llround(std::ceil(s.matching_radius / s.step - 1e-9)));
  return {s.step, std::max(n, 4L)};
}

// Solves psi_a = A e^{i q x_a} + B e^{-i q x_a}, psi_b likewise, for (A, B).
std::pair<cplx, cplx> plane_wave_fit(double q, double xa, cplx psi_a, double xb, cplx psi_b) {
  const cplx ea = std::exp(I * q * xa);
  const cplx eb = std::exp(I * q * xb);
  const cplx det = ea / eb - eb / ea;
  const cplx a = (psi_a / eb - psi_b / ea) / det;
  const cplx b = (ea * psi_b - eb * psi_a) / det;
  return {a, b};
}

std::string describe_residuals(const AmplitudeResiduals& r) {
  std::ostringstream os;
  os << "flux_left=" << r.flux_left << " flux_right=" << r.flux_right << " reciprocity=" << r.reciprocity
     << " phase_relation=" << r.phase_relation;
  return os.str();
}

}  // namespace

double numerov_wavenumber(double k, double h) {
  // cos(qh) = (1 - 5 k^2h^2/12) / (1 + k^2h^2/12), in half-angle form to avoid cancellation.
  const double kh2 = k * k * h * h;
  const double s = 0.5 * k * h / std::sqrt(1.0 + kh2 / 12.0);
  return 2.0 * std::asin(std::min(s, 1.0)) / h;
}

SolverSettings default_settings(const PotentialSpec& spec, double max_energy, ToleranceProfile profile) {
  if (!(max_energy > 0.0)) throw DomainError("default_settings: maximal energy must be positive");
  const double d = spec.length_scale();
  const double k_max = std::sqrt(2.0 * max_energy);
  const double refine = profile == ToleranceProfile::strict ? 2.0 : 1.0;
  double target = std::min(0.05 / (refine * k_max), d / (50.0 * refine));
  if (spec.has_jumps()) target = std::min(target, d / (2000.0 * refine));
  const double divisions = std::ceil(d / target - 1e-9);
  SolverSettings s;
  s.step = d / divisions;
  double radius = support_radius(spec);
  for (double p : spec.jump_points()) radius = std::max(radius, std::abs(p) + 2.0 * d);
  s.matching_radius = std::ceil(radius / s.step - 1e-9) * s.step;
  s.tolerance = profile == ToleranceProfile::strict ? 1e-10 : 1e-8;
  return s;
}

void check_settings(const SolverSettings& settings, double energy) {
  if (!(energy > 0.0)) throw DomainError("scattering energy must be positive");
  if (!(settings.step > 0.0) || !std::isfinite(settings.step)) throw DomainError("grid step must be positive");
  if (!(settings.matching_radius > 4.0 * settings.step)) throw DomainError("matching radius too small for grid step");
  if (!(settings.tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
  const double kh = std::sqrt(2.0 * energy) * settings.step;
  if (kh > 0.1) {
    std::ostringstream os;
    os << "grid step too coarse: k*h = " << kh << " > 0.1 at E = " << energy << " Ha";
    throw DomainError(os.str());
  }
}

ScatteringAmplitudes solve_at_energy(const PotentialSpec& spec, double energy, const SolverSettings& settings) {
  check_settings(settings, energy);
  const auto lat = make_lattice(settings);
  const double h = lat.h;
  const std::size_t size = static_cast<std::size_t>(2 * lat.n + 1);
  std::vector<double> x(size);
  std::vector<double> w(size);   // 1 + h^2 f / 12
  std::vector<double> c(size);   // 2 (1 - 5 h^2 f / 12)
  for (std::size_t i = 0; i < size; ++i) {
    x[i] = static_cast<double>(static_cast<long>(i) - lat.n) * h;
    const double f = 2.0 * (energy - spec(x[i]));
    w[i] = 1.0 + h * h * f / 12.0;
    c[i] = 2.0 * (1.0 - 5.0 * h * h * f / 12.0);
  }

  const double k = std::sqrt(2.0 * energy);
  const double q = numerov_wavenumber(k, h);
  std::vector<cplx> psi(size);

  ScatteringAmplitudes out;
  out.energy = energy;
  out.k = k;

  // Incidence from the left: transmitted wave e^{iqx} beyond +X, integrate towards -X.
  psi[size - 1] = std::exp(I * q * x[size - 1]);
  psi[size - 2] = std::exp(I * q * x[size - 2]);
  for (std::size_t i = size - 2; i >= 1; --i) psi[i - 1] = (c[i] * psi[i] - w[i + 1] * psi[i + 1]) / w[i - 1];
  {
    const auto [a, b] = plane_wave_fit(q, x[0], psi[0], x[1], psi[1]);
    out.t_l = 1.0 / a;
    out.r_l = b / a;
  }

  // Incidence from the right: transmitted wave e^{-iqx} beyond -X, integrate towards +X.
  psi[0] = std::exp(-I * q * x[0]);
  psi[1] = std::exp(-I * q * x[1]);
  for (std::size_t i = 1; i + 1 < size; ++i) psi[i + 1] = (c[i] * psi[i] - w[i - 1] * psi[i - 1]) / w[i + 1];
  {
    const auto [b, a] = plane_wave_fit(q, x[size - 1], psi[size - 1], x[size - 2], psi[size - 2]);
    out.t_r = 1.0 / a;
    out.r_r = b / a;
  }

  const auto res = residuals(out);
  if (!(res.max() <= 1e3 * settings.tolerance)) {
    std::ostringstream os;
    os << "scattering solution failed invariant checks at E = " << energy << " Ha: " << describe_residuals(res);
    throw ConvergenceError(os.str());
  }
  return out;
}

SMatrix solve_parity_channels(const PotentialSpec& spec, double energy, const SolverSettings& settings) {
  check_settings(settings, energy);
  using Mat = Eigen::Matrix2d;
  const auto lat = make_lattice(settings);
  const double h = lat.h;
  const long n_max = lat.n;
  const auto split = parity_split(spec);
  const double h2 = h * h;

  auto f_matrix = [&](long n) {
    const double r = static_cast<double>(n) * h;
    const double ve = split.even(r);
    const double vo = n == 0 ? 0.0 : split.odd(r);
    Mat f;
    f << 2.0 * (energy - ve), -2.0 * vo, -2.0 * vo, 2.0 * (energy - ve);
    return f;
  };
  const Mat id = Mat::Identity();

  // Regular start from the parity of the two channels: Phi_0 = diag(1, 0), phi_0'(0) = 0, phi_1(0) = 0.
  const Mat f0 = f_matrix(0);
  const Mat m0 = id + h2 * f0 / 12.0;
  Mat phi0;
  phi0 << 1.0, 0.0, 0.0, 0.0;
  const Mat y0 = m0 * phi0;
  Mat y1;
  y1.row(0) = ((id - 5.0 * h2 * f0 / 12.0) * phi0).row(0);
  y1.row(1) << 0.0, 1.0;

  // Renormalized Numerov: propagate R_n = Y_{n+1} Y_n^{-1} with R_n = U_n - R_{n-1}^{-1}.
  Mat r_inv = y0 * y1.inverse();
  Mat r = Mat::Zero();
  Mat m_prev = id;
  Mat m_last = id;
  for (long n = 1; n <= n_max - 1; ++n) {
    const Mat f = f_matrix(n);
    const Mat m = id + h2 * f / 12.0;
    const Mat u = 2.0 * (id - 5.0 * h2 * f / 12.0) * m.inverse();
    r = u - r_inv;
    r_inv = r.inverse();
    if (n == n_max - 1) m_prev = m;
  }
  m_last = id + h2 * f_matrix(n_max) / 12.0;

  // With Y_{N-1} = 1: Phi_{N-1} = M_{N-1}^{-1}, Phi_N = M_N^{-1} R_{N-1}.
  const Mat phi_a = m_prev.inverse();
  const Mat phi_b = m_last.inverse() * r;
  const double ra = static_cast<double>(n_max - 1) * h;
  const double rb = static_cast<double>(n_max) * h;
  const double q = numerov_wavenumber(std::sqrt(2.0 * energy), h);

  // phi(r) = A e^{-iqr} + B e^{+iqr}; incoming e^{-iqr}, outgoing e^{+iqr}.
  Matrix2c a;
  Matrix2c b;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto [out, in] = plane_wave_fit(q, ra, phi_a(i, j), rb, phi_b(i, j));
      b(i, j) = out;
      a(i, j) = in;
    }
  }
  const Matrix2c s = b * a.inverse();
  SMatrix result(energy, Basis::parity, s);
  if (!(std::max(result.unitarity_residual(), result.symmetry_residual()) <= 1e3 * settings.tolerance)) {
    std::ostringstream os;
    os << "parity-channel solution failed invariant checks at E = " << energy
       << " Ha: unitarity=" << result.unitarity_residual() << " symmetry=" << result.symmetry_residual();
    throw ConvergenceError(os.str());
  }
  return result;
}

ScatteringAmplitudes analytic_square_barrier(double height, double half_width, double energy) {
  if (!(energy > 0.0)) throw DomainError("analytic_square_barrier: energy must be positive");
  if (!(half_width > 0.0)) throw DomainError("analytic_square_barrier: half-width must be positive");
  const double k = std::sqrt(2.0 * energy);
  const double len = 2.0 * half_width;
  // q^2 = 2(E - U); sin(qL)/q and cos(qL) are entire in q^2, which covers E = U.
  const cplx q = std::sqrt(cplx(2.0 * (energy - height), 0.0));
  const cplx ql = q * len;
  const cplx sinc_l = std::abs(ql) < 1e-6 ? len * (1.0 - ql * ql / 6.0) : std::sin(ql) / q;
  const cplx cos_l = std::cos(ql);
  const cplx q2 = q * q;
  const cplx den = (k * k + q2) * sinc_l + 2.0 * I * k * cos_l;

  ScatteringAmplitudes out;
  out.energy = energy;
  out.k = k;
  // Barrier on [0, L] shifted by -a: t unchanged, r picks up e^{-2ika}.
  const cplx r0 = (k * k - q2) * sinc_l / den;
  out.t_l = out.t_r = 2.0 * I * k * std::exp(-I * k * len) / den;
  out.r_l = out.r_r = r0 * std::exp(-2.0 * I * k * half_width);
  return out;
}

}  // namespace tdelay
