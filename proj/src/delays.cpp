#include "tdelay/delays.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "tdelay/errors.hpp"

namespace tdelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx I{0.0, 1.0};

double richardson(double d_h, double d_half) { return (4.0 * d_half - d_h) / 3.0; }

double central(const std::array<double, 5>& f, double h, DerivativeScheme scheme) {
  const double d_h = (f[4] - f[0]) / (2.0 * h);
  const double d_half = (f[3] - f[1]) / h;
  return scheme == DerivativeScheme::richardson ? richardson(d_h, d_half) : d_half;
}

double nearest(double phi, double reference, double period) {
  return phi + period * std::round((reference - phi) / period);
}

}  // namespace

SMatrixFn directional_smatrix(const PotentialSpec& spec, const SolverSettings& settings) {
  return [spec, settings](double energy) {
    return from_amplitudes(solve_at_energy(spec, energy, settings), settings.tolerance);
  };
}

double derivative_step(double energy) {
  const double h = std::max(1e-5, 1e-4 * energy);
  return std::min(h, 0.5 * energy);
}

Stencil sample_stencil(const SMatrixFn& smatrix, double energy) {
  if (!(energy > 0.0)) throw DomainError("derivative stencil needs a positive energy");
  Stencil st;
  st.energy = energy;
  st.step = derivative_step(energy);
  const std::array<double, 5> offsets{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < 5; ++i) st.s[i] = smatrix(energy + offsets[i] * st.step);
  return st;
}

MatrixDerivative s_derivative(const Stencil& st, DerivativeScheme scheme, double rel_tol) {
  const double h = st.step;
  const Matrix2c d_h = (st.s[4].matrix() - st.s[0].matrix()) / (2.0 * h);
  const Matrix2c d_half = (st.s[3].matrix() - st.s[1].matrix()) / h;
  MatrixDerivative out;
  out.error_estimate = (d_h - d_half).cwiseAbs().maxCoeff();
  out.value = scheme == DerivativeScheme::richardson ? Matrix2c((4.0 * d_half - d_h) / 3.0) : d_half;
  const double scale = std::max(1.0, out.value.cwiseAbs().maxCoeff());
  if (!(out.error_estimate <= rel_tol * scale)) {
    std::ostringstream os;
    os << "dS/dE step-halving check failed at E = " << st.energy << " Ha: change " << out.error_estimate
       << " vs scale " << scale;
    throw DerivativeError(os.str());
  }
  return out;
}

ParamDerivatives param_derivatives(const Stencil& st) {
  const SParams c = extract_params(st.center(), std::nullopt, 1e-6);
  std::array<double, 5> a{};
  std::array<double, 5> b{};
  std::array<double, 5> g{};
  for (std::size_t i = 0; i < 5; ++i) {
    const SParams p = i == 2 ? c : extract_params(st.s[i], c, 1e-6);
    a[i] = p.signed_alpha();
    b[i] = p.beta;
    g[i] = p.gamma;
  }
  ParamDerivatives d;
  d.alpha = central(a, st.step, DerivativeScheme::richardson);
  d.beta = central(b, st.step, DerivativeScheme::richardson);
  d.gamma = central(g, st.step, DerivativeScheme::richardson);
  return d;
}

std::array<double, 2> partial_delays(const SMatrix& s, const Matrix2c& ds, const EigenSystem& eig) {
  std::array<double, 2> tau{};
  for (int j = 0; j < 2; ++j) {
    const Vector2c v = eig.vector[static_cast<std::size_t>(j)].cast<cplx>();
    const cplx lam = (v.transpose() * s.matrix() * v)(0, 0);
    const cplx dlam = (v.transpose() * ds * v)(0, 0);
    tau[static_cast<std::size_t>(j)] = std::imag(dlam / lam);
  }
  return tau;
}

std::array<double, 2> partial_delays_fd(const Stencil& st, const EigenSystem& center) {
  std::array<std::array<double, 5>, 2> phase{};
  for (std::size_t i = 0; i < 5; ++i) {
    const EigenSystem e = i == 2 ? center : eigen_decompose(st.s[i], 1e-6);
    const double same = std::abs(e.vector[0].dot(center.vector[0])) + std::abs(e.vector[1].dot(center.vector[1]));
    const double swap = std::abs(e.vector[1].dot(center.vector[0])) + std::abs(e.vector[0].dot(center.vector[1]));
    const bool swapped = swap > same;
    for (std::size_t j = 0; j < 2; ++j) {
      const double p = e.phase[swapped ? 1 - j : j];
      phase[j][i] = nearest(p, center.phase[j], 2.0 * kPi);
    }
  }
  return {central(phase[0], st.step, DerivativeScheme::richardson),
          central(phase[1], st.step, DerivativeScheme::richardson)};
}

double lifetime_trace(const SMatrix& s, const Matrix2c& ds) {
  return std::real((-I * s.matrix().adjoint() * ds).trace());
}

LifetimeMatrix lifetime_matrix(const SMatrix& s, const Matrix2c& ds, double tol) {
  const Matrix2c raw = -I * s.matrix().adjoint() * ds;
  LifetimeMatrix out;
  out.energy = s.energy();
  out.q = 0.5 * (raw + raw.adjoint());
  out.antihermitian_residual = (0.5 * (raw - raw.adjoint())).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, out.q.cwiseAbs().maxCoeff());
  if (out.antihermitian_residual > 1e2 * tol * scale) {
    std::ostringstream os;
    os << "lifetime matrix not Hermitian at E = " << s.energy() << " Ha: residual " << out.antihermitian_residual;
    throw DerivativeError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix2c> solver(out.q);
  // Eigen sorts ascending.
  out.proper = {solver.eigenvalues()(1), solver.eigenvalues()(0)};
  out.w = {solver.eigenvectors().col(1), solver.eigenvectors().col(0)};
  return out;
}

Matrix2c closed_form_lifetime(const SParams& p, const ParamDerivatives& d) {
  const double sa = std::sin(p.alpha);
  const double ca = std::cos(p.alpha);
  const double g = p.effective_gamma();
  const cplx ep = std::polar(1.0, g);
  const cplx em = std::polar(1.0, -g);
  // S = e^{i beta} S0 with S0 = [[i sa e^{ig}, ca], [ca, i sa e^{-ig}]]; Q = beta' 1 - i S0^dagger S0'.
  Matrix2c s0;
  s0 << I * sa * ep, ca, ca, I * sa * em;
  Matrix2c ds0;
  ds0 << I * ep * (ca * d.alpha + I * sa * d.gamma), -sa * d.alpha, -sa * d.alpha,
      I * em * (ca * d.alpha - I * sa * d.gamma);
  const Matrix2c q = d.beta * Matrix2c::Identity() - I * s0.adjoint() * ds0;
  return 0.5 * (q + q.adjoint());
}

DelaySet closed_form_delays(const SParams& p, const ParamDerivatives& d) {
  const double sa = std::sin(p.alpha);
  const double ca = std::cos(p.alpha);
  const double g = p.effective_gamma();
  const double u = sa * std::cos(g);
  const double du = ca * std::cos(g) * d.alpha - sa * std::sin(g) * d.gamma;
  const double w = std::sqrt(std::max(0.0, 1.0 - u * u));
  DelaySet out;
  const double split = std::sqrt(d.alpha * d.alpha + sa * sa * d.gamma * d.gamma);
  out.proper = {d.beta + split, d.beta - split};
  if (w < 1e-8) {
    out.near_degenerate = std::abs(du) > 1e-8;
    out.partial = {d.beta, d.beta};
    return out;
  }
  out.partial = {d.beta + du / w, d.beta - du / w};
  return out;
}

double sum_rule_check(const SMatrix& s, const Matrix2c& ds, const DelaySet& delays, double beta_prime) {
  const double tr = lifetime_trace(s, ds);
  return std::max({std::abs(delays.partial[0] + delays.partial[1] - tr),
                   std::abs(delays.proper[0] + delays.proper[1] - tr), std::abs(tr - 2.0 * beta_prime)});
}

double dwell_time_spectral(const AmplitudeProfile& profile, std::span<const LifetimeMatrix> q_grid) {
  const std::size_t n = q_grid.size();
  if (n < 3) throw DomainError("dwell time quadrature needs at least 3 energies");
  std::vector<double> e(n);
  std::vector<double> dens(n);
  std::vector<double> expect(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = q_grid[i].energy;
    if (i > 0 && !(e[i] > e[i - 1])) throw DomainError("dwell time grid must be strictly increasing");
    const Vector2c psi = profile(e[i]);
    dens[i] = psi.squaredNorm();
    expect[i] = std::real((psi.adjoint() * q_grid[i].q * psi)(0, 0));
    peak = std::max(peak, dens[i]);
  }
  if (!(peak > 0.0)) throw DomainError("spectral profile vanishes on the grid");
  if (dens.front() > 1e-6 * peak || dens.back() > 1e-6 * peak) {
    throw DomainError("spectral profile support exceeds the energy grid");
  }

  bool uniform = (n - 1) % 2 == 0;
  const double h0 = e[1] - e[0];
  for (std::size_t i = 1; uniform && i < n; ++i) uniform = std::abs((e[i] - e[i - 1]) - h0) <= 1e-9 * std::abs(h0);
  auto integrate = [&](const std::vector<double>& f) {
    double sum = 0.0;
    if (uniform) {
      for (std::size_t i = 0; i + 2 < n; i += 2) sum += h0 / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    } else {
      for (std::size_t i = 0; i + 1 < n; ++i) sum += 0.5 * (e[i + 1] - e[i]) * (f[i] + f[i + 1]);
    }
    return sum;
  };
  const double norm = integrate(dens);
  if (std::abs(norm - 1.0) > 1e-3) {
    std::ostringstream os;
    os << "spectral profile is not normalized: integral " << norm;
    throw DomainError(os.str());
  }
  return integrate(expect);
}

DelayPoint analyze_point(const SMatrixFn& smatrix, double energy, const DelaySettings& settings) {
  DelayPoint pt;
  const Stencil st = sample_stencil(smatrix, energy);
  pt.energy = energy;
  pt.step = st.step;
  pt.s = st.center();
  pt.params = extract_params(pt.s, std::nullopt, settings.tol);
  pt.derivs = param_derivatives(st);
  pt.eig = eigen_decompose(pt.s, std::max(settings.tol, 1e-8));
  pt.ds = s_derivative(st, settings.scheme, settings.derivative_rel_tol);
  pt.q = lifetime_matrix(pt.s, pt.ds.value, settings.tol);
  pt.partial_fd = partial_delays_fd(st, pt.eig);
  if (pt.eig.root < 1e-6) {
    pt.partial = pt.partial_fd;
    pt.used_fd_fallback = true;
  } else {
    pt.partial = partial_delays(pt.s, pt.ds.value, pt.eig);
  }
  pt.closed = closed_form_delays(pt.params, pt.derivs);
  DelaySet matrix_route;
  matrix_route.partial = pt.partial;
  matrix_route.proper = pt.q.proper;
  pt.sum_rule_residual = sum_rule_check(pt.s, pt.ds.value, matrix_route, pt.derivs.beta);
  return pt;
}

}  // namespace tdelay
