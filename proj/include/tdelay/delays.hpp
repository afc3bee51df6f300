#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "tdelay/smatrix.hpp"
#include "tdelay/solver.hpp"

namespace tdelay {

using SMatrixFn = std::function<SMatrix(double energy)>;

/// Directional S-matrix of `spec` as a function of energy, with fixed solver settings.
SMatrixFn directional_smatrix(const PotentialSpec& spec, const SolverSettings& settings);

/// h = max(1e-5 Ha, 1e-4 E).
double derivative_step(double energy);

/// S at E - h, E - h/2, E, E + h/2, E + h.
struct Stencil {
  double energy = 0.0;
  double step = 0.0;
  std::array<SMatrix, 5> s;

  const SMatrix& center() const { return s[2]; }
};

Stencil sample_stencil(const SMatrixFn& smatrix, double energy);

struct MatrixDerivative {
  Matrix2c value = Matrix2c::Zero();
  /// |D(h) - D(h/2)|_max, the step-halving change of the central difference.
  double error_estimate = 0.0;
};

/// Central difference of the matrix elements; with the Richardson scheme, the h and h/2
/// differences are combined as (4 D(h/2) - D(h))/3. Throws DerivativeError when the
/// step-halving change exceeds `rel_tol` * max(1, |D|).
MatrixDerivative s_derivative(const Stencil& stencil, DerivativeScheme scheme = DerivativeScheme::richardson,
                              double rel_tol = 1e-3);

/// Energy derivatives of alpha (canonical), beta and gamma (continued through reflection zeros).
struct ParamDerivatives {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

ParamDerivatives param_derivatives(const Stencil& stencil);

/// Partial delays tau_j = Im[e^{-i s_j} v_j^T S' v_j] (eigenvalue derivative along a real eigenvector).
std::array<double, 2> partial_delays(const SMatrix& s, const Matrix2c& ds, const EigenSystem& eig);

/// Partial delays by differencing eigenphases over the stencil, channels matched by eigenvector overlap.
std::array<double, 2> partial_delays_fd(const Stencil& stencil, const EigenSystem& center);

/// Smith's lifetime matrix Q = -i S^dagger S', Hermitized, with proper delays q_1 >= q_2.
struct LifetimeMatrix {
  double energy = 0.0;
  Matrix2c q = Matrix2c::Zero();
  std::array<double, 2> proper{};
  std::array<Vector2c, 2> w{Vector2c(1.0, 0.0), Vector2c(0.0, 1.0)};
  double antihermitian_residual = 0.0;

  double trace() const { return proper[0] + proper[1]; }
};

/// Throws DerivativeError if the anti-Hermitian part exceeds 1e2 * tol * max(1, |Q|).
LifetimeMatrix lifetime_matrix(const SMatrix& s, const Matrix2c& ds, double tol = 1e-8);

/// Q from (alpha, beta, gamma) and their derivatives: beta' 1 plus the traceless closed form.
Matrix2c closed_form_lifetime(const SParams& params, const ParamDerivatives& d);

struct DelaySet {
  std::array<double, 2> partial{};
  std::array<double, 2> proper{};
  bool near_degenerate = false;
};

/// partial_{1,2} = beta' +- (cos a cos g a' - sin a sin g g') / sqrt(1 - cos^2 g sin^2 a)
/// proper_{1,2}  = beta' +- sqrt(a'^2 + sin^2 a g'^2)
/// Channel 1 is the "+" eigenphase branch, matching eigen_decompose.
DelaySet closed_form_delays(const SParams& params, const ParamDerivatives& d);

/// max(|partial sum - tr Q|, |proper sum - tr Q|, |tr Q - 2 beta'|)
double sum_rule_check(const SMatrix& s, const Matrix2c& ds, const DelaySet& delays, double beta_prime);

/// Re tr(-i S^dagger S')
double lifetime_trace(const SMatrix& s, const Matrix2c& ds);

using AmplitudeProfile = std::function<Vector2c(double energy)>;

/// tau = int dE psi^*(E) Q(E) psi(E) over the grid of `q_grid` energies (Simpson when uniform
/// with an even number of intervals, trapezoid otherwise). The profile must be normalized and
/// must have decayed at the grid ends.
double dwell_time_spectral(const AmplitudeProfile& profile, std::span<const LifetimeMatrix> q_grid);

/// Everything computed at one energy.
struct DelayPoint {
  double energy = 0.0;
  double step = 0.0;
  SMatrix s;
  SParams params;
  ParamDerivatives derivs;
  EigenSystem eig;
  MatrixDerivative ds;
  LifetimeMatrix q;
  std::array<double, 2> partial{};     // matrix route (eigenphase derivative along eigenvector)
  std::array<double, 2> partial_fd{};  // eigenphase finite differences
  DelaySet closed;                     // closed forms from (alpha, beta, gamma)
  double sum_rule_residual = 0.0;
  bool used_fd_fallback = false;
};

struct DelaySettings {
  DerivativeScheme scheme = DerivativeScheme::richardson;
  double derivative_rel_tol = 1e-3;
  double tol = 1e-8;
};

DelayPoint analyze_point(const SMatrixFn& smatrix, double energy, const DelaySettings& settings = {});

}  // namespace tdelay
