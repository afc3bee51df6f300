#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

#include "tdelay/scattering_types.hpp"

namespace tdelay {

/// Directional S-matrix [[r_l, t_l], [t_r, r_r]] (reflections on the diagonal).
/// Throws ConvergenceError if the amplitudes violate unitarity/symmetry by more than 1e3*tol.
SMatrix from_amplitudes(const ScatteringAmplitudes& amps, double tol = 1e-8);

/// t = cos(alpha) e^{i beta},  r_{l,r} = i sign sin(alpha) e^{i(beta +- gamma)}.
///
/// alpha is always the canonical value in [0, pi/2]. Across an energy grid gamma is
/// continued modulo pi: passing through a reflection zero flips `reflection_sign`
/// instead of making gamma jump by pi. Without a reference, sign = +1 and
/// gamma is in (-pi, pi].
struct SParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int reflection_sign = 1;
  /// |r| too small for gamma to carry information; gamma was carried forward.
  bool gamma_indeterminate = false;
  /// |r| * |gamma from r_l - gamma from r_r|
  double consistency_residual = 0.0;

  /// gamma on the canonical (sign = +1) branch; all closed forms accept it.
  double effective_gamma() const;
  double signed_alpha() const { return reflection_sign * alpha; }
};

/// Below this sin(alpha), gamma is flagged indeterminate.
inline constexpr double kIndeterminateSinAlpha = 1e-7;

/// Inverts the parameterization. With `reference`, beta is unwrapped by 2*pi and gamma by pi
/// (flipping the reflection sign) to the branch nearest the reference values.
SParams extract_params(const SMatrix& s, const std::optional<SParams>& reference = std::nullopt,
                       double tol = 1e-8);

/// Rebuilds the directional S-matrix from (alpha, beta, gamma, sign).
SMatrix rebuild(const SParams& params, double energy);

/// Eigenphases and real eigenvectors; channel 1 is the "+" branch of the square root.
struct EigenSystem {
  std::array<double, 2> phase{};  // s_j
  std::array<double, 2> chi{};    // s_j - beta
  std::array<Eigen::Vector2d, 2> vector{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  /// sqrt(1 - sin^2 alpha cos^2 gamma); zero means degenerate eigenvalues.
  double root = 1.0;
  /// max |lambda_j(eigenvalue formula) - lambda_j(alpha, beta, gamma form)|
  double route_disagreement = 0.0;

  cplx eigenvalue(int j) const { return std::polar(1.0, phase[static_cast<std::size_t>(j)]); }
};

/// Both eigenvalue routes are evaluated; ConventionError if they disagree by more than tol.
EigenSystem eigen_decompose(const SMatrix& s, double tol = 1e-8);

/// Columns are the parity functions y_0 = (1, 1)/sqrt2 and y_1 = (-1, 1)/sqrt2 over (left, right).
Matrix2c parity_transform();

/// S_p from (alpha, beta, gamma):
/// e^{i beta} [[i sin(a) cos(g) + cos(a), sin(a) sin(g)], [sin(a) sin(g), i sin(a) cos(g) - cos(a)]].
SMatrix parity_from_params(const SParams& params, double energy);

/// U_p^dagger S U_p, cross-checked against parity_from_params; ConventionError beyond tol.
SMatrix to_parity_basis(const SMatrix& s, double tol = 1e-8);

/// Literature variant with transmissions on the diagonal: [[t_r, r_r], [r_l, t_l]].
struct VariantReport {
  SMatrix matrix;
  bool symmetric = false;
  double asymmetry = 0.0;  // |m_12 - m_21| = |r_r - r_l|
  std::array<cplx, 2> eigenvalues{};
  std::array<cplx, 2> proper_eigenvalues{};
};

VariantReport channel_mixing_variant(const ScatteringAmplitudes& amps, double tol = 1e-8);

/// Eigenvalues of a general complex 2x2 matrix, "+" root first.
std::array<cplx, 2> eigenvalues_2x2(const Matrix2c& m);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double phi);

}  // namespace tdelay
