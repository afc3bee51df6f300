#pragma once

#include "tdelay/potential.hpp"
#include "tdelay/scattering_types.hpp"

namespace tdelay {

enum class ToleranceProfile { standard, strict };
enum class DerivativeScheme { central, richardson };

struct SolverSettings {
  double step = 0.0;             // grid step h, bohr
  double matching_radius = 0.0;  // X, bohr (grid covers [-X, X])
  double tolerance = 1e-8;       // target for flux/reciprocity residuals
  DerivativeScheme derivative = DerivativeScheme::richardson;
};

/// Step with k_max*h <= 0.05 and h <= d/50 (halved for the strict profile), commensurate with d,
/// and X = support radius rounded up to a multiple of h. Potentials with jumps get h <= d/2000.
SolverSettings default_settings(const PotentialSpec& spec, double max_energy,
                                ToleranceProfile profile = ToleranceProfile::standard);

/// Throws DomainError if k*h > 0.1 or the settings are not usable.
void check_settings(const SolverSettings& settings, double energy);

/// Numerov integration of [-d^2/dx^2 + 2V - 2E] psi = 0 on [-X, X] with outgoing-wave
/// boundary conditions, for incidence from the left and from the right.
ScatteringAmplitudes solve_at_energy(const PotentialSpec& spec, double energy,
                                     const SolverSettings& settings);

/// Two-channel (even/odd) radial formulation on r in [0, X] with renormalized Numerov
/// propagation; returns the S-matrix in the parity basis.
SMatrix solve_parity_channels(const PotentialSpec& spec, double energy, const SolverSettings& settings);

/// Closed-form amplitudes for a barrier of height U on |x| < a.
ScatteringAmplitudes analytic_square_barrier(double height, double half_width, double energy);

/// Wavenumber of the discrete plane wave solving the free Numerov recurrence.
double numerov_wavenumber(double k, double h);

}  // namespace tdelay
