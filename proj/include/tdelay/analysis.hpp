#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdelay/spectrum.hpp"

namespace tdelay {

struct ShiftPoint {
  double dx = 0.0;
  DelayPoint point;
  SParams params;  // gamma continued along dx from the point nearest dx = 0
  std::array<double, 2> partial{};
  std::array<double, 2> proper{};
  /// |gamma(dx) - gamma(0) - 2 k dx| reduced mod 2 pi
  double shift_residual = 0.0;
  /// |gamma'(dx) - gamma'(0) - 2 dx / k|
  double gamma_prime_residual = 0.0;
};

struct ShiftScan {
  double energy = 0.0;
  double k = 0.0;
  std::vector<ShiftPoint> points;  // sorted by dx
  double max_shift_residual = 0.0;
  double max_gamma_prime_residual = 0.0;
  double max_alpha_change = 0.0;
  double max_beta_change = 0.0;
  /// d(tau_prop_1)/d(dx) and -d(tau_prop_2)/d(dx) at the positive end, and the mirrored
  /// values at the negative end (both branches open up away from the minimal gap).
  std::array<double, 2> tail_slope_positive{};
  std::array<double, 2> tail_slope_negative{};
};

/// Solves shifted(spec, dx) for every dx at fixed energy. dx_list needs at least 2 values;
/// the tail slopes use the two outermost points on each side.
ShiftScan shift_scan(const PotentialSpec& spec, double energy, std::vector<double> dx_list,
                     ToleranceProfile profile = ToleranceProfile::standard, unsigned threads = 0);

struct MinimalGap {
  double dx_min = 0.0;            // -k gamma'_0 / 2
  double proper_gap = 0.0;        // 2 |alpha'|
  double partial_gap = 0.0;       // partial gap at dx_min
  double scan_dx_min = 0.0;       // from the local scan
  double scan_proper_gap = 0.0;
  bool consistent = false;        // scan minimum within half a scan step of the formula
};

MinimalGap minimal_gap(const PotentialSpec& spec, double energy,
                       ToleranceProfile profile = ToleranceProfile::standard);

enum class Verdict { intrinsically_symmetric, generically_asymmetric, indeterminate_single_channel };

const char* to_string(Verdict verdict);

struct SymmetryVerdict {
  std::vector<double> energies;
  std::vector<double> c;  // gamma - 2 E gamma' (NaN where gamma is indeterminate)
  double spread = 0.0;
  double threshold = 1e-3;
  Verdict verdict = Verdict::generically_asymmetric;
  /// Least-squares slope of gamma against 2k (with intercept); set for symmetric verdicts.
  std::optional<double> x_cen;
  double x_cen_fit = 0.0;
  /// max_E relative difference of the proper and partial gaps at the minimal-gap displacement.
  double gap_mismatch = 0.0;
  bool gaps_coincide = false;
  std::size_t excluded = 0;
};

SymmetryVerdict symmetry_test(const DelaySpectrum& spectrum, double threshold = 1e-3);
SymmetryVerdict symmetry_test(const PotentialSpec& spec, const std::vector<double>& energies,
                              double threshold = 1e-3, ToleranceProfile profile = ToleranceProfile::standard);

/// alpha' cos(a) cos(g) - sin(a) sin(g) gamma': zero where the partial delays cross.
double crossing_function(const SParams& params, const ParamDerivatives& d);
/// alpha' sin(g) + sin(a) cos(a) cos(g) gamma': zero where partial and proper delays agree.
double equality_function(const SParams& params, const ParamDerivatives& d);

enum class Crossing { partial_crossing, partial_equals_proper };

/// Sign changes of the selected function over the spectrum grid, refined by bisection on fn.
std::vector<double> crossing_energies(const SMatrixFn& fn, const DelaySpectrum& spectrum, Crossing kind);

}  // namespace tdelay
