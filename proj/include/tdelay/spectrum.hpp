#pragma once

#include <array>
#include <vector>

#include "tdelay/delays.hpp"

namespace tdelay {

struct SpectrumSettings {
  DelaySettings delay;
  unsigned threads = 0;  // 0: hardware concurrency
  /// Maximal bisection depth when a phase step between neighbours is ambiguous.
  int max_refinement_depth = 8;
};

/// One grid energy after unwrapping and channel tracking.
struct SpectrumPoint {
  DelayPoint point;
  SParams params;                       // beta unwrapped by 2 pi, gamma continued by pi
  std::array<double, 2> partial{};      // tracked channels, matrix route
  std::array<double, 2> partial_fd{};   // tracked channels, eigenphase differences
  std::array<double, 2> partial_closed{};
  std::array<double, 2> proper{};       // q_1 >= q_2
  std::array<double, 2> proper_closed{};
  std::array<Eigen::Vector2d, 2> vector{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  /// gamma - 2 E gamma'
  double c_criterion = 0.0;

  double energy() const { return point.energy; }
  const ParamDerivatives& derivs() const { return point.derivs; }
};

struct DelaySpectrum {
  std::vector<SpectrumPoint> points;
  /// Number of bisection points inserted while unwrapping (not part of the output grid).
  std::size_t refinements = 0;
};

/// Strictly increasing, positive energies; throws DomainError otherwise.
void check_energy_grid(const std::vector<double>& energies);

std::vector<double> linear_grid(double min, double max, std::size_t count);

/// Per-energy analysis in parallel, then a sequential pass that unwraps beta (mod 2 pi) and
/// gamma (mod pi with reflection-sign flips) and tracks eigenchannels by eigenvector overlap.
/// Channel 1 at the lowest energy is the S eigenvector that overlaps most with the
/// eigenvector of the larger proper delay.
DelaySpectrum compute_spectrum(const SMatrixFn& smatrix, const std::vector<double>& energies,
                               const SpectrumSettings& settings = {});

DelaySpectrum compute_spectrum(const PotentialSpec& spec, const std::vector<double>& energies,
                               ToleranceProfile profile = ToleranceProfile::standard,
                               const SpectrumSettings& settings = {});

}  // namespace tdelay
