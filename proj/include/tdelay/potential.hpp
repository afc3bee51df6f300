#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tdelay {

// All lengths in bohr, all energies in hartree.

struct GaussianTerm {
  double prefactor;
  double center;
};

/// V(x) = -depth * sum_j f_j exp(-[(x - c_j)/width]^2)
struct GaussianSum {
  double depth;
  double width;
  std::vector<GaussianTerm> terms;
};

/// V(x) = amplitude * exp(-[x/width - 1/2]^2) * atan(2 sin(2x/width))
struct Resonance {
  double width;
  double amplitude;
};

/// Reflectionless well V(x) = -sech^2(x/width) / width^2.
struct SechWell {
  double width;
};

/// V = height for |x| < half_width, height/2 on the edges, 0 outside.
struct SquareBarrier {
  double height;
  double half_width;
};

enum class OutsideTable { zero, error };

/// Sampled potential with monotone (Fritsch-Carlson) cubic interpolation.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> slope;
  OutsideTable outside = OutsideTable::zero;
};

class PotentialSpec;

struct Shifted {
  std::shared_ptr<const PotentialSpec> inner;
  double dx;
};

/// Immutable, validated description of a short-range 1D potential.
class PotentialSpec {
 public:
  using Kind = std::variant<GaussianSum, Resonance, SechWell, SquareBarrier, Tabulated, Shifted>;

  static PotentialSpec gaussian_sum(double depth, double width, std::vector<GaussianTerm> terms);
  static PotentialSpec resonance(double width, double amplitude);
  static PotentialSpec sech_well(double width);
  static PotentialSpec square_barrier(double height, double half_width);
  static PotentialSpec tabulated(std::vector<double> x, std::vector<double> v,
                                 OutsideTable outside = OutsideTable::zero);
  /// shifted(shifted(V, a), b) collapses to shifted(V, a + b).
  static PotentialSpec shifted(const PotentialSpec& inner, double dx);

  double operator()(double x) const;

  /// Characteristic structure length d, used for step-size selection.
  double length_scale() const;
  /// True if V has jump discontinuities (Numerov loses its order there).
  bool has_jumps() const;
  /// Positions of jump discontinuities.
  std::vector<double> jump_points() const;

  const Kind& kind() const { return kind_; }
  std::string describe() const;

 private:
  explicit PotentialSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

inline double evaluate(const PotentialSpec& spec, double x) { return spec(x); }

/// Largest |V| found on a dense scan of the search window.
double max_abs(const PotentialSpec& spec);

/// Default decay threshold: 1e-12 * max|V|.
double default_eps_v(const PotentialSpec& spec);

/// Smallest sampled X with |V(x)| < eps_v for |x| >= X, plus a margin of 2d.
double support_radius(const PotentialSpec& spec, double eps_v);
double support_radius(const PotentialSpec& spec);

struct ParitySplit {
  std::function<double(double)> even;
  std::function<double(double)> odd;
};

/// V_even(r) = [V(r) + V(-r)]/2, V_odd(r) = [V(r) - V(-r)]/2.
ParitySplit parity_split(const PotentialSpec& spec);

namespace presets {

PotentialSpec v1();
PotentialSpec v2();
PotentialSpec v3();
PotentialSpec v4();
PotentialSpec v5();
PotentialSpec v6();
PotentialSpec free_particle();

/// "V1".."V6" or "free" (case-insensitive); throws ConfigError otherwise.
PotentialSpec by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace presets

}  // namespace tdelay
