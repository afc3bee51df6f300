#pragma once

#include <complex>

#include <Eigen/Core>

namespace tdelay {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

/// Raw solver output at one energy; phases referenced to the origin.
struct ScatteringAmplitudes {
  double energy = 0.0;  // hartree
  double k = 0.0;       // sqrt(2E), 1/bohr
  cplx r_l{0.0, 0.0};
  cplx r_r{0.0, 0.0};
  cplx t_l{1.0, 0.0};
  cplx t_r{1.0, 0.0};
};

struct AmplitudeResiduals {
  double flux_left = 0.0;
  double flux_right = 0.0;
  double reciprocity = 0.0;
  double phase_relation = 0.0;

  double max() const;
};

AmplitudeResiduals residuals(const ScatteringAmplitudes& amps);

enum class Basis { directional, parity, eigen };

const char* to_string(Basis basis);

/// Basis-tagged 2x2 S-matrix with unitarity/symmetry diagnostics.
class SMatrix {
 public:
  SMatrix() = default;
  SMatrix(double energy, Basis basis, const Matrix2c& m);

  double energy() const { return energy_; }
  Basis basis() const { return basis_; }
  const Matrix2c& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  /// max |S^dagger S - 1|
  double unitarity_residual() const { return unitarity_; }
  /// |S_12 - S_21|
  double symmetry_residual() const { return symmetry_; }

 private:
  double energy_ = 0.0;
  Basis basis_ = Basis::directional;
  Matrix2c m_ = Matrix2c::Identity();
  double unitarity_ = 0.0;
  double symmetry_ = 0.0;
};

}  // namespace tdelay
