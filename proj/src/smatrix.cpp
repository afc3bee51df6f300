#include "tdelay/smatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tdelay/errors.hpp"

namespace tdelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx I{0.0, 1.0};

// Representative of phi + n*period closest to reference.
double nearest_branch(double phi, double reference, double period, long* n_out = nullptr) {
  const double n = std::round((reference - phi) / period);
  if (n_out != nullptr) *n_out = static_cast<long>(n);
  return phi + n * period;
}

// gamma from the reflection phases, ignoring the indeterminate threshold.
double raw_gamma(const Matrix2c& m, double beta) {
  const double gl = std::arg(m(0, 0)) - beta - 0.5 * kPi;
  const double gr = -(std::arg(m(1, 1)) - beta - 0.5 * kPi);
  const double gl_w = std::remainder(gl, 2.0 * kPi);
  return gl_w + 0.5 * std::remainder(gr - gl_w, 2.0 * kPi);
}

}  // namespace

double wrap_angle(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double AmplitudeResiduals::max() const {
  return std::max({flux_left, flux_right, reciprocity, phase_relation});
}

AmplitudeResiduals residuals(const ScatteringAmplitudes& a) {
  AmplitudeResiduals r;
  r.flux_left = std::abs(std::norm(a.r_l) + std::norm(a.t_l) - 1.0);
  r.flux_right = std::abs(std::norm(a.r_r) + std::norm(a.t_r) - 1.0);
  r.reciprocity = std::abs(a.t_l - a.t_r);
  const cplx t = 0.5 * (a.t_l + a.t_r);
  r.phase_relation = std::abs(a.r_l * std::conj(t) + t * std::conj(a.r_r));
  return r;
}

const char* to_string(Basis basis) {
  switch (basis) {
    case Basis::directional:
      return "directional";
    case Basis::parity:
      return "parity";
    case Basis::eigen:
      return "eigen";
  }
  return "?";
}

SMatrix::SMatrix(double energy, Basis basis, const Matrix2c& m) : energy_(energy), basis_(basis), m_(m) {
  unitarity_ = (m.adjoint() * m - Matrix2c::Identity()).cwiseAbs().maxCoeff();
  symmetry_ = std::abs(m(0, 1) - m(1, 0));
}

SMatrix from_amplitudes(const ScatteringAmplitudes& amps, double tol) {
  const auto res = residuals(amps);
  if (!(res.max() <= 1e3 * tol)) {
    std::ostringstream os;
    os << "amplitudes at E = " << amps.energy << " Ha violate unitarity/symmetry: residual " << res.max();
    throw ConvergenceError(os.str());
  }
  Matrix2c m;
  m << amps.r_l, amps.t_l, amps.t_r, amps.r_r;
  return SMatrix(amps.energy, Basis::directional, m);
}

double SParams::effective_gamma() const { return reflection_sign < 0 ? gamma + kPi : gamma; }

SParams extract_params(const SMatrix& s, const std::optional<SParams>& reference, double tol) {
  if (s.basis() != Basis::directional) throw ParameterizationError("extract_params needs a directional S-matrix");
  const cplx t = 0.5 * (s(0, 1) + s(1, 0));
  const cplx r_l = s(0, 0);
  const cplx r_r = s(1, 1);
  const double abs_t = std::abs(t);
  if (abs_t > 1.0 + tol) {
    std::ostringstream os;
    os << "|t| = " << abs_t << " exceeds 1 at E = " << s.energy() << " Ha";
    throw ParameterizationError(os.str());
  }

  SParams p;
  const double abs_r = std::sqrt(0.5 * (std::norm(r_l) + std::norm(r_r)));
  p.alpha = std::atan2(abs_r, abs_t);
  p.beta = std::arg(t);
  if (reference) p.beta = nearest_branch(p.beta, reference->beta, 2.0 * kPi);

  const double sin_alpha = std::sin(p.alpha);
  if (sin_alpha < kIndeterminateSinAlpha) {
    p.gamma_indeterminate = true;
    p.gamma = reference ? reference->gamma : 0.0;
    p.reflection_sign = reference ? reference->reflection_sign : 1;
    return p;
  }

  const double gamma_l = wrap_angle(std::arg(r_l) - p.beta - 0.5 * kPi);
  const double gamma_r = wrap_angle(-(std::arg(r_r) - p.beta - 0.5 * kPi));
  const double split = wrap_angle(gamma_r - gamma_l);
  p.consistency_residual = abs_r * std::abs(split);
  if (p.consistency_residual > 1e2 * tol) {
    std::ostringstream os;
    os << "gamma from r_l and r_r disagree by " << split << " rad at E = " << s.energy() << " Ha";
    throw ParameterizationError(os.str());
  }
  const double gamma = wrap_angle(gamma_l + 0.5 * split);

  if (!reference) {
    p.gamma = gamma;
    p.reflection_sign = 1;
    return p;
  }
  long n = 0;
  const double ref_gamma = reference->gamma;
  p.gamma = nearest_branch(gamma, ref_gamma, kPi, &n);
  p.reflection_sign = (n % 2 == 0) ? 1 : -1;
  return p;
}

SMatrix rebuild(const SParams& p, double energy) {
  const double sa = p.reflection_sign * std::sin(p.alpha);
  const cplx t = std::polar(std::cos(p.alpha), p.beta);
  Matrix2c m;
  m << I * sa * std::polar(1.0, p.beta + p.gamma), t, t, I * sa * std::polar(1.0, p.beta - p.gamma);
  return SMatrix(energy, Basis::directional, m);
}

std::array<cplx, 2> eigenvalues_2x2(const Matrix2c& m) {
  const cplx mean = 0.5 * (m(0, 0) + m(1, 1));
  const cplx half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const cplx root = std::sqrt(half_diff * half_diff + m(0, 1) * m(1, 0));
  return {mean + root, mean - root};
}

EigenSystem eigen_decompose(const SMatrix& s, double tol) {
  const Matrix2c& m = s.matrix();
  Matrix2c sym = 0.5 * (m + m.transpose());
  const SMatrix symmetric(s.energy(), Basis::directional, sym);
  SParams p = extract_params(symmetric, std::nullopt, 1e6 * tol);
  if (p.gamma_indeterminate && std::abs(sym(0, 0)) + std::abs(sym(1, 1)) > 0.0) p.gamma = raw_gamma(sym, p.beta);

  const double sa = std::sin(p.alpha);
  const double ca = std::cos(p.alpha);
  const double u = sa * std::cos(p.gamma);
  const double w = std::sqrt(std::max(0.0, 1.0 - u * u));

  EigenSystem e;
  e.root = w;
  e.chi = {std::atan2(u, w), std::atan2(u, -w)};
  e.phase = {p.beta + e.chi[0], p.beta + e.chi[1]};

  // Route agreement with the plain eigenvalue formula (either pairing of the roots).
  const auto direct = eigenvalues_2x2(sym);
  const cplx b0 = e.eigenvalue(0);
  const cplx b1 = e.eigenvalue(1);
  const double same = std::max(std::abs(direct[0] - b0), std::abs(direct[1] - b1));
  const double swapped = std::max(std::abs(direct[1] - b0), std::abs(direct[0] - b1));
  e.route_disagreement = std::min(same, swapped);
  // The square root of the direct formula loses precision like 1/w near degeneracy.
  const double allowed = tol * std::max(1.0, 1e-2 / std::max(w, 1e-12));
  if (e.route_disagreement > allowed) {
    std::ostringstream os;
    os << "eigenphase routes disagree by " << e.route_disagreement << " at E = " << s.energy() << " Ha";
    throw ConventionError(os.str());
  }

  if (w < 1e-12) {
    e.vector = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
    return e;
  }
  const double sg = sa * std::sin(p.gamma);
  for (int j = 0; j < 2; ++j) {
    const double pm = j == 0 ? 1.0 : -1.0;
    // Two equivalent forms of the same eigenvector; the longer one avoids cancellation.
    Eigen::Vector2d v(-sg + pm * w, ca);
    const Eigen::Vector2d alt(ca, sg + pm * w);
    if (alt.norm() > v.norm()) v = alt;
    if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;
    e.vector[static_cast<std::size_t>(j)] = v.normalized();
  }
  return e;
}

Matrix2c parity_transform() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix2c u;
  u << r, -r, r, r;
  return u;
}

SMatrix parity_from_params(const SParams& p, double energy) {
  const double sa = p.reflection_sign * std::sin(p.alpha);
  const double ca = std::cos(p.alpha);
  const cplx phase = std::polar(1.0, p.beta);
  const double cg = std::cos(p.gamma);
  const double sg = std::sin(p.gamma);
  Matrix2c m;
  m << phase * (I * sa * cg + ca), phase * sa * sg, phase * sa * sg, phase * (I * sa * cg - ca);
  return SMatrix(energy, Basis::parity, m);
}

SMatrix to_parity_basis(const SMatrix& s, double tol) {
  if (s.basis() != Basis::directional) throw ConventionError("to_parity_basis expects a directional S-matrix");
  const Matrix2c u = parity_transform();
  const SMatrix conj(s.energy(), Basis::parity, u.adjoint() * s.matrix() * u);
  const SMatrix closed = parity_from_params(extract_params(s, std::nullopt, 1e6 * tol), s.energy());
  const double diff = (conj.matrix() - closed.matrix()).cwiseAbs().maxCoeff();
  if (diff > 1e2 * tol) {
    std::ostringstream os;
    os << "parity basis routes disagree by " << diff << " at E = " << s.energy() << " Ha";
    throw ConventionError(os.str());
  }
  return conj;
}

VariantReport channel_mixing_variant(const ScatteringAmplitudes& amps, double tol) {
  Matrix2c m;
  m << amps.t_r, amps.r_r, amps.r_l, amps.t_l;
  VariantReport report;
  report.matrix = SMatrix(amps.energy, Basis::directional, m);
  report.asymmetry = report.matrix.symmetry_residual();
  report.symmetric = report.asymmetry <= tol;
  report.eigenvalues = eigenvalues_2x2(m);
  Matrix2c proper;
  proper << amps.r_l, amps.t_l, amps.t_r, amps.r_r;
  report.proper_eigenvalues = eigenvalues_2x2(proper);
  return report;
}

}  // namespace tdelay
