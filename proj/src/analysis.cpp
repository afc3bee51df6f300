#include "tdelay/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tdelay/errors.hpp"
#include "tdelay/parallel.hpp"

namespace tdelay {

namespace {

constexpr double kPi = std::numbers::pi;

SMatrixFn shifted_fn(const PotentialSpec& spec, double dx, double max_energy, ToleranceProfile profile) {
  const PotentialSpec shifted = PotentialSpec::shifted(spec, dx);
  return directional_smatrix(shifted, default_settings(shifted, max_energy, profile));
}

double proper_gap_at(const PotentialSpec& spec, double energy, double dx, ToleranceProfile profile) {
  const DelayPoint pt = analyze_point(shifted_fn(spec, dx, energy + derivative_step(energy), profile), energy);
  return pt.q.proper[0] - pt.q.proper[1];
}

double function_value(Crossing kind, const SParams& p, const ParamDerivatives& d) {
  return kind == Crossing::partial_crossing ? crossing_function(p, d) : equality_function(p, d);
}

}  // namespace

ShiftScan shift_scan(const PotentialSpec& spec, double energy, std::vector<double> dx_list,
                     ToleranceProfile profile, unsigned threads) {
  if (!(energy > 0.0)) throw DomainError("shift scan energy must be positive");
  if (dx_list.size() < 2) throw DomainError("shift scan needs at least two displacements");
  std::sort(dx_list.begin(), dx_list.end());
  if (std::adjacent_find(dx_list.begin(), dx_list.end()) != dx_list.end()) {
    throw DomainError("shift scan displacements must be distinct");
  }

  ShiftScan scan;
  scan.energy = energy;
  scan.k = std::sqrt(2.0 * energy);
  const std::size_t n = dx_list.size();
  scan.points.resize(n);
  const double e_max = energy + derivative_step(energy);
  parallel_for(n, [&](std::size_t i) {
    ShiftPoint& sp = scan.points[i];
    sp.dx = dx_list[i];
    sp.point = analyze_point(shifted_fn(spec, sp.dx, e_max, profile), energy);
  }, threads);

  // Continue gamma along dx, outward from the displacement nearest zero.
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(dx_list[i]) < std::abs(dx_list[i0])) i0 = i;
  }
  scan.points[i0].params = scan.points[i0].point.params;
  for (std::size_t i = i0 + 1; i < n; ++i) {
    scan.points[i].params = extract_params(scan.points[i].point.s, scan.points[i - 1].params, 1e-6);
  }
  for (std::size_t i = i0; i-- > 0;) {
    scan.points[i].params = extract_params(scan.points[i].point.s, scan.points[i + 1].params, 1e-6);
  }

  // Eigenchannels follow maximal eigenvector overlap, outward from the same point.
  std::vector<std::array<Eigen::Vector2d, 2>> vec(n);
  auto track = [&](std::size_t i, std::size_t from) {
    std::array<Eigen::Vector2d, 2> v = scan.points[i].point.eig.vector;
    std::array<double, 2> tau = scan.points[i].point.partial;
    const double same = std::abs(vec[from][0].dot(v[0])) + std::abs(vec[from][1].dot(v[1]));
    const double swap = std::abs(vec[from][0].dot(v[1])) + std::abs(vec[from][1].dot(v[0]));
    if (swap > same) {
      std::swap(v[0], v[1]);
      std::swap(tau[0], tau[1]);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      if (v[j].dot(vec[from][j]) < 0.0) v[j] = -v[j];
    }
    vec[i] = v;
    scan.points[i].partial = tau;
  };
  vec[i0] = scan.points[i0].point.eig.vector;
  scan.points[i0].partial = scan.points[i0].point.partial;
  for (std::size_t i = i0 + 1; i < n; ++i) track(i, i - 1);
  for (std::size_t i = i0; i-- > 0;) track(i, i + 1);

  const ShiftPoint& ref = scan.points[i0];
  const double gamma0 = ref.params.effective_gamma() - 2.0 * scan.k * ref.dx;
  const double gamma_p0 = ref.point.derivs.gamma - 2.0 * ref.dx / scan.k;
  for (ShiftPoint& sp : scan.points) {
    sp.proper = sp.point.q.proper;
    sp.shift_residual = std::abs(wrap_angle(sp.params.effective_gamma() - gamma0 - 2.0 * scan.k * sp.dx));
    sp.gamma_prime_residual = std::abs(sp.point.derivs.gamma - gamma_p0 - 2.0 * sp.dx / scan.k);
    scan.max_shift_residual = std::max(scan.max_shift_residual, sp.shift_residual);
    scan.max_gamma_prime_residual = std::max(scan.max_gamma_prime_residual, sp.gamma_prime_residual);
    scan.max_alpha_change = std::max(scan.max_alpha_change, std::abs(sp.params.alpha - ref.params.alpha));
    scan.max_beta_change =
        std::max(scan.max_beta_change, std::abs(wrap_angle(sp.params.beta - ref.params.beta)));
  }

  const ShiftPoint& a = scan.points[n - 2];
  const ShiftPoint& b = scan.points[n - 1];
  const double dp = b.dx - a.dx;
  scan.tail_slope_positive = {(b.proper[0] - a.proper[0]) / dp, -(b.proper[1] - a.proper[1]) / dp};
  const ShiftPoint& c = scan.points[0];
  const ShiftPoint& d = scan.points[1];
  const double dn = d.dx - c.dx;
  scan.tail_slope_negative = {-(d.proper[0] - c.proper[0]) / dn, (d.proper[1] - c.proper[1]) / dn};
  return scan;
}

MinimalGap minimal_gap(const PotentialSpec& spec, double energy, ToleranceProfile profile) {
  if (!(energy > 0.0)) throw DomainError("minimal gap energy must be positive");
  const double k = std::sqrt(2.0 * energy);
  const DelayPoint pt = analyze_point(shifted_fn(spec, 0.0, energy + derivative_step(energy), profile), energy);
  MinimalGap g;
  g.dx_min = -k * pt.derivs.gamma / 2.0;
  g.proper_gap = 2.0 * std::abs(pt.derivs.alpha);
  const double sa = std::sin(pt.params.alpha);
  const double ca = std::cos(pt.params.alpha);
  const double gm = pt.params.effective_gamma() - k * k * pt.derivs.gamma;
  const double w = std::sqrt(std::max(0.0, 1.0 - sa * sa * std::cos(gm) * std::cos(gm)));
  g.partial_gap = w > 0.0 ? 2.0 * std::abs(ca * std::cos(gm) * pt.derivs.alpha) / w : 0.0;

  // Local scan around the predicted minimum, refined by a parabola through the best three points.
  constexpr int kHalf = 10;
  const double step = 0.05;
  std::vector<double> gaps(2 * kHalf + 1);
  for (int i = -kHalf; i <= kHalf; ++i) {
    gaps[static_cast<std::size_t>(i + kHalf)] = proper_gap_at(spec, energy, g.dx_min + i * step, profile);
  }
  const auto it = std::min_element(gaps.begin(), gaps.end());
  const auto j = static_cast<std::size_t>(it - gaps.begin());
  double offset = static_cast<double>(static_cast<int>(j) - kHalf) * step;
  g.scan_proper_gap = *it;
  if (j > 0 && j + 1 < gaps.size()) {
    const double fm = gaps[j - 1];
    const double f0 = gaps[j];
    const double fp = gaps[j + 1];
    const double den = fm - 2.0 * f0 + fp;
    if (den > 0.0) {
      const double t = 0.5 * (fm - fp) / den;
      offset += t * step;
      g.scan_proper_gap = f0 - 0.25 * (fm - fp) * t;
    }
  }
  g.scan_dx_min = g.dx_min + offset;
  g.consistent = std::abs(offset) <= 0.5 * step;
  return g;
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::intrinsically_symmetric:
      return "intrinsically-symmetric";
    case Verdict::generically_asymmetric:
      return "generically-asymmetric";
    case Verdict::indeterminate_single_channel:
      return "indeterminate-single-channel";
  }
  return "?";
}

SymmetryVerdict symmetry_test(const DelaySpectrum& spectrum, double threshold) {
  SymmetryVerdict v;
  v.threshold = threshold;
  double c_min = std::numeric_limits<double>::infinity();
  double c_max = -c_min;
  // Regression gamma = a + x (2k).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (const SpectrumPoint& p : spectrum.points) {
    v.energies.push_back(p.energy());
    v.c.push_back(p.c_criterion);
    if (p.params.gamma_indeterminate) {
      ++v.excluded;
      continue;
    }
    ++used;
    c_min = std::min(c_min, p.c_criterion);
    c_max = std::max(c_max, p.c_criterion);
    const double x = 2.0 * std::sqrt(2.0 * p.energy());
    sx += x;
    sy += p.params.gamma;
    sxx += x * x;
    sxy += x * p.params.gamma;

    const double sa = std::sin(p.params.alpha);
    const double ca = std::cos(p.params.alpha);
    const double cg = std::cos(p.params.effective_gamma() - 2.0 * p.energy() * p.derivs().gamma);
    const double w = std::sqrt(std::max(0.0, 1.0 - sa * sa * cg * cg));
    const double proper_gap = 2.0 * std::abs(p.derivs().alpha);
    const double partial_gap = w > 0.0 ? 2.0 * std::abs(ca * cg * p.derivs().alpha) / w : 0.0;
    if (proper_gap > 0.0) v.gap_mismatch = std::max(v.gap_mismatch, std::abs(proper_gap - partial_gap) / proper_gap);
  }
  if (used < 2 || 2 * v.excluded > spectrum.points.size()) {
    v.verdict = Verdict::indeterminate_single_channel;
    v.spread = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  v.spread = c_max - c_min;
  const double m = static_cast<double>(used);
  const double den = m * sxx - sx * sx;
  v.x_cen_fit = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  v.gaps_coincide = v.gap_mismatch < threshold;
  v.verdict = v.spread < threshold ? Verdict::intrinsically_symmetric : Verdict::generically_asymmetric;
  if (v.verdict == Verdict::intrinsically_symmetric) v.x_cen = v.x_cen_fit;
  return v;
}

SymmetryVerdict symmetry_test(const PotentialSpec& spec, const std::vector<double>& energies, double threshold,
                              ToleranceProfile profile) {
  return symmetry_test(compute_spectrum(spec, energies, profile), threshold);
}

double crossing_function(const SParams& p, const ParamDerivatives& d) {
  const double g = p.effective_gamma();
  return d.alpha * std::cos(p.alpha) * std::cos(g) - std::sin(p.alpha) * std::sin(g) * d.gamma;
}

double equality_function(const SParams& p, const ParamDerivatives& d) {
  const double g = p.effective_gamma();
  return d.alpha * std::sin(g) + std::sin(p.alpha) * std::cos(p.alpha) * std::cos(g) * d.gamma;
}

std::vector<double> crossing_energies(const SMatrixFn& fn, const DelaySpectrum& spectrum, Crossing kind) {
  auto eval = [&](double e) {
    const Stencil st = sample_stencil(fn, e);
    return function_value(kind, extract_params(st.center(), std::nullopt, 1e-6), param_derivatives(st));
  };
  std::vector<double> roots;
  const auto& pts = spectrum.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i].energy();
    double b = pts[i + 1].energy();
    double fa = function_value(kind, pts[i].point.params, pts[i].derivs());
    const double fb = function_value(kind, pts[i + 1].point.params, pts[i + 1].derivs());
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 60 && b - a > 1e-12 * b; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = eval(mid);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

}  // namespace tdelay
