#include "tdelay/spectrum.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tdelay/errors.hpp"
#include "tdelay/parallel.hpp"

namespace tdelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPhaseMismatch = 0.25 * kPi;

struct Anchor {
  double energy;
  SParams params;
  ParamDerivatives derivs;
};

SParams predict(const Anchor& from, double energy, const ParamDerivatives& d_to, bool to_indeterminate) {
  const double de = energy - from.energy;
  SParams ref = from.params;
  ref.beta += 0.5 * de * (from.derivs.beta + d_to.beta);
  if (!from.params.gamma_indeterminate && !to_indeterminate) ref.gamma += 0.5 * de * (from.derivs.gamma + d_to.gamma);
  return ref;
}

bool mismatched(const SParams& got, const SParams& predicted) {
  if (std::abs(got.beta - predicted.beta) > kMaxPhaseMismatch) return true;
  return !got.gamma_indeterminate && std::abs(got.gamma - predicted.gamma) > kMaxPhaseMismatch;
}

// Continues anchor `from` to the S-matrix `s` at `energy`, inserting bisection points when the
// predicted step is ambiguous.
SParams continue_to(const SMatrixFn& fn, const Anchor& from, const SMatrix& s, const ParamDerivatives& d,
                    int depth, std::size_t& refinements) {
  const bool indeterminate = std::sin(extract_params(s, std::nullopt, 1e-6).alpha) < kIndeterminateSinAlpha;
  const SParams ref = predict(from, s.energy(), d, indeterminate);
  const SParams got = extract_params(s, ref, 1e-6);
  if (!mismatched(got, ref)) return got;
  if (depth <= 0) {
    std::ostringstream os;
    os << "phase unwrapping ambiguous between E = " << from.energy << " and " << s.energy()
       << " Ha; refine the energy grid";
    throw ConvergenceError(os.str());
  }
  ++refinements;
  const double mid = 0.5 * (from.energy + s.energy());
  const Stencil st = sample_stencil(fn, mid);
  const ParamDerivatives dm = param_derivatives(st);
  const Anchor half{mid, continue_to(fn, from, st.center(), dm, depth - 1, refinements), dm};
  return continue_to(fn, half, s, d, depth - 1, refinements);
}

// Permutation (false: identity, true: swap) of `cur` maximizing overlap with `prev`.
bool best_swap(const std::array<Eigen::Vector2d, 2>& prev, const std::array<Eigen::Vector2d, 2>& cur) {
  const double same = std::abs(prev[0].dot(cur[0])) + std::abs(prev[1].dot(cur[1]));
  const double swap = std::abs(prev[0].dot(cur[1])) + std::abs(prev[1].dot(cur[0]));
  return swap > same;
}

}  // namespace

void check_energy_grid(const std::vector<double>& energies) {
  if (energies.empty()) throw DomainError("energy grid is empty");
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!(energies[i] > 0.0) || !std::isfinite(energies[i])) throw DomainError("energies must be positive and finite");
    if (i > 0 && !(energies[i] > energies[i - 1])) throw DomainError("energy grid must be strictly increasing");
  }
}

std::vector<double> linear_grid(double min, double max, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {min};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  g.back() = max;
  return g;
}

DelaySpectrum compute_spectrum(const SMatrixFn& fn, const std::vector<double>& energies,
                               const SpectrumSettings& settings) {
  check_energy_grid(energies);
  const std::size_t n = energies.size();
  std::vector<DelayPoint> raw(n);
  parallel_for(n, [&](std::size_t i) { raw[i] = analyze_point(fn, energies[i], settings.delay); }, settings.threads);

  DelaySpectrum out;
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    SpectrumPoint& sp = out.points[i];
    sp.point = raw[i];
    const DelayPoint& pt = sp.point;

    if (i == 0) {
      sp.params = pt.params;
      if (!sp.params.gamma_indeterminate && std::abs(sp.params.gamma) > 0.5 * kPi) {
        sp.params.gamma -= std::copysign(kPi, sp.params.gamma);
        sp.params.reflection_sign = -1;
      }
    } else {
      const SpectrumPoint& prev = out.points[i - 1];
      const Anchor from{prev.energy(), prev.params, prev.derivs()};
      sp.params = continue_to(fn, from, pt.s, pt.derivs, settings.max_refinement_depth, out.refinements);
    }

    std::array<Eigen::Vector2d, 2> v = pt.eig.vector;
    bool swap = false;
    if (i == 0) {
      const Vector2c w1 = pt.q.w[0];
      swap = std::abs(w1.dot(v[1].cast<cplx>())) > std::abs(w1.dot(v[0].cast<cplx>()));
    } else {
      swap = best_swap(out.points[i - 1].vector, v);
    }
    auto pick = [swap](const std::array<double, 2>& a) { return swap ? std::array{a[1], a[0]} : a; };
    if (swap) std::swap(v[0], v[1]);
    if (i > 0) {
      for (std::size_t j = 0; j < 2; ++j) {
        if (v[j].dot(out.points[i - 1].vector[j]) < 0.0) v[j] = -v[j];
      }
    }
    sp.vector = v;
    sp.partial = pick(pt.partial);
    sp.partial_fd = pick(pt.partial_fd);
    sp.partial_closed = pick(pt.closed.partial);
    sp.proper = pt.q.proper;
    sp.proper_closed = pt.closed.proper;
    sp.c_criterion = sp.params.gamma_indeterminate ? std::numeric_limits<double>::quiet_NaN()
                                                   : sp.params.gamma - 2.0 * pt.energy * pt.derivs.gamma;
  }
  return out;
}

DelaySpectrum compute_spectrum(const PotentialSpec& spec, const std::vector<double>& energies,
                               ToleranceProfile profile, const SpectrumSettings& settings) {
  check_energy_grid(energies);
  const double e_max = energies.back() + derivative_step(energies.back());
  const SolverSettings solver = default_settings(spec, e_max, profile);
  SpectrumSettings s = settings;
  s.delay.scheme = solver.derivative;
  return compute_spectrum(directional_smatrix(spec, solver), energies, s);
}

}  // namespace tdelay
