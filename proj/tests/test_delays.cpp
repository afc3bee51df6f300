#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "tdelay/delays.hpp"
#include "tdelay/errors.hpp"
#include "tdelay/spectrum.hpp"
#include "tdelay/units.hpp"

using namespace tdelay;

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth synthetic parameters with known derivatives (atomic units).
SParams synthetic(double e) {
  SParams p;
  p.alpha = 0.3 + 0.2 * e + 0.5 * e * e;
  p.beta = 1.5 * e + 0.1;
  p.gamma = 0.4 - 0.7 * e;
  return p;
}

ParamDerivatives synthetic_derivs(double e) { return {0.2 + e, 1.5, -0.7}; }

SMatrixFn synthetic_fn() {
  return [](double e) { return rebuild(synthetic(e), e); };
}

SMatrixFn preset_fn(const char* name) {
  const auto spec = presets::by_name(name);
  return directional_smatrix(spec, default_settings(spec, units::ev_to_hartree(10.0)));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("derivative step") {
  CHECK(derivative_step(0.01) == 1e-5);
  CHECK(derivative_step(1.0) == doctest::Approx(1e-4));
  CHECK(derivative_step(1e-5) == 5e-6);
}

TEST_CASE("stencil derivative of a synthetic S-matrix") {
  const double e = 0.3;
  const auto st = sample_stencil(synthetic_fn(), e);
  CHECK(st.step == derivative_step(e));
  const auto ds = s_derivative(st);
  // Analytic derivative by a tiny complex-free symmetric difference on the closed form.
  const double h = 1e-6;
  const Matrix2c ref = (rebuild(synthetic(e + h), e).matrix() - rebuild(synthetic(e - h), e).matrix()) / (2.0 * h);
  CHECK((ds.value - ref).cwiseAbs().maxCoeff() < 1e-8);
  const auto d = param_derivatives(st);
  const auto exact = synthetic_derivs(e);
  CHECK(d.alpha == doctest::Approx(exact.alpha).epsilon(1e-9));
  CHECK(d.beta == doctest::Approx(exact.beta).epsilon(1e-9));
  CHECK(d.gamma == doctest::Approx(exact.gamma).epsilon(1e-9));
}

TEST_CASE("pure energy-dependent phase gives equal delays") {
  const double c = 3.0;
  SParams base;
  base.alpha = 0.6;
  base.gamma = 1.1;
  const SMatrixFn fn = [&](double e) {
    SParams p = base;
    p.beta = 2.0 * c * e;
    return rebuild(p, e);
  };
  const auto pt = analyze_point(fn, 0.2);
  const Matrix2c expect = cplx(0.0, 2.0 * c) * pt.s.matrix();
  CHECK((pt.ds.value - expect).cwiseAbs().maxCoeff() < 1e-9);
  for (int j = 0; j < 2; ++j) {
    CHECK(pt.partial[j] == doctest::Approx(2.0 * c).epsilon(1e-9));
    CHECK(pt.q.proper[j] == doctest::Approx(2.0 * c).epsilon(1e-9));
  }
}

TEST_CASE("closed forms on the synthetic S-matrix") {
  for (double e : {0.1, 0.3, 0.6}) {
    const auto pt = analyze_point(synthetic_fn(), e);
    const auto p = synthetic(e);
    const auto d = synthetic_derivs(e);
    const double u = std::sin(p.alpha) * std::cos(p.gamma);
    const double du = std::cos(p.alpha) * std::cos(p.gamma) * d.alpha - std::sin(p.alpha) * std::sin(p.gamma) * d.gamma;
    const double w = std::sqrt(1.0 - u * u);
    const double split = std::sqrt(d.alpha * d.alpha + std::pow(std::sin(p.alpha) * d.gamma, 2));
    CHECK(rel(pt.partial[0], d.beta + du / w) < 1e-8);
    CHECK(rel(pt.partial[1], d.beta - du / w) < 1e-8);
    CHECK(rel(pt.partial_fd[0], d.beta + du / w) < 1e-8);
    CHECK(rel(pt.q.proper[0], d.beta + split) < 1e-8);
    CHECK(rel(pt.q.proper[1], d.beta - split) < 1e-8);
    CHECK(rel(pt.closed.partial[0], pt.partial[0]) < 1e-8);
    CHECK(rel(pt.closed.proper[1], pt.q.proper[1]) < 1e-8);
    CHECK(pt.sum_rule_residual < 1e-8);
    CHECK((closed_form_lifetime(p, d) - pt.q.q).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("closed-form lifetime eigenvalues are the proper delays") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ua(0.0, 0.5 * kPi);
  std::uniform_real_distribution<double> up(-kPi, kPi);
  std::uniform_real_distribution<double> ud(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    SParams p;
    p.alpha = ua(rng);
    p.beta = up(rng);
    p.gamma = up(rng);
    p.reflection_sign = i % 3 == 0 ? -1 : 1;
    const ParamDerivatives d{ud(rng), ud(rng), ud(rng)};
    const Matrix2c q = closed_form_lifetime(p, d);
    CHECK((q - q.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(q);
    const auto set = closed_form_delays(p, d);
    CHECK(es.eigenvalues()(1) == doctest::Approx(set.proper[0]).epsilon(1e-10).scale(50.0));
    CHECK(es.eigenvalues()(0) == doctest::Approx(set.proper[1]).epsilon(1e-10).scale(50.0));
    // Envelope: the proper delays bound both partial delays.
    for (double t : set.partial) {
      CHECK(t <= set.proper[0] + 1e-9 * (1.0 + std::abs(set.proper[0])));
      CHECK(t >= set.proper[1] - 1e-9 * (1.0 + std::abs(set.proper[1])));
    }
    CHECK(set.partial[0] + set.partial[1] == doctest::Approx(2.0 * d.beta).scale(50.0));
    CHECK(set.proper[0] + set.proper[1] == doctest::Approx(2.0 * d.beta).scale(50.0));
  }
}

TEST_CASE("sign-flipped branch gives the same delays") {
  SParams p;
  p.alpha = 0.7;
  p.gamma = 0.25;
  SParams flipped = p;
  flipped.gamma = p.gamma - kPi;
  flipped.reflection_sign = -1;
  const ParamDerivatives d{0.4, 1.0, -2.0};
  const auto a = closed_form_delays(p, d);
  const auto b = closed_form_delays(flipped, d);
  for (int j = 0; j < 2; ++j) {
    CHECK(a.partial[j] == doctest::Approx(b.partial[j]).epsilon(1e-12));
    CHECK(a.proper[j] == doctest::Approx(b.proper[j]).epsilon(1e-12));
  }
}

TEST_CASE("matrix, finite-difference and closed-form routes on the presets") {
  for (const auto& name : presets::names()) {
    const auto fn = preset_fn(name.c_str());
    for (double ev : {0.3, 2.0, 7.0}) {
      const auto pt = analyze_point(fn, units::ev_to_hartree(ev));
      const double scale = std::max(1.0, std::abs(pt.q.proper[0]) + std::abs(pt.q.proper[1]));
      CHECK(pt.q.antihermitian_residual < 1e-6 * scale);
      CHECK(pt.sum_rule_residual < 1e-8 * scale);
      for (int j = 0; j < 2; ++j) {
        if (pt.eig.root > 1e-3) CHECK(std::abs(pt.partial[j] - pt.partial_fd[j]) < 1e-6 * scale);
        CHECK(std::abs(pt.partial[j] - pt.closed.partial[j]) < 1e-6 * scale);
        CHECK(std::abs(pt.q.proper[j] - pt.closed.proper[j]) < 1e-6 * scale);
        CHECK(pt.partial[j] <= pt.q.proper[0] + 1e-6 * scale);
        CHECK(pt.partial[j] >= pt.q.proper[1] - 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("symmetric chain: partial delays are beta' +- alpha'") {
  const auto pt = analyze_point(preset_fn("V1"), units::ev_to_hartree(2.0));
  const double b = pt.derivs.beta;
  const double a = pt.derivs.alpha;
  const double c = std::cos(pt.params.effective_gamma());
  CHECK(std::abs(std::abs(c) - 1.0) < 1e-9);
  CHECK(std::abs(pt.partial[0] - (b + c * a)) < 1e-6);
  CHECK(std::abs(pt.partial[1] - (b - c * a)) < 1e-6);
  CHECK(std::abs(pt.q.proper[0] - (b + std::abs(a))) < 1e-6);
  CHECK(std::abs(pt.q.proper[1] - (b - std::abs(a))) < 1e-6);
}

TEST_CASE("reflectionless well: all four delays collapse") {
  const double e = units::ev_to_hartree(2.0);
  const auto pt = analyze_point(preset_fn("V5"), e);
  const double b = pt.derivs.beta;
  // beta = 2 atan(kappa / k): the attractive well advances the packet.
  const double k = std::sqrt(2.0 * e);
  const double kappa = 1.0 / units::angstrom_to_bohr(1.0);
  CHECK(b == doctest::Approx(-2.0 * kappa / (k * (k * k + kappa * kappa))).epsilon(1e-6));
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(pt.partial[j] - b) < 1e-6);
    CHECK(std::abs(pt.q.proper[j] - b) < 1e-6);
  }
}

TEST_CASE("noisy S-matrix fails the step-halving check") {
  const SMatrixFn fn = [](double e) {
    SParams p;
    p.alpha = 0.5 + 1e-3 * std::sin(3e6 * e);
    p.beta = e;
    return rebuild(p, e);
  };
  CHECK_THROWS_AS(analyze_point(fn, 0.2), DerivativeError);
  CHECK_THROWS_AS(sample_stencil(fn, 0.0), DomainError);
}

TEST_CASE("non-Hermitian lifetime matrix is rejected") {
  const Matrix2c s = Matrix2c::Identity();
  Matrix2c ds = Matrix2c::Zero();
  ds(0, 0) = 1.0;  // -i S^dagger S' = -i: purely anti-Hermitian
  CHECK_THROWS_AS(lifetime_matrix(SMatrix(0.1, Basis::directional, s), ds), DerivativeError);
}

TEST_CASE("spectral dwell time of narrow wavepackets") {
  const auto spec = presets::v2();
  const double e0 = units::ev_to_hartree(2.0);
  const double sigma = units::ev_to_hartree(0.02);
  const auto energies = linear_grid(e0 - 6.0 * sigma, e0 + 6.0 * sigma, 61);
  const auto spectrum = compute_spectrum(spec, energies);
  std::vector<LifetimeMatrix> qs;
  for (const auto& p : spectrum.points) qs.push_back(p.point.q);
  const auto amp = [&](double e) {
    return std::sqrt(std::exp(-0.5 * std::pow((e - e0) / sigma, 2)) / (std::sqrt(2.0 * kPi) * sigma));
  };
  const auto index = [&](double e) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < energies.size(); ++i) {
      if (std::abs(energies[i] - e) < std::abs(energies[best] - e)) best = i;
    }
    return best;
  };
  const auto& centre = spectrum.points[30];
  CHECK(centre.energy() == doctest::Approx(e0));

  std::array<double, 2> eig{};
  for (std::size_t j = 0; j < 2; ++j) {
    const AmplitudeProfile prof = [&, j](double e) {
      return Vector2c(amp(e) * spectrum.points[index(e)].vector[j].cast<cplx>());
    };
    eig[j] = dwell_time_spectral(prof, qs);
    CHECK(rel(eig[j], centre.partial[j]) < 1e-2);
  }
  CHECK(0.5 * (eig[0] + eig[1]) == doctest::Approx(centre.derivs().beta).epsilon(1e-2));

  const AmplitudeProfile w1 = [&](double e) { return Vector2c(amp(e) * qs[index(e)].w[0]); };
  CHECK(rel(dwell_time_spectral(w1, qs), centre.proper[0]) < 1e-2);

  const AmplitudeProfile unnormalized = [&](double e) { return Vector2c(amp(e) / 2.0, 0.0); };
  CHECK_THROWS_AS(dwell_time_spectral(unnormalized, qs), DomainError);
  const AmplitudeProfile off = [&](double e) {
    return Vector2c(std::sqrt(std::exp(-0.5 * std::pow((e - e0 - 5.0 * sigma) / sigma, 2)) / (std::sqrt(2.0 * kPi) * sigma)), 0.0);
  };
  CHECK_THROWS_AS(dwell_time_spectral(off, qs), DomainError);
}
