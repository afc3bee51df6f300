#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tdelay/analysis.hpp"
#include "tdelay/errors.hpp"
#include "tdelay/units.hpp"

using namespace tdelay;

namespace {

constexpr double kPi = std::numbers::pi;
const double kE = units::ev_to_hartree(2.0);
const double kA = units::angstrom_to_bohr(1.0);

std::vector<double> dx_grid(double lo, double hi, std::size_t n) { return linear_grid(lo, hi, n); }

std::vector<double> ev_grid(double lo, double hi, std::size_t n) {
  return linear_grid(units::ev_to_hartree(lo), units::ev_to_hartree(hi), n);
}

// Exact derivative of the upper proper delay with respect to dx, from the shifted closed form.
double proper_slope(const SParams& p, const ParamDerivatives& d, double k, double dx) {
  const double sa = std::sin(p.alpha);
  const double gp = d.gamma + 2.0 * dx / k;
  const double root = std::sqrt(d.alpha * d.alpha + sa * sa * gp * gp);
  return sa * sa * gp * (2.0 / k) / root;
}

}  // namespace

TEST_CASE("shift law for gamma and gamma'") {
  for (const char* name : {"V1", "V2", "V4"}) {
    const auto scan = shift_scan(presets::by_name(name), kE, dx_grid(-4.0 * kA, 4.0 * kA, 9));
    CHECK(scan.k == doctest::Approx(std::sqrt(2.0 * kE)));
    CHECK(scan.max_shift_residual < 1e-6);
    CHECK(scan.max_gamma_prime_residual < 1e-5);
    CHECK(scan.max_alpha_change < 1e-8);
    CHECK(scan.max_beta_change < 1e-8);
  }
}

TEST_CASE("closed forms stay valid after a shift") {
  const auto scan = shift_scan(presets::v2(), kE, dx_grid(-3.0, 3.0, 7));
  for (const auto& sp : scan.points) {
    const auto& pt = sp.point;
    const auto set = closed_form_delays(pt.params, pt.derivs);
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(set.proper[j] - pt.q.proper[j]) < 1e-6 * std::max(1.0, std::abs(pt.q.proper[j])));
      CHECK(sp.proper[j] == pt.q.proper[j]);
    }
  }
}

TEST_CASE("shift scan ordering and validation") {
  const auto scan = shift_scan(presets::v1(), kE, {1.0, -1.0, 0.0});
  REQUIRE(scan.points.size() == 3);
  CHECK(scan.points[0].dx == -1.0);
  CHECK(scan.points[2].dx == 1.0);
  CHECK_THROWS_AS(shift_scan(presets::v1(), kE, {1.0}), DomainError);
  CHECK_THROWS_AS(shift_scan(presets::v1(), kE, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(shift_scan(presets::v1(), -kE, {0.0, 1.0}), DomainError);
}

TEST_CASE("tail slopes follow the derivative of the shifted closed form") {
  const auto scan = shift_scan(presets::v2(), kE, dx_grid(-4.0 * kA, 4.0 * kA, 41));
  const auto& mid = scan.points[20];
  REQUIRE(mid.dx == doctest::Approx(0.0).scale(1.0));
  const double k = scan.k;
  const auto& a = scan.points[39];
  const auto& b = scan.points[40];
  // Secant of the closed-form branch equals the mean of its derivative over the interval.
  const double ref = 0.5 * (proper_slope(mid.params, mid.point.derivs, k, a.dx) +
                            proper_slope(mid.params, mid.point.derivs, k, b.dx));
  CHECK(scan.tail_slope_positive[0] == doctest::Approx(ref).epsilon(1e-3));
  // Bounded by 2 sin(alpha) / k, far below 2 / k for a weak reflector.
  const double bound = 2.0 * std::sin(mid.params.alpha) / k;
  CHECK(scan.tail_slope_positive[0] <= bound * (1.0 + 1e-6));
  CHECK(std::abs(scan.tail_slope_negative[0]) <= bound * (1.0 + 1e-6));
  CHECK(scan.tail_slope_positive[0] > 0.0);
}

TEST_CASE("minimal gap of a symmetric chain sits at the origin") {
  const auto g = minimal_gap(presets::v1(), kE);
  CHECK(std::abs(g.dx_min) < 1e-5);
  CHECK(g.consistent);
  CHECK(g.proper_gap == doctest::Approx(g.scan_proper_gap).epsilon(1e-4));
  // gamma = 0 at the minimum: both partial and proper gaps are 2 |alpha'|.
  CHECK(g.partial_gap == doctest::Approx(g.proper_gap).epsilon(1e-6));
}

TEST_CASE("minimal gap of the asymmetric chain") {
  const auto g = minimal_gap(presets::v2(), kE);
  CHECK(g.consistent);
  CHECK(std::abs(g.dx_min) > 1.0);
  CHECK(std::abs(g.scan_dx_min - g.dx_min) < 0.025);
  CHECK(g.proper_gap == doctest::Approx(g.scan_proper_gap).epsilon(1e-3));
  CHECK(g.partial_gap <= g.proper_gap * (1.0 + 1e-9));
}

TEST_CASE("symmetry verdicts") {
  const auto grid = ev_grid(0.5, 10.0, 80);
  const auto v1 = symmetry_test(presets::v1(), grid);
  CHECK(v1.verdict == Verdict::intrinsically_symmetric);
  REQUIRE(v1.x_cen.has_value());
  CHECK(std::abs(*v1.x_cen) < 1e-3);

  const auto v3 = symmetry_test(presets::v3(), grid);
  CHECK(v3.verdict == Verdict::intrinsically_symmetric);
  REQUIRE(v3.x_cen.has_value());
  CHECK(*v3.x_cen == doctest::Approx(2.0 * kA).epsilon(1e-3));
  CHECK(v3.gaps_coincide);

  const auto v2 = symmetry_test(presets::v2(), grid);
  CHECK(v2.verdict == Verdict::generically_asymmetric);
  CHECK_FALSE(v2.x_cen.has_value());
  CHECK(v2.spread > 1e-1);

  const auto v5 = symmetry_test(presets::v5(), grid);
  CHECK(v5.verdict == Verdict::indeterminate_single_channel);
  CHECK(v5.excluded == grid.size());
  CHECK(std::string(to_string(v5.verdict)) == "indeterminate-single-channel");
}

TEST_CASE("criterion is shift-invariant modulo pi for symmetric potentials") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto grid = ev_grid(0.5, 6.0, 24);
  for (int i = 0; i < 3; ++i) {
    const double dx = u(rng);
    const auto v = symmetry_test(PotentialSpec::shifted(presets::v1(), dx), grid);
    CHECK(v.verdict == Verdict::intrinsically_symmetric);
    REQUIRE(v.x_cen.has_value());
    CHECK(*v.x_cen == doctest::Approx(dx).epsilon(1e-3).scale(1.0));
    for (double c : v.c) CHECK(std::abs(std::remainder(c, kPi)) < 1e-3);
  }
}

TEST_CASE("crossing and equality functions") {
  SParams p;
  p.alpha = 0.5;
  p.gamma = 0.0;
  ParamDerivatives d{0.0, 1.0, 0.3};
  CHECK(crossing_function(p, d) == doctest::Approx(0.0));
  CHECK(equality_function(p, d) != doctest::Approx(0.0));
  // (alpha, gamma) -> (-alpha, gamma + pi) leaves the zero sets in place.
  SParams q = p;
  q.alpha = 0.9;
  q.gamma = 0.7;
  d = {0.4, 1.0, -0.2};
  SParams r = q;
  r.alpha = -q.alpha;
  r.gamma = q.gamma + kPi;
  ParamDerivatives dr = d;
  dr.alpha = -d.alpha;
  CHECK(crossing_function(r, dr) == doctest::Approx(crossing_function(q, d)));
  CHECK(equality_function(r, dr) == doctest::Approx(equality_function(q, d)));
}

TEST_CASE("partial delays cross where the crossing function vanishes") {
  const auto spec = presets::v2();
  const auto grid = ev_grid(0.5, 10.0, 100);
  const auto sp = compute_spectrum(spec, grid);
  const auto fn = directional_smatrix(spec, default_settings(spec, grid.back() + derivative_step(grid.back())));
  const auto roots = crossing_energies(fn, sp, Crossing::partial_crossing);
  for (double e : roots) {
    const auto pt = analyze_point(fn, e);
    const double scale = std::max(1.0, std::abs(pt.partial[0]));
    CHECK(std::abs(pt.partial[0] - pt.partial[1]) < 1e-4 * scale);
  }
  const auto eq = crossing_energies(fn, sp, Crossing::partial_equals_proper);
  for (double e : eq) {
    const auto pt = analyze_point(fn, e);
    const double scale = std::max(1.0, std::abs(pt.q.proper[0]));
    const double gap = std::min({std::abs(pt.partial[0] - pt.q.proper[0]), std::abs(pt.partial[0] - pt.q.proper[1]),
                                 std::abs(pt.partial[1] - pt.q.proper[0]), std::abs(pt.partial[1] - pt.q.proper[1])});
    CHECK(gap < 1e-4 * scale);
  }
}
