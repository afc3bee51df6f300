#include "tdelay/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "tdelay/errors.hpp"
#include "tdelay/units.hpp"

namespace tdelay {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string("potential parameter is not finite: ") + what);
}

void require_positive(double v, const char* what) {
  require_finite(v, what);
  if (v <= 0.0) throw ConfigError(std::string("potential parameter must be positive: ") + what);
}

// sech^2(u) without overflow for large |u|.
double sech2(double u) {
  const double e = std::exp(-2.0 * std::abs(u));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& v) {
  const std::size_t n = x.size();
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
  std::vector<double> m(n, 0.0);
  if (n == 2) {
    m[0] = m[1] = secant[0];
    return m;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = secant[i - 1];
    const double b = secant[i];
    if (a * b <= 0.0) continue;
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double w0 = 2.0 * h1 + h0;
    const double w1 = h1 + 2.0 * h0;
    m[i] = (w0 + w1) / (w0 / a + w1 / b);
  }
  // One-sided three-point end slopes, limited to keep monotonicity.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) s = 3.0 * d0;
    return s;
  };
  m[0] = end_slope(x[1] - x[0], x[2] - x[1], secant[0], secant[1]);
  m[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], secant[n - 2], secant[n - 3]);
  return m;
}

double eval_table(const Tabulated& t, double x) {
  if (x < t.x.front() || x > t.x.back()) {
    if (t.outside == OutsideTable::error) {
      std::ostringstream os;
      os << "x = " << x << " outside tabulated range [" << t.x.front() << ", " << t.x.back() << "]";
      throw DomainError(os.str());
    }
    return 0.0;
  }
  auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  std::size_t i = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
  if (i + 1 >= t.x.size()) i = t.x.size() - 2;
  const double h = t.x[i + 1] - t.x[i];
  const double s = (x - t.x[i]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * t.v[i] + h10 * h * t.slope[i] + h01 * t.v[i + 1] + h11 * h * t.slope[i + 1];
}

// Total displacement of a (possibly nested) shifted spec, used to widen scan windows.
double total_shift(const PotentialSpec& spec) {
  if (const auto* s = std::get_if<Shifted>(&spec.kind())) return s->dx + total_shift(*s->inner);
  return 0.0;
}

struct ScanWindow {
  double center;
  double half_width;
  double step;
};

ScanWindow scan_window(const PotentialSpec& spec) {
  const double d = spec.length_scale();
  if (const auto* t = std::get_if<Tabulated>(&spec.kind())) {
    const double span = t->x.back() - t->x.front();
    const double edge = std::max(std::abs(t->x.front()), std::abs(t->x.back()));
    return {0.0, edge + d, std::min(d / 20.0, span / 200.0)};
  }
  return {0.0, 1.0e3 * d + std::abs(total_shift(spec)), d / 20.0};
}

}  // namespace

PotentialSpec PotentialSpec::gaussian_sum(double depth, double width, std::vector<GaussianTerm> terms) {
  require_finite(depth, "depth");
  require_positive(width, "width");
  for (const auto& term : terms) {
    require_finite(term.prefactor, "prefactor");
    require_finite(term.center, "center");
  }
  return PotentialSpec(GaussianSum{depth, width, std::move(terms)});
}

PotentialSpec PotentialSpec::resonance(double width, double amplitude) {
  require_positive(width, "width");
  require_finite(amplitude, "amplitude");
  return PotentialSpec(Resonance{width, amplitude});
}

PotentialSpec PotentialSpec::sech_well(double width) {
  require_positive(width, "width");
  return PotentialSpec(SechWell{width});
}

PotentialSpec PotentialSpec::square_barrier(double height, double half_width) {
  require_finite(height, "height");
  require_positive(half_width, "half_width");
  return PotentialSpec(SquareBarrier{height, half_width});
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> x, std::vector<double> v, OutsideTable outside) {
  if (x.size() != v.size()) throw ConfigError("tabulated potential: x and V sizes differ");
  if (x.size() < 3) throw ConfigError("tabulated potential needs at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    require_finite(x[i], "x");
    require_finite(v[i], "V");
    if (i > 0 && !(x[i] > x[i - 1])) throw ConfigError("tabulated potential: x must be strictly increasing");
  }
  auto slope = pchip_slopes(x, v);
  return PotentialSpec(Tabulated{std::move(x), std::move(v), std::move(slope), outside});
}

PotentialSpec PotentialSpec::shifted(const PotentialSpec& inner, double dx) {
  require_finite(dx, "dx");
  if (const auto* s = std::get_if<Shifted>(&inner.kind_)) {
    return PotentialSpec(Shifted{s->inner, s->dx + dx});
  }
  return PotentialSpec(Shifted{std::make_shared<const PotentialSpec>(inner), dx});
}

double PotentialSpec::operator()(double x) const {
  return std::visit(
      Overloaded{
          [x](const GaussianSum& g) {
            double sum = 0.0;
            for (const auto& term : g.terms) {
              const double u = (x - term.center) / g.width;
              sum += term.prefactor * std::exp(-u * u);
            }
            return -g.depth * sum;
          },
          [x](const Resonance& r) {
            const double u = x / r.width - 0.5;
            return r.amplitude * std::exp(-u * u) * std::atan(2.0 * std::sin(2.0 * x / r.width));
          },
          [x](const SechWell& s) { return -sech2(x / s.width) / (s.width * s.width); },
          [x](const SquareBarrier& b) {
            const double ax = std::abs(x);
            if (ax < b.half_width) return b.height;
            if (ax == b.half_width) return 0.5 * b.height;
            return 0.0;
          },
          [x](const Tabulated& t) { return eval_table(t, x); },
          [x](const Shifted& s) { return (*s.inner)(x - s.dx); },
      },
      kind_);
}

double PotentialSpec::length_scale() const {
  return std::visit(Overloaded{
                        [](const GaussianSum& g) { return g.width; },
                        [](const Resonance& r) { return r.width; },
                        [](const SechWell& s) { return s.width; },
                        [](const SquareBarrier& b) { return b.half_width; },
                        [](const Tabulated& t) {
                          return 10.0 * (t.x.back() - t.x.front()) / static_cast<double>(t.x.size() - 1);
                        },
                        [](const Shifted& s) { return s.inner->length_scale(); },
                    },
                    kind_);
}

bool PotentialSpec::has_jumps() const { return !jump_points().empty(); }

std::vector<double> PotentialSpec::jump_points() const {
  if (const auto* b = std::get_if<SquareBarrier>(&kind_)) {
    if (b->height == 0.0) return {};
    return {-b->half_width, b->half_width};
  }
  if (const auto* s = std::get_if<Shifted>(&kind_)) {
    auto points = s->inner->jump_points();
    for (auto& p : points) p += s->dx;
    return points;
  }
  return {};
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const GaussianSum& g) {
                   os << "gaussian_sum(depth=" << g.depth << " Ha, width=" << g.width << " bohr, "
                      << g.terms.size() << " terms)";
                 },
                 [&](const Resonance& r) {
                   os << "resonance(width=" << r.width << " bohr, amplitude=" << r.amplitude << " Ha)";
                 },
                 [&](const SechWell& s) { os << "sech_well(width=" << s.width << " bohr)"; },
                 [&](const SquareBarrier& b) {
                   os << "square_barrier(height=" << b.height << " Ha, half_width=" << b.half_width << " bohr)";
                 },
                 [&](const Tabulated& t) { os << "tabulated(" << t.x.size() << " samples)"; },
                 [&](const Shifted& s) { os << "shifted(" << s.inner->describe() << ", dx=" << s.dx << " bohr)"; },
             },
             kind_);
  return os.str();
}

double max_abs(const PotentialSpec& spec) {
  const auto w = scan_window(spec);
  const auto n = static_cast<long>(std::ceil(w.half_width / w.step));
  double best = 0.0;
  for (long i = -n; i <= n; ++i) best = std::max(best, std::abs(spec(w.center + static_cast<double>(i) * w.step)));
  return best;
}

double default_eps_v(const PotentialSpec& spec) {
  const double m = max_abs(spec);
  return m > 0.0 ? 1e-12 * m : 1e-300;
}

double support_radius(const PotentialSpec& spec, double eps_v) {
  if (!(eps_v > 0.0)) throw DomainError("support_radius: eps_V must be positive");
  const double margin = 2.0 * spec.length_scale();
  const auto w = scan_window(spec);
  const auto n = static_cast<long>(std::ceil(w.half_width / w.step));
  const double cap = static_cast<double>(n) * w.step;
  if (std::abs(spec(cap)) >= eps_v || std::abs(spec(-cap)) >= eps_v) {
    std::ostringstream os;
    os << "potential " << spec.describe() << " does not decay below " << eps_v << " within |x| <= " << cap;
    throw NonShortRangeError(os.str());
  }
  for (long i = n; i >= 0; --i) {
    const double x = static_cast<double>(i) * w.step;
    if (std::abs(spec(x)) >= eps_v || std::abs(spec(-x)) >= eps_v) {
      return static_cast<double>(i + 1) * w.step + margin;
    }
  }
  return margin;
}

double support_radius(const PotentialSpec& spec) { return support_radius(spec, default_eps_v(spec)); }

ParitySplit parity_split(const PotentialSpec& spec) {
  auto shared = std::make_shared<const PotentialSpec>(spec);
  return ParitySplit{
      [shared](double r) { return 0.5 * ((*shared)(r) + (*shared)(-r)); },
      [shared](double r) { return 0.5 * ((*shared)(r) - (*shared)(-r)); },
  };
}

namespace presets {

namespace {

const double kDepth = units::ev_to_hartree(2.0);
const double kWidth = units::angstrom_to_bohr(1.0);

PotentialSpec gaussian_chain(double (*prefactor)(int)) {
  std::vector<GaussianTerm> terms;
  for (int j = -2; j <= 2; ++j) terms.push_back({prefactor(j), 2.0 * j * kWidth});
  return PotentialSpec::gaussian_sum(kDepth, kWidth, std::move(terms));
}

}  // namespace

PotentialSpec v1() {
  return gaussian_chain([](int) { return 1.0; });
}

PotentialSpec v2() {
  return gaussian_chain([](int j) { return 1.0 + j / 3.0; });
}

PotentialSpec v3() { return PotentialSpec::shifted(v1(), 2.0 * kWidth); }

// Amplitude taken in eV, on the same energy scale as V1/V2.
PotentialSpec v4() { return PotentialSpec::resonance(kWidth, units::ev_to_hartree(1.0)); }

PotentialSpec v5() { return PotentialSpec::sech_well(kWidth); }

PotentialSpec v6() { return PotentialSpec::shifted(v5(), units::angstrom_to_bohr(3.0)); }

PotentialSpec free_particle() { return PotentialSpec::gaussian_sum(0.0, kWidth, {}); }

PotentialSpec by_name(const std::string& name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "v1") return v1();
  if (key == "v2") return v2();
  if (key == "v3") return v3();
  if (key == "v4") return v4();
  if (key == "v5") return v5();
  if (key == "v6") return v6();
  if (key == "free" || key == "zero") return free_particle();
  throw ConfigError("unknown potential preset: " + name);
}

std::vector<std::string> names() { return {"V1", "V2", "V3", "V4", "V5", "V6"}; }

}  // namespace presets

}  // namespace tdelay
