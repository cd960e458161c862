#pragma once

// The critically marked cubic family
//   P_c(z) = lambda z (1 - (1 + 1/c) z / 2 + z^2 / (3c)),  lambda = e^{2 pi i theta},
// with a Siegel disk at 0, critical points at c and 1, and the quadratic
// reference map Q(z) = lambda z + z^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "siegel/arith.hpp"
#include "siegel/common.hpp"

namespace siegel {

/// e^{2 pi i j theta} computed from the fractional part of j * theta in
/// extended precision, so high powers do not drift.
inline cplx rotation_power(const RotationAngle& theta, std::int64_t j) {
  long double x = theta.precise_value() * static_cast<long double>(j);
  x -= std::floor(x);
  return unit_turn(static_cast<double>(x));
}

class CubicMap {
 public:
  static constexpr int degree = 3;

  CubicMap(RotationAngle theta, cplx c) : theta_(std::move(theta)), c_(c) {
    if (c == cplx(0.0, 0.0) || !std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw Error(ErrorKind::InvalidArgument, "the free critical point c must be finite and nonzero");
    }
    lambda_ = theta_.multiplier();
    a2_ = -0.5 * lambda_ * (1.0 + 1.0 / c_);
    a3_ = lambda_ / (3.0 * c_);
  }

  cplx operator()(cplx z) const { return z * (lambda_ + z * (a2_ + z * a3_)); }
  cplx derivative(cplx z) const { return lambda_ + z * (2.0 * a2_ + 3.0 * a3_ * z); }

  /// m_c = 4.38 max(|c|, 1); |z| >= m_c implies |P_c(z)| >= 1.0148 |z|.
  double escape_radius() const { return 4.38 * std::max(std::abs(c_), 1.0); }

  const RotationAngle& theta() const { return theta_; }
  cplx lambda() const { return lambda_; }
  cplx c() const { return c_; }
  cplx quadratic_coefficient() const { return a2_; }
  cplx leading_coefficient() const { return a3_; }

 private:
  RotationAngle theta_;
  cplx c_;
  cplx lambda_;
  cplx a2_;
  cplx a3_;
};

class QuadraticMap {
 public:
  static constexpr int degree = 2;

  explicit QuadraticMap(RotationAngle theta) : theta_(std::move(theta)), lambda_(theta_.multiplier()) {}

  cplx operator()(cplx z) const { return z * (lambda_ + z); }
  cplx derivative(cplx z) const { return lambda_ + 2.0 * z; }
  cplx critical_point() const { return -0.5 * lambda_; }
  double escape_radius() const { return 2.0; }
  cplx leading_coefficient() const { return 1.0; }
  const RotationAngle& theta() const { return theta_; }
  cplx lambda() const { return lambda_; }

 private:
  RotationAngle theta_;
  cplx lambda_;
};

inline cplx cubic_eval(const CubicMap& map, cplx z) { return map(z); }
inline cplx quadratic_eval(const RotationAngle& theta, cplx z) { return QuadraticMap(theta)(z); }
inline double escape_radius(const CubicMap& map) { return map.escape_radius(); }

// ---------------------------------------------------------------------------
// Linearizer

/// Truncated power series of the linearizing map h(z) = z + a_2 z^2 + ...
/// solving h(lambda z) = P_c(h(z)).
struct LinearizerSeries {
  cplx c;
  /// coefficients[j] = a_j; coefficients[0] = 0, coefficients[1] = 1.
  std::vector<cplx> coefficients;
  double capacity = 0.0;
  /// True when the recursion overflowed and the series was cut short.
  bool truncated = false;

  int order() const { return static_cast<int>(coefficients.size()) - 1; }

  cplx operator()(cplx u) const {
    cplx acc = 0.0;
    for (auto j = coefficients.size(); j-- > 1;) acc = (acc + coefficients[j]) * u;
    return acc;
  }

  cplx derivative(cplx u) const {
    cplx acc = 0.0;
    for (auto j = coefficients.size(); j-- > 1;) acc = acc * u + static_cast<double>(j) * coefficients[j];
    return acc;
  }
};

/// Solves a_j (lambda^j - lambda) = A [h^2]_j + C [h^3]_j order by order and
/// estimates the conformal capacity by a root test over the tail window
/// j in [N/2, N]: 1 / max |a_j|^{1/j}.
inline LinearizerSeries linearizer(const CubicMap& map, int order = 256) {
  if (order < 2) throw Error(ErrorKind::InvalidArgument, "linearizer order must be at least 2");
  const cplx lambda = map.lambda();
  const cplx A = map.quadratic_coefficient();
  const cplx C = map.leading_coefficient();

  LinearizerSeries s;
  s.c = map.c();
  std::vector<cplx> a(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<cplx> sq(static_cast<std::size_t>(order) + 1, 0.0);  // [h^2]_j
  a[1] = 1.0;
  int last = 1;
  for (int j = 2; j <= order; ++j) {
    cplx sqj = 0.0;
    for (int i = 1; i < j; ++i) sqj += a[i] * a[j - i];
    sq[j] = sqj;
    cplx cuj = 0.0;
    for (int i = 1; i <= j - 2; ++i) cuj += a[i] * sq[j - i];
    cplx aj = (A * sqj + C * cuj) / (rotation_power(map.theta(), j) - lambda);
    if (!std::isfinite(aj.real()) || !std::isfinite(aj.imag()) || std::abs(aj) > 1e250) {
      s.truncated = true;
      break;
    }
    a[j] = aj;
    last = j;
  }
  a.resize(static_cast<std::size_t>(last) + 1);
  s.coefficients = std::move(a);

  double worst = -std::numeric_limits<double>::infinity();
  for (int j = std::max(1, last / 2); j <= last; ++j) {
    double m = std::abs(s.coefficients[j]);
    if (m > 0.0) worst = std::max(worst, std::log(m) / j);
  }
  s.capacity = std::isfinite(worst) ? std::exp(-worst) : std::numeric_limits<double>::infinity();
  return s;
}

enum class CaptureVerdict { Inside, Outside, Unknown };

inline const char* to_string(CaptureVerdict v) {
  switch (v) {
    case CaptureVerdict::Inside: return "inside";
    case CaptureVerdict::Outside: return "outside";
    case CaptureVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

struct CaptureOptions {
  double inner_factor = 0.5;
  double outer_factor = 0.9;
  int follow_iterations = 200;
  int newton_steps = 60;
};

namespace detail {

/// Newton inversion of the truncated linearizer, restricted to |u| < limit.
inline std::optional<cplx> invert_series(const LinearizerSeries& s, cplx z, cplx seed, double limit, int steps,
                                         bool& escaped) {
  escaped = false;
  cplx u = seed;
  double scale = std::max(1.0, std::abs(z));
  for (int it = 0; it < steps; ++it) {
    cplx r = s(u) - z;
    if (std::abs(r) <= 1e-13 * scale) return u;
    cplx d = s.derivative(u);
    if (d == cplx(0.0, 0.0)) return std::nullopt;
    u -= r / d;
    if (!(std::abs(u) < limit)) {
      escaped = true;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Heuristic Siegel-disk membership: the point must invert into the inner
/// linearizer disk and its next iterates must stay inside the outer one.
inline CaptureVerdict capture_probe(const CubicMap& map, const LinearizerSeries& series, cplx orbit_point,
                                    const CaptureOptions& opts = {}) {
  if (std::abs(orbit_point) > map.escape_radius()) return CaptureVerdict::Outside;
  const double kappa = series.capacity;
  if (!(kappa > 0.0) || !std::isfinite(kappa)) return CaptureVerdict::Unknown;
  const double limit = 0.95 * kappa;

  bool escaped = false;
  auto u0 = detail::invert_series(series, orbit_point, orbit_point, limit, opts.newton_steps, escaped);
  if (!u0) return escaped ? CaptureVerdict::Outside : CaptureVerdict::Unknown;
  if (std::abs(*u0) >= opts.inner_factor * kappa) return CaptureVerdict::Outside;

  cplx w = orbit_point;
  for (int n = 1; n <= opts.follow_iterations; ++n) {
    w = map(w);
    cplx seed = rotation_power(map.theta(), n) * *u0;
    auto un = detail::invert_series(series, w, seed, limit, opts.newton_steps, escaped);
    if (!un) return escaped ? CaptureVerdict::Outside : CaptureVerdict::Unknown;
    if (std::abs(*un) >= opts.outer_factor * kappa) return CaptureVerdict::Outside;
  }
  return CaptureVerdict::Inside;
}

// ---------------------------------------------------------------------------
// Classification

enum class CriticalPoint { Free, One };

struct OrbitClass {
  enum class Tag { ExteriorEscape, InteriorEscape, HyperbolicLike, Capture, InLocusUnresolved };

  Tag tag = Tag::InLocusUnresolved;
  int period = 0;
  cplx multiplier = 0.0;
  int entry_index = -1;
  /// Which critical orbit produced a HyperbolicLike or Capture verdict.
  CriticalPoint critical = CriticalPoint::Free;
  int iterations_used = 0;

  bool in_locus() const { return tag != Tag::ExteriorEscape && tag != Tag::InteriorEscape; }
};

inline const char* to_string(OrbitClass::Tag t) {
  switch (t) {
    case OrbitClass::Tag::ExteriorEscape: return "ExteriorEscape";
    case OrbitClass::Tag::InteriorEscape: return "InteriorEscape";
    case OrbitClass::Tag::HyperbolicLike: return "HyperbolicLike";
    case OrbitClass::Tag::Capture: return "Capture";
    case OrbitClass::Tag::InLocusUnresolved: return "InLocusUnresolved";
  }
  return "?";
}

struct ClassifyOptions {
  double recurrence_tol = 1e-9;
  int max_period = 64;
  double multiplier_margin = 1e-6;
  bool capture = true;
  int linearizer_order = 256;
  /// Number of leading orbit points examined by the capture probe.
  int capture_scan = 256;
  CaptureOptions capture_opts{};
};

namespace detail {

struct CycleProbe {
  int period = 0;
  cplx multiplier = 0.0;
};

template <class Map>
std::optional<CycleProbe> attracting_cycle(const Map& map, cplx start, const ClassifyOptions& opts) {
  std::vector<cplx> w;
  w.reserve(static_cast<std::size_t>(opts.max_period) + 1);
  w.push_back(start);
  for (int p = 1; p <= opts.max_period; ++p) {
    w.push_back(map(w.back()));
    if (std::abs(w.back() - start) < opts.recurrence_tol) {
      cplx mult = 1.0;
      for (int i = 0; i < p; ++i) mult *= map.derivative(w[i]);
      if (std::abs(mult) < 1.0 - opts.multiplier_margin) return CycleProbe{p, mult};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Classifies c by iterating both critical orbits with the escape test
/// |z| > m_c, then probing bounded orbits for an attracting cycle and for
/// capture by the Siegel disk. Bounded orbits that pass neither probe are
/// reported as InLocusUnresolved.
inline OrbitClass classify_cubic(const CubicMap& map, int max_iter, const ClassifyOptions& opts = {}) {
  if (max_iter < 100) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 100");
  const double radius = map.escape_radius();
  OrbitClass out;

  const int keep = opts.capture ? std::min(opts.capture_scan, max_iter) + 1 : 0;
  std::vector<cplx> orbit_free;
  std::vector<cplx> orbit_one;
  orbit_free.reserve(static_cast<std::size_t>(keep));
  orbit_one.reserve(static_cast<std::size_t>(keep));

  cplx zc = map.c();
  cplx z1 = 1.0;
  for (int n = 0; n <= max_iter; ++n) {
    if (std::abs(zc) > radius) {
      out.tag = OrbitClass::Tag::ExteriorEscape;
      out.iterations_used = n;
      return out;
    }
    if (std::abs(z1) > radius) {
      out.tag = OrbitClass::Tag::InteriorEscape;
      out.iterations_used = n;
      return out;
    }
    if (n < keep) {
      orbit_free.push_back(zc);
      orbit_one.push_back(z1);
    }
    if (n == max_iter) break;
    zc = map(zc);
    z1 = map(z1);
  }
  out.iterations_used = max_iter;

  const std::array<std::pair<cplx, CriticalPoint>, 2> finals{{{zc, CriticalPoint::Free}, {z1, CriticalPoint::One}}};
  for (const auto& [z, which] : finals) {
    if (auto cyc = detail::attracting_cycle(map, z, opts)) {
      out.tag = OrbitClass::Tag::HyperbolicLike;
      out.period = cyc->period;
      out.multiplier = cyc->multiplier;
      out.critical = which;
      out.iterations_used = max_iter + cyc->period;
      return out;
    }
  }

  if (opts.capture) {
    LinearizerSeries series = linearizer(map, opts.linearizer_order);
    const double reach = 2.0 * series.capacity;  // h(D(0, kappa/2)) lies in D(0, 2 kappa)
    const std::array<std::pair<const std::vector<cplx>*, CriticalPoint>, 2> orbits{
        {{&orbit_free, CriticalPoint::Free}, {&orbit_one, CriticalPoint::One}}};
    for (const auto& [orbit, which] : orbits) {
      for (std::size_t n = 1; n < orbit->size(); ++n) {
        cplx z = (*orbit)[n];
        if (std::abs(z) > reach) continue;
        if (capture_probe(map, series, z, opts.capture_opts) == CaptureVerdict::Inside) {
          out.tag = OrbitClass::Tag::Capture;
          out.entry_index = static_cast<int>(n);
          out.critical = which;
          return out;
        }
      }
    }
  }
  out.tag = OrbitClass::Tag::InLocusUnresolved;
  return out;
}

}  // namespace siegel
