#pragma once

// Escape-side structure of the cubic family: Green's function, Boettcher
// coordinate, and the parameter map Phi(s) = beta_s(P^s(s)) on the double
// cover c = s^2.

#include <cmath>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "siegel/arith.hpp"
#include "siegel/common.hpp"
#include "siegel/cubic.hpp"

namespace siegel {

template <class M>
concept PolynomialMap = requires(const M& m, cplx z) {
  { m(z) } -> std::convertible_to<cplx>;
  { m.leading_coefficient() } -> std::convertible_to<cplx>;
  { m.escape_radius() } -> std::convertible_to<double>;
  { M::degree } -> std::convertible_to<int>;
};

/// P^s(z) = lambda z (1 - (s + 1/s) z / 2 + z^2 / 3), critical points s and 1/s.
/// Conjugate to P_{s^2} by the dilation z -> s z.
class SCubic {
 public:
  static constexpr int degree = 3;

  SCubic(RotationAngle theta, cplx s) : theta_(std::move(theta)), s_(s) {
    if (s == cplx(0.0, 0.0)) throw Error(ErrorKind::InvalidArgument, "s must be nonzero");
    lambda_ = theta_.multiplier();
    a2_ = -0.5 * lambda_ * (s_ + 1.0 / s_);
    a3_ = lambda_ / 3.0;
  }

  cplx operator()(cplx z) const { return z * (lambda_ + z * (a2_ + z * a3_)); }
  cplx derivative(cplx z) const { return lambda_ + z * (2.0 * a2_ + 3.0 * a3_ * z); }
  cplx leading_coefficient() const { return a3_; }
  /// m_{s^2} / |s|, the image of the cubic escape radius under z -> z/s.
  double escape_radius() const { return 4.38 * std::max(std::abs(s_), 1.0 / std::abs(s_)); }

  /// P^s(s) = -(lambda/6) s^3 + (lambda/2) s
  cplx critical_value() const { return (*this)(s_); }

  cplx s() const { return s_; }
  cplx lambda() const { return lambda_; }
  const RotationAngle& theta() const { return theta_; }

 private:
  RotationAngle theta_;
  cplx s_;
  cplx lambda_;
  cplx a2_;
  cplx a3_;
};

/// G(z) = lim d^{-n} log|P^n(z)|, evaluated with the asymptotic correction
/// log|a_d|/(d-1) once the orbit is past the escape radius. Returns 0 when
/// the orbit stays bounded within the budget.
template <PolynomialMap Map>
double green_function(const Map& map, cplx z, int budget = 2000) {
  constexpr double d = Map::degree;
  const double correction = std::log(std::abs(map.leading_coefficient())) / (d - 1.0);
  const double radius = std::max(map.escape_radius(), 1e3);
  double scale = 1.0;
  double prev = NAN;
  cplx w = z;
  for (int k = 0; k <= budget; ++k) {
    double r = std::abs(w);
    if (!std::isfinite(r)) break;
    if (r > radius) {
      double est = scale * (std::log(r) + correction);
      if (r > 1e100 || (std::isfinite(prev) && std::abs(est - prev) < 1e-12 * std::max(1.0, std::abs(est)))) {
        return est;
      }
      prev = est;
    }
    w = map(w);
    scale /= d;
  }
  return std::isfinite(prev) ? prev : 0.0;
}

struct BoettcherOptions {
  int max_terms = 2000;
  /// Points with smaller Green's function are refused.
  double min_green = 0.05;
};

struct BoettcherValue {
  cplx value;
  /// log beta(z); exp(log_value) = value.
  cplx log_value;
  double green = 0.0;
  int terms = 0;
};

namespace detail {

/// log with the branch cut of the argument placed at angle `cut`.
inline cplx log_with_cut(cplx w, double cut) {
  double a = std::arg(w);
  while (a > cut) a -= kTwoPi;
  while (a <= cut - kTwoPi) a += kTwoPi;
  return {std::log(std::abs(w)), a};
}

inline bool near_cut(cplx w, double cut) {
  double a = std::arg(w);
  double dist = std::abs(wrap_half((a - cut) / kTwoPi)) * kTwoPi;
  return dist < 1e-12;
}

/// log beta(z) = log z + log(a)/(d-1) + sum_n d^{-n} log(P^n(z) / (a (P^{n-1}(z))^d))
/// with every term on the branch given by `cut`. Returns false on ambiguity.
template <PolynomialMap Map>
bool boettcher_log_sum(const Map& map, cplx z, double cut, int max_terms, cplx& out, int& terms) {
  constexpr int d = Map::degree;
  const cplx a = map.leading_coefficient();
  cplx sum = std::log(z) + std::log(a) / static_cast<double>(d - 1);
  double weight = 1.0 / d;
  cplx w = z;
  terms = 0;
  for (int n = 1; n <= max_terms; ++n) {
    if (std::abs(w) > 1e60) break;
    cplx next = map(w);
    cplx wd = a;
    for (int i = 0; i < d; ++i) wd *= w;
    cplx ratio = next / wd;
    if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag()) || ratio == cplx(0.0, 0.0)) return false;
    if (near_cut(ratio, cut)) return false;
    cplx term = weight * log_with_cut(ratio, cut);
    sum += term;
    terms = n;
    if (std::abs(term) < 1e-15) break;
    weight /= d;
    w = next;
  }
  out = sum;
  return true;
}

}  // namespace detail

/// Boettcher coordinate normalized by beta(z)/z -> sqrt(a_d) for degree 3
/// (a_d^{1/(d-1)} in general), using the principal branch of log(a_d).
template <PolynomialMap Map>
BoettcherValue boettcher_map(const Map& map, cplx z, const BoettcherOptions& opts = {}) {
  BoettcherValue out;
  out.green = green_function(map, z, opts.max_terms);
  if (!(out.green > opts.min_green)) {
    throw Error(ErrorKind::InvalidArgument,
                "Green's function " + sci(out.green) + " below the working threshold");
  }
  cplx lg;
  int terms = 0;
  bool ok = detail::boettcher_log_sum(map, z, std::numbers::pi, opts.max_terms, lg, terms);
  if (!ok) ok = detail::boettcher_log_sum(map, z, std::numbers::pi - 0.1, opts.max_terms, lg, terms);
  if (!ok) throw Error(ErrorKind::Branch, "orbit sits on the logarithm cut for every tried cut");
  out.log_value = lg;
  out.value = std::exp(lg);
  out.terms = terms;
  return out;
}

struct PhiValue {
  cplx value;
  cplx critical_value;
  /// Forward steps taken before the Boettcher evaluation.
  int pushed = 0;
};

/// Phi(s) = beta_s(P^s(s)). When the critical value escapes slowly the orbit
/// is pushed forward k steps and the 3^k-th root is taken in log
/// coordinates, keeping the per-step branch terms of the original orbit.
inline PhiValue phi(const RotationAngle& theta, cplx s, const BoettcherOptions& opts = {}) {
  SCubic map(theta, s);
  PhiValue out;
  out.critical_value = map.critical_value();
  double g = green_function(map, out.critical_value, opts.max_terms);
  if (!(g > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "critical value does not escape: s^2 is not in the exterior component");
  }
  cplx w = out.critical_value;
  std::vector<cplx> path{w};
  while (g <= opts.min_green) {
    w = map(w);
    path.push_back(w);
    g *= 3.0;
    ++out.pushed;
    if (out.pushed > 200) throw Error(ErrorKind::BudgetExhausted, "critical value escapes too slowly");
  }
  BoettcherValue far = boettcher_map(map, w, opts);
  const cplx a = map.leading_coefficient();
  // log beta(v) = log v + log(a)/2 + sum_{n<=k} 3^{-n} r_n(v) + 3^{-k} (log beta(w_k) - log w_k - log(a)/2)
  cplx lg = std::log(path.front()) + 0.5 * std::log(a);
  double weight = 1.0 / 3.0;
  for (int n = 1; n <= out.pushed; ++n) {
    cplx prev = path[n - 1];
    cplx ratio = path[n] / (a * prev * prev * prev);
    lg += weight * std::log(ratio);
    weight /= 3.0;
  }
  lg += 3.0 * weight * (far.log_value - std::log(w) - 0.5 * std::log(a));
  out.value = std::exp(lg);
  return out;
}

/// Leading-order model sqrt(lambda/3) (-(lambda/6) s^3 + (lambda/2) s).
inline cplx phi_asymptotic(const RotationAngle& theta, cplx s) {
  cplx lambda = theta.multiplier();
  return std::sqrt(lambda / 3.0) * (-(lambda / 6.0) * s * s * s + 0.5 * lambda * s);
}

/// Winding number of a closed curve given by nonzero samples in order.
inline int winding_degree(std::span<const cplx> samples, double max_step = std::numbers::pi / 2) {
  if (samples.size() < 3) throw Error(ErrorKind::ResampleNeeded, "need at least three samples");
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    cplx a = samples[i];
    cplx b = samples[(i + 1) % samples.size()];
    if (a == cplx(0.0, 0.0) || b == cplx(0.0, 0.0)) {
      throw Error(ErrorKind::DegenerateSample, "curve passes through zero");
    }
    double step = std::arg(b / a);
    if (std::abs(step) > max_step) {
      throw Error(ErrorKind::ResampleNeeded, "angular step " + std::to_string(step) + " too large; resample");
    }
    total += step;
  }
  double turns = total / kTwoPi;
  double k = std::round(turns);
  if (std::abs(turns - k) > 0.1) throw Error(ErrorKind::ResampleNeeded, "winding is not close to an integer");
  return static_cast<int>(k);
}

/// Degree of Phi over the circle |s| = radius.
inline int phi_winding(const RotationAngle& theta, double radius, int samples = 1024) {
  std::vector<cplx> values;
  values.reserve(static_cast<std::size_t>(samples));
  for (int j = 0; j < samples; ++j) {
    values.push_back(phi(theta, radius * unit_turn(static_cast<double>(j) / samples)).value);
  }
  return winding_degree(values);
}

}  // namespace siegel
