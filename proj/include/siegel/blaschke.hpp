#pragma once

// Degree-5 Blaschke model family
//   B(z) = e^{2 pi i t} z^3 (z - p)/(1 - conj(p) z) (z - q)/(1 - conj(q) z),  |p|, |q| > 1,
// with a double critical point at z = 1, the free critical pair (c, 1/conj(c)),
// and the standard degree-3 map f(z) = e^{2 pi i t} z^2 (z - 3)/(1 - 3z).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "siegel/arith.hpp"
#include "siegel/common.hpp"

namespace siegel {

/// e^{2 pi i t} z^k prod (z - a)/(1 - conj(a) z) over zeros a outside the disk.
class BlaschkeProduct {
 public:
  BlaschkeProduct(double t, int power, std::vector<cplx> zeros)
      : t_(t), power_(power), zeros_(std::move(zeros)), rotation_(unit_turn(t)) {}

  cplx operator()(cplx z) const {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return {INFINITY, INFINITY};
    cplx num = rotation_ * ipow(z);
    cplx den = 1.0;
    for (cplx a : zeros_) {
      cplx d = 1.0 - std::conj(a) * z;
      if (std::abs(z - 1.0 / std::conj(a)) < 1e-14) {
        throw Error(ErrorKind::Pole, "evaluation within 1e-14 of a pole");
      }
      num *= z - a;
      den *= d;
    }
    return num / den;
  }

  /// B'(z) / B(z)
  cplx log_derivative(cplx z) const {
    cplx s = static_cast<double>(power_) / z;
    for (cplx a : zeros_) s += 1.0 / (z - a) + std::conj(a) / (1.0 - std::conj(a) * z);
    return s;
  }

  cplx derivative(cplx z) const { return (*this)(z) * log_derivative(z); }

  /// Same zeros, different rotation factor.
  BlaschkeProduct with_rotation(double t) const { return BlaschkeProduct(t, power_, zeros_); }

  double t() const { return t_; }
  int power() const { return power_; }
  const std::vector<cplx>& zeros() const { return zeros_; }

 private:
  cplx ipow(cplx z) const {
    cplx r = 1.0;
    for (int i = 0; i < power_; ++i) r *= z;
    return r;
  }

  double t_;
  int power_;
  std::vector<cplx> zeros_;
  cplx rotation_;
};

// ---------------------------------------------------------------------------
// Critical equations

namespace detail {

/// sum (|a|^2 - 1)/|a - 1|^2 - 3 after rotating the point z0 on the circle to 1.
/// Zero iff the log-derivative vanishes at z0.
inline double circle_balance(cplx p, cplx q, cplx z0) {
  double s = -3.0;
  for (cplx a : {p * std::conj(z0), q * std::conj(z0)}) s += (std::norm(a) - 1.0) / std::norm(a - 1.0);
  return s;
}

/// Imaginary part of sum (a - conj a)(|a|^2 - 1)/|a - 1|^4 after rotating z0 to 1.
/// With circle_balance, zero iff z0 is a double critical point.
inline double circle_torsion(cplx p, cplx q, cplx z0) {
  double s = 0.0;
  for (cplx a : {p * std::conj(z0), q * std::conj(z0)}) {
    double n = std::norm(a - 1.0);
    s += 2.0 * a.imag() * (std::norm(a) - 1.0) / (n * n);
  }
  return s;
}

inline cplx quintic_log_derivative(cplx p, cplx q, cplx z) {
  cplx s = 3.0 / z;
  for (cplx a : {p, q}) s += 1.0 / (z - a) + std::conj(a) / (1.0 - std::conj(a) * z);
  return s;
}

inline bool on_circle(cplx mu) { return std::abs(std::abs(mu) - 1.0) < 1e-12; }

}  // namespace detail

/// The free critical point outside the open disk carried by the marking mu:
/// mu itself for |mu| >= 1, and 1/mu for |mu| < 1.
inline cplx free_critical_point(cplx mu) {
  if (mu == cplx(0.0, 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be nonzero");
  return std::abs(mu) >= 1.0 - 1e-12 ? mu : 1.0 / mu;
}

/// Residuals of the critical equations: double critical point at 1 (two real
/// equations) and L(c) = B'/B (c) = 0 at the free critical point c. On the
/// circle |mu| = 1 the last pair becomes the double-critical pair at mu.
inline std::array<double, 4> critical_residuals(cplx p, cplx q, cplx mu) {
  std::array<double, 4> r{detail::circle_balance(p, q, 1.0), detail::circle_torsion(p, q, 1.0), 0.0, 0.0};
  if (detail::on_circle(mu)) {
    cplx u = mu / std::abs(mu);
    r[2] = detail::circle_balance(p, q, u);
    r[3] = detail::circle_torsion(p, q, u);
  } else {
    cplx L = detail::quintic_log_derivative(p, q, free_critical_point(mu));
    r[2] = L.real();
    r[3] = L.imag();
  }
  return r;
}

inline double max_abs(const std::array<double, 4>& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

struct CriticalSolution {
  cplx p;
  cplx q;
  std::array<double, 4> residuals{};
  int newton_steps = 0;
  /// Index into the start schedule that converged.
  int start_index = -1;
};

struct SolveOptions {
  /// Required bound on every critical residual.
  double tol = 1e-10;
  int max_newton = 200;
  /// Central-difference step, relative to max(1, |x_i|).
  double fd_step = 1e-6;
  int random_starts = 8;
  std::uint64_t seed = 0x5eed;
  /// Newton steps are clipped to this multiple of |x| + 1. Unclipped steps
  /// drift toward p or q at infinity, where the residual flattens out.
  double max_step_ratio = 0.5;
  /// Continuation start, tried first when present.
  std::optional<std::pair<cplx, cplx>> initial;
  /// Rotation-number tolerance for the t calibration.
  double calibration_tol = 1e-9;
};

namespace detail {

using Vec4 = Eigen::Matrix<double, 4, 1>;

/// Newton residual: the circle equations at 1 and either c L(c) (scale-free
/// in c) or the circle equations at mu.
inline Vec4 newton_residual(const Vec4& x, cplx mu) {
  cplx p(x[0], x[1]);
  cplx q(x[2], x[3]);
  Vec4 r;
  r[0] = circle_balance(p, q, 1.0);
  r[1] = circle_torsion(p, q, 1.0);
  if (on_circle(mu)) {
    cplx u = mu / std::abs(mu);
    r[2] = circle_balance(p, q, u);
    r[3] = circle_torsion(p, q, u);
  } else {
    cplx c = free_critical_point(mu);
    cplx g = c * quintic_log_derivative(p, q, c);
    r[2] = g.real();
    r[3] = g.imag();
  }
  return r;
}

inline bool admissible(const Vec4& x) {
  return std::hypot(x[0], x[1]) > 1.0 + 1e-9 && std::hypot(x[2], x[3]) > 1.0 + 1e-9;
}

}  // namespace detail

/// Damped Newton on the four real critical equations from one start.
inline std::optional<CriticalSolution> newton_critical(cplx mu, cplx p0, cplx q0, const SolveOptions& opts = {}) {
  using detail::Vec4;
  Vec4 x(p0.real(), p0.imag(), q0.real(), q0.imag());
  if (!detail::admissible(x)) return std::nullopt;
  Vec4 f = detail::newton_residual(x, mu);
  double fn = f.norm();
  int steps = 0;
  for (; steps < opts.max_newton; ++steps) {
    if (!std::isfinite(fn)) return std::nullopt;
    if (f.cwiseAbs().maxCoeff() <= 1e-3 * opts.tol) break;
    Eigen::Matrix4d J;
    for (int k = 0; k < 4; ++k) {
      double h = opts.fd_step * std::max(1.0, std::abs(x[k]));
      Vec4 xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      J.col(k) = (detail::newton_residual(xp, mu) - detail::newton_residual(xm, mu)) / (2.0 * h);
    }
    Vec4 delta = J.fullPivLu().solve(-f);
    if (!delta.allFinite()) return std::nullopt;
    const double limit = opts.max_step_ratio * (x.norm() + 1.0);
    if (delta.norm() > limit) delta *= limit / delta.norm();
    bool accepted = false;
    for (double damp = 1.0; damp > 1e-10; damp *= 0.5) {
      Vec4 xn = x + damp * delta;
      if (!detail::admissible(xn)) continue;
      Vec4 fnew = detail::newton_residual(xn, mu);
      if (fnew.allFinite() && fnew.norm() < fn) {
        x = xn;
        f = fnew;
        fn = fnew.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  CriticalSolution s;
  s.p = cplx(x[0], x[1]);
  s.q = cplx(x[2], x[3]);
  if (std::abs(s.q) > std::abs(s.p)) std::swap(s.p, s.q);
  s.residuals = critical_residuals(s.p, s.q, mu);
  s.newton_steps = steps;
  if (!(max_abs(s.residuals) <= opts.tol) || !detail::admissible(x)) return std::nullopt;
  return s;
}

/// The start schedule: continuation, asymptotic (p ~ c, q ~ 3), then seeded
/// random pairs: p in the annulus 1.2 < |z| < max(8, 2|c|) (the far zero
/// grows like |c|), q in 1.2 < |z| < 8.
inline std::vector<std::pair<cplx, cplx>> newton_starts(cplx mu, const SolveOptions& opts) {
  std::vector<std::pair<cplx, cplx>> starts;
  if (opts.initial) starts.push_back(*opts.initial);
  cplx c = free_critical_point(mu);
  if (std::abs(c) >= 2.0) {
    starts.emplace_back(c, cplx(3.0, 0.0));
    starts.emplace_back(1.5 * c, cplx(3.0, 0.0));
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> far(1.2, std::max(8.0, 2.0 * std::abs(c)));
  std::uniform_real_distribution<double> near(1.2, 8.0);
  std::uniform_real_distribution<double> angle(0.0, 1.0);
  for (int i = 0; i < opts.random_starts; ++i) {
    cplx p = far(rng) * unit_turn(angle(rng));
    cplx q = near(rng) * unit_turn(angle(rng));
    starts.emplace_back(p, q);
  }
  return starts;
}

/// Solves for (p, q) given the marking mu; throws SolverFailure when no start
/// converges to an admissible solution.
inline CriticalSolution solve_critical(cplx mu, const SolveOptions& opts = {}) {
  free_critical_point(mu);
  auto starts = newton_starts(mu, opts);
  double best = INFINITY;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (auto s = newton_critical(mu, starts[i].first, starts[i].second, opts)) {
      s->start_index = static_cast<int>(i);
      return *s;
    }
    cplx p = starts[i].first, q = starts[i].second;
    best = std::min(best, max_abs(critical_residuals(p, q, mu)));
  }
  throw SolverFailure("no Newton start converged for mu = (" + std::to_string(mu.real()) + ", " +
                          std::to_string(mu.imag()) + ")",
                      best);
}

struct BlaschkeParams {
  double t = 0.0;
  cplx p;
  cplx q;
  cplx mu;
  RotationAngle theta;
  RotationEstimate rho;
  std::array<double, 4> residuals{};
  /// Index of the Newton start that converged (0 is the continuation start when one was given).
  int start_index = -1;

  BlaschkeProduct map() const { return BlaschkeProduct(t, 3, {p, q}); }
  cplx free_critical() const { return free_critical_point(mu); }
};

/// Lift of the circle restriction of B with rotation factor 0; the family
/// over t is this lift shifted by t.
inline CircleMapLift quintic_circle_lift(cplx p, cplx q) {
  BlaschkeProduct b0(0.0, 3, {p, q});
  return lift_circle_map([b0](cplx z) { return b0(z); }, "quintic Blaschke");
}

inline BlaschkeParams solve_blaschke(cplx mu, const RotationAngle& theta, const SolveOptions& opts = {}) {
  CriticalSolution s = solve_critical(mu, opts);
  CircleMapLift base = quintic_circle_lift(s.p, s.q);
  Calibration cal = calibrate_t([&base](double t) { return base.shifted(t); }, theta, opts.calibration_tol);
  return BlaschkeParams{cal.t, s.p, s.q, mu, theta, cal.rho, s.residuals, s.start_index};
}

// ---------------------------------------------------------------------------
// The standard degree-3 map

inline BlaschkeProduct standard_cubic_blaschke(double t) { return BlaschkeProduct(t, 2, {cplx(3.0, 0.0)}); }

/// Calibrates t so that f_t = e^{2 pi i t} z^2 (z-3)/(1-3z) has rotation
/// number theta on the circle.
inline Calibration standard_f_theta(const RotationAngle& theta, double tol = 1e-9) {
  BlaschkeProduct f0 = standard_cubic_blaschke(0.0);
  CircleMapLift base = lift_circle_map([f0](cplx z) { return f0(z); }, "standard cubic Blaschke");
  return calibrate_t([&base](double t) { return base.shifted(t); }, theta, tol);
}

// ---------------------------------------------------------------------------
// Connectedness locus

struct C5Class {
  enum class Tag { HitsClosedDisk, BoundedOutside, Escapes };

  Tag tag = Tag::BoundedOutside;
  /// First k with |B^k(c)| <= 1 when tag is HitsClosedDisk.
  int step = -1;
  int iterations_used = 0;

  bool member() const { return tag != Tag::Escapes; }
};

inline const char* to_string(C5Class::Tag t) {
  switch (t) {
    case C5Class::Tag::HitsClosedDisk: return "HitsClosedDisk";
    case C5Class::Tag::BoundedOutside: return "BoundedOutside";
    case C5Class::Tag::Escapes: return "Escapes";
  }
  return "?";
}

inline C5Class classify_c5(const BlaschkeParams& params, int max_iter = 2000, double escape_threshold = 1e6) {
  BlaschkeProduct b = params.map();
  cplx z = params.free_critical();
  C5Class out;
  for (int k = 0; k <= max_iter; ++k) {
    double r = std::abs(z);
    if (r <= 1.0) {
      out.tag = C5Class::Tag::HitsClosedDisk;
      out.step = k;
      out.iterations_used = k;
      return out;
    }
    if (r > escape_threshold) {
      out.tag = C5Class::Tag::Escapes;
      out.iterations_used = k;
      return out;
    }
    if (k < max_iter) z = b(z);
  }
  out.tag = C5Class::Tag::BoundedOutside;
  out.iterations_used = max_iter;
  return out;
}

inline C5Class classify_c5(cplx mu, const RotationAngle& theta, int max_iter = 2000, const SolveOptions& opts = {}) {
  return classify_c5(solve_blaschke(mu, theta, opts), max_iter);
}

/// Smallest k <= kmax with |B^k(z)| <= 1, if any. Used as a drop-coloring
/// surrogate; it is not the drop depth.
inline std::optional<int> first_entry_time(const BlaschkeProduct& b, cplx z, int kmax) {
  for (int k = 0; k <= kmax; ++k) {
    double r = std::abs(z);
    if (r <= 1.0) return k;
    if (!std::isfinite(r) || r > 1e300) return std::nullopt;
    if (k < kmax) z = b(z);
  }
  return std::nullopt;
}

}  // namespace siegel
