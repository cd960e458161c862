#pragma once

// Rotation-number arithmetic: continued fractions of the rotation angle,
// Brjuno partial sums, rotation numbers of circle maps and calibration of a
// rotation factor against a target angle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "siegel/common.hpp"

namespace siegel {

struct Convergent {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

/// An irrational rotation angle in (0,1) together with its continued-fraction
/// expansion [a_1, a_2, ...] and convergents p_k/q_k.
///
/// Digits are extracted in long double. Extraction stops early (without
/// error) once the next digit is no longer determined by the working
/// precision or a denominator would overflow 64 bits.
class RotationAngle {
 public:
  static RotationAngle from_value(long double value, int n) {
    if (!(value > 0.0L && value < 1.0L)) {
      throw Error(ErrorKind::InvalidArgument, "rotation angle must lie in (0,1)");
    }
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "digit count must be positive");

    RotationAngle r;
    r.value_ = value;
    constexpr long double eps = std::numeric_limits<long double>::epsilon();
    long double x = value;
    long double err = 0.0L;  // absolute error carried by x
    std::int64_t p_prev = 1, q_prev = 0;  // p_{-1}, q_{-1}
    std::int64_t p_cur = 0, q_cur = 1;    // p_0, q_0
    while (static_cast<int>(r.digits_.size()) < n) {
      long double y = 1.0L / x;
      long double y_err = err / (x * x) + 2.0L * y * eps;
      // working precision exhausted: further digits are not determined
      if (y_err > 1e-3L) break;
      long double a = std::floor(y);
      long double rem = y - a;
      bool terminates = false;
      if (rem <= y_err || 1.0L - rem <= y_err) {
        // A remainder inside the error ball is only evidence of a rational
        // input while that ball is tiny; otherwise precision has run out.
        if (y_err > 1e-9L) break;
        if (rem > y_err) a += 1.0L;
        terminates = true;
      }
      if (a > 4.0e18L) break;
      auto ai = static_cast<std::int64_t>(a);
      __int128 pn = static_cast<__int128>(ai) * p_cur + p_prev;
      __int128 qn = static_cast<__int128>(ai) * q_cur + q_prev;
      if (qn > static_cast<__int128>(std::numeric_limits<std::int64_t>::max() / 4)) break;
      r.digits_.push_back(ai);
      p_prev = p_cur;
      q_prev = q_cur;
      p_cur = static_cast<std::int64_t>(pn);
      q_cur = static_cast<std::int64_t>(qn);
      r.convergents_.push_back({p_cur, q_cur});
      if (terminates) {
        if (static_cast<int>(r.digits_.size()) < n) {
          throw Error(ErrorKind::RationalInput,
                      "continued fraction terminates after " + std::to_string(r.digits_.size()) + " digits");
        }
        break;
      }
      x = rem;
      err = y_err;
    }
    return r;
  }

  /// Builds the angle [a_1, a_2, ..., a_n]; the value is the n-th convergent
  /// evaluated in long double, the digits are kept exactly.
  static RotationAngle from_digits(std::vector<std::int64_t> digits) {
    if (digits.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one digit");
    RotationAngle r;
    std::int64_t p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1;
    for (std::int64_t a : digits) {
      if (a < 1) throw Error(ErrorKind::InvalidArgument, "continued-fraction digits must be positive");
      __int128 pn = static_cast<__int128>(a) * p_cur + p_prev;
      __int128 qn = static_cast<__int128>(a) * q_cur + q_prev;
      if (qn > static_cast<__int128>(std::numeric_limits<std::int64_t>::max() / 4)) {
        throw Error(ErrorKind::InvalidArgument, "convergent denominators overflow 64 bits");
      }
      p_prev = p_cur;
      q_prev = q_cur;
      p_cur = static_cast<std::int64_t>(pn);
      q_cur = static_cast<std::int64_t>(qn);
      r.convergents_.push_back({p_cur, q_cur});
    }
    long double x = 0.0L;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) x = 1.0L / (static_cast<long double>(*it) + x);
    r.value_ = x;
    r.digits_ = std::move(digits);
    return r;
  }

  /// (sqrt 5 - 1)/2 = [1, 1, 1, ...]
  static RotationAngle golden(int n = 40) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "digit count must be positive");
    RotationAngle r = from_digits(std::vector<std::int64_t>(static_cast<std::size_t>(n), 1));
    r.value_ = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    return r;
  }

  double value() const { return static_cast<double>(value_); }
  long double precise_value() const { return value_; }
  const std::vector<std::int64_t>& digits() const { return digits_; }
  const std::vector<Convergent>& convergents() const { return convergents_; }

  /// W_N = sum_{k<=N} log(q_{k+1}) / q_k for N = 1 .. (#convergents - 1).
  std::vector<double> brjuno_partial_sums() const {
    std::vector<double> sums;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < convergents_.size(); ++k) {
      acc += std::log(static_cast<double>(convergents_[k + 1].q)) / static_cast<double>(convergents_[k].q);
      sums.push_back(acc);
    }
    return sums;
  }

  std::int64_t max_digit() const {
    return digits_.empty() ? 0 : *std::max_element(digits_.begin(), digits_.end());
  }

  bool bounded_type(std::int64_t bound) const { return max_digit() <= bound; }

  /// e^{2 pi i theta}
  cplx multiplier() const { return unit_turn(value()); }

 private:
  RotationAngle() = default;

  long double value_ = 0.0L;
  std::vector<std::int64_t> digits_;
  std::vector<Convergent> convergents_;
};

/// A lift F: R -> R of a degree-one circle map, F(x+1) = F(x) + 1.
class CircleMapLift {
 public:
  using Fn = std::function<double(double)>;

  CircleMapLift(Fn f, std::string name) : f_(std::move(f)), name_(std::move(name)) {}

  double operator()(double x) const { return f_(x); }
  const std::string& name() const { return name_; }

  /// F + t, the lift of the map post-composed with rotation by t.
  CircleMapLift shifted(double t) const {
    Fn f = f_;
    return CircleMapLift([f, t](double x) { return f(x) + t; }, name_);
  }

  /// Checks periodicity and monotonicity on a sample grid.
  void validate(int samples = 256, double tol = 1e-12) const {
    double prev = f_(0.0);
    for (int i = 0; i <= samples; ++i) {
      double x = static_cast<double>(i) / samples;
      double fx = f_(x);
      double gap = f_(x + 1.0) - fx - 1.0;
      if (std::abs(gap) > tol * std::max(1.0, std::abs(fx))) {
        throw Error(ErrorKind::InvalidLift, name_ + ": F(x+1) - F(x) - 1 = " + sci(gap));
      }
      if (fx < prev - tol) {
        throw Error(ErrorKind::InvalidLift, name_ + ": lift decreases near x = " + std::to_string(x));
      }
      prev = fx;
    }
  }

 private:
  Fn f_;
  std::string name_;
};

inline CircleMapLift rigid_rotation_lift(double omega) {
  return CircleMapLift([omega](double x) { return x + omega; }, "rigid rotation");
}

/// x + omega + (k / 2 pi) sin(2 pi x); monotone for |k| <= 1.
inline CircleMapLift sine_circle_lift(double omega, double k) {
  return CircleMapLift([omega, k](double x) { return x + omega + k / kTwoPi * std::sin(kTwoPi * x); },
                       "sine circle map");
}

/// Lift of a degree-one map of the unit circle given in complex form.
///
/// The displacement F(x) - x is tabulated by unwrapping the argument on a
/// uniform grid; evaluation takes the exact argument and picks the branch
/// nearest the interpolated table value. The map is assumed to send the
/// circle to itself; only the argument of its value is used.
inline CircleMapLift lift_circle_map(std::function<cplx(cplx)> map, std::string name, int table_size = 4096) {
  std::vector<double> table(static_cast<std::size_t>(table_size) + 1);
  auto raw = [&map](double x) { return std::arg(map(unit_turn(x))) / kTwoPi - x; };
  table[0] = frac(raw(0.0));
  for (int j = 1; j <= table_size; ++j) {
    double x = static_cast<double>(j) / table_size;
    double a = raw(x);
    double step = wrap_half(a - table[j - 1]);
    if (std::abs(step) > 0.25) {
      throw Error(ErrorKind::InvalidLift, name + ": argument jumps by " + std::to_string(step) +
                                              " turns between table nodes; increase table size");
    }
    table[j] = table[j - 1] + step;
  }
  if (std::abs(table[table_size] - table[0]) > 1e-9) {
    throw Error(ErrorKind::InvalidLift, name + ": circle map is not of degree one");
  }
  table[table_size] = table[0];
  auto shared = std::make_shared<const std::vector<double>>(std::move(table));
  return CircleMapLift(
      [map = std::move(map), shared, table_size](double x) {
        const auto& tab = *shared;
        double k = std::floor(x);
        double u = x - k;
        double pos = u * table_size;
        auto j = std::min(static_cast<int>(pos), table_size - 1);
        double w = pos - j;
        double predicted = tab[j] * (1.0 - w) + tab[j + 1] * w;
        double a = std::arg(map(unit_turn(u))) / kTwoPi - u;
        double d = a + std::round(predicted - a);
        return k + u + d;
      },
      std::move(name));
}

struct RotationEstimate {
  double estimate = 0.0;
  double error_bound = 0.0;
  /// Rigorous bracket lower <= rho <= upper from a single orbit.
  double lower = 0.0;
  double upper = 0.0;
  /// Plain Birkhoff average (F^N(x0) - x0) / N.
  double birkhoff = 0.0;
  long iterations = 0;
};

/// Rotation number of a monotone degree-one lift.
///
/// For a monotone lift, F^n(x) - x in [m, m+1) forces m/n <= rho <= (m+1)/n,
/// so every iterate tightens a rigorous bracket; the tightest constraints
/// come from iterates at the convergent denominators of rho. The estimate is
/// the bracket midpoint and the error bound its half-width.
///
/// With a stop rule the orbit ends early once the bracket excludes
/// stop->target or is no wider than stop->width.
struct RotationStop {
  double target = 0.0;
  double width = 0.0;
};

inline RotationEstimate rotation_number(const CircleMapLift& lift, double x0 = 0.0, long budget = 100000,
                                        std::optional<RotationStop> stop = std::nullopt) {
  if (budget < 1) throw Error(ErrorKind::InvalidArgument, "iteration budget must be positive");
  lift.validate();

  double base = std::floor(x0);
  double u0 = x0 - base;
  double u = u0;
  std::int64_t shift = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double displacement = 0.0;
  long n = 1;
  for (; n <= budget; ++n) {
    double y = lift(u);
    double fy = std::floor(y);
    shift += static_cast<std::int64_t>(fy);
    u = y - fy;
    displacement = static_cast<double>(shift) + (u - u0);
    double m = std::floor(displacement);
    double nd = static_cast<double>(n);
    lower = std::max(lower, m / nd);
    upper = std::min(upper, displacement == m ? m / nd : (m + 1.0) / nd);
    if (lower > upper + 1e-12) {
      throw Error(ErrorKind::InvalidLift, lift.name() + ": orbit inconsistent with a monotone lift");
    }
    if (stop && (upper < stop->target || lower > stop->target || upper - lower <= stop->width)) break;
  }
  const long used = std::min(n, budget);
  RotationEstimate r;
  r.lower = lower;
  r.upper = std::max(lower, upper);
  r.estimate = 0.5 * (r.lower + r.upper);
  r.error_bound = 0.5 * (r.upper - r.lower);
  r.birkhoff = displacement / static_cast<double>(used);
  r.iterations = used;
  return r;
}

/// A one-parameter family of circle maps indexed by a rotation factor t.
using CircleFamily = std::function<CircleMapLift(double t)>;

struct CalibrationOptions {
  double t_lo = 0.0;
  double t_hi = 1.0;
  /// Orbit length for the coarse monotonicity grid.
  long initial_budget = 1000;
  long max_budget = 4096000;
  /// Rotation-number tolerances below this are refused.
  double min_tol = 1e-9;
  int monotone_grid = 8;
};

struct Calibration {
  double t = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  RotationEstimate rho;
  int evaluations = 0;
};

/// Finds t with |rho(family(t)) - target| <= tol by bisection on t.
///
/// The target is taken modulo 1 and shifted into the range of rotation
/// numbers swept by the family over [t_lo, t_hi]. Each bisection step runs
/// the orbit until the rigorous bracket decides the side.
inline Calibration calibrate_t(const CircleFamily& family, double target, double tol,
                               const CalibrationOptions& opts = {}) {
  if (tol < opts.min_tol) {
    throw Error(ErrorKind::InvalidArgument, "tolerance " + sci(tol) +
                                                " is below the estimator noise floor " + sci(opts.min_tol));
  }
  Calibration out;

  // coarse monotonicity check over the t-range
  std::vector<RotationEstimate> grid;
  for (int i = 0; i <= opts.monotone_grid; ++i) {
    double t = opts.t_lo + (opts.t_hi - opts.t_lo) * i / opts.monotone_grid;
    grid.push_back(rotation_number(family(t), 0.0, opts.initial_budget));
    ++out.evaluations;
    if (i > 0 && grid[i].upper < grid[i - 1].lower - 1e-12) {
      throw Error(ErrorKind::BracketFailure, "rotation number decreases in t near t = " + std::to_string(t));
    }
  }
  double lo_rho = grid.front().lower;
  double hi_rho = grid.back().upper;
  double goal = target - std::floor(target) + std::ceil(lo_rho - (target - std::floor(target)));
  if (goal < lo_rho || goal > hi_rho) {
    throw Error(ErrorKind::BracketFailure, "target rotation number outside the range swept by the family");
  }

  double lo = opts.t_lo;
  double hi = opts.t_hi;
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon()) {
    double mid = 0.5 * (lo + hi);
    RotationEstimate r = rotation_number(family(mid), 0.0, opts.max_budget, RotationStop{goal, tol});
    ++out.evaluations;
    if (r.upper < goal) {
      lo = mid;
    } else if (r.lower > goal) {
      hi = mid;
    } else if (r.upper - r.lower <= tol) {
      const double back = goal - (target - std::floor(target));
      out.t = mid;
      out.t_lo = lo;
      out.t_hi = hi;
      out.rho = r;
      out.rho.estimate -= back;
      out.rho.lower -= back;
      out.rho.upper -= back;
      return out;
    } else {
      throw Error(ErrorKind::BudgetExhausted, "rotation-number budget exhausted at t = " + std::to_string(mid));
    }
  }
  throw Error(ErrorKind::BudgetExhausted, "t bracket collapsed before reaching tolerance");
}

inline Calibration calibrate_t(const CircleFamily& family, const RotationAngle& target, double tol,
                               const CalibrationOptions& opts = {}) {
  return calibrate_t(family, target.value(), tol, opts);
}

}  // namespace siegel
