#pragma once

#include <cmath>
#include <cstdio>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace siegel {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e^{2 pi i turns}
inline cplx unit_turn(double turns) {
  return std::polar(1.0, kTwoPi * turns);
}

/// Fractional part in [0, 1).
inline double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

/// Argument of z in turns, in [0, 1).
inline double turns_of(cplx z) {
  return frac(std::arg(z) / kTwoPi);
}

/// Wraps a turn count into (-1/2, 1/2].
inline double wrap_half(double x) {
  double r = x - std::round(x);
  return r <= -0.5 ? r + 1.0 : r;
}

/// Short scientific rendering for diagnostics.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

enum class ErrorKind {
  InvalidArgument,
  RationalInput,
  InvalidLift,
  BracketFailure,
  BudgetExhausted,
  Pole,
  SolverFailure,
  Branch,
  ResampleNeeded,
  OrbitCollision,
  ExtensionFailure,
  InversionFailure,
  DegenerateSample,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::RationalInput: return "rational-input";
    case ErrorKind::InvalidLift: return "invalid-lift";
    case ErrorKind::BracketFailure: return "bracket-failure";
    case ErrorKind::BudgetExhausted: return "budget-exhausted";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::Branch: return "branch";
    case ErrorKind::ResampleNeeded: return "resample-needed";
    case ErrorKind::OrbitCollision: return "orbit-collision";
    case ErrorKind::ExtensionFailure: return "extension-failure";
    case ErrorKind::InversionFailure: return "inversion-failure";
    case ErrorKind::DegenerateSample: return "degenerate-sample";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown when every Newton start failed; carries the smallest residual seen.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double best_residual)
      : Error(ErrorKind::SolverFailure, what + " (best residual " + sci(best_residual) + ")"),
        best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace siegel
