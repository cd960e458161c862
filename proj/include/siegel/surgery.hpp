#pragma once

// Constructive pieces of the circle-to-disk surgery: the conjugacy h of the
// circle restriction to the rigid rotation, its Douady-Earle extension H to
// the disk, the modified map that is B outside the disk and H^{-1} R H inside,
// and Beltrami-coefficient sampling of H.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "siegel/arith.hpp"
#include "siegel/blaschke.hpp"
#include "siegel/common.hpp"

namespace siegel {

/// Circle homeomorphism h given by a sorted table of (x, h(x)) in turns with
/// h(0) = 0, interpolated piecewise linearly around the circle.
class CircleConjugacy {
 public:
  CircleConjugacy(std::vector<std::pair<double, double>> table, CircleMapLift lift, double theta,
                  std::vector<double> orbit = {})
      : table_(std::move(table)), lift_(std::move(lift)), theta_(theta), orbit_(std::move(orbit)) {
    if (table_.empty() || table_.front().first != 0.0 || table_.front().second != 0.0) {
      throw Error(ErrorKind::InvalidArgument, "table must start at (0, 0)");
    }
  }

  /// Table from the orbit of angle 0 under the lift: h(F^n(0) mod 1) = n theta mod 1.
  static CircleConjugacy from_orbit(const CircleMapLift& lift, double theta, int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "orbit length must be at least 2");
    std::vector<std::pair<double, double>> table;
    std::vector<double> orbit;
    table.reserve(static_cast<std::size_t>(n));
    orbit.reserve(static_cast<std::size_t>(n));
    double x = 0.0;
    long double target = 0.0L;
    for (int k = 0; k < n; ++k) {
      orbit.push_back(frac(x));
      table.emplace_back(orbit.back(), static_cast<double>(target));
      x = lift(x);
      target += theta;
      target -= std::floor(target);
    }
    std::sort(table.begin(), table.end());
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (table[i].first - table[i - 1].first < 1e-12) {
        throw Error(ErrorKind::OrbitCollision, "orbit points closer than 1e-12; reduce N");
      }
      if (!(table[i].second > table[i - 1].second)) {
        throw Error(ErrorKind::OrbitCollision, "orbit breaks circular order; reduce N");
      }
    }
    if (1.0 - table.back().first < 1e-12) {
      throw Error(ErrorKind::OrbitCollision, "orbit points closer than 1e-12; reduce N");
    }
    return CircleConjugacy(std::move(table), lift, theta, std::move(orbit));
  }

  /// Conjugacy of the rigid rotation to itself; the table is the identity.
  static CircleConjugacy rigid(double theta, int n) { return from_orbit(rigid_rotation_lift(theta), theta, n); }

  /// h as a lift: h(x + 1) = h(x) + 1.
  double operator()(double x) const { return eval(x, false); }
  double inverse(double y) const { return eval(y, true); }

  /// h(F(x)) - h(x) - theta wrapped into (-1/2, 1/2].
  double residual(double x) const { return wrap_half((*this)(lift_(x)) - (*this)(x) - theta_); }

  /// Largest |h(x_{n+1}) - h(x_n) - theta| mod 1 along the stored orbit, with
  /// x_{n+1} taken as the recorded successor of x_n.
  double table_residual() const {
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < orbit_.size(); ++n) {
      worst = std::max(worst, std::abs(wrap_half((*this)(orbit_[n + 1]) - (*this)(orbit_[n]) - theta_)));
    }
    return worst;
  }

  const std::vector<std::pair<double, double>>& table() const { return table_; }
  /// Orbit angles in iteration order (empty for hand-built tables).
  const std::vector<double>& orbit() const { return orbit_; }
  const CircleMapLift& lift() const { return lift_; }
  double theta() const { return theta_; }
  std::size_t size() const { return table_.size(); }

 private:
  double eval(double x, bool inverse) const {
    double k = std::floor(x);
    double u = x - k;
    auto key = [inverse](const std::pair<double, double>& e) { return inverse ? e.second : e.first; };
    auto val = [inverse](const std::pair<double, double>& e) { return inverse ? e.first : e.second; };
    auto it = std::upper_bound(table_.begin(), table_.end(), u,
                               [&key](double v, const std::pair<double, double>& e) { return v < key(e); });
    const auto& lo = *(it - 1);
    double x0 = key(lo), y0 = val(lo);
    double x1 = 1.0, y1 = 1.0;
    if (it != table_.end()) {
      x1 = key(*it);
      y1 = val(*it);
    }
    double w = (u - x0) / (x1 - x0);
    return k + y0 + w * (y1 - y0);
  }

  std::vector<std::pair<double, double>> table_;
  CircleMapLift lift_;
  double theta_;
  std::vector<double> orbit_;
};

/// Conjugacy for the circle restriction of the solved quintic Blaschke map,
/// built on the orbit of the critical point 1.
inline CircleConjugacy circle_conjugacy(const BlaschkeParams& params, int n) {
  CircleMapLift lift = quintic_circle_lift(params.p, params.q).shifted(params.t);
  return CircleConjugacy::from_orbit(lift, params.theta.value(), n);
}

/// Douady-Earle extension of a circle homeomorphism to the disk.
///
/// H(w) is the zero z of sum_j (xi_j - z) / (1 - conj(z) xi_j), where xi_j is
/// the boundary map at the image of the M uniform nodes under the disk
/// automorphism sending 0 to w. Equal weights at those nodes integrate the
/// Poisson kernel of w exactly for trigonometric polynomials of degree < M.
class DiskExtension {
 public:
  using BoundaryMap = std::function<cplx(cplx)>;

  explicit DiskExtension(BoundaryMap boundary, int quadrature = 2048)
      : boundary_(std::move(boundary)), m_(quadrature), cache_(std::make_shared<Cache>()) {
    if (m_ < 8) throw Error(ErrorKind::InvalidArgument, "quadrature order must be at least 8");
  }

  explicit DiskExtension(const CircleConjugacy& h, int quadrature = 2048)
      : DiskExtension([h](cplx z) { return unit_turn(h(turns_of(z))); }, quadrature) {}

  static DiskExtension identity(int quadrature = 2048) {
    return DiskExtension([](cplx z) { return z; }, quadrature);
  }

  cplx operator()(cplx w) const {
    if (!(std::abs(w) < 1.0)) throw Error(ErrorKind::InvalidArgument, "extension point must lie in the open disk");
    const std::pair<double, double> key{w.real(), w.imag()};
    {
      std::shared_lock lock(cache_->mutex);
      auto it = cache_->values.find(key);
      if (it != cache_->values.end()) return it->second;
    }
    cplx value = solve(w);
    std::unique_lock lock(cache_->mutex);
    cache_->values.emplace(key, value);
    return value;
  }

  /// w with H(w) = target, by damped 2D Newton with a finite-difference Jacobian.
  cplx inverse(cplx target, cplx seed, double tol = 1e-12, int max_steps = 60) const {
    if (!(std::abs(target) < 1.0)) throw Error(ErrorKind::InversionFailure, "target outside the disk");
    cplx w = seed;
    if (!(std::abs(w) < 1.0)) w *= 0.99 / std::abs(w);
    cplx r = (*this)(w) - target;
    for (int step = 0; step < max_steps; ++step) {
      if (std::abs(r) < tol) return w;
      double h = 1e-7 * std::max(1e-3, 1.0 - std::abs(w));
      cplx hx = ((*this)(w + h) - (*this)(w - h)) / (2.0 * h);
      cplx hy = ((*this)(w + cplx(0.0, h)) - (*this)(w - cplx(0.0, h))) / (2.0 * h);
      double det = hx.real() * hy.imag() - hy.real() * hx.imag();
      if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
      double dx = -(hy.imag() * r.real() - hy.real() * r.imag()) / det;
      double dy = -(-hx.imag() * r.real() + hx.real() * r.imag()) / det;
      cplx delta(dx, dy);
      double damp = 1.0;
      bool moved = false;
      for (int half = 0; half < 30; ++half, damp *= 0.5) {
        cplx cand = w + damp * delta;
        if (!(std::abs(cand) < 1.0)) continue;
        cplx rc = (*this)(cand) - target;
        if (std::abs(rc) < std::abs(r)) {
          w = cand;
          r = rc;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (std::abs(r) < tol) return w;
    throw Error(ErrorKind::InversionFailure, "inverse extension did not converge (residual " +
                                                 sci(std::abs(r)) + ")");
  }

  int quadrature() const { return m_; }
  const BoundaryMap& boundary() const { return boundary_; }

 private:
  struct Cache {
    std::shared_mutex mutex;
    std::map<std::pair<double, double>, cplx> values;
  };

  cplx solve(cplx w) const {
    std::vector<cplx> xi(static_cast<std::size_t>(m_));
    cplx mean(0.0, 0.0);
    for (int j = 0; j < m_; ++j) {
      cplx eta = unit_turn((j + 0.5) / m_);
      cplx zeta = (eta + w) / (1.0 + std::conj(w) * eta);
      xi[static_cast<std::size_t>(j)] = boundary_(zeta / std::abs(zeta));
      mean += xi[static_cast<std::size_t>(j)];
    }
    const double inv_m = 1.0 / m_;
    cplx z = mean * inv_m;
    if (!(std::abs(z) < 1.0)) z *= 0.99 / std::abs(z);

    // Each term has modulus 1 but carries rounding error of order eps / |1 - conj(z) x|,
    // so the floor of f is a small multiple of eps times the mean of 1 / |den|.
    double scale = 1.0;
    auto residual = [&](cplx at, cplx& fz, cplx& fzbar) {
      cplx f(0.0, 0.0);
      fz = fzbar = cplx(0.0, 0.0);
      cplx cz = std::conj(at);
      double size = 0.0;
      for (cplx x : xi) {
        cplx den = 1.0 - cz * x;
        cplx term = (x - at) / den;
        f += term;
        size += 1.0 / std::abs(den);
        fz -= 1.0 / den;
        fzbar += (x - at) * x / (den * den);
      }
      fz *= inv_m;
      fzbar *= inv_m;
      scale = size * inv_m;
      return f * inv_m;
    };
    auto at_floor = [&](cplx f) {
      return std::abs(f) < std::max(1e-11, 256.0 * std::numeric_limits<double>::epsilon() * scale);
    };

    cplx fz, fzbar;
    cplx f = residual(z, fz, fzbar);
    for (int step = 0; step < 100; ++step) {
      if (std::abs(f) < 1e-14) return z;
      // Solve fz d + fzbar conj(d) = -f.
      double den = std::norm(fz) - std::norm(fzbar);
      if (!std::isfinite(den) || den == 0.0) break;
      cplx delta = (-f * std::conj(fz) + fzbar * std::conj(f)) / den;
      double damp = 1.0;
      cplx cand = z + delta;
      cplx cfz, cfzbar;
      cplx cf;
      const double current_scale = scale;
      int half = 0;
      for (; half < 40; ++half, damp *= 0.5) {
        cand = z + damp * delta;
        if (!(std::abs(cand) < 1.0)) continue;
        cf = residual(cand, cfz, cfzbar);
        if (std::abs(cf) < std::abs(f)) break;
      }
      if (half == 40) {
        // Stagnation at the rounding floor, which rises as z nears the circle.
        scale = current_scale;
        if (at_floor(f)) return z;
        break;
      }
      z = cand;
      f = cf;
      fz = cfz;
      fzbar = cfzbar;
    }
    if (at_floor(f)) return z;
    throw Error(ErrorKind::ExtensionFailure,
                "barycenter Newton did not converge (residual " + sci(std::abs(f)) + ")");
  }

  BoundaryMap boundary_;
  int m_;
  std::shared_ptr<Cache> cache_;
};

inline cplx douady_earle_eval(const DiskExtension& ext, cplx w) { return ext(w); }

/// B outside the disk, H^{-1} o R_theta o H inside.
inline cplx modified_blaschke_eval(const BlaschkeParams& params, const DiskExtension& ext, cplx z) {
  if (std::abs(z) >= 1.0) return params.map()(z);
  cplx lambda = params.theta.multiplier();
  cplx target = lambda * ext(z);
  try {
    return ext.inverse(target, z);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InversionFailure) throw;
  }
  return ext.inverse(target, lambda * z);
}

struct BeltramiSample {
  cplx mu;
  double dilatation = 1.0;
};

/// Beltrami coefficient of H at w from central differences with spacing step
/// (default 1e-4 (1 - |w|)).
inline BeltramiSample beltrami_sample(const DiskExtension& ext, cplx w, double step = 0.0) {
  if (step <= 0.0) step = 1e-4 * (1.0 - std::abs(w));
  if (!(std::abs(w) + 2.0 * step < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "sample point too close to the circle for the step");
  }
  cplx hx = (ext(w + step) - ext(w - step)) / (2.0 * step);
  cplx hy = (ext(w + cplx(0.0, step)) - ext(w - cplx(0.0, step))) / (2.0 * step);
  cplx dz = 0.5 * (hx - cplx(0.0, 1.0) * hy);
  cplx dzbar = 0.5 * (hx + cplx(0.0, 1.0) * hy);
  BeltramiSample out;
  out.mu = dzbar / dz;
  double m = std::abs(out.mu);
  if (!(m < 1.0)) throw Error(ErrorKind::DegenerateSample, "|mu| = " + sci(m) + " is not below 1");
  out.dilatation = (1.0 + m) / (1.0 - m);
  return out;
}

}  // namespace siegel
