#pragma once

// Rasters of the parameter planes and dynamical planes, orbit dumps, and
// binary PPM output. Work is split by scanline; every scanline is a pure
// function of its inputs, so output does not depend on the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "siegel/arith.hpp"
#include "siegel/blaschke.hpp"
#include "siegel/common.hpp"
#include "siegel/cubic.hpp"

namespace siegel {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kPaletteVersion = 1;

/// Axis-aligned window. Pixel (i, j) is column i, row j, counted from the top
/// left; its center has
///   Re = Re(center) - width/2 + (i + 1/2) width/nx
///   Im = Im(center) + height/2 - (j + 1/2) height/ny.
struct Window {
  cplx center{0.0, 0.0};
  double width = 4.0;
  double height = 4.0;
  int nx = 64;
  int ny = 64;

  cplx pixel(int i, int j) const {
    double re = center.real() - 0.5 * width + (i + 0.5) * width / nx;
    double im = center.imag() + 0.5 * height - (j + 0.5) * height / ny;
    return {re, im};
  }
  double pixel_width() const { return width / nx; }
  double pixel_height() const { return height / ny; }

  void validate() const {
    if (!(width > 0.0) || !(height > 0.0) || nx <= 0 || ny <= 0) {
      throw Error(ErrorKind::InvalidArgument, "window needs positive extent and resolution");
    }
  }
};

enum class Cell : std::uint8_t {
  // cubic parameter plane
  ExteriorEscape = 0,
  InteriorEscape = 1,
  HyperbolicLike = 2,
  Capture = 3,
  InLocusUnresolved = 4,
  // quintic parameter plane
  HitsClosedDisk = 5,
  BoundedOutside = 6,
  Escapes = 7,
  SolverFailure = 8,
  // dynamical planes
  Escaping = 9,
  Bounded = 10,
  BasinZero = 11,
  BasinInfinity = 12,
  Undecided = 13,
  // pixel where the parameter is outside the family
  Invalid = 14,
};

inline const char* to_string(Cell c) {
  switch (c) {
    case Cell::ExteriorEscape: return "ExteriorEscape";
    case Cell::InteriorEscape: return "InteriorEscape";
    case Cell::HyperbolicLike: return "HyperbolicLike";
    case Cell::Capture: return "Capture";
    case Cell::InLocusUnresolved: return "InLocusUnresolved";
    case Cell::HitsClosedDisk: return "HitsClosedDisk";
    case Cell::BoundedOutside: return "BoundedOutside";
    case Cell::Escapes: return "Escapes";
    case Cell::SolverFailure: return "SolverFailure";
    case Cell::Escaping: return "Escaping";
    case Cell::Bounded: return "Bounded";
    case Cell::BasinZero: return "BasinZero";
    case Cell::BasinInfinity: return "BasinInfinity";
    case Cell::Undecided: return "Undecided";
    case Cell::Invalid: return "Invalid";
  }
  return "?";
}

inline bool in_cubic_locus(Cell c) {
  return c == Cell::HyperbolicLike || c == Cell::Capture || c == Cell::InLocusUnresolved;
}

inline bool in_quintic_locus(Cell c) { return c == Cell::HitsClosedDisk || c == Cell::BoundedOutside; }

struct Raster {
  Window window;
  std::vector<Cell> codes;
  /// Iterations used, or the first-entry time for quintic dynamical planes (-1 if none).
  std::vector<std::int32_t> values;
  nlohmann::json metadata;

  Cell code(int i, int j) const { return codes[index(i, j)]; }
  std::int32_t value(int i, int j) const { return values[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(window.nx) + static_cast<std::size_t>(i);
  }
  std::size_t count(Cell c) const { return static_cast<std::size_t>(std::count(codes.begin(), codes.end(), c)); }
};

/// Calls row(j) for every j in [0, rows) on `workers` threads (0 = hardware
/// concurrency). Rows are claimed from a shared counter.
template <class RowFn>
void for_each_row(int rows, unsigned workers, RowFn&& row) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(rows, 1)));
  if (workers <= 1) {
    for (int j = 0; j < rows; ++j) row(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int j = next.fetch_add(1); j < rows; j = next.fetch_add(1)) {
        try {
          row(j);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {

inline nlohmann::json window_json(const Window& w) {
  return {{"center", {w.center.real(), w.center.imag()}},
          {"width", w.width},
          {"height", w.height},
          {"resolution", {w.nx, w.ny}}};
}

inline nlohmann::json base_metadata(const std::string& kind, const RotationAngle& theta, const Window& w, int max_iter) {
  return {{"kind", kind},
          {"theta_digits", theta.digits()},
          {"theta", theta.value()},
          {"max_iter", max_iter},
          {"window", window_json(w)},
          {"version", kVersion},
          {"palette", kPaletteVersion}};
}

inline Raster blank(const Window& w, nlohmann::json meta) {
  w.validate();
  Raster r;
  r.window = w;
  const auto n = static_cast<std::size_t>(w.nx) * static_cast<std::size_t>(w.ny);
  r.codes.assign(n, Cell::Undecided);
  r.values.assign(n, 0);
  r.metadata = std::move(meta);
  return r;
}

inline Cell cubic_cell(OrbitClass::Tag t) {
  switch (t) {
    case OrbitClass::Tag::ExteriorEscape: return Cell::ExteriorEscape;
    case OrbitClass::Tag::InteriorEscape: return Cell::InteriorEscape;
    case OrbitClass::Tag::HyperbolicLike: return Cell::HyperbolicLike;
    case OrbitClass::Tag::Capture: return Cell::Capture;
    case OrbitClass::Tag::InLocusUnresolved: return Cell::InLocusUnresolved;
  }
  return Cell::Invalid;
}

inline Cell quintic_cell(C5Class::Tag t) {
  switch (t) {
    case C5Class::Tag::HitsClosedDisk: return Cell::HitsClosedDisk;
    case C5Class::Tag::BoundedOutside: return Cell::BoundedOutside;
    case C5Class::Tag::Escapes: return Cell::Escapes;
  }
  return Cell::Invalid;
}

}  // namespace detail

/// Per-pixel classify_cubic over the c-plane. The pixel at c = 0 is Invalid.
inline Raster render_parameter_cubic(const RotationAngle& theta, const Window& window, int max_iter,
                                     unsigned workers = 0, const ClassifyOptions& opts = {}) {
  Raster r = detail::blank(window, detail::base_metadata("parameter-cubic", theta, window, max_iter));
  for_each_row(window.ny, workers, [&](int j) {
    for (int i = 0; i < window.nx; ++i) {
      cplx c = window.pixel(i, j);
      std::size_t k = r.index(i, j);
      if (c == cplx(0.0, 0.0)) {
        r.codes[k] = Cell::Invalid;
        continue;
      }
      OrbitClass oc = classify_cubic(CubicMap(theta, c), max_iter, opts);
      r.codes[k] = detail::cubic_cell(oc.tag);
      r.values[k] = oc.iterations_used;
    }
  });
  return r;
}

/// Per-pixel solve_blaschke then classify_c5 over the mu-plane. Each scanline
/// runs left to right, seeding Newton with the left neighbor's zeros and
/// falling back to the full start schedule with a per-pixel seed.
inline Raster render_parameter_blaschke(const RotationAngle& theta, const Window& window, int max_iter,
                                        unsigned workers = 0, const SolveOptions& base = {}) {
  Raster r = detail::blank(window, detail::base_metadata("parameter-quintic", theta, window, max_iter));
  std::vector<int> row_failures(static_cast<std::size_t>(window.ny), 0);
  std::vector<int> row_fallbacks(static_cast<std::size_t>(window.ny), 0);
  for_each_row(window.ny, workers, [&](int j) {
    std::optional<std::pair<cplx, cplx>> previous;
    for (int i = 0; i < window.nx; ++i) {
      cplx mu = window.pixel(i, j);
      std::size_t k = r.index(i, j);
      if (mu == cplx(0.0, 0.0)) {
        r.codes[k] = Cell::Invalid;
        previous.reset();
        continue;
      }
      SolveOptions opts = base;
      opts.seed = base.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1));
      opts.initial = previous;
      try {
        BlaschkeParams params = solve_blaschke(mu, theta, opts);
        C5Class cls = classify_c5(params, max_iter);
        r.codes[k] = detail::quintic_cell(cls.tag);
        r.values[k] = cls.iterations_used;
        if (previous && params.start_index != 0) ++row_fallbacks[static_cast<std::size_t>(j)];
        previous = std::make_pair(params.p, params.q);
      } catch (const Error&) {
        r.codes[k] = Cell::SolverFailure;
        r.values[k] = -1;
        ++row_failures[static_cast<std::size_t>(j)];
        previous.reset();
      }
    }
  });
  int failures = 0;
  int fallbacks = 0;
  for (int f : row_failures) failures += f;
  for (int f : row_fallbacks) fallbacks += f;
  r.metadata["solver_failures"] = failures;
  r.metadata["continuation_fallbacks"] = fallbacks;
  r.metadata["failure_rate"] = static_cast<double>(failures) / static_cast<double>(r.codes.size());
  return r;
}

struct MapSpec {
  enum class Kind { Cubic, Quadratic, Blaschke, Rotation };

  Kind kind = Kind::Cubic;
  RotationAngle theta = RotationAngle::golden();
  /// c for the cubic, mu for the quintic Blaschke map; unused otherwise.
  cplx parameter{1.0, 0.0};

  static MapSpec cubic(RotationAngle theta, cplx c) { return {Kind::Cubic, std::move(theta), c}; }
  static MapSpec quadratic(RotationAngle theta) { return {Kind::Quadratic, std::move(theta), 0.0}; }
  static MapSpec blaschke(RotationAngle theta, cplx mu) { return {Kind::Blaschke, std::move(theta), mu}; }
  static MapSpec rotation(RotationAngle theta) { return {Kind::Rotation, std::move(theta), 0.0}; }
};

inline const char* to_string(MapSpec::Kind k) {
  switch (k) {
    case MapSpec::Kind::Cubic: return "cubic";
    case MapSpec::Kind::Quadratic: return "quadratic";
    case MapSpec::Kind::Blaschke: return "blaschke";
    case MapSpec::Kind::Rotation: return "rotation";
  }
  return "?";
}

namespace detail {

template <class Map>
inline void polynomial_cell(const Map& map, cplx z, int max_iter, Cell& code, std::int32_t& value) {
  const double radius = map.escape_radius();
  for (int k = 0; k <= max_iter; ++k) {
    if (std::abs(z) > radius) {
      code = Cell::Escaping;
      value = k;
      return;
    }
    if (k < max_iter) z = map(z);
  }
  code = Cell::Bounded;
  value = max_iter;
}

/// Convergence to the superattracting basins of 0 and infinity; the value is
/// the first k with |B^k(z)| <= 1, or -1.
inline void blaschke_cell(const BlaschkeProduct& b, cplx z, int max_iter, Cell& code, std::int32_t& value) {
  value = -1;
  for (int k = 0; k <= max_iter; ++k) {
    double r = std::abs(z);
    if (value < 0 && r <= 1.0) value = k;
    if (r < 1e-6) {
      code = Cell::BasinZero;
      return;
    }
    if (r > 1e6) {
      code = Cell::BasinInfinity;
      return;
    }
    if (k < max_iter) z = b(z);
  }
  code = Cell::Undecided;
}

}  // namespace detail

/// Evaluates one dynamical-plane cell; exposed for probes at exact points.
struct JuliaCell {
  Cell code = Cell::Undecided;
  std::int32_t value = 0;
};

/// Dynamical-plane raster. Polynomials: bounded versus escape past the escape
/// radius. Blaschke: basins of 0 and infinity with thresholds 1e-6 and 1e6,
/// plus the first-entry time into the closed unit disk.
class JuliaRenderer {
 public:
  explicit JuliaRenderer(MapSpec spec, const SolveOptions& opts = {}) : spec_(std::move(spec)) {
    if (spec_.kind == MapSpec::Kind::Blaschke) params_ = solve_blaschke(spec_.parameter, spec_.theta, opts);
    if (spec_.kind == MapSpec::Kind::Cubic) cubic_.emplace(spec_.theta, spec_.parameter);
    if (spec_.kind == MapSpec::Kind::Rotation) {
      throw Error(ErrorKind::InvalidArgument, "the rigid rotation has no Julia set to render");
    }
  }

  JuliaCell cell(cplx z, int max_iter) const {
    JuliaCell out;
    switch (spec_.kind) {
      case MapSpec::Kind::Cubic: detail::polynomial_cell(*cubic_, z, max_iter, out.code, out.value); break;
      case MapSpec::Kind::Quadratic:
        detail::polynomial_cell(QuadraticMap(spec_.theta), z, max_iter, out.code, out.value);
        break;
      case MapSpec::Kind::Blaschke: detail::blaschke_cell(params_->map(), z, max_iter, out.code, out.value); break;
      case MapSpec::Kind::Rotation: break;
    }
    return out;
  }

  const std::optional<BlaschkeParams>& blaschke_params() const { return params_; }

 private:
  MapSpec spec_;
  std::optional<BlaschkeParams> params_;
  std::optional<CubicMap> cubic_;
};

inline Raster render_julia(const MapSpec& spec, const Window& window, int max_iter, unsigned workers = 0,
                           const SolveOptions& opts = {}) {
  nlohmann::json meta = detail::base_metadata("julia", spec.theta, window, max_iter);
  meta["map"] = to_string(spec.kind);
  meta["parameter"] = {spec.parameter.real(), spec.parameter.imag()};
  JuliaRenderer renderer(spec, opts);
  if (const auto& p = renderer.blaschke_params()) {
    meta["blaschke"] = {{"t", p->t}, {"p", {p->p.real(), p->p.imag()}}, {"q", {p->q.real(), p->q.imag()}}};
  }
  Raster r = detail::blank(window, std::move(meta));
  for_each_row(window.ny, workers, [&](int j) {
    for (int i = 0; i < window.nx; ++i) {
      JuliaCell c = renderer.cell(window.pixel(i, j), max_iter);
      std::size_t k = r.index(i, j);
      r.codes[k] = c.code;
      r.values[k] = c.value;
    }
  });
  return r;
}

struct OrbitDumpResult {
  int records = 0;
  bool truncated = false;
};

/// Writes z_0..z_n as JSON lines {"n":k,"re":x,"im":y}. An orbit that
/// overflows stops early and ends with {"truncated":true,"n":k}.
inline OrbitDumpResult orbit_dump(const MapSpec& spec, cplx z0, int n, std::ostream& out,
                                  const SolveOptions& opts = {}) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "orbit length must be nonnegative");
  std::function<cplx(cplx)> step;
  switch (spec.kind) {
    case MapSpec::Kind::Cubic: {
      CubicMap m(spec.theta, spec.parameter);
      step = [m](cplx z) { return m(z); };
      break;
    }
    case MapSpec::Kind::Quadratic: {
      QuadraticMap m(spec.theta);
      step = [m](cplx z) { return m(z); };
      break;
    }
    case MapSpec::Kind::Blaschke: {
      BlaschkeProduct b = solve_blaschke(spec.parameter, spec.theta, opts).map();
      step = [b](cplx z) { return b(z); };
      break;
    }
    case MapSpec::Kind::Rotation: {
      cplx lambda = spec.theta.multiplier();
      step = [lambda](cplx z) { return lambda * z; };
      break;
    }
  }
  OrbitDumpResult res;
  cplx z = z0;
  for (int k = 0; k <= n; ++k) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1e150) {
      out << nlohmann::json{{"n", k}, {"truncated", true}}.dump() << '\n';
      res.truncated = true;
      return res;
    }
    out << nlohmann::json{{"n", k}, {"re", z.real()}, {"im", z.imag()}}.dump() << '\n';
    ++res.records;
    if (k < n) {
      try {
        z = step(z);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Pole) throw;
        z = cplx(INFINITY, 0.0);
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Image output

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed class palette (version kPaletteVersion). Escape-type cells are
/// banded by their iteration count.
inline Rgb palette(Cell c, std::int32_t value) {
  auto band = [value](Rgb a, Rgb b) {
    double s = 0.5 + 0.5 * std::cos(0.35 * static_cast<double>(std::max(value, 0)));
    Rgb out{};
    for (int k = 0; k < 3; ++k) out[k] = static_cast<std::uint8_t>(std::lround(a[k] + s * (b[k] - a[k])));
    return out;
  };
  switch (c) {
    case Cell::ExteriorEscape: return band({20, 30, 90}, {120, 170, 235});
    case Cell::InteriorEscape: return band({90, 20, 30}, {235, 150, 120});
    case Cell::HyperbolicLike: return {250, 200, 40};
    case Cell::Capture: return {60, 180, 90};
    case Cell::InLocusUnresolved: return {0, 0, 0};
    case Cell::HitsClosedDisk: return {60, 180, 90};
    case Cell::BoundedOutside: return {0, 0, 0};
    case Cell::Escapes: return band({20, 30, 90}, {120, 170, 235});
    case Cell::SolverFailure: return {255, 0, 255};
    case Cell::Escaping: return band({20, 30, 90}, {120, 170, 235});
    case Cell::Bounded: return {0, 0, 0};
    case Cell::BasinZero: return value >= 0 ? band({30, 110, 50}, {150, 230, 160}) : Rgb{30, 110, 50};
    case Cell::BasinInfinity: return value >= 0 ? band({70, 40, 110}, {200, 170, 240}) : Rgb{20, 30, 90};
    case Cell::Undecided: return {0, 0, 0};
    case Cell::Invalid: return {128, 128, 128};
  }
  return {255, 255, 255};
}

/// Binary P6 image, one pixel per cell, rows from the top.
inline void write_ppm(const Raster& r, std::ostream& out) {
  out << "P6\n" << r.window.nx << ' ' << r.window.ny << "\n255\n";
  for (std::size_t k = 0; k < r.codes.size(); ++k) {
    Rgb px = palette(r.codes[k], r.values[k]);
    out.write(reinterpret_cast<const char*>(px.data()), 3);
  }
}

/// Cells as JSON lines {"i":..,"j":..,"code":..,"value":..} after a metadata line.
inline void write_cells(const Raster& r, std::ostream& out) {
  out << r.metadata.dump() << '\n';
  for (int j = 0; j < r.window.ny; ++j) {
    for (int i = 0; i < r.window.nx; ++i) {
      out << nlohmann::json{{"i", i}, {"j", j}, {"code", to_string(r.code(i, j))}, {"value", r.value(i, j)}}.dump()
          << '\n';
    }
  }
}

}  // namespace siegel
