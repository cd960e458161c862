#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "siegel/render.hpp"

using namespace siegel;

namespace {

const RotationAngle& golden() {
  static const RotationAngle th = RotationAngle::golden();
  return th;
}

std::string ppm_bytes(const Raster& r) {
  std::ostringstream out;
  write_ppm(r, out);
  return out.str();
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST(Window, PixelCentersFromTopLeft) {
  Window w{cplx(1.0, -2.0), 4.0, 2.0, 8, 4};
  EXPECT_EQ(w.pixel(0, 0), cplx(1.0 - 2.0 + 0.25, -2.0 + 1.0 - 0.25));
  EXPECT_EQ(w.pixel(7, 3), cplx(1.0 + 2.0 - 0.25, -2.0 - 1.0 + 0.25));
  EXPECT_DOUBLE_EQ(w.pixel_width(), 0.5);
  EXPECT_DOUBLE_EQ(w.pixel_height(), 0.5);
  Window odd{cplx(0.3, 0.4), 1.0, 1.0, 5, 5};
  EXPECT_EQ(odd.pixel(2, 2), cplx(0.3, 0.4));
  EXPECT_THROW((Window{0.0, 0.0, 1.0, 4, 4}.validate()), Error);
  EXPECT_THROW((Window{0.0, 1.0, 1.0, 0, 4}.validate()), Error);
}

TEST(ParameterCubic, CenterPixelAtSuperattractingParameter) {
  cplx center = 3.0 - 6.0 * std::conj(golden().multiplier());
  auto r = render_parameter_cubic(golden(), Window{center, 0.01, 0.01, 5, 5}, 2000, 1);
  EXPECT_EQ(r.code(2, 2), Cell::HyperbolicLike);
  EXPECT_EQ(r.metadata["kind"], "parameter-cubic");
  EXPECT_EQ(r.metadata["max_iter"], 2000);
}

TEST(ParameterCubic, ZeroPixelInvalid) {
  auto r = render_parameter_cubic(golden(), Window{0.0, 1.0, 1.0, 5, 5}, 200, 1);
  EXPECT_EQ(r.code(2, 2), Cell::Invalid);
}

TEST(ParameterCubic, InversionSymmetry) {
  Window w{0.0, 6.0, 6.0, 32, 32};
  auto r = render_parameter_cubic(golden(), w, 500, 1);
  for (int j = 0; j < w.ny; ++j) {
    for (int i = 0; i < w.nx; ++i) {
      cplx c = w.pixel(i, j);
      Cell code = r.code(i, j);
      auto inv = classify_cubic(CubicMap(golden(), 1.0 / c), 500);
      EXPECT_EQ(in_cubic_locus(code), inv.in_locus()) << c;
      EXPECT_EQ(code == Cell::ExteriorEscape, inv.tag == OrbitClass::Tag::InteriorEscape) << c;
    }
  }
}

TEST(ParameterCubic, LargeParametersOutsideLocus) {
  auto r = render_parameter_cubic(golden(), Window{0.0, 80.0, 80.0, 16, 16}, 500, 1);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) {
      if (std::abs(r.window.pixel(i, j)) >= 30.0) {
        EXPECT_EQ(r.code(i, j), Cell::ExteriorEscape);
      }
    }
  }
}

TEST(ParameterBlaschke, SmallRasterMatchesDirectClassification) {
  Window w{0.0, 3.0, 3.0, 5, 5};
  auto r = render_parameter_blaschke(golden(), w, 500, 1);
  EXPECT_EQ(r.metadata["solver_failures"], 0);
  EXPECT_EQ(r.code(2, 2), Cell::Invalid);
  for (int j = 0; j < w.ny; ++j) {
    for (int i = 0; i < w.nx; ++i) {
      cplx mu = w.pixel(i, j);
      if (mu == cplx(0.0, 0.0)) continue;
      auto direct = classify_c5(mu, golden(), 500);
      EXPECT_EQ(in_quintic_locus(r.code(i, j)), direct.member()) << mu;
      auto inverse = classify_c5(1.0 / mu, golden(), 500);
      EXPECT_EQ(direct.member(), inverse.member()) << mu;
    }
  }
}

TEST(ParameterBlaschke, FarWindowHasNoMembers) {
  auto r = render_parameter_blaschke(golden(), Window{1000.0, 10.0, 10.0, 3, 3}, 500, 1);
  EXPECT_EQ(r.count(Cell::Escapes), 9u);
}

TEST(Julia, QuadraticHasBoundedCenter) {
  auto r = render_julia(MapSpec::quadratic(golden()), Window{0.0, 0.2, 0.2, 5, 5}, 500, 1);
  EXPECT_EQ(r.count(Cell::Bounded), 25u);
  auto far = render_julia(MapSpec::quadratic(golden()), Window{10.0, 1.0, 1.0, 3, 3}, 500, 1);
  EXPECT_EQ(far.count(Cell::Escaping), 9u);
}

TEST(Julia, CubicEscapesFarAway) {
  auto spec = MapSpec::cubic(golden(), 30.0);
  auto r = render_julia(spec, Window{cplx(0.0, 500.0), 10.0, 10.0, 4, 4}, 500, 1);
  EXPECT_EQ(r.count(Cell::Escaping), 16u);
  EXPECT_EQ(r.metadata["map"], "cubic");
}

TEST(Julia, BlaschkeCircleNeverInBasin) {
  JuliaRenderer renderer(MapSpec::blaschke(golden(), 2.0));
  for (int k = 0; k < 32; ++k) {
    auto c = renderer.cell(unit_turn(k / 32.0), 300);
    EXPECT_NE(c.code, Cell::BasinZero);
    EXPECT_NE(c.code, Cell::BasinInfinity);
    EXPECT_EQ(c.value, 0);
  }
  EXPECT_EQ(renderer.cell(1e7, 10).code, Cell::BasinInfinity);
  EXPECT_EQ(renderer.cell(1e-7, 10).code, Cell::BasinZero);
  EXPECT_THROW(JuliaRenderer(MapSpec::rotation(golden())), Error);
}

TEST(OrbitDump, ZeroLength) {
  std::ostringstream out;
  auto res = orbit_dump(MapSpec::cubic(golden(), 2.0), cplx(0.1, 0.2), 0, out);
  EXPECT_EQ(res.records, 1);
  EXPECT_FALSE(res.truncated);
  auto lines = json_lines(out.str());
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["n"], 0);
  EXPECT_DOUBLE_EQ(lines[0]["re"].get<double>(), 0.1);
  EXPECT_THROW(orbit_dump(MapSpec::quadratic(golden()), 0.0, -1, out), Error);
}

TEST(OrbitDump, RotationPreservesModulus) {
  std::ostringstream out;
  orbit_dump(MapSpec::rotation(golden()), cplx(0.6, 0.3), 100, out);
  auto lines = json_lines(out.str());
  ASSERT_EQ(lines.size(), 101u);
  for (const auto& l : lines) {
    EXPECT_NEAR(std::hypot(l["re"].get<double>(), l["im"].get<double>()), std::hypot(0.6, 0.3), 1e-13);
  }
}

TEST(OrbitDump, InLocusCriticalOrbitStaysInsideRadius) {
  cplx c = 3.0 - 6.0 * std::conj(golden().multiplier());
  CubicMap p(golden(), c);
  std::ostringstream out;
  orbit_dump(MapSpec::cubic(golden(), c), c, 1000, out);
  for (const auto& l : json_lines(out.str())) {
    EXPECT_LE(std::hypot(l["re"].get<double>(), l["im"].get<double>()), p.escape_radius());
  }
}

TEST(OrbitDump, EscapingOrbitTruncates) {
  std::ostringstream out;
  auto res = orbit_dump(MapSpec::cubic(golden(), 2.0), 1e3, 100, out);
  EXPECT_TRUE(res.truncated);
  auto lines = json_lines(out.str());
  EXPECT_TRUE(lines.back()["truncated"].get<bool>());
  EXPECT_EQ(static_cast<int>(lines.size()), res.records + 1);
}

TEST(Output, DeterministicAcrossRunsAndWorkers) {
  Window w{cplx(0.5, 0.5), 8.0, 8.0, 24, 20};
  auto a = render_parameter_cubic(golden(), w, 300, 1);
  auto b = render_parameter_cubic(golden(), w, 300, 1);
  auto c = render_parameter_cubic(golden(), w, 300, 4);
  EXPECT_EQ(ppm_bytes(a), ppm_bytes(b));
  EXPECT_EQ(ppm_bytes(a), ppm_bytes(c));
  EXPECT_EQ(a.values, c.values);
}

TEST(Output, PpmHeaderAndSize) {
  auto r = render_julia(MapSpec::quadratic(golden()), Window{0.0, 4.0, 4.0, 7, 3}, 50, 1);
  std::string bytes = ppm_bytes(r);
  const std::string header = "P6\n7 3\n255\n";
  ASSERT_GE(bytes.size(), header.size());
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(bytes.size(), header.size() + 7u * 3u * 3u);
}

TEST(Output, CellsStream) {
  auto r = render_julia(MapSpec::quadratic(golden()), Window{0.0, 4.0, 4.0, 3, 2}, 50, 1);
  std::ostringstream out;
  write_cells(r, out);
  auto lines = json_lines(out.str());
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0]["version"], kVersion);
  EXPECT_EQ(lines[0]["palette"], kPaletteVersion);
  EXPECT_EQ(lines[1]["i"], 0);
  EXPECT_EQ(lines[1]["j"], 0);
  EXPECT_EQ(lines[6]["i"], 2);
  EXPECT_EQ(lines[6]["j"], 1);
}

TEST(Workers, ExceptionPropagates) {
  EXPECT_THROW(for_each_row(8, 3,
                            [](int j) {
                              if (j == 5) throw Error(ErrorKind::InvalidArgument, "row 5");
                            }),
               Error);
}
