// Command-line front end. Every subcommand prints JSON; renders write a P6
// image to --out and, with --cells, the per-pixel codes as JSON lines.
//
// Exit codes: 0 success, 2 partial result (solver failures in a render), 1 error.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "siegel/arith.hpp"
#include "siegel/blaschke.hpp"
#include "siegel/boettcher.hpp"
#include "siegel/cubic.hpp"
#include "siegel/render.hpp"
#include "siegel/surgery.hpp"

using nlohmann::json;
using namespace siegel;

namespace {

std::vector<double> split_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, what + ": cannot parse '" + item + "'");
    }
  }
  if (out.size() != expected) {
    throw Error(ErrorKind::InvalidArgument, what + " needs " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

/// "re,im" or a bare real number.
cplx parse_complex(const std::string& text, const std::string& what) {
  if (text.find(',') == std::string::npos) return {split_numbers(text, 1, what)[0], 0.0};
  auto v = split_numbers(text, 2, what);
  return {v[0], v[1]};
}

/// "golden", "cf:a1,a2,...", or a decimal in (0,1).
RotationAngle parse_theta(const std::string& text, int digits) {
  if (text == "golden") return RotationAngle::golden(digits);
  if (text.rfind("cf:", 0) == 0) {
    std::vector<std::int64_t> d;
    std::stringstream ss(text.substr(3));
    std::string item;
    while (std::getline(ss, item, ',')) d.push_back(std::stoll(item));
    return RotationAngle::from_digits(std::move(d));
  }
  long double v = 0.0L;
  try {
    v = std::stold(text);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "theta: expected 'golden', 'cf:a1,a2,...' or a number");
  }
  return RotationAngle::from_value(v, digits);
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json estimate_json(const RotationEstimate& r) {
  return {{"estimate", r.estimate}, {"error_bound", r.error_bound}, {"lower", r.lower},
          {"upper", r.upper},       {"iterations", r.iterations}};
}

json params_json(const BlaschkeParams& p) {
  return {{"mu", complex_json(p.mu)},
          {"p", complex_json(p.p)},
          {"q", complex_json(p.q)},
          {"t", p.t},
          {"rotation_number", estimate_json(p.rho)},
          {"residual", max_abs(p.residuals)}};
}

struct Common {
  std::string theta = "golden";
  int digits = 40;
  int iters = 2000;

  RotationAngle angle() const { return parse_theta(theta, digits); }
};

void add_theta(CLI::App* sub, Common& c) {
  sub->add_option("--theta,--value", c.theta, "rotation angle: golden, cf:a1,a2,..., or a decimal")->capture_default_str();
  sub->add_option("--digits", c.digits, "continued-fraction digits to keep")->capture_default_str();
}

struct RenderArgs {
  std::string window = "0,0,4,4";
  std::string res = "256,256";
  std::string out = "render.ppm";
  std::string cells;
  unsigned workers = 0;

  Window parse() const {
    auto w = split_numbers(window, 4, "--window");
    auto r = split_numbers(res, 2, "--res");
    Window win{{w[0], w[1]}, w[2], w[3], static_cast<int>(r[0]), static_cast<int>(r[1])};
    win.validate();
    return win;
  }
};

void add_render(CLI::App* sub, Common& c, RenderArgs& r) {
  add_theta(sub, c);
  sub->add_option("--window", r.window, "cx,cy,width,height")->capture_default_str();
  sub->add_option("--res", r.res, "nx,ny")->capture_default_str();
  sub->add_option("--iters", c.iters, "iteration budget")->capture_default_str();
  sub->add_option("--out", r.out, "P6 image path")->capture_default_str();
  sub->add_option("--cells", r.cells, "optional JSON-lines dump of cell codes");
  sub->add_option("--workers", r.workers, "worker threads (0 = all cores)")->capture_default_str();
}

/// Expands `--config FILE` into --key=value flags for every key not already
/// given on the command line. Blank lines and lines starting with # are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config file " + path);
  auto given = [&args](const std::string& flag) {
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "config line without '=': " + line);
    auto trim = [](std::string v) {
      auto b = v.find_first_not_of(" \t");
      auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!given("--" + key)) extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

int finish_render(const Raster& r, const RenderArgs& args) {
  std::ofstream img(args.out, std::ios::binary);
  if (!img) throw Error(ErrorKind::InvalidArgument, "cannot write " + args.out);
  write_ppm(r, img);
  if (!args.cells.empty()) {
    std::ofstream cells(args.cells);
    if (!cells) throw Error(ErrorKind::InvalidArgument, "cannot write " + args.cells);
    write_cells(r, cells);
  }
  json summary = r.metadata;
  json counts = json::object();
  for (int k = 0; k <= static_cast<int>(Cell::Invalid); ++k) {
    auto code = static_cast<Cell>(k);
    if (auto n = r.count(code)) counts[to_string(code)] = n;
  }
  summary["counts"] = counts;
  summary["out"] = args.out;
  std::cout << summary.dump() << '\n';
  return r.metadata.value("solver_failures", 0) > 0 ? 2 : 0;
}

MapSpec parse_map(const std::string& kind, const RotationAngle& theta, const std::string& param) {
  if (kind == "cubic") return MapSpec::cubic(theta, parse_complex(param, "--param"));
  if (kind == "quadratic") return MapSpec::quadratic(theta);
  if (kind == "blaschke") return MapSpec::blaschke(theta, parse_complex(param, "--param"));
  if (kind == "rotation") return MapSpec::rotation(theta);
  throw Error(ErrorKind::InvalidArgument, "--map must be cubic, quadratic, blaschke or rotation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cubic Siegel-disk parameter spaces and their Blaschke models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Common common;
  int status = 0;

  // theta
  int show = 12;
  auto* theta_cmd = app.add_subcommand("theta", "continued fraction, convergents and Brjuno partial sums");
  add_theta(theta_cmd, common);
  theta_cmd->add_option("--show", show, "convergents to print")->capture_default_str();
  theta_cmd->callback([&] {
    RotationAngle th = common.angle();
    json conv = json::array();
    for (std::size_t k = 0; k < th.convergents().size() && static_cast<int>(k) < show; ++k) {
      conv.push_back({th.convergents()[k].p, th.convergents()[k].q});
    }
    auto w = th.brjuno_partial_sums();
    std::cout << json{{"theta", th.value()},
                      {"digits", th.digits()},
                      {"convergents", conv},
                      {"brjuno_partial_sum", w.empty() ? 0.0 : w.back()},
                      {"max_digit", th.max_digit()}}
                     .dump()
              << '\n';
  });

  // t-of-theta
  double tol = 1e-9;
  std::string family = "standard";
  auto* tcmd = app.add_subcommand("t-of-theta", "calibrate a circle-map family to rotation number theta");
  add_theta(tcmd, common);
  tcmd->add_option("--tol", tol, "rotation-number tolerance")->capture_default_str();
  tcmd->add_option("--family", family, "standard (degree-3 Blaschke) or rigid")
      ->check(CLI::IsMember({"standard", "rigid"}))
      ->capture_default_str();
  tcmd->callback([&] {
    Calibration cal = family == "standard"
                          ? standard_f_theta(common.angle(), tol)
                          : calibrate_t([](double t) { return rigid_rotation_lift(t); }, common.angle(), tol);
    std::cout << json{{"t", cal.t}, {"rotation_number", estimate_json(cal.rho)}, {"evaluations", cal.evaluations}}.dump()
              << '\n';
  });

  // classify-cubic
  std::string c_text = "3,0";
  auto* ccmd = app.add_subcommand("classify-cubic", "classify a cubic parameter c");
  add_theta(ccmd, common);
  ccmd->add_option("--c", c_text, "re,im or a real number")->capture_default_str();
  ccmd->add_option("--iters", common.iters, "iteration budget")->capture_default_str();
  ccmd->callback([&] {
    CubicMap map(common.angle(), parse_complex(c_text, "--c"));
    OrbitClass oc = classify_cubic(map, common.iters);
    std::cout << json{{"c", complex_json(map.c())},
                      {"class", to_string(oc.tag)},
                      {"in_locus", oc.in_locus()},
                      {"period", oc.period},
                      {"multiplier", complex_json(oc.multiplier)},
                      {"critical", oc.critical == CriticalPoint::Free ? "free" : "one"},
                      {"iterations", oc.iterations_used}}
                     .dump()
              << '\n';
  });

  // capacity
  int order = 256;
  auto* kcmd = app.add_subcommand("capacity", "linearizer series and conformal capacity estimate");
  add_theta(kcmd, common);
  kcmd->add_option("--c", c_text, "re,im or a real number")->capture_default_str();
  kcmd->add_option("--order", order, "series order")->capture_default_str();
  kcmd->callback([&] {
    RotationAngle th = common.angle();
    LinearizerSeries s = linearizer(CubicMap(th, parse_complex(c_text, "--c")), order);
    auto w = th.brjuno_partial_sums();
    std::cout << json{{"capacity", s.capacity},
                      {"order", s.order()},
                      {"truncated", s.truncated},
                      {"brjuno_partial_sum", w.empty() ? 0.0 : w.back()}}
                     .dump()
              << '\n';
  });

  // solve-blaschke, classify-c5
  std::string mu_text = "2,0";
  auto* scmd = app.add_subcommand("solve-blaschke", "solve for the zeros and rotation of the quintic Blaschke map");
  add_theta(scmd, common);
  scmd->add_option("--mu", mu_text, "re,im or a real number")->capture_default_str();
  scmd->callback([&] {
    std::cout << params_json(solve_blaschke(parse_complex(mu_text, "--mu"), common.angle())).dump() << '\n';
  });

  auto* c5cmd = app.add_subcommand("classify-c5", "membership of mu in the quintic connectedness locus");
  add_theta(c5cmd, common);
  c5cmd->add_option("--mu", mu_text, "re,im or a real number")->capture_default_str();
  c5cmd->add_option("--iters", common.iters, "iteration budget")->capture_default_str();
  c5cmd->callback([&] {
    BlaschkeParams p = solve_blaschke(parse_complex(mu_text, "--mu"), common.angle());
    C5Class cls = classify_c5(p, common.iters);
    json out = params_json(p);
    out["class"] = to_string(cls.tag);
    out["member"] = cls.member();
    out["step"] = cls.step;
    std::cout << out.dump() << '\n';
  });

  // phi, phi-winding
  std::string s_text = "50,0";
  auto* pcmd = app.add_subcommand("phi", "Phi(s) = beta_s(P^s(s))");
  add_theta(pcmd, common);
  pcmd->add_option("--s", s_text, "re,im or a real number")->capture_default_str();
  pcmd->callback([&] {
    RotationAngle th = common.angle();
    cplx s = parse_complex(s_text, "--s");
    PhiValue v = phi(th, s);
    std::cout << json{{"s", complex_json(s)},
                      {"phi", complex_json(v.value)},
                      {"critical_value", complex_json(v.critical_value)},
                      {"pushed", v.pushed},
                      {"asymptotic", complex_json(phi_asymptotic(th, s))}}
                     .dump()
              << '\n';
  });

  double radius = 50.0;
  int samples = 1024;
  auto* wcmd = app.add_subcommand("phi-winding", "winding number of Phi over |s| = radius");
  add_theta(wcmd, common);
  wcmd->add_option("--radius", radius)->capture_default_str();
  wcmd->add_option("--samples", samples)->capture_default_str();
  wcmd->callback([&] {
    std::cout << json{{"radius", radius}, {"samples", samples}, {"degree", phi_winding(common.angle(), radius, samples)}}
                     .dump()
              << '\n';
  });

  // surgery-probe
  int orbit_len = 4096;
  int grid = 10;
  int quadrature = 2048;
  auto* gcmd = app.add_subcommand("surgery-probe", "Douady-Earle extension and Beltrami samples on a polar grid");
  add_theta(gcmd, common);
  gcmd->add_option("--mu", mu_text, "re,im or a real number")->capture_default_str();
  gcmd->add_option("--orbit", orbit_len, "orbit length N for the circle conjugacy")->capture_default_str();
  gcmd->add_option("--grid", grid, "k radii by k angles")->capture_default_str();
  gcmd->add_option("--quadrature", quadrature, "quadrature order M")->capture_default_str();
  gcmd->callback([&] {
    BlaschkeParams p = solve_blaschke(parse_complex(mu_text, "--mu"), common.angle());
    CircleConjugacy h = circle_conjugacy(p, orbit_len);
    DiskExtension ext(h, quadrature);
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        cplx w = (0.9 * (a + 0.5) / grid) * unit_turn(static_cast<double>(b) / grid);
        json line{{"w", complex_json(w)}};
        try {
          line["H"] = complex_json(ext(w));
          BeltramiSample s = beltrami_sample(ext, w);
          line["mu_beltrami"] = complex_json(s.mu);
          line["K"] = s.dilatation;
        } catch (const Error& e) {
          line["error"] = to_string(e.kind());
          line["message"] = e.what();
          status = 2;
        }
        std::cout << line.dump() << '\n';
      }
    }
  });

  // renders
  RenderArgs m3_args;
  auto* m3 = app.add_subcommand("render-m3", "cubic connectedness locus in the c-plane");
  add_render(m3, common, m3_args);
  m3->callback([&] {
    status = finish_render(render_parameter_cubic(common.angle(), m3_args.parse(), common.iters, m3_args.workers),
                           m3_args);
  });

  RenderArgs c5_args;
  auto* c5 = app.add_subcommand("render-c5", "quintic Blaschke connectedness locus in the mu-plane");
  add_render(c5, common, c5_args);
  c5->callback([&] {
    status = finish_render(render_parameter_blaschke(common.angle(), c5_args.parse(), common.iters, c5_args.workers),
                           c5_args);
  });

  RenderArgs j_args;
  std::string map_kind = "quadratic";
  std::string param = "3,0";
  auto* jcmd = app.add_subcommand("render-julia", "filled Julia set or Blaschke basins");
  add_render(jcmd, common, j_args);
  jcmd->add_option("--map", map_kind, "cubic, quadratic or blaschke")->capture_default_str();
  jcmd->add_option("--param", param, "c for cubic, mu for blaschke (re,im or a real number)")->capture_default_str();
  jcmd->callback([&] {
    MapSpec spec = parse_map(map_kind, common.angle(), param);
    status = finish_render(render_julia(spec, j_args.parse(), common.iters, j_args.workers), j_args);
  });

  // orbit
  std::string z0_text = "1,0";
  int count = 1000;
  std::string orbit_out;
  auto* ocmd = app.add_subcommand("orbit", "orbit as JSON lines");
  add_theta(ocmd, common);
  ocmd->add_option("--map", map_kind, "cubic, quadratic, blaschke or rotation")->capture_default_str();
  ocmd->add_option("--param", param, "c for cubic, mu for blaschke (re,im or a real number)")->capture_default_str();
  ocmd->add_option("--z0", z0_text, "re,im or a real number")->capture_default_str();
  ocmd->add_option("--n", count, "number of steps")->capture_default_str();
  ocmd->add_option("--out", orbit_out, "output path (default stdout)");
  ocmd->callback([&] {
    MapSpec spec = parse_map(map_kind, common.angle(), param);
    cplx z0 = parse_complex(z0_text, "--z0");
    OrbitDumpResult res;
    if (orbit_out.empty()) {
      res = orbit_dump(spec, z0, count, std::cout);
    } else {
      std::ofstream f(orbit_out);
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + orbit_out);
      res = orbit_dump(spec, z0, count, f);
    }
    if (res.truncated) status = 2;
  });

  app.footer("Any subcommand accepts --config FILE with key=value lines naming its flags; flags on the command line win.");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const SolverFailure& e) {
    std::cerr << json{{"error", to_string(e.kind())}, {"message", e.what()}, {"best_residual", e.best_residual()}}.dump()
              << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return status;
}
