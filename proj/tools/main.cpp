// lloydcvt: centroidal Voronoi / optimal quantizer grids from the command
// line. Subcommands: run, ladder, bounded, radius, hessian, optimal-error.
// A JSON config file seeds every option; explicit flags override it. All
// artifacts are deterministic for a fixed config and seed (no timestamps,
// no wall-clock seeding).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lloydcvt/distortion.hpp"
#include "lloydcvt/errors.hpp"
#include "lloydcvt/hessian.hpp"
#include "lloydcvt/io.hpp"
#include "lloydcvt/lloyd.hpp"
#include "lloydcvt/measure.hpp"
#include "lloydcvt/radius.hpp"
#include "lloydcvt/voronoi.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lloydcvt;

namespace {

struct Options {
  std::string mode;
  std::string config_path;
  std::string dist_name;
  std::string data_path;
  json dist_json;  // {"family": ...} object from the config file
  std::size_t N = 0;
  std::size_t Nmax = 0;
  std::string backend = "exact1d";
  std::size_t samples = 100000;
  std::optional<std::uint64_t> seed;
  std::string radius;  // "auto" or a number; empty = not set
  std::string out = ".";
  double tol_gap = -1.0;
  double tol_move = 1e-9;
  std::size_t max_iter = 10000;
  std::string pullback = "segment";
  int restarts = 5;
  std::optional<double> c_in;
  std::optional<double> e_prev_in;
  std::optional<json> init;  // [[x, ...], ...]
};

json read_config(const std::string& path) {
  if (!fs::exists(path)) throw Error("config_not_found", "config file not found: " + path);
  std::ifstream f(path);
  if (!f) throw Error("config_not_found", "config file not readable: " + path);
  try {
    return json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config_invalid", std::string("config parse error: ") + e.what());
  }
}

// Config fields fill any option the command line left untouched.
void merge_config(const json& cfg, Options& o, const CLI::App& cmd) {
  auto unset = [&](const std::string& flag) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    return opt == nullptr || opt->count() == 0;
  };
  try {
    if (cfg.contains("mode") && o.mode.empty()) o.mode = cfg.at("mode").get<std::string>();
    if (cfg.contains("dist")) {
      const json& d = cfg.at("dist");
      if (d.is_string() && unset("--dist")) o.dist_name = d.get<std::string>();
      if (d.is_object()) {
        if (d.contains("data") && unset("--data"))
          o.data_path = d.at("data").get<std::string>();
        else if (!d.contains("data"))
          o.dist_json = d;
      }
    }
    if (cfg.contains("data") && unset("--data")) o.data_path = cfg.at("data").get<std::string>();
    if (cfg.contains("N") && unset("--N")) o.N = cfg.at("N").get<std::size_t>();
    if (cfg.contains("Nmax") && unset("--Nmax")) o.Nmax = cfg.at("Nmax").get<std::size_t>();
    if (cfg.contains("backend") && unset("--backend")) {
      const json& b = cfg.at("backend");
      if (b.is_string()) {
        o.backend = b.get<std::string>();
      } else {
        o.backend = b.at("kind").get<std::string>();
        if (b.contains("samples")) o.samples = b.at("samples").get<std::size_t>();
        if (b.contains("seed") && !o.seed) o.seed = b.at("seed").get<std::uint64_t>();
      }
    }
    if (cfg.contains("samples") && unset("--samples"))
      o.samples = cfg.at("samples").get<std::size_t>();
    if (cfg.contains("seed") && unset("--seed")) o.seed = cfg.at("seed").get<std::uint64_t>();
    if (cfg.contains("radius") && unset("--radius")) {
      const json& r = cfg.at("radius");
      o.radius = r.is_string() ? r.get<std::string>() : std::to_string(r.get<double>());
    }
    if (cfg.contains("out") && unset("--out")) o.out = cfg.at("out").get<std::string>();
    if (cfg.contains("tol_gap") && unset("--tol-gap")) o.tol_gap = cfg.at("tol_gap").get<double>();
    if (cfg.contains("tol_move") && unset("--tol-move"))
      o.tol_move = cfg.at("tol_move").get<double>();
    if (cfg.contains("max_iter") && unset("--max-iter"))
      o.max_iter = cfg.at("max_iter").get<std::size_t>();
    if (cfg.contains("pullback") && unset("--pullback"))
      o.pullback = cfg.at("pullback").get<std::string>();
    if (cfg.contains("restarts") && unset("--restarts"))
      o.restarts = cfg.at("restarts").get<int>();
    if (cfg.contains("c") && unset("--c")) o.c_in = cfg.at("c").get<double>();
    if (cfg.contains("e_prev") && unset("--e-prev")) o.e_prev_in = cfg.at("e_prev").get<double>();
    if (cfg.contains("init")) o.init = cfg.at("init");
  } catch (const nlohmann::json::exception& e) {
    throw Error("config_invalid", std::string("config field error: ") + e.what());
  }
}

Dist make_dist(const Options& o) {
  if (!o.data_path.empty()) {
    if (!fs::exists(o.data_path))
      throw Error("data_not_found", "data file not found: " + o.data_path);
    return empirical_from_csv(o.data_path);
  }
  if (!o.dist_name.empty()) {
    if (o.dist_name == "uniform01") return uniform_box({0.0}, {1.0});
    if (o.dist_name == "gauss1d") return gaussian({0.0}, {1.0});
    if (o.dist_name == "exp1") return exponential(1.0);
    if (o.dist_name == "uniform2d") return uniform_box({0.0, 0.0}, {1.0, 1.0});
    if (o.dist_name == "gauss2d") return gaussian({0.0, 0.0}, {1.0, 1.0});
    throw Error("config_invalid", "unknown distribution name: " + o.dist_name);
  }
  if (!o.dist_json.is_null() && o.dist_json.is_object()) {
    try {
      std::string family = o.dist_json.at("family").get<std::string>();
      if (family == "uniform")
        return uniform_box(o.dist_json.at("lo").get<std::vector<double>>(),
                           o.dist_json.at("hi").get<std::vector<double>>());
      if (family == "gaussian")
        return gaussian(o.dist_json.at("mean").get<std::vector<double>>(),
                        o.dist_json.at("sigma").get<std::vector<double>>());
      if (family == "exponential") return exponential(o.dist_json.at("rate").get<double>());
      throw Error("config_invalid", "unknown distribution family: " + family);
    } catch (const nlohmann::json::exception& e) {
      throw Error("config_invalid", std::string("distribution spec: ") + e.what());
    }
  }
  throw Error("config_invalid", "no distribution given (--dist, --data, or config dist object)");
}

Backend make_backend(const Options& o) {
  if (o.backend == "exact1d") return Backend::exact1d();
  if (o.backend == "mc") {
    if (!o.seed)
      throw Error("config_invalid", "mc backend requires an explicit --seed (no wall-clock)");
    if (o.samples == 0) throw Error("config_invalid", "mc backend requires --samples > 0");
    return Backend::mc(o.samples, *o.seed);
  }
  throw Error("config_invalid", "unknown backend: " + o.backend + " (want exact1d or mc)");
}

Grid grid_from_init(const json& init, int dim) {
  Grid g;
  g.dim = dim;
  if (!init.is_array() || init.empty())
    throw Error("config_invalid", "init must be a non-empty array of points");
  for (const json& row : init) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(dim))
      throw Error("config_invalid", "init points must have the distribution's dimension");
    for (const json& v : row) g.pts.push_back(v.get<double>());
  }
  return g;
}

json grid_json_obj(const Grid& g) {
  json pts = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < g.dim; ++k) row.push_back(g.point(i)[k]);
    pts.push_back(row);
  }
  return json{{"level", g.size()}, {"dim", g.dim}, {"points", pts}};
}

json config_echo(const Options& o) {
  json dist;
  if (!o.data_path.empty())
    dist = json{{"data", o.data_path}};
  else if (!o.dist_name.empty())
    dist = json{{"name", o.dist_name}};
  else
    dist = o.dist_json;
  json backend{{"kind", o.backend}};
  if (o.backend == "mc") {
    backend["samples"] = o.samples;
    backend["seed"] = o.seed ? *o.seed : 0;
  }
  json cfg{{"dist", dist},
           {"backend", backend},
           {"N", o.N},
           {"Nmax", o.Nmax},
           {"tol_gap", o.tol_gap},
           {"tol_move", o.tol_move},
           {"max_iter", o.max_iter},
           {"pullback", o.pullback},
           {"restarts", o.restarts},
           {"seed", o.seed ? *o.seed : 0},
           {"out", o.out}};
  if (!o.radius.empty()) cfg["radius"] = o.radius;
  if (o.c_in) cfg["c"] = *o.c_in;
  if (o.e_prev_in) cfg["e_prev"] = *o.e_prev_in;
  if (o.init) cfg["init"] = *o.init;
  return cfg;
}

json trace_summary(const Trace& tr, const Grid& g, const Dist& d) {
  return json{{"status", to_string(tr.status)},
              {"iterations", tr.rows.size()},
              {"final_energy", tr.final_energy},
              {"final_energy_se", tr.final_energy_se},
              {"final_error", std::sqrt(std::max(0.0, tr.final_energy))},
              {"final_grad_norm", tr.final_grad_norm},
              {"grid_radius", measured_radius(g, d.mean)},
              {"degenerate_cell_seen", tr.degenerate_seen},
              {"tol_gap_used", tr.tol_gap_used}};
}

json hessian_json_obj(const HessianReport& rep) {
  return json{{"n", rep.n},
              {"dim", rep.dim},
              {"grid_size", rep.grid_size},
              {"label", rep.label},
              {"eigenvalues", rep.eigenvalues},
              {"tol_eig", rep.tol_eig},
              {"asymmetry", rep.asymmetry},
              {"matrix", rep.matrix}};
}

struct Artifacts {
  fs::path dir;
  std::vector<std::string> written;

  void text(const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    written.push_back(name);
  }
  void obj(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
};

LloydConfig lloyd_config(const Options& o) {
  LloydConfig cfg;
  cfg.tol_gap = o.tol_gap;
  cfg.tol_move = o.tol_move;
  cfg.max_iter = o.max_iter;
  return cfg;
}

std::uint64_t seed_of(const Options& o) { return o.seed ? *o.seed : 0; }

void require_N(const Options& o, const char* mode) {
  if (o.N == 0) throw Error("config_invalid", std::string(mode) + " needs --N >= 1");
}

// run: one Lloyd descent. With an explicit init grid it starts there;
// otherwise the splitting ladder supplies the level-N start, so the
// result is the deterministic ladder output at level N.
json mode_run(const Options& o, Artifacts& art) {
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  LloydConfig cfg = lloyd_config(o);
  RunResult rr;
  if (o.init) {
    rr = run(grid_from_init(*o.init, d.dim), d, b, cfg);
  } else {
    require_N(o, "run");
    LadderResult lad = ladder(d, o.N, b, cfg, seed_of(o));
    rr.grid = lad.levels.back().result.grid;
    rr.trace = lad.levels.back().result.trace;
  }
  art.text("grid.json", grid_to_json(rr.grid));
  art.text("grid.csv", grid_to_csv(rr.grid));
  art.text("trace.csv", trace_to_csv(rr.trace));
  return trace_summary(rr.trace, rr.grid, d);
}

json mode_ladder(const Options& o, Artifacts& art) {
  if (o.Nmax == 0) throw Error("config_invalid", "ladder needs --Nmax >= 1");
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  LadderResult lad = ladder(d, o.Nmax, b, lloyd_config(o), seed_of(o));
  const LadderLevel& last = lad.levels.back();
  art.text("grid.json", grid_to_json(last.result.grid));
  art.text("grid.csv", grid_to_csv(last.result.grid));
  art.text("trace.csv", trace_to_csv(last.result.trace));
  json levels = json::array();
  for (const LadderLevel& l : lad.levels) {
    levels.push_back(json{{"N", l.N},
                          {"energy", l.result.trace.final_energy},
                          {"error", std::sqrt(std::max(0.0, l.result.trace.final_energy))},
                          {"radius", measured_radius(l.result.grid, d.mean)},
                          {"iterations", l.result.trace.rows.size()},
                          {"status", to_string(l.result.trace.status)},
                          {"split_draws", l.split.draws}});
  }
  json s = trace_summary(last.result.trace, last.result.grid, d);
  s["levels"] = levels;
  return s;
}

json mode_bounded(const Options& o, Artifacts& art) {
  if (!o.init) require_N(o, "bounded");
  if (o.radius.empty()) throw Error("config_invalid", "bounded needs --radius FLOAT or auto");
  if (o.radius == "auto" && o.N < 2)
    throw Error("config_invalid", "bounded --radius auto needs --N >= 2");
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  LloydConfig cfg = lloyd_config(o);
  PullbackRule rule;
  if (o.pullback == "segment")
    rule = PullbackRule::segment;
  else if (o.pullback == "freeze")
    rule = PullbackRule::freeze;
  else
    throw Error("config_invalid", "unknown pull-back rule: " + o.pullback);

  double R = 0.0;
  Grid init;
  json radius_info;
  if (o.init && o.radius != "auto") {
    init = grid_from_init(*o.init, d.dim);
  } else if (o.N == 1) {
    init.dim = d.dim;
    init.pts = d.mean;
  } else {
    // Splitting start: estimated level-(N-1) optimum plus one tilted draw.
    OptimalErrorEstimate prev = estimate_optimal_error(d, o.N - 1, b, o.restarts, seed_of(o));
    SplitResult si = split_init(prev.grid, d, b, seed_of(o));
    init = si.grid;
    if (o.radius == "auto") {
      OptimalErrorEstimate cur = estimate_optimal_error(d, o.N, b, o.restarts, seed_of(o));
      RadiusBound bound = solve_radius(d, cur.e, prev.e, seed_of(o));
      R = std::max(bound.R, 2.0 * measured_radius(prev.grid, d.mean));
      radius_info = json{{"solver_R", bound.R},
                         {"r_witness", bound.r_witness},
                         {"c", bound.c},
                         {"e_prev", bound.e_prev},
                         {"slack_core", bound.slack_core},
                         {"slack_tail", bound.slack_tail},
                         {"tail_vacuous", bound.tail_vacuous}};
    }
  }
  if (o.radius != "auto") {
    try {
      R = std::stod(o.radius);
    } catch (const std::exception&) {
      throw Error("config_invalid", "radius must be a number or auto: " + o.radius);
    }
  }
  // The validated bound never shrinks by enlarging R; make sure the
  // splitting start itself fits.
  R = std::max(R, measured_radius(init, d.mean) * (1.0 + 1e-12));

  RunResult rr = run_bounded(std::move(init), d, b, cfg, R, rule);
  art.text("grid.json", grid_to_json(rr.grid));
  art.text("grid.csv", grid_to_csv(rr.grid));
  art.text("trace.csv", trace_to_csv(rr.trace));
  json s = trace_summary(rr.trace, rr.grid, d);
  s["R"] = R;
  s["pullbacks"] = rr.trace.pullback_total;
  s["min_pullback_margin"] = rr.trace.min_pullback_margin;
  if (!radius_info.is_null()) s["radius_bound"] = radius_info;
  return s;
}

json mode_radius(const Options& o, Artifacts& art) {
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  double c, e_prev;
  if (o.c_in && o.e_prev_in) {
    c = *o.c_in;
    e_prev = *o.e_prev_in;
  } else {
    if (o.N < 2)
      throw Error("config_invalid", "radius needs --c and --e-prev, or --N >= 2 to estimate them");
    e_prev = estimate_optimal_error(d, o.N - 1, b, o.restarts, seed_of(o)).e;
    c = estimate_optimal_error(d, o.N, b, o.restarts, seed_of(o)).e;
  }
  RadiusBound bound = solve_radius(d, c, e_prev, seed_of(o));
  json rb{{"R", bound.R},          {"r_witness", bound.r_witness},
          {"c", bound.c},          {"e_prev", bound.e_prev},
          {"slack_core", bound.slack_core}, {"slack_tail", bound.slack_tail},
          {"tail_vacuous", bound.tail_vacuous}};
  art.obj("radius.json", rb);
  Trace empty;
  art.text("trace.csv", trace_to_csv(empty));
  return json{{"radius_bound", rb}};
}

json mode_hessian(const Options& o, Artifacts& art) {
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  Grid g;
  Trace tr;
  bool ran = false;
  if (o.init) {
    g = grid_from_init(*o.init, d.dim);
  } else {
    require_N(o, "hessian");
    LadderResult lad = ladder(d, o.N, b, lloyd_config(o), seed_of(o));
    g = lad.levels.back().result.grid;
    tr = lad.levels.back().result.trace;
    ran = true;
  }

  HessianReport rep;
  if (d.kind == DistKind::analytic1d && d.dim == 1) {
    rep = hessian_1d(g, d);
  } else if (d.dim == 2 && (d.family == "uniform" || d.family == "gaussian")) {
    rep = hessian_2d(g, d);
  } else {
    if (b.kind != Backend::Kind::mc)
      throw Error("config_invalid",
                  "hessian for this model needs the mc backend (finite differences)");
    rep = classify(hessian_fd(g, d, b, 1e-3), g.size() * static_cast<std::size_t>(d.dim));
    rep.dim = d.dim;
    rep.grid_size = g.size();
  }

  art.text("grid.json", grid_to_json(g));
  art.text("grid.csv", grid_to_csv(g));
  art.text("trace.csv", trace_to_csv(tr));
  art.obj("hessian.json", hessian_json_obj(rep));
  json s = ran ? trace_summary(tr, g, d)
               : json{{"status", "none"}, {"iterations", 0}, {"grid_radius", measured_radius(g, d.mean)}};
  s["hessian"] = json{{"label", rep.label}, {"eigenvalues", rep.eigenvalues},
                      {"tol_eig", rep.tol_eig}, {"asymmetry", rep.asymmetry}};
  return s;
}

json mode_optimal_error(const Options& o, Artifacts& art) {
  require_N(o, "optimal-error");
  Dist d = make_dist(o);
  Backend b = make_backend(o);
  OptimalErrorEstimate est = estimate_optimal_error(d, o.N, b, o.restarts, seed_of(o));
  art.text("grid.json", grid_to_json(est.grid));
  art.text("grid.csv", grid_to_csv(est.grid));
  Trace empty;
  art.text("trace.csv", trace_to_csv(empty));
  return json{{"optimal_error",
               json{{"e", est.e}, {"std_err", est.std_err}, {"restart_errors", est.restart_errors}}},
              {"grid_radius", measured_radius(est.grid, d.mean)}};
}

int run_cli(int argc, char** argv) {
  Options o;
  CLI::App app{"centroidal Voronoi / optimal quantizer grids"};
  app.fallthrough(true);
  app.require_subcommand(0, 1);

  app.add_option("--config", o.config_path, "JSON config file; flags override its fields");
  app.add_option("--dist", o.dist_name, "built-in distribution name");
  app.add_option("--data", o.data_path, "empirical data CSV");
  app.add_option("--N", o.N, "grid size");
  app.add_option("--Nmax", o.Nmax, "ladder top level");
  app.add_option("--backend", o.backend, "exact1d or mc");
  app.add_option("--samples", o.samples, "mc sample count");
  app.add_option("--seed", o.seed, "rng seed (mandatory for mc)");
  app.add_option("--radius", o.radius, "ball radius, or auto");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--tol-gap", o.tol_gap, "energy-gap stopping tolerance");
  app.add_option("--tol-move", o.tol_move, "displacement stopping tolerance");
  app.add_option("--max-iter", o.max_iter, "iteration cap");
  app.add_option("--pullback", o.pullback, "segment or freeze");
  app.add_option("--restarts", o.restarts, "multistart count for estimates");
  app.add_option("--c", o.c_in, "radius mode: target error");
  app.add_option("--e-prev", o.e_prev_in, "radius mode: previous-level error");

  for (const char* m : {"run", "ladder", "bounded", "radius", "hessian", "optimal-error"})
    app.add_subcommand(m, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err{{"error", {{"code", "config_invalid"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return 2;
  }
  for (CLI::App* sub : app.get_subcommands()) o.mode = sub->get_name();

  try {
    if (!o.config_path.empty()) merge_config(read_config(o.config_path), o, app);
    if (o.mode.empty())
      throw Error("config_invalid", "no mode: pass a subcommand or a config with \"mode\"");

    Artifacts art;
    art.dir = o.out;
    std::error_code ec;
    fs::create_directories(art.dir, ec);
    if (ec) throw io_error("cannot create output directory: " + o.out);

    json result;
    if (o.mode == "run")
      result = mode_run(o, art);
    else if (o.mode == "ladder")
      result = mode_ladder(o, art);
    else if (o.mode == "bounded")
      result = mode_bounded(o, art);
    else if (o.mode == "radius")
      result = mode_radius(o, art);
    else if (o.mode == "hessian")
      result = mode_hessian(o, art);
    else if (o.mode == "optimal-error")
      result = mode_optimal_error(o, art);
    else
      throw Error("config_invalid", "unknown mode: " + o.mode);

    json summary{{"mode", o.mode}, {"config", config_echo(o)}, {"result", result}};
    summary["artifacts"] = art.written;
    summary["artifacts"].push_back("summary.json");
    art.obj("summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    try {
      fs::create_directories(o.out);
      write_text_file((fs::path(o.out) / "error.json").string(), err.dump(2) + "\n");
    } catch (...) {
    }
    bool config_like = e.code() == "config" || e.code() == "config_not_found" ||
                       e.code() == "config_invalid" || e.code() == "data_not_found" ||
                       e.code() == "io";
    return config_like ? 2 : 3;
  } catch (const std::exception& e) {
    json err{{"error", {{"code", "numerical"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
