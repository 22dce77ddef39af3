#pragma once

// Run configuration for the command-line pipeline.

#include "csx/io.hpp"

#include <optional>
#include <string>

namespace csx {

struct NumericConfig {
  Tolerances tol;
  int resolution = 64;  // N >= 8
  double mesh_tol = 1e-8;
  int max_sweeps = 5000;
  int order = 4;
  double grading = kDefaultGrading;
  bool adaptive = true;
  int existence_grid = 25;
  std::optional<double> rho;    // leaf contraction rate override
  std::optional<double> sigma;  // W-expansion rate override
  int raster = 200;
  int basin_max_iter = 50000;
  double basin_tol = 1e-4;  // relative to ||w||
  double bisection_tol = 1e-7;
  int orbit_samples = 500;
  int orbit_max_iter = 50000;
  double orbit_tol = 1e-6;
  int leaf_samples = 256;
  int conjugacy_samples = 64;
  int streaks = 24;
};

struct OutputConfig {
  std::string report, mesh, curves, csv, svg;  // empty: stdout or not written
};

struct RunConfig {
  ModelSpec model;
  NumericConfig numeric;
  OutputConfig outputs;
  std::uint64_t seed = 1;

  /// Normalized document with every default filled in; seed excluded.
  Json normalized() const;
  /// FNV-1a of the normalized document with keys sorted.
  std::string hash() const { return io::hex64(io::fnv1a(nlohmann::json(normalized()).dump())); }
  /// Provenance fields embedded in every artifact.
  Json header() const {
    Json h;
    h["version"] = std::string(kVersion);
    h["config_hash"] = hash();
    h["seed"] = seed;
    return h;
  }
};

inline Json RunConfig::normalized() const {
  Json j;
  j["model"] = to_json(model);
  const auto& n = numeric;
  Json num;
  num["hyperbolic_tol"] = n.tol.hyperbolic;
  num["fixed_residual_tol"] = n.tol.fixed_residual;
  num["singular_tol"] = n.tol.singular;
  num["resolution"] = n.resolution;
  num["mesh_tol"] = n.mesh_tol;
  num["max_sweeps"] = n.max_sweeps;
  num["order"] = n.order;
  num["grading"] = n.grading;
  num["adaptive"] = n.adaptive;
  num["existence_grid"] = n.existence_grid;
  num["rho"] = n.rho ? Json(*n.rho) : Json(nullptr);
  num["sigma"] = n.sigma ? Json(*n.sigma) : Json(nullptr);
  num["raster"] = n.raster;
  num["basin_max_iter"] = n.basin_max_iter;
  num["basin_tol"] = n.basin_tol;
  num["bisection_tol"] = n.bisection_tol;
  num["orbit_samples"] = n.orbit_samples;
  num["orbit_max_iter"] = n.orbit_max_iter;
  num["orbit_tol"] = n.orbit_tol;
  num["leaf_samples"] = n.leaf_samples;
  num["conjugacy_samples"] = n.conjugacy_samples;
  num["streaks"] = n.streaks;
  j["numeric"] = num;
  Json out;
  out["report"] = outputs.report;
  out["mesh"] = outputs.mesh;
  out["curves"] = outputs.curves;
  out["csv"] = outputs.csv;
  out["svg"] = outputs.svg;
  j["outputs"] = out;
  return j;
}

namespace detail {

inline int config_int(const io::Source* src, const Json& j, const std::string& p, int lo, int hi) {
  const auto v = io::get_int(src, j, p);
  if (v < lo || v > hi) io::fail(src, p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

}  // namespace detail

/// Checks the cross-field invariants; throws ConfigError.
inline void validate(const RunConfig& c) {
  const auto& n = c.numeric;
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::ConfigError, std::string("numeric.") + name + " must be > 0");
  };
  positive(n.tol.hyperbolic, "hyperbolic_tol");
  positive(n.tol.fixed_residual, "fixed_residual_tol");
  positive(n.tol.singular, "singular_tol");
  positive(n.mesh_tol, "mesh_tol");
  positive(n.basin_tol, "basin_tol");
  positive(n.bisection_tol, "bisection_tol");
  positive(n.orbit_tol, "orbit_tol");
  if (n.resolution < 8) throw Error(Errc::ConfigError, "numeric.resolution must be >= 8");
  if (n.order < 1 || n.order > 4) throw Error(Errc::ConfigError, "numeric.order must lie in [1, 4]");
  if (!(n.grading >= 1.0 && n.grading <= 8.0)) throw Error(Errc::ConfigError, "numeric.grading must lie in [1, 8]");
  if (n.raster < 4) throw Error(Errc::ConfigError, "numeric.raster must be >= 4");
  if (n.rho && !(*n.rho > 0.0 && *n.rho < 1.0)) throw Error(Errc::ConfigError, "numeric.rho must lie in (0, 1)");
  if (n.sigma && !(*n.sigma > 0.0)) throw Error(Errc::ConfigError, "numeric.sigma must be > 0");
}

inline RunConfig config_from_json(const Json& j, const io::Source* src = nullptr) {
  io::require_object(src, j, "", {"model", "numeric", "outputs", "seed"});
  RunConfig c;
  c.model = model_from_json(io::member(src, j, "", "model"), src, "/model");
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      io::fail(src, "/seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("numeric")) {
    const Json& nj = j["numeric"];
    const std::string p = "/numeric";
    io::require_object(src, nj, p,
                       {"hyperbolic_tol", "fixed_residual_tol", "singular_tol", "resolution", "mesh_tol",
                        "max_sweeps", "order", "grading", "adaptive", "existence_grid", "rho", "sigma", "raster",
                        "basin_max_iter", "basin_tol", "bisection_tol", "orbit_samples", "orbit_max_iter",
                        "orbit_tol", "leaf_samples", "conjugacy_samples", "streaks"});
    auto& n = c.numeric;
    auto pos = [&](const char* key, double& out) {
      if (nj.contains(key)) out = io::get_positive(src, nj[key], p + "/" + key);
    };
    auto integer = [&](const char* key, int& out, int lo, int hi) {
      if (nj.contains(key)) out = detail::config_int(src, nj[key], p + "/" + key, lo, hi);
    };
    auto optional = [&](const char* key, std::optional<double>& out) {
      if (nj.contains(key) && !nj[key].is_null()) out = io::get_positive(src, nj[key], p + "/" + key);
    };
    pos("hyperbolic_tol", n.tol.hyperbolic);
    pos("fixed_residual_tol", n.tol.fixed_residual);
    pos("singular_tol", n.tol.singular);
    integer("resolution", n.resolution, 8, 1024);
    pos("mesh_tol", n.mesh_tol);
    integer("max_sweeps", n.max_sweeps, 1, 10000000);
    integer("order", n.order, 1, 4);
    if (nj.contains("grading")) {
      n.grading = io::get_number(src, nj["grading"], p + "/grading");
      if (!(n.grading >= 1.0 && n.grading <= 8.0)) io::fail(src, p + "/grading", "must lie in [1, 8]");
    }
    if (nj.contains("adaptive")) n.adaptive = io::get_bool(src, nj["adaptive"], p + "/adaptive");
    integer("existence_grid", n.existence_grid, 2, 1000);
    optional("rho", n.rho);
    optional("sigma", n.sigma);
    if (n.rho && *n.rho >= 1.0) io::fail(src, p + "/rho", "must lie in (0, 1)");
    integer("raster", n.raster, 4, 4000);
    integer("basin_max_iter", n.basin_max_iter, 1, 100000000);
    pos("basin_tol", n.basin_tol);
    pos("bisection_tol", n.bisection_tol);
    integer("orbit_samples", n.orbit_samples, 0, 10000000);
    integer("orbit_max_iter", n.orbit_max_iter, 1, 100000000);
    pos("orbit_tol", n.orbit_tol);
    integer("leaf_samples", n.leaf_samples, 1, 10000000);
    integer("conjugacy_samples", n.conjugacy_samples, 1, 10000000);
    integer("streaks", n.streaks, 0, 10000);
  }
  if (j.contains("outputs")) {
    const Json& oj = j["outputs"];
    io::require_object(src, oj, "/outputs", {"report", "mesh", "curves", "csv", "svg"});
    auto path = [&](const char* key, std::string& out) {
      if (oj.contains(key)) out = io::get_string(src, oj[key], std::string("/outputs/") + key);
    };
    path("report", c.outputs.report);
    path("mesh", c.outputs.mesh);
    path("curves", c.outputs.curves);
    path("csv", c.outputs.csv);
    path("svg", c.outputs.svg);
  }
  validate(c);
  return c;
}

inline RunConfig config_from_text(const std::string& text, const std::string& origin = "<string>") {
  const io::Source src{text, origin};
  return config_from_json(io::parse(text, origin), &src);
}

inline RunConfig load_config(const std::string& path) { return config_from_text(io::read_file(path), path); }

inline SimplexOptions simplex_options(const NumericConfig& n) {
  SimplexOptions o;
  o.resolution = n.resolution;
  o.grading = n.grading;
  o.adaptive = n.adaptive;
  o.order = n.order;
  o.max_iters = n.max_sweeps;
  o.tol = n.mesh_tol;
  return o;
}

}  // namespace csx
