#pragma once

// Subcommands of the csx executable. Each returns a process exit code:
// 0 success, 1 analysis failure, 2 config error, 3 missing artifact.

#include "csx/classify.hpp"
#include "csx/config.hpp"
#include "csx/portrait.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace csx {

enum ExitCode : int { kExitOk = 0, kExitAnalysis = 1, kExitConfig = 2, kExitMissing = 3 };

/// An input artifact (mesh, curves, CSV) that does not exist.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliOptions {
  std::string config;
  std::string out;
  std::string input;   // classify CSV
  std::string mesh;    // portrait / verify input mesh
  std::string curves;  // portrait input curves
  bool strict = false;
  bool no_basins = false;
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution;
};

struct CommandIO {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

namespace cli {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline RunConfig load(const CliOptions& o) {
  if (o.config.empty()) throw Error(Errc::ConfigError, "--config is required");
  if (!std::filesystem::exists(o.config)) throw Error(Errc::ConfigError, "config file not found: " + o.config);
  RunConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.resolution) {
    c.numeric.resolution = *o.resolution;
    validate(c);
  }
  return c;
}

/// Writes to --out, else the configured path, else the output stream.
inline void emit(const CliOptions& o, const std::string& configured, const std::string& text, CommandIO& io) {
  const std::string& path = !o.out.empty() ? o.out : configured;
  if (path.empty()) {
    io.out << text;
  } else {
    io::write_file(path, text);
  }
}

/// Runs `body` and maps failures onto exit codes.
inline int guarded(CommandIO& io, const std::function<int()>& body) {
  try {
    return body();
  } catch (const MissingArtifact& e) {
    io.err << "error: missing artifact: " << e.what() << "\n";
    return kExitMissing;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kExitConfig : kExitAnalysis;
  } catch (const nlohmann::json::exception& e) {
    io.err << "error: ConfigError: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
}

inline Json support_json(Support s, int n) {
  Json out = Json::array();
  for (int i : support_indices(s, n)) out.push_back(i + 1);
  return out;
}

template <int Dim>
Json fixed_point_json(const FixedPointRecord<Dim>& p) {
  const int n = p.dim();
  Json j;
  j["location"] = io::to_json(p.location);
  j["support"] = support_json(p.support, n);
  j["stratum"] = support_label(p.support, n);
  j["residual"] = p.residual;
  j["eigenvalues"] = io::to_json(p.eigenvalues);
  j["mu"] = io::to_json(p.mu);
  j["nu"] = p.nu;
  j["hyperbolic"] = p.hyperbolic;
  j["on_s_spectrum"] = io::to_json(p.on_s_spectrum);
  j["s_type"] = std::string(to_string(p.s_type));
  j["index"] = p.index ? Json(*p.index) : Json(nullptr);
  if (p.c1) {
    Json c;
    c["holds"] = p.c1->holds;
    c["det"] = p.c1->det;
    c["min_inverse_entry"] = p.c1->min_inverse_entry;
    c["mu"] = io::to_json(p.c1->mu);
    c["perron_vector"] = p.c1->perron_vector ? io::to_json(*p.c1->perron_vector) : Json(nullptr);
    j["c1"] = c;
  }
  return j;
}

inline Json sampled_json(const SampledCheck& s) {
  Json j;
  j["pass"] = s.pass;
  j["margin"] = s.margin;
  j["samples"] = s.samples;
  return j;
}

template <int Dim>
Json existence_json(const CompetitiveMap<Dim>& map, int grid) {
  const auto rep = check_existence(map, grid);
  Json j;
  j["pass"] = rep.pass();
  j["grid"] = rep.grid_resolution;
  j["pad"] = rep.pad;
  Json a2;
  a2["pass"] = rep.a2.pass;
  a2["w"] = rep.a2.w ? io::to_json(*rep.a2.w) : Json(nullptr);
  a2["diagnostic"] = rep.a2.diagnostic;
  j["a1"] = rep.a2.pass ? sampled_json(rep.a1) : Json(nullptr);
  j["a2"] = a2;
  j["a3"] = rep.a2.pass ? sampled_json(rep.a3) : Json(nullptr);
  if (map.kind() == ModelKind::Ricker) {
    const auto rc = ricker_condition(map.params());
    Json r;
    r["pass"] = rc.pass;
    Json sp = Json::array();
    for (const auto& s : rc.species) {
      Json e;
      e["r"] = s.r;
      e["diagonal_threshold"] = s.diagonal_threshold;
      e["scaled_threshold"] = s.scaled_threshold;
      e["pass"] = s.pass;
      sp.push_back(e);
    }
    r["species"] = sp;
    j["ricker_condition"] = r;
  }
  return j;
}

inline Json classification_json(const ClassificationResult& c) {
  Json j;
  j["class_id"] = c.class_id ? Json(*c.class_id) : Json(nullptr);
  j["permutation"] = permutation_label(c.permutation);
  Json m = Json::array();
  for (const auto& mg : c.margins) {
    Json e;
    e["label"] = mg.label;
    e["value"] = mg.value;
    m.push_back(e);
  }
  j["margins"] = m;
  j["alpha_signs"] = c.alpha_signs;
  j["beta_values"] = c.beta_values;
  Json alpha = Json::array(), beta = Json::array();
  for (int i = 0; i < 3; ++i) {
    alpha.push_back(io::to_json(Vec3(c.alpha_beta.alpha.row(i).transpose())));
    beta.push_back(io::to_json(Vec3(c.alpha_beta.beta.row(i).transpose())));
  }
  j["alpha"] = alpha;
  j["beta"] = beta;
  return j;
}

template <int Dim>
Json analyze_json(const CompetitiveMap<Dim>& map, const RunConfig& cfg, bool& existence_pass) {
  Json j;
  const auto census = find_all_fixed_points(map, cfg.numeric.tol);
  Json pts = Json::array();
  for (const auto& p : census.points) pts.push_back(fixed_point_json(p));
  j["fixed_points"] = pts;
  Json deg = Json::array();
  for (Support s : census.degenerate_faces) deg.push_back(support_json(s, map.dim()));
  j["degenerate_faces"] = deg;
  j["existence"] = existence_json(map, cfg.numeric.existence_grid);
  existence_pass = j["existence"]["pass"].get<bool>();
  return j;
}

}  // namespace cli

// ---------------------------------------------------------------------------

inline int cmd_analyze(const CliOptions& o, CommandIO io = {}) {
  return cli::guarded(io, [&] {
    const RunConfig cfg = cli::load(o);
    Json report = cfg.header();
    report["command"] = "analyze";
    report["model"] = to_json(cfg.model);
    bool existence_pass = true;
    Json body;
    if (cfg.model.n() == 3) {
      const Map3 map = cfg.model.map3();
      body = cli::analyze_json(map, cfg, existence_pass);
      Json cls;
      try {
        const auto cs = classify_and_analyze(map, cfg.numeric.tol);
        cls = cli::classification_json(cs.classification);
        cls["saddle_confirmed"] = cs.saddle_confirmed;
        cls["warnings"] = cs.warnings;
      } catch (const Error& e) {
        cls["error"] = e.what();
      }
      body["classification"] = cls;
    } else {
      body = cli::analyze_json(cfg.model.map(), cfg, existence_pass);
    }
    for (auto& [k, v] : body.items()) report[k] = v;
    cli::emit(o, cfg.outputs.report, io::dump(report), io);
    return o.strict && !existence_pass ? kExitAnalysis : kExitOk;
  });
}

namespace cli {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(trim(f));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace cli

/// CSV rows a11..a33 in, the same rows with class_id, permutation, margins
/// and error appended out. A non-numeric first row is taken as a header.
inline int cmd_classify(const CliOptions& o, CommandIO io = {}) {
  return cli::guarded(io, [&] {
    std::optional<RunConfig> cfg;
    if (!o.config.empty()) cfg = cli::load(o);
    if (o.input.empty()) throw Error(Errc::ConfigError, "classify needs an input CSV");
    if (!std::filesystem::exists(o.input)) throw MissingArtifact(o.input);
    const std::string text = io::read_file(o.input);
    const std::string hash = cfg ? cfg->hash() : io::hex64(io::fnv1a(text));
    const std::uint64_t seed = cfg ? cfg->seed : o.seed.value_or(1);

    std::vector<std::string> lines;
    {
      std::stringstream ss(text);
      std::string line;
      while (std::getline(ss, line)) {
        if (!cli::trim(line).empty() && cli::trim(line)[0] != '#') lines.push_back(line);
      }
    }
    if (!lines.empty()) {
      double v;
      const auto first = cli::split_csv(lines.front());
      if (!first.empty() && !cli::parse_double(first.front(), v)) lines.erase(lines.begin());
    }
    bool any_error = false;
    std::ostringstream csv;
    Json rows = Json::array();
    if (!lines.empty()) {
      csv << "# csx " << kVersion << " config_hash=" << hash << " seed=" << seed << "\n";
      csv << "a11,a12,a13,a21,a22,a23,a31,a32,a33,class_id,permutation,margins,error\n";
    }
    for (std::size_t r = 0; r < lines.size(); ++r) {
      const auto fields = cli::split_csv(lines[r]);
      Json row;
      row["row"] = r + 1;
      std::string error;
      std::optional<ClassificationResult> result;
      Mat3 a = Mat3::Zero();
      if (fields.size() != 9) {
        error = "expected 9 fields, got " + std::to_string(fields.size());
      } else {
        for (int k = 0; k < 9 && error.empty(); ++k) {
          double v;
          if (!cli::parse_double(fields[k], v) || !std::isfinite(v)) error = "field " + std::to_string(k + 1) + " is not a number";
          a(k / 3, k % 3) = v;
        }
      }
      if (error.empty()) {
        try {
          result = classify_table1(a);
        } catch (const Error& e) {
          error = e.what();
        }
      }
      for (std::size_t k = 0; k < fields.size() && k < 9; ++k) csv << fields[k] << ",";
      for (std::size_t k = fields.size(); k < 9; ++k) csv << ",";
      if (result) {
        csv << (result->class_id ? std::to_string(*result->class_id) : std::string("none")) << ","
            << permutation_label(result->permutation) << ",";
        for (std::size_t k = 0; k < result->margins.size(); ++k) {
          csv << (k ? ";" : "") << result->margins[k].label << "=" << cli::format_double(result->margins[k].value);
        }
        csv << ",\n";
        row = cli::classification_json(*result);
        row["row"] = r + 1;
        row["error"] = nullptr;
      } else {
        any_error = true;
        // Commas would split the error column.
        std::string msg = error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        csv << "error,,," << msg << "\n";
        row["class_id"] = nullptr;
        row["error"] = error;
      }
      Json input = Json::array();
      for (const auto& f : fields) input.push_back(f);
      row["input"] = input;
      rows.push_back(row);
    }
    std::string text_out;
    if (o.json) {
      Json doc;
      doc["version"] = std::string(kVersion);
      doc["config_hash"] = hash;
      doc["seed"] = seed;
      doc["command"] = "classify";
      doc["rows"] = rows;
      text_out = io::dump(doc);
    } else {
      text_out = csv.str();
    }
    cli::emit(o, cfg ? cfg->outputs.csv : std::string(), text_out, io);
    if (any_error) io.err << "classify: some rows failed validation\n";
    return any_error && o.strict ? kExitAnalysis : kExitOk;
  });
}

inline SimplexMesh build_mesh(const Map3& map, const RunConfig& cfg, std::ostream* log = nullptr) {
  SimplexOptions opt = simplex_options(cfg.numeric);
  if (log) {
    opt.on_sweep = [log](int sweep, double residual) {
      if (sweep % 50 == 0) *log << "sweep " << sweep << " residual " << cli::format_double(residual) << "\n";
    };
  }
  return compute_carrying_simplex(map, opt);
}

inline int cmd_simplex(const CliOptions& o, CommandIO io = {}) {
  return cli::guarded(io, [&] {
    const RunConfig cfg = cli::load(o);
    const Map3 map = cfg.model.map3();
    const SimplexMesh mesh = build_mesh(map, cfg, &io.err);
    io.err << "simplex: " << mesh.iterations << " sweeps, residual " << cli::format_double(mesh.residual)
           << (mesh.converged ? "" : " (not converged)") << "\n";
    Json header = cfg.header();
    header["command"] = "simplex";
    cli::emit(o, cfg.outputs.mesh, io::dump(mesh_to_json(mesh, header), -1), io);
    return kExitOk;
  });
}

/// Stable and unstable curves of the interior saddle, when the boundary
/// carries two attractors and two repellers.
inline std::vector<ManifoldCurve> trace_curves(const Map3& map, const SimplexMesh& mesh, const SaddleStructure& st,
                                               const RunConfig& cfg) {
  if (!st.four_point_boundary()) return {};
  const auto split = pseudo_splitting(map, st.q.location, cfg.numeric.tol);
  StableOptions so;
  so.bisection_tol = cfg.numeric.bisection_tol;
  so.max_iter = cfg.numeric.basin_max_iter;
  so.basin_tol = cfg.numeric.basin_tol * axial_vector(map).norm();
  std::vector<ManifoldCurve> out;
  out.push_back(trace_unstable(map, split, st.attractors));
  out.push_back(trace_stable_on_S(map, mesh, split, st.repellers[0], st.repellers[1], st.attractors[0],
                                  st.attractors[1], so));
  return out;
}

inline SimplexMesh load_mesh(const std::string& path) {
  if (path.empty()) throw MissingArtifact("no mesh file given (--mesh or outputs.mesh)");
  if (!std::filesystem::exists(path)) throw MissingArtifact(path);
  return mesh_from_text(io::read_file(path), path);
}

inline int cmd_portrait(const CliOptions& o, CommandIO io = {}) {
  return cli::guarded(io, [&] {
    const RunConfig cfg = cli::load(o);
    const Map3 map = cfg.model.map3();
    const SimplexMesh mesh = load_mesh(!o.mesh.empty() ? o.mesh : cfg.outputs.mesh);
    const auto census = find_all_fixed_points(map, cfg.numeric.tol);
    std::optional<SaddleStructure> st;
    try {
      st = identify_saddle_structure(map, cfg.numeric.tol);
    } catch (const Error&) {
    }
    std::vector<ManifoldCurve> curves;
    const std::string curves_path = !o.curves.empty() ? o.curves : cfg.outputs.curves;
    if (!o.curves.empty() && !std::filesystem::exists(o.curves)) throw MissingArtifact(o.curves);
    if (!curves_path.empty() && std::filesystem::exists(curves_path)) {
      curves = curves_from_text(io::read_file(curves_path), curves_path);
    } else if (st) {
      curves = trace_curves(map, mesh, *st, cfg);
    }
    PortraitOptions po;
    po.basins = !o.no_basins;
    po.raster = cfg.numeric.raster;
    po.basin_max_iter = cfg.numeric.basin_max_iter;
    po.basin_tol = cfg.numeric.basin_tol * axial_vector(map).norm();
    po.streaks = cfg.numeric.streaks;
    po.seed = cfg.seed;
    po.title = std::string(to_string(cfg.model.kind));
    if (auto cls = classify_table1(map.params().A); cls.class_id) po.title += ", class " + std::to_string(*cls.class_id);
    po.header = cfg.header();
    const PortraitResult res = render_portrait(map, mesh, census, st, curves, po);
    io.err << "portrait: topology " << res.topology << ", " << res.glyphs << " fixed points";
    if (res.regions >= 0) io.err << ", " << res.regions << " shaded regions";
    io.err << "\n";
    cli::emit(o, cfg.outputs.svg, res.svg, io);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  bool pass = false;
  bool skipped = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // how value compares with threshold when passing
  std::string detail;

  Json json() const {
    Json j;
    j["name"] = name;
    j["pass"] = pass;
    j["skipped"] = skipped;
    j["value"] = value;
    j["threshold"] = threshold;
    j["relation"] = relation;
    j["detail"] = detail;
    return j;
  }
};

namespace cli {

inline CheckResult le(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value <= threshold, false, value, threshold, "<=", std::move(detail)};
}

inline CheckResult ge(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value >= threshold, false, value, threshold, ">=", std::move(detail)};
}

inline CheckResult skipped(std::string name, std::string why) {
  return {std::move(name), true, true, 0.0, 0.0, "", std::move(why)};
}

inline CheckResult failed(std::string name, std::string why) {
  return {std::move(name), false, false, 0.0, 0.0, "", std::move(why)};
}

}  // namespace cli

/// Every invariant check on one three-species system.
inline std::vector<CheckResult> verify_system(const Map3& map, const SimplexMesh& mesh, const RunConfig& cfg) {
  using cli::ge;
  using cli::le;
  const auto& num = cfg.numeric;
  std::vector<CheckResult> out;
  const Vec3 w = axial_vector(map);
  const double wn = w.norm();
  const double h = mesh.edge_length();

  const auto ex = check_existence(map, num.existence_grid);
  out.push_back({"existence", ex.pass(), false, ex.a2.pass ? std::min(-ex.a1.margin, ex.a3.margin) : 0.0, 0.0, ">",
                 "min(-max dF_i/dx_j, min A3 expression)"});

  const auto unord = unordered_check(mesh, 1e-6 * wn);
  out.push_back(le("unordered", static_cast<double>(unord.size()), 0.0, "vertex pairs ordered beyond 1e-6 ||w||"));
  const double res = invariance_residual(map, mesh);
  out.push_back(le("invariance_residual", res, 1e-4 * wn, "max dist(T(v), S) against 1e-4 ||w||"));
  out.push_back(le("invariance_residual_mesh_bound", res, std::max(10.0 * num.mesh_tol, 5.0 * h * h) * wn,
                   "max dist(T(v), S) against max(10 tol, 5 h^2) ||w||, h the longest mesh edge"));
  double box = 0.0;
  for (std::size_t v = 0; v < mesh.size(); ++v) {
    const Vec3 x = mesh.vertex(v);
    box = std::max(box, ((x.array() - w.array()) / w.array()).maxCoeff());
    box = std::max(box, (-x.array() / w.array()).maxCoeff());
  }
  out.push_back(le("box", box, 1e-6, "largest excursion outside [0, w] relative to w"));
  const auto census = find_all_fixed_points(map, num.tol);
  const SurfaceDistance dist(mesh);
  double fpd = 0.0;
  for (const auto& p : census.points) {
    if (p.support) fpd = std::max(fpd, dist(p.location));
  }
  out.push_back(le("fixed_points_on_surface", fpd, h, "max distance of nonzero fixed points to the mesh"));

  std::optional<SaddleStructure> st;
  std::string why;
  try {
    st = identify_saddle_structure(map, num.tol);
  } catch (const Error& e) {
    why = e.what();
  }
  const bool saddle = st && saddle_eigenstructure(st->q.eigenvalues, num.tol.hyperbolic) && st->q.c1_holds;
  if (st) {
    out.push_back({"interior_saddle", saddle && st->q.index && *st->q.index == -1, false,
                   st->q.index ? static_cast<double>(*st->q.index) : 0.0, -1.0, "==",
                   "(C1), 0 < mu < lambda1 < 1 < lambda2, index -1"});
  } else {
    out.push_back(cli::skipped("interior_saddle", why));
  }
  const std::vector<std::string> structural{"unstable_curve", "stable_curve", "regions", "leaf_contraction",
                                            "m2_expansion", "conjugacy_decay", "tangent_cone"};
  if (!saddle || !st->four_point_boundary()) {
    for (const auto& n : structural) out.push_back(cli::skipped(n, "no interior saddle with four boundary fixed points"));
  } else {
    const auto split = pseudo_splitting(map, st->q.location, num.tol);
    try {
      const auto curves = trace_curves(map, mesh, *st, cfg);
      const auto& un = curves[0];
      const auto& sc = curves[1];
      double und = 0.0;
      for (const auto& p : un.points) und = std::max(und, dist(p));
      out.push_back(le("unstable_curve", std::max(un.endpoints[0].distance, un.endpoints[1].distance), 1e-5 * wn,
                       "ends " + un.endpoints[0].id + ", " + un.endpoints[1].id + "; max mesh distance " +
                           cli::format_double(und)));
      if (und > 2.0 * h) out.back().pass = false;
      const double qd = detail::point_polyline_distance(split.q, sc.points);
      out.push_back(le("stable_curve", qd, num.bisection_tol * wn,
                       "distance of q to the curve; ends " + sc.endpoints[0].id + ", " + sc.endpoints[1].id));
      const std::vector<Vec3> att{st->attractors[0].x, st->attractors[1].x};
      const auto ras = raster_basins(map, mesh, att, split.q, num.raster, num.basin_max_iter, num.basin_tol * wn);
      const auto rc = count_regions(ras, un, st->repellers[0].x);
      CheckResult regions{"regions", rc.components == 4 && rc.unresolved_components == 0, false,
                          static_cast<double>(rc.components), 4.0, "==", "connected basin components"};
      out.push_back(regions);
    } catch (const Error& e) {
      out.push_back(cli::failed("unstable_curve", e.what()));
      out.push_back(cli::failed("stable_curve", e.what()));
      out.push_back(cli::skipped("regions", "curves unavailable"));
    }
    LeafContractionOptions lo;
    lo.rho = num.rho;
    lo.samples = num.leaf_samples;
    lo.seed = cfg.seed;
    const auto leaf = leaf_contraction_report(map, split, lo);
    out.push_back(le("leaf_contraction", leaf.max_ratio, leaf.rho, std::string(to_string(leaf.status))));
    out.back().pass = leaf.pass();
    const double rho = num.rho.value_or(split.default_rho());
    const double sigma = num.sigma.value_or(split.default_sigma(rho));
    const auto m2 = m2_expansion_search(split.restricted(), sigma);
    const double lambda1 = std::abs(split.w_eigenvalues.front());
    if (sigma < lambda1) {
      out.push_back({"m2_expansion", m2.l.has_value(), false, m2.l ? static_cast<double>(*m2.l) : -1.0,
                     static_cast<double>(m2.searched), "<=", "smallest l with ||(DT|W)^-l|| < sigma^-l"});
    } else {
      out.push_back(cli::skipped("m2_expansion", "sigma >= lambda1"));
    }
    ConjugacyOptions co;
    co.rho = num.rho;
    co.samples = num.conjugacy_samples;
    co.seed = cfg.seed;
    const auto conj = conjugacy_decay_report(map, mesh, split, co);
    out.push_back(ge("conjugacy_decay", conj.pass_fraction, 0.9, "fraction of samples with fitted ratio <= rho + 0.1"));
    try {
      double prev = std::numeric_limits<double>::infinity(), worst = -std::numeric_limits<double>::infinity();
      std::string angles;
      for (double f : {8.0, 4.0, 2.0}) {
        const double a = estimate_tangent_cone(mesh, split.q, f * h, split.w_basis).angle_to_W;
        if (std::isfinite(prev)) worst = std::max(worst, a - prev);
        prev = a;
        angles += (angles.empty() ? "" : ", ") + cli::format_double(a);
      }
      out.push_back(le("tangent_cone", worst, 2.0 * h, "largest rise of angle_to_W over radii 8h, 4h, 2h: " + angles));
    } catch (const Error& e) {
      out.push_back(cli::failed("tangent_cone", e.what()));
    }
  }

  // Orbits from random points of [0, 2w] settle on the fixed-point census.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int unresolved = 0;
  for (int s = 0; s < num.orbit_samples; ++s) {
    Vec3 x(2.0 * w[0] * unif(rng), 2.0 * w[1] * unif(rng), 2.0 * w[2] * unif(rng));
    bool done = false;
    for (int it = 0; it <= num.orbit_max_iter && !done; ++it) {
      for (const auto& p : census.points) {
        if ((x - p.location).norm() < num.orbit_tol) {
          done = true;
          break;
        }
      }
      if (!done) x = map(x);
    }
    unresolved += !done;
  }
  out.push_back(le("orbits", unresolved, 0.0, std::to_string(num.orbit_samples) + " random initial points"));
  return out;
}

inline int cmd_verify(const CliOptions& o, CommandIO io = {}) {
  return cli::guarded(io, [&] {
    const RunConfig cfg = cli::load(o);
    const Map3 map = cfg.model.map3();
    const SimplexMesh mesh = !o.mesh.empty() ? load_mesh(o.mesh) : build_mesh(map, cfg);
    const auto checks = verify_system(map, mesh, cfg);
    Json report = cfg.header();
    report["command"] = "verify";
    report["model"] = to_json(cfg.model);
    report["existence"] = cli::existence_json(map, cfg.numeric.existence_grid);
    Json cls;
    try {
      const auto c = classify_and_analyze(map, cfg.numeric.tol);
      cls = cli::classification_json(c.classification);
      cls["warnings"] = c.warnings;
    } catch (const Error& e) {
      cls["error"] = e.what();
    }
    report["classification"] = cls;
    report["mesh"] = {{"resolution", mesh.resolution},
                      {"order", mesh.order},
                      {"iterations", mesh.iterations},
                      {"residual", mesh.residual},
                      {"converged", mesh.converged},
                      {"edge_length", mesh.edge_length()}};
    Json arr = Json::array();
    bool all = true;
    for (const auto& c : checks) {
      arr.push_back(c.json());
      all = all && c.pass;
    }
    // Under --strict an unclassified or warned system also fails.
    if (o.strict && (cls.contains("error") || cls["class_id"].is_null() || !cls["warnings"].empty())) all = false;
    report["checks"] = arr;
    report["pass"] = all;
    cli::emit(o, cfg.outputs.report, io::dump(report), io);
    for (const auto& c : checks) {
      if (!c.pass) io.err << "verify: FAIL " << c.name << " " << cli::format_double(c.value) << " " << c.relation << " "
                          << cli::format_double(c.threshold) << " " << c.detail << "\n";
    }
    return all ? kExitOk : kExitAnalysis;
  });
}

}  // namespace csx
