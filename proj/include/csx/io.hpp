#pragma once

// JSON persistence: model documents, meshes, traced curves. Readers are
// strict: unknown keys, wrong types and out-of-range values raise
// ConfigError naming the JSON pointer and, when it can be located, the line.

#include "csx/manifolds.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace csx {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";

namespace io {

/// Raw document text plus the pointer of the value being read, for messages.
struct Source {
  std::string text;
  std::string origin;  // file name or "<string>"
};

/// 1-based line of the first `"key"` occurrence along the pointer path.
inline int locate_line(const std::string& text, const std::string& pointer) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  std::size_t start = 1;
  bool found = false;
  while (start <= pointer.size()) {
    const std::size_t next = pointer.find('/', start);
    const std::string token = pointer.substr(start, next == std::string::npos ? std::string::npos : next - start);
    start = next == std::string::npos ? pointer.size() + 1 : next + 1;
    if (token.empty() || std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::size_t at = text.find("\"" + token + "\"", pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] inline void fail(const Source* src, const std::string& pointer, const std::string& what) {
  std::string msg = (src ? src->origin : std::string("<json>")) + ": field " + (pointer.empty() ? "/" : pointer);
  if (src) {
    if (const int line = locate_line(src->text, pointer)) msg += " (line " + std::to_string(line) + ")";
  }
  throw Error(Errc::ConfigError, msg + ": " + what);
}

inline Json parse(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and may point one past the end.
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size() + 1);
    const auto before = text.substr(0, byte > 0 ? byte - 1 : 0);
    const int line = 1 + static_cast<int>(std::count(before.begin(), before.end(), '\n'));
    const std::size_t nl = before.rfind('\n');
    const std::size_t col = nl == std::string::npos ? before.size() + 1 : before.size() - nl;
    throw Error(Errc::ConfigError, origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                       ": malformed JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path, Errc missing = Errc::ConfigError) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::ConfigError, "write failed: " + path);
}

/// Canonical text with a trailing newline; indent < 0 gives one line.
inline std::string dump(const Json& j, int indent = 2) { return j.dump(indent) + "\n"; }

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) out[k] = digits[v & 0xf];
  return out;
}

// Typed readers. `p` is the JSON pointer of `j`.

inline void require_object(const Source* src, const Json& j, const std::string& p,
                           std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(src, p, "expected an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail(src, p + "/" + item.key(), "unknown key");
    }
  }
}

inline const Json& member(const Source* src, const Json& j, const std::string& p, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(src, p + "/" + key, "missing");
  return *it;
}

inline double get_number(const Source* src, const Json& j, const std::string& p) {
  if (!j.is_number()) fail(src, p, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(src, p, "must be finite");
  return v;
}

inline double get_positive(const Source* src, const Json& j, const std::string& p) {
  const double v = get_number(src, j, p);
  if (!(v > 0.0)) fail(src, p, "must be > 0");
  return v;
}

inline std::int64_t get_int(const Source* src, const Json& j, const std::string& p) {
  if (!j.is_number_integer()) fail(src, p, "expected an integer");
  return j.get<std::int64_t>();
}

inline bool get_bool(const Source* src, const Json& j, const std::string& p) {
  if (!j.is_boolean()) fail(src, p, "expected true or false");
  return j.get<bool>();
}

inline std::string get_string(const Source* src, const Json& j, const std::string& p) {
  if (!j.is_string()) fail(src, p, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> get_numbers(const Source* src, const Json& j, const std::string& p,
                                       std::ptrdiff_t size = -1) {
  if (!j.is_array()) fail(src, p, "expected an array of numbers");
  if (size >= 0 && static_cast<std::ptrdiff_t>(j.size()) != size) {
    fail(src, p, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_number(src, j[k], p + "/" + std::to_string(k)));
  return out;
}

inline Vec3 get_vec3(const Source* src, const Json& j, const std::string& p) {
  const auto v = get_numbers(src, j, p, 3);
  return Vec3(v[0], v[1], v[2]);
}

// Writers.

/// Signed zeros print as "-0.0"; fold them so equal values serialize alike.
inline double unsigned_zero(double v) { return v == 0.0 ? 0.0 : v; }

template <typename Derived>
Json to_json(const Eigen::MatrixBase<Derived>& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(unsigned_zero(v[k]));
  return out;
}

inline Json to_json(const Complex& z) { return Json::array({unsigned_zero(z.real()), unsigned_zero(z.imag())}); }

inline Json to_json(const std::vector<Complex>& zs) {
  Json out = Json::array();
  for (const auto& z : zs) out.push_back(to_json(z));
  return out;
}

inline Json points_json(const std::vector<Vec3>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) out.push_back(to_json(p));
  return out;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Model documents

struct ModelSpec {
  ModelKind kind = ModelKind::LeslieGower;
  ParameterSetX params;

  int n() const { return params.n(); }
  MapX map() const { return make_map<Eigen::Dynamic>(kind, params); }
  Map3 map3() const {
    if (n() != 3) throw Error(Errc::ConfigError, "this command needs n = 3, got n = " + std::to_string(n()));
    return make_map<3>(kind, fix_dimension<3>(params));
  }
};

inline ModelKind parse_model_kind(const io::Source* src, const Json& j, const std::string& p) {
  const std::string s = io::get_string(src, j, p);
  if (s == "leslie_gower") return ModelKind::LeslieGower;
  if (s == "atkinson_allen") return ModelKind::AtkinsonAllen;
  if (s == "ricker") return ModelKind::Ricker;
  io::fail(src, p, "unknown model kind \"" + s + "\" (leslie_gower, atkinson_allen, ricker)");
}

/// {"kind": ..., "n": optional, "r": [...], "c": [...] (Atkinson-Allen only), "A": [[...], ...]}
inline ModelSpec model_from_json(const Json& j, const io::Source* src = nullptr, const std::string& p = "") {
  io::require_object(src, j, p, {"kind", "n", "r", "c", "A"});
  ModelSpec m;
  m.kind = parse_model_kind(src, io::member(src, j, p, "kind"), p + "/kind");
  const auto r = io::get_numbers(src, io::member(src, j, p, "r"), p + "/r");
  const auto n = static_cast<std::ptrdiff_t>(r.size());
  if (n < 1) io::fail(src, p + "/r", "needs at least one species");
  if (j.contains("n")) {
    const auto nn = io::get_int(src, j["n"], p + "/n");
    if (nn != n) io::fail(src, p + "/n", "n = " + std::to_string(nn) + " but r has " + std::to_string(n) + " entries");
  }
  m.params.r = VecX(n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!(r[i] > 0.0)) io::fail(src, p + "/r/" + std::to_string(i), "growth rate must be > 0");
    m.params.r[i] = r[i];
  }
  const Json& a = io::member(src, j, p, "A");
  if (!a.is_array() || static_cast<std::ptrdiff_t>(a.size()) != n) {
    io::fail(src, p + "/A", "expected " + std::to_string(n) + " rows");
  }
  m.params.A = MatX(n, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::string row = p + "/A/" + std::to_string(i);
    const auto vals = io::get_numbers(src, a[i], row, n);
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      if (!(vals[k] > 0.0)) io::fail(src, row + "/" + std::to_string(k), "interaction coefficient must be > 0");
      m.params.A(i, k) = vals[k];
    }
  }
  if (m.kind == ModelKind::AtkinsonAllen) {
    const auto c = io::get_numbers(src, io::member(src, j, p, "c"), p + "/c", n);
    VecX cv(n);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!(c[i] > 0.0 && c[i] < 1.0)) io::fail(src, p + "/c/" + std::to_string(i), "survival fraction must lie in (0, 1)");
      cv[i] = c[i];
    }
    m.params.c = cv;
  } else if (j.contains("c")) {
    io::fail(src, p + "/c", "only Atkinson-Allen models take survival fractions");
  }
  try {
    validate(m.params, m.kind);
  } catch (const Error& e) {
    io::fail(src, p, e.what());
  }
  return m;
}

inline ModelSpec model_from_text(const std::string& text, const std::string& origin = "<string>") {
  const io::Source src{text, origin};
  return model_from_json(io::parse(text, origin), &src);
}

inline Json to_json(const ModelSpec& m) {
  Json j;
  j["kind"] = std::string(to_string(m.kind));
  j["n"] = m.n();
  j["r"] = io::to_json(m.params.r);
  if (m.params.c) j["c"] = io::to_json(*m.params.c);
  Json a = Json::array();
  for (int i = 0; i < m.n(); ++i) a.push_back(io::to_json(VecX(m.params.A.row(i).transpose())));
  j["A"] = a;
  return j;
}

// ---------------------------------------------------------------------------
// Meshes

inline Json grading_json(const Grading& g) {
  Json j;
  if (g.is_table()) {
    j["log_a"] = g.log_knots_a();
    j["log_g"] = g.log_knots_g();
  } else {
    j["exponent"] = g.exponent();
  }
  return j;
}

inline Grading grading_from_json(const io::Source* src, const Json& j, const std::string& p) {
  io::require_object(src, j, p, {"exponent", "log_a", "log_g"});
  try {
    if (j.contains("exponent")) {
      if (j.contains("log_a") || j.contains("log_g")) io::fail(src, p, "exponent and table are exclusive");
      return Grading::power(io::get_number(src, j["exponent"], p + "/exponent"));
    }
    return Grading::table_log(io::get_numbers(src, io::member(src, j, p, "log_a"), p + "/log_a"),
                              io::get_numbers(src, io::member(src, j, p, "log_g"), p + "/log_g"));
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    io::fail(src, p, e.what());
  }
}

/// Mesh document. `header` carries provenance (config hash, seed).
inline Json mesh_to_json(const SimplexMesh& m, const Json& header = Json::object()) {
  Json j = header;
  j["resolution"] = m.resolution;
  j["order"] = m.order;
  Json g = Json::array();
  for (const auto& gr : m.grading) g.push_back(grading_json(gr));
  j["grading"] = g;
  j["directions"] = io::points_json(m.directions);
  j["radii"] = m.radii;
  Json edges = Json::array();
  for (const auto& e : m.edges) {
    Json ej;
    ej["c"] = e.c;
    ej["d"] = e.d;
    ej["uc"] = e.uc;
    ej["ud"] = e.ud;
    ej["rho"] = e.rho;
    ej["iterations"] = e.iterations;
    edges.push_back(ej);
  }
  j["edges"] = edges;
  j["residual"] = m.residual;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["flagged"] = m.flagged;
  j["log"] = m.log;
  return j;
}

inline SimplexMesh mesh_from_json(const Json& j, const io::Source* src = nullptr) {
  io::require_object(src, j, "", {"version", "config_hash", "seed", "command", "resolution", "order", "grading", "directions",
                                  "radii", "edges", "residual", "iterations", "converged", "flagged", "log"});
  const auto n = io::get_int(src, io::member(src, j, "", "resolution"), "/resolution");
  if (n < 1 || n > 4096) io::fail(src, "/resolution", "must lie in [1, 4096]");
  const auto order = j.contains("order") ? io::get_int(src, j["order"], "/order") : 1;
  if (order < 1 || order > 4 || n % order != 0) io::fail(src, "/order", "must lie in [1, 4] and divide the resolution");
  Gradings grading;
  if (j.contains("grading")) {
    const Json& g = j["grading"];
    if (!g.is_array() || g.size() != 3) io::fail(src, "/grading", "expected one grading per coordinate");
    for (int c = 0; c < 3; ++c) grading[c] = grading_from_json(src, g[c], "/grading/" + std::to_string(c));
  }
  SimplexMesh m = make_lattice(static_cast<int>(n), grading, static_cast<int>(order));
  const Json& dirs = io::member(src, j, "", "directions");
  if (!dirs.is_array() || dirs.size() != m.size()) {
    io::fail(src, "/directions", "expected " + std::to_string(m.size()) + " directions");
  }
  for (std::size_t k = 0; k < m.size(); ++k) {
    const std::string p = "/directions/" + std::to_string(k);
    const Vec3 u = io::get_vec3(src, dirs[k], p);
    if ((u - m.directions[k]).cwiseAbs().maxCoeff() > 1e-12) io::fail(src, p, "does not match the lattice grading");
    m.directions[k] = u;
  }
  m.radii = io::get_numbers(src, io::member(src, j, "", "radii"), "/radii", static_cast<std::ptrdiff_t>(m.size()));
  for (std::size_t k = 0; k < m.radii.size(); ++k) {
    if (!(m.radii[k] > 0.0)) io::fail(src, "/radii/" + std::to_string(k), "must be > 0");
  }
  if (j.contains("edges")) {
    const Json& edges = j["edges"];
    if (!edges.is_array() || (edges.size() != 0 && edges.size() != 3)) io::fail(src, "/edges", "expected 0 or 3 edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string p = "/edges/" + std::to_string(k);
      io::require_object(src, edges[k], p, {"c", "d", "uc", "ud", "rho", "iterations"});
      EdgeCurve e;
      e.c = static_cast<int>(io::get_int(src, io::member(src, edges[k], p, "c"), p + "/c"));
      e.d = static_cast<int>(io::get_int(src, io::member(src, edges[k], p, "d"), p + "/d"));
      if (e.c < 0 || e.c > 2 || e.d < 0 || e.d > 2 || e.c == e.d || e.c == static_cast<int>(k) ||
          e.d == static_cast<int>(k)) {
        io::fail(src, p, "edge " + std::to_string(k) + " must join the two other coordinates");
      }
      e.uc = io::get_numbers(src, io::member(src, edges[k], p, "uc"), p + "/uc");
      e.ud = io::get_numbers(src, io::member(src, edges[k], p, "ud"), p + "/ud", static_cast<std::ptrdiff_t>(e.uc.size()));
      e.rho = io::get_numbers(src, io::member(src, edges[k], p, "rho"), p + "/rho",
                              static_cast<std::ptrdiff_t>(e.uc.size()));
      if (e.uc.size() < 4) io::fail(src, p + "/uc", "needs at least 4 nodes");
      if (edges[k].contains("iterations")) {
        e.iterations = static_cast<int>(io::get_int(src, edges[k]["iterations"], p + "/iterations"));
      }
      e.index();
      m.edges.push_back(std::move(e));
    }
  }
  if (m.order > 1 && m.edges.size() != 3) io::fail(src, "/edges", "a curved mesh needs its three edge curves");
  if (j.contains("residual")) m.residual = io::get_number(src, j["residual"], "/residual");
  if (j.contains("iterations")) m.iterations = static_cast<int>(io::get_int(src, j["iterations"], "/iterations"));
  if (j.contains("converged")) m.converged = io::get_bool(src, j["converged"], "/converged");
  if (j.contains("log")) m.log = io::get_numbers(src, j["log"], "/log");
  if (j.contains("flagged")) {
    for (double f : io::get_numbers(src, j["flagged"], "/flagged")) m.flagged.push_back(static_cast<int>(f));
  }
  return m;
}

inline SimplexMesh mesh_from_text(const std::string& text, const std::string& origin = "<string>") {
  const io::Source src{text, origin};
  return mesh_from_json(io::parse(text, origin), &src);
}

// ---------------------------------------------------------------------------
// Curves

inline Json curve_to_json(const ManifoldCurve& c) {
  Json j;
  j["kind"] = c.kind == CurveKind::Stable ? "stable" : "unstable";
  j["points"] = io::points_json(c.points);
  j["endpoints"] = Json::array({c.endpoints[0].id, c.endpoints[1].id});
  j["targets"] = Json::array({io::to_json(c.endpoints[0].target), io::to_json(c.endpoints[1].target)});
  j["distances"] = Json::array({c.endpoints[0].distance, c.endpoints[1].distance});
  j["tol"] = c.tol;
  return j;
}

inline ManifoldCurve curve_from_json(const Json& j, const io::Source* src = nullptr, const std::string& p = "") {
  io::require_object(src, j, p, {"kind", "points", "endpoints", "targets", "distances", "tol"});
  ManifoldCurve c;
  const std::string kind = io::get_string(src, io::member(src, j, p, "kind"), p + "/kind");
  if (kind == "stable") c.kind = CurveKind::Stable;
  else if (kind == "unstable") c.kind = CurveKind::Unstable;
  else io::fail(src, p + "/kind", "expected \"stable\" or \"unstable\"");
  const Json& pts = io::member(src, j, p, "points");
  if (!pts.is_array() || pts.size() < 2) io::fail(src, p + "/points", "expected at least two points");
  for (std::size_t k = 0; k < pts.size(); ++k) c.points.push_back(io::get_vec3(src, pts[k], p + "/points/" + std::to_string(k)));
  const Json& ends = io::member(src, j, p, "endpoints");
  if (!ends.is_array() || ends.size() != 2) io::fail(src, p + "/endpoints", "expected two labels");
  for (int k = 0; k < 2; ++k) {
    c.endpoints[k].id = io::get_string(src, ends[k], p + "/endpoints/" + std::to_string(k));
    c.endpoints[k].target = k == 0 ? c.points.front() : c.points.back();
  }
  if (j.contains("targets")) {
    const Json& t = j["targets"];
    if (!t.is_array() || t.size() != 2) io::fail(src, p + "/targets", "expected two points");
    for (int k = 0; k < 2; ++k) c.endpoints[k].target = io::get_vec3(src, t[k], p + "/targets/" + std::to_string(k));
  }
  if (j.contains("distances")) {
    const auto d = io::get_numbers(src, j["distances"], p + "/distances", 2);
    c.endpoints[0].distance = d[0];
    c.endpoints[1].distance = d[1];
  }
  c.tol = io::get_number(src, io::member(src, j, p, "tol"), p + "/tol");
  c.finalize();
  return c;
}

/// Curves document: header fields plus {"curves": [...]}.
inline Json curves_to_json(const std::vector<ManifoldCurve>& curves, const Json& header = Json::object()) {
  Json j = header;
  Json arr = Json::array();
  for (const auto& c : curves) arr.push_back(curve_to_json(c));
  j["curves"] = arr;
  return j;
}

inline std::vector<ManifoldCurve> curves_from_text(const std::string& text, const std::string& origin = "<string>") {
  const io::Source src{text, origin};
  const Json j = io::parse(text, origin);
  std::vector<ManifoldCurve> out;
  if (j.is_object() && j.contains("curves")) {
    io::require_object(&src, j, "", {"version", "config_hash", "seed", "command", "curves"});
    const Json& arr = j["curves"];
    if (!arr.is_array()) io::fail(&src, "/curves", "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(curve_from_json(arr[k], &src, "/curves/" + std::to_string(k)));
  } else {
    out.push_back(curve_from_json(j, &src));
  }
  return out;
}

}  // namespace csx
