#pragma once

// SVG phase portraits on the carrying simplex, drawn in barycentric
// direction coordinates: e1 bottom left, e2 bottom right, e3 on top.

#include "csx/io.hpp"

#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace csx {

struct PortraitOptions {
  bool basins = true;
  int raster = 200;
  int basin_max_iter = 50000;
  double basin_tol = 0.0;  // absolute; default 1e-4 ||w||
  int streaks = 24;
  int streak_steps = 40;
  std::uint64_t seed = 1;
  std::string title;
  Json header = Json::object();  // provenance written into <metadata>
};

struct PortraitResult {
  std::string svg;
  /// "attractors_share_edge", "repellers_share_edge", both joined by '+', or "other".
  std::string topology;
  int regions = -1;  // connected shaded components; -1 without basins
  int glyphs = 0;
};

namespace portrait {

inline constexpr double kHeight = 0.86602540378443865;  // sqrt(3) / 2

inline Eigen::Vector2d project(const Vec3& x) {
  Vec3 u = x.cwiseMax(0.0);
  const double s = u.sum();
  u = s > 0.0 ? Vec3(u / s) : Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3);
  return {u[1] + 0.5 * u[2], kHeight * (1.0 - u[2])};
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  std::string s(buf);
  if (s == "-0.00000") s = "0.00000";
  return s;
}

inline std::string pt(const Eigen::Vector2d& p) { return num(p.x()) + "," + num(p.y()); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Two boundary points share an edge when some coordinate vanishes on both.
inline bool share_edge(const Vec3& a, const Vec3& b) {
  for (int k = 0; k < 3; ++k) {
    if (a[k] == 0.0 && b[k] == 0.0) return true;
  }
  return false;
}

inline std::string topology(const SaddleStructure& s) {
  if (!s.four_point_boundary()) return "other";
  std::string out;
  if (share_edge(s.attractors[0].x, s.attractors[1].x)) out = "attractors_share_edge";
  if (share_edge(s.repellers[0].x, s.repellers[1].x)) out += std::string(out.empty() ? "" : "+") + "repellers_share_edge";
  return out.empty() ? "other" : out;
}

// Fill colours per (basin, side of the unstable curve) label.
inline const char* region_fill(int label) {
  static const char* fills[] = {"#c6dbef", "#9ecae1", "#fdd0a2", "#fdae6b", "#c7e9c0", "#a1d99b"};
  return label >= 0 && label < 6 ? fills[label] : "#d9d9d9";
}

}  // namespace portrait

/// Renders the portrait. `curves` may be empty (no saddle structure) or hold
/// the unstable and stable curves through the interior saddle.
inline PortraitResult render_portrait(const Map3& map, const SimplexMesh& mesh, const FixedPointCensus<3>& census,
                                      const std::optional<SaddleStructure>& structure,
                                      const std::vector<ManifoldCurve>& curves, const PortraitOptions& opt = {}) {
  using portrait::num;
  using portrait::project;
  using portrait::pt;
  PortraitResult res;
  res.topology = structure ? portrait::topology(*structure) : "other";
  const double H = portrait::kHeight;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<!-- csx " << kVersion << " -->\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"" << num(800.0 * (H + 0.1) / 1.1)
      << "\" viewBox=\"-0.05 -0.05 1.1 " << num(H + 0.1) << "\">\n";
  svg << "<metadata>" << portrait::escape(opt.header.dump()) << "</metadata>\n";
  svg << "<title>" << portrait::escape(opt.title.empty() ? "phase portrait on S" : opt.title) << " [" << res.topology
      << "]</title>\n";
  const std::string tri = pt(project(Vec3(1, 0, 0))) + " " + pt(project(Vec3(0, 1, 0))) + " " + pt(project(Vec3(0, 0, 1)));
  svg << "<defs><clipPath id=\"simplex\"><polygon points=\"" << tri << "\"/></clipPath></defs>\n";

  std::vector<Vec3> attractors;
  if (structure) {
    for (const auto& a : structure->attractors) attractors.push_back(a.x);
  } else {
    for (const auto& p : census.points) {
      if (p.support != 0 && p.s_type == OnSType::Attractor) attractors.push_back(p.location);
    }
  }

  if (opt.basins && !attractors.empty()) {
    const Vec3 w = axial_vector(map);
    const double tol = opt.basin_tol > 0.0 ? opt.basin_tol : 1e-4 * w.norm();
    const Vec3 saddle = structure ? Vec3(structure->q.location) : Vec3(Vec3::Constant(-1.0));
    BasinRaster ras = raster_basins(map, mesh, attractors, saddle, opt.raster, opt.basin_max_iter, tol);
    std::vector<int> label = ras.basin;
    const ManifoldCurve* unstable = nullptr;
    for (const auto& c : curves) {
      if (c.kind == CurveKind::Unstable) unstable = &c;
    }
    if (unstable && structure && !structure->repellers.empty()) {
      const RegionCount rc = count_regions(ras, *unstable, structure->repellers[0].x);
      label = rc.region;
      res.regions = rc.components;
    }
    svg << "<g id=\"basins\" clip-path=\"url(#simplex)\">\n";
    // One parallelogram per run of equal labels along a lattice row.
    std::map<std::pair<int, int>, int> at;
    for (std::size_t k = 0; k < ras.cells.size(); ++k) at[{ras.cells[k][0], ras.cells[k][1]}] = label[k];
    const int R = ras.resolution;
    for (int i = 1; i < R; ++i) {
      int j = 1;
      while (i + j < R) {
        const int lab = at.at({i, j});
        int j1 = j;
        while (i + j1 + 1 < R && at.at({i, j1 + 1}) == lab) ++j1;
        // Extend the outermost runs to the simplex edges; the clip path trims them.
        const double jl = j == 1 ? -1.0 : j - 0.5, jr = i + j1 + 1 == R ? R + 1.0 : j1 + 0.5;
        const double il = i == 1 ? -1.0 : i - 0.5, ir = i + 0.5;
        // Unclamped: extended corners may leave the simplex.
        auto corner_u = [&](double a, double b) {
          const Vec3 u(a / R, b / R, 1.0 - (a + b) / R);
          return pt(Eigen::Vector2d(u[1] + 0.5 * u[2], H * (1.0 - u[2])));
        };
        // Stroke in the fill colour hides anti-aliasing seams between strips.
        svg << "<polygon fill=\"" << portrait::region_fill(lab) << "\" stroke=\"" << portrait::region_fill(lab)
            << "\" stroke-width=\"0.001\" points=\"" << corner_u(il, jl) << " "
            << corner_u(il, jr) << " " << corner_u(ir, jr) << " " << corner_u(ir, jl) << "\"/>\n";
        j = j1 + 1;
      }
    }
    svg << "</g>\n";
  }

  svg << "<g id=\"boundary\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.004\"><polygon points=\"" << tri
      << "\"/></g>\n";

  if (opt.streaks > 0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    svg << "<g id=\"orbits\" fill=\"none\" stroke=\"#525252\" stroke-opacity=\"0.6\" stroke-width=\"0.002\">\n";
    for (int s = 0; s < opt.streaks; ++s) {
      // Uniform direction in the open simplex.
      double a = unif(rng), b = unif(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      const Vec3 u(a, b, 1.0 - a - b);
      if ((u.array() <= 1e-9).any()) continue;
      Vec3 x = radial_project(mesh, u);
      const Eigen::Vector2d start = project(x);
      svg << "<polyline points=\"" << pt(start);
      for (int k = 0; k < opt.streak_steps; ++k) {
        x = map(x);
        svg << " " << pt(project(x));
      }
      svg << "\"/>\n";
      svg << "<circle cx=\"" << num(start.x()) << "\" cy=\"" << num(start.y())
          << "\" r=\"0.004\" fill=\"#525252\" stroke=\"none\"/>\n";
    }
    svg << "</g>\n";
  }

  for (const auto& c : curves) {
    const bool stable = c.kind == CurveKind::Stable;
    svg << "<g id=\"" << (stable ? "stable-curve" : "unstable-curve") << "\" fill=\"none\" stroke=\""
        << (stable ? "#08519c" : "#a50f15") << "\" stroke-width=\"0.005\""
        << (stable ? " stroke-dasharray=\"0.015,0.008\"" : "") << "><polyline points=\"";
    for (std::size_t k = 0; k < c.points.size(); ++k) svg << (k ? " " : "") << pt(project(c.points[k]));
    svg << "\"/></g>\n";
  }

  svg << "<g id=\"fixed-points\" font-family=\"sans-serif\" font-size=\"0.03\">\n";
  auto role_of = [&](const Vec3& x) -> std::string {
    if (!structure) return {};
    for (const auto* group : {&structure->attractors, &structure->repellers, &structure->others}) {
      for (const auto& lp : *group) {
        if ((lp.x - x).norm() <= 1e-12 * (1.0 + x.norm())) return lp.id;
      }
    }
    return support_size(support_of(x)) == 3 ? "q" : "";
  };
  for (const auto& p : census.points) {
    if (p.support == 0) continue;
    const Eigen::Vector2d c = project(p.location);
    const std::string cx = num(c.x()), cy = num(c.y());
    switch (p.s_type) {
      case OnSType::Attractor:
        svg << "<circle class=\"attractor\" cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"0.014\" fill=\"#000000\"/>\n";
        break;
      case OnSType::Repeller:
        svg << "<circle class=\"repeller\" cx=\"" << cx << "\" cy=\"" << cy
            << "\" r=\"0.014\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"0.004\"/>\n";
        break;
      case OnSType::Saddle: {
        const double d = 0.016;
        svg << "<path class=\"saddle\" d=\"M" << num(c.x() - d) << "," << num(c.y() - d) << " L" << num(c.x() + d)
            << "," << num(c.y() + d) << " M" << num(c.x() - d) << "," << num(c.y() + d) << " L" << num(c.x() + d)
            << "," << num(c.y() - d) << "\" stroke=\"#000000\" stroke-width=\"0.005\"/>\n";
        break;
      }
      default:
        svg << "<rect class=\"" << to_string(p.s_type) << "\" x=\"" << num(c.x() - 0.011) << "\" y=\""
            << num(c.y() - 0.011) << "\" width=\"0.022\" height=\"0.022\" fill=\"#ffffff\" stroke=\"#000000\""
            << " stroke-width=\"0.004\"/>\n";
    }
    ++res.glyphs;
    std::string label = fixed_point_name(p.location);
    const std::string role = role_of(p.location);
    if (!role.empty() && role != label) label = role + " (" + label + ")";
    // Labels right of the glyph, or left of it in the right part of the triangle.
    const bool left = c.x() > 0.7;
    svg << "<text x=\"" << num(c.x() + (left ? -0.018 : 0.018)) << "\" y=\"" << num(c.y() - 0.018) << "\""
        << (left ? " text-anchor=\"end\"" : "") << ">" << portrait::escape(label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  res.svg = svg.str();
  return res;
}

}  // namespace csx
