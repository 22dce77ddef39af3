#pragma once

// Invariant manifolds of an interior saddle on the carrying simplex and the
// numerical diagnostics for the invariant foliation around a (C1) point.

#include "csx/simplex.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace csx {

template <int Dim>
using WBasis = Eigen::Matrix<double, Dim, (Dim == Eigen::Dynamic ? Eigen::Dynamic : Dim - 1)>;

/// Splitting R^n = span{v} + W at a (C1) fixed point: v is the positive
/// eigenvector of the smallest eigenvalue mu, W the invariant complement.
template <int Dim>
struct PseudoSplitting {
  Vec<Dim> q;
  Mat<Dim> jacobian;
  double mu = 0.0;
  double nu = 0.0;
  Vec<Dim> v;         // unit norm, >> 0
  Vec<Dim> w_normal;  // unit left eigenvector of mu; W = w_normal^perp
  WBasis<Dim> w_basis;
  std::vector<Complex> w_eigenvalues;  // spectrum of DT(q)|_W, modulus ascending

  /// DT(q)|_W in the orthonormal basis w_basis.
  MatX restricted() const { return MatX(w_basis.transpose() * jacobian * w_basis); }

  double default_rho() const { return 0.5 * (mu + std::min(1.0, nu)); }
  double default_sigma(double rho) const { return 0.5 * (rho + nu); }
};

template <int Dim>
PseudoSplitting<Dim> pseudo_splitting(const Mat<Dim>& jac, const Vec<Dim>& q, const Tolerances& tol = {}) {
  const auto c1 = verify_C1<Dim>(jac, tol);
  if (!c1.holds) throw Error(Errc::C1Violated, "DT(q)^{-1} not strictly positive or mu outside (0,1)");
  const int n = static_cast<int>(jac.rows());
  PseudoSplitting<Dim> s;
  s.q = q;
  s.jacobian = jac;
  const auto eig = eigen3(jac);
  s.mu = eig.front().real();
  s.nu = eig.size() > 1 ? std::abs(eig[1]) : 0.0;
  s.w_eigenvalues.assign(eig.begin() + 1, eig.end());
  s.v = *c1.perron_vector;
  s.v /= s.v.norm();
  s.w_normal = real_left_eigenvector<Dim>(jac, s.mu);
  if (s.w_normal.dot(s.v) < 0.0) s.w_normal = -s.w_normal;
  Eigen::HouseholderQR<MatX> qr(MatX(s.w_normal));
  const MatX full = qr.householderQ();
  s.w_basis = full.rightCols(n - 1);
  return s;
}

template <int Dim>
PseudoSplitting<Dim> pseudo_splitting(const CompetitiveMap<Dim>& map, const Vec<Dim>& q, const Tolerances& tol = {}) {
  return pseudo_splitting<Dim>(map.jacobian(q), q, tol);
}

enum class CurveKind { Unstable, Stable };

struct CurveEndpoint {
  std::string id;
  Vec3 target = Vec3::Zero();
  double distance = std::numeric_limits<double>::infinity();
};

struct ManifoldCurve {
  CurveKind kind = CurveKind::Unstable;
  std::vector<Vec3> points;
  std::array<CurveEndpoint, 2> endpoints;
  std::vector<double> arc_params;
  double tol = 0.0;

  void finalize() {
    arc_params.assign(points.size(), 0.0);
    for (std::size_t k = 1; k < points.size(); ++k) arc_params[k] = arc_params[k - 1] + (points[k] - points[k - 1]).norm();
  }
};

struct LabeledPoint {
  std::string id;    // role label: a1, a2, r1, r2, q
  std::string name;  // position label: w1, v23, ...
  Vec3 x;
};

inline std::string fixed_point_name(const Vec3& x) {
  const Support s = support_of(x);
  std::string name = support_size(s) == 1 ? "w" : support_size(s) == 3 ? "q" : "v";
  if (support_size(s) == 3) return name;
  for (int i = 0; i < 3; ++i) {
    if (support_contains(s, i)) name += std::to_string(i + 1);
  }
  return name;
}

/// Interior saddle with its boundary attractors and repellers on S.
struct SaddleStructure {
  FixedPoint3 q;
  std::vector<LabeledPoint> attractors;
  std::vector<LabeledPoint> repellers;
  std::vector<LabeledPoint> others;

  bool four_point_boundary() const { return attractors.size() == 2 && repellers.size() == 2; }
};

inline SaddleStructure identify_saddle_structure(const Map3& map, const Tolerances& tol = {}) {
  const auto census = find_all_fixed_points(map, tol);
  SaddleStructure s;
  bool have_q = false;
  for (const auto& p : census.points) {
    const int k = support_size(p.support);
    if (k == 0) continue;
    if (k == 3) {
      s.q = p;
      have_q = true;
      continue;
    }
    LabeledPoint lp{"", fixed_point_name(p.location), p.location};
    if (p.s_type == OnSType::Attractor) {
      lp.id = "a" + std::to_string(s.attractors.size() + 1);
      s.attractors.push_back(lp);
    } else if (p.s_type == OnSType::Repeller) {
      lp.id = "r" + std::to_string(s.repellers.size() + 1);
      s.repellers.push_back(lp);
    } else {
      lp.id = std::string(to_string(p.s_type));
      s.others.push_back(lp);
    }
  }
  if (!have_q) throw Error(Errc::NoInteriorFixedPoint, "no interior fixed point");
  return s;
}

/// Index of the attractor whose tol-ball the forward orbit of x enters.
inline std::optional<int> basin_of(const Map3& map, Vec3 x, const std::vector<Vec3>& attractors, int max_iter,
                                   double tol) {
  for (int it = 0; it <= max_iter; ++it) {
    for (std::size_t a = 0; a < attractors.size(); ++a) {
      if ((x - attractors[a]).norm() < tol) return static_cast<int>(a);
    }
    x = map(x);
  }
  return std::nullopt;
}

inline constexpr int kUnresolved = -1;
inline constexpr int kOnSeparatrix = -2;

/// basin_of that also recognizes orbits captured by the saddle itself:
/// entering the saddle_tol-ball of `saddle` means x lies on its stable set.
inline int orbit_fate(const Map3& map, Vec3 x, const std::vector<Vec3>& attractors, const Vec3& saddle,
                      int max_iter, double tol, double saddle_tol) {
  for (int it = 0; it <= max_iter; ++it) {
    for (std::size_t a = 0; a < attractors.size(); ++a) {
      if ((x - attractors[a]).norm() < tol) return static_cast<int>(a);
    }
    if ((x - saddle).norm() < saddle_tol) return kOnSeparatrix;
    x = map(x);
  }
  return kUnresolved;
}

struct UnstableOptions {
  double h0 = 0.0;            // default 1e-6 ||q||
  double h_max = 0.0;         // default 1e-3 ||w||
  double endpoint_tol = 0.0;  // default 1e-5 ||w||
  std::size_t max_points = 500000;
  int max_generations = 200000;
};

/// Unstable manifold of an interior saddle on S: both branches grown from
/// q +- h0 e_u by forward iteration of a fundamental segment, with
/// arclength refinement, until each ends near a listed attractor.
inline ManifoldCurve trace_unstable(const Map3& map, const PseudoSplitting<3>& split,
                                    const std::vector<LabeledPoint>& attractors, UnstableOptions opt = {}) {
  const Vec3 w = axial_vector(map);
  const Vec3& q = split.q;
  if (opt.h0 <= 0.0) opt.h0 = 1e-6 * q.norm();
  if (opt.h_max <= 0.0) opt.h_max = 1e-3 * w.norm();
  if (opt.endpoint_tol <= 0.0) opt.endpoint_tol = 1e-5 * w.norm();

  int unstable = 0;
  Complex lambda_u;
  for (const auto& l : split.w_eigenvalues) {
    if (std::abs(l) > 1.0) {
      ++unstable;
      lambda_u = l;
    }
  }
  if (unstable != 1 || std::abs(split.w_eigenvalues.front()) >= 1.0) {
    throw Error(Errc::NotASaddle, "need exactly one W-eigenvalue outside the unit circle");
  }
  if (std::abs(lambda_u.imag()) > 1e-12) throw Error(Errc::NoUnstableEigendirection, "complex unstable eigenvalue");
  const Vec3 eu = real_eigenvector<3>(split.jacobian, lambda_u.real());
  const double h_min = opt.h_max / 8.0;

  auto grow = [&](double sign, CurveEndpoint& end) {
    const Vec3 p0 = q + sign * opt.h0 * eu;
    const Vec3 p1 = map(p0);
    std::vector<Vec3> gen;
    const int seg = 8;
    for (int k = 0; k <= seg; ++k) gen.push_back(p0 + (p1 - p0) * (static_cast<double>(k) / seg));
    std::vector<Vec3> branch = gen;
    for (int g = 0; g < opt.max_generations; ++g) {
      for (const auto& a : attractors) {
        const double d = (branch.back() - a.x).norm();
        if (d < opt.endpoint_tol) {
          end = {a.id, a.x, d};
          return branch;
        }
      }
      // Map the current generation, bisecting preimage pairs whose images are too far apart.
      std::vector<Vec3> pre{gen.front()};
      std::vector<Vec3> img{map(gen.front())};
      for (std::size_t k = 1; k < gen.size(); ++k) {
        std::vector<std::pair<Vec3, Vec3>> stack{{gen[k], map(gen[k])}};
        while (!stack.empty()) {
          auto [b, tb] = stack.back();
          const Vec3 a = pre.back();
          if ((tb - img.back()).norm() > opt.h_max && (b - a).norm() > 1e-15) {
            const Vec3 m = 0.5 * (a + b);
            stack.emplace_back(m, map(m));
            continue;
          }
          pre.push_back(b);
          img.push_back(tb);
          stack.pop_back();
        }
      }
      gen.clear();
      gen.push_back(img.front());
      for (std::size_t k = 1; k + 1 < img.size(); ++k) {
        if ((img[k] - gen.back()).norm() >= h_min) gen.push_back(img[k]);
      }
      if ((img.back() - gen.back()).norm() > 0.0) gen.push_back(img.back());
      for (std::size_t k = 1; k < gen.size(); ++k) {
        if ((gen[k] - branch.back()).norm() > 0.0) branch.push_back(gen[k]);
      }
      if (branch.size() > opt.max_points) break;
      if (gen.size() < 2) break;
    }
    throw Error(Errc::BranchDidNotTerminate, "unstable branch did not reach an attractor");
  };

  ManifoldCurve curve;
  curve.kind = CurveKind::Unstable;
  curve.tol = opt.endpoint_tol;
  auto minus = grow(-1.0, curve.endpoints[0]);
  auto plus = grow(1.0, curve.endpoints[1]);
  curve.points.assign(minus.rbegin(), minus.rend());
  curve.points.push_back(q);
  curve.points.insert(curve.points.end(), plus.begin(), plus.end());
  curve.finalize();
  return curve;
}

namespace detail {

// Position of a boundary direction on the perimeter e1 -> e2 -> e3 -> e1, in [0, 3).
inline double perimeter_param(const Vec3& u) {
  int zero = 0;
  for (int k = 1; k < 3; ++k) {
    if (u[k] < u[zero]) zero = k;
  }
  if (zero == 2) return u[1];
  if (zero == 0) return 1.0 + u[2];
  return std::fmod(2.0 + u[0], 3.0);
}

inline Vec3 perimeter_point(double s) {
  s = std::fmod(std::fmod(s, 3.0) + 3.0, 3.0);
  const std::array<Vec3, 3> e{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  const int k = std::min(2, static_cast<int>(std::floor(s)));
  const double t = s - k;
  return (1.0 - t) * e[k] + t * e[(k + 1) % 3];
}

inline double forward_offset(double from, double to) { return std::fmod(std::fmod(to - from, 3.0) + 3.0, 3.0); }

inline double point_polyline_distance(const Vec3& p, const std::vector<Vec3>& line) {
  if (line.size() == 1) return (p - line[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < line.size(); ++k) {
    const Vec3 ab = line[k] - line[k - 1];
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - line[k - 1]).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (line[k - 1] + t * ab - p).norm());
  }
  return best;
}

}  // namespace detail

struct StableOptions {
  int chords = 64;
  double bisection_tol = 1e-7;  // in direction space (unit-sum chart)
  int max_iter = 50000;
  double basin_tol = 0.0;       // default 1e-4 ||w||
  double inset = 1e-3;
  double h_max = 2e-2;          // direction-space spacing target
  int refine_rounds = 6;
  int retry_limit = 4;
  int inset_levels = 6;         // inset, inset/100, ... when a chord does not straddle
  double endpoint_tol = 0.0;    // default 1e-5 ||w||
  int pullback_generations = 100000;
};

/// Stable manifold of q on S as the boundary between the basins of a1 and a2.
/// Chords in direction space join the two boundary arcs cut out by r1 and
/// r2; each is bisected to the basin boundary. One extra chord through q
/// along the unstable direction, lifted onto the mesh rescaled to pass
/// through q, pins the curve at q. Near r1 and r2 the curve may hug a face,
/// so the ends are grown by pulling a fundamental segment back with the
/// inverse of T on the surface, which converges to the repellers.
inline ManifoldCurve trace_stable_on_S(const Map3& map, const SimplexMesh& mesh, const PseudoSplitting<3>& split,
                                       const LabeledPoint& r1, const LabeledPoint& r2, const LabeledPoint& a1,
                                       const LabeledPoint& a2, StableOptions opt = {}) {
  const Vec3 w = axial_vector(map);
  if (opt.basin_tol <= 0.0) opt.basin_tol = 1e-4 * w.norm();
  if (opt.endpoint_tol <= 0.0) opt.endpoint_tol = 1e-5 * w.norm();
  const std::vector<Vec3> attractors{a1.x, a2.x};
  const double s_r1 = detail::perimeter_param(direction_of(r1.x));
  const double s_r2 = detail::perimeter_param(direction_of(r2.x));
  const double len_fwd = detail::forward_offset(s_r1, s_r2);
  const double len_bwd = 3.0 - len_fwd;
  const bool a1_fwd = detail::forward_offset(s_r1, detail::perimeter_param(direction_of(a1.x))) < len_fwd;
  const bool a2_fwd = detail::forward_offset(s_r1, detail::perimeter_param(direction_of(a2.x))) < len_fwd;
  if (a1_fwd == a2_fwd) throw Error(Errc::SegmentNotStraddling, "attractors on the same boundary arc");
  const int fwd_label = a1_fwd ? 0 : 1;
  const Vec3 centroid = Vec3::Constant(1.0 / 3.0);

  const double saddle_tol = 1e-10 * split.q.norm();
  auto label = [&](const Vec3& x) {
    return orbit_fate(map, x, attractors, split.q, opt.max_iter, opt.basin_tol, saddle_tol);
  };

  // Bisect between directions ua (label la) and ub (label lb); returns the boundary direction.
  auto bisect = [&](Vec3 ua, Vec3 ub, int la, auto&& lift) -> Vec3 {
    while ((ua - ub).norm() > opt.bisection_tol) {
      const Vec3 um = 0.5 * (ua + ub);
      const int lm = label(lift(um));
      if (lm == kOnSeparatrix) return um;
      if (lm == kUnresolved) {
        throw Error(Errc::UnresolvedOrbit, "orbit unresolved at direction (" + std::to_string(um[0]) + ", " +
                                               std::to_string(um[1]) + ", " + std::to_string(um[2]) + ")");
      }
      (lm == la ? ua : ub) = um;
    }
    return 0.5 * (ua + ub);
  };
  auto mesh_lift = [&](const Vec3& u) { return radial_project(mesh, u); };

  struct Crossing {
    double t;
    Vec3 dir;
  };
  std::vector<Crossing> crossings;
  // Chord endpoints sit just inside the two arcs; the inset shrinks when
  // the curve runs closer to a face than the current inset. A chord that
  // still fails is an error unless it lies beyond every successful chord,
  // where the curve is glued to a face and the end extension below covers it.
  std::vector<double> missed;
  auto try_chord = [&](double t) {
    for (int attempt = 0; attempt <= opt.retry_limit; ++attempt) {
      const double tt = std::clamp(t + (attempt == 0 ? 0.0 : (attempt % 2 ? 1 : -1) * 0.25 * ((attempt + 1) / 2) /
                                                                     (opt.chords * 4.0)),
                                   1e-9, 1.0 - 1e-9);
      const Vec3 pa = detail::perimeter_point(s_r1 + tt * len_fwd);
      const Vec3 pb = detail::perimeter_point(s_r1 - tt * len_bwd);
      double inset = std::min(opt.inset, 0.25 * std::min(tt, 1.0 - tt));
      for (int level = 0; level < opt.inset_levels; ++level, inset *= 1e-2) {
        const Vec3 ua = pa + inset * (centroid - pa);
        const Vec3 ub = pb + inset * (centroid - pb);
        const int la = label(mesh_lift(ua));
        const int lb = label(mesh_lift(ub));
        if (la >= 0 && lb >= 0 && la != lb && la == fwd_label) {
          crossings.push_back({tt, bisect(ua, ub, la, mesh_lift)});
          return true;
        }
        if (la < 0 || lb < 0) break;
      }
    }
    missed.push_back(t);
    return false;
  };
  auto check_missed = [&] {
    if (crossings.empty()) throw Error(Errc::SegmentNotStraddling, "no chord straddles the basins");
    double lo = 1.0, hi = 0.0;
    for (const auto& c : crossings) {
      lo = std::min(lo, c.t);
      hi = std::max(hi, c.t);
    }
    for (double t : missed) {
      if (t > lo && t < hi) {
        throw Error(Errc::SegmentNotStraddling, "chord at t=" + std::to_string(t) + " does not straddle the basins");
      }
    }
  };

  for (int k = 1; k < opt.chords; ++k) try_chord(static_cast<double>(k) / opt.chords);
  check_missed();
  for (int round = 0; round < opt.refine_rounds; ++round) {
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
    std::vector<double> extra;
    for (std::size_t k = 1; k < crossings.size(); ++k) {
      if ((crossings[k].dir - crossings[k - 1].dir).norm() > opt.h_max) {
        extra.push_back(0.5 * (crossings[k].t + crossings[k - 1].t));
      }
    }
    if (extra.empty()) break;
    for (double t : extra) try_chord(t);
    check_missed();
  }
  std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) { return a.t < b.t; });

  std::vector<Vec3> dirs;
  for (const auto& c : crossings) {
    if (dirs.empty() || (c.dir - dirs.back()).norm() > 0.0) dirs.push_back(c.dir);
  }

  // Chord through q along the unstable direction.
  const Vec3 uq = direction_of(split.q);
  const double anchor = split.q.norm() / radial_project(mesh, uq).norm();
  auto anchored_lift = [&](const Vec3& u) -> Vec3 { return anchor * radial_project(mesh, u); };
  Complex lambda_u = split.w_eigenvalues.back();
  const Vec3 eu = real_eigenvector<3>(split.jacobian, lambda_u.real());
  Vec3 du = (eu - uq * eu.sum()) / split.q.sum();
  du.normalize();
  std::optional<Vec3> q_dir;
  for (double delta = 1e-3; delta > 1e-7 && !q_dir; delta *= 0.1) {
    const Vec3 ua = uq + delta * du, ub = uq - delta * du;
    if ((ua.array() < 0.0).any() || (ub.array() < 0.0).any()) continue;
    const int la = label(anchored_lift(ua));
    const int lb = label(anchored_lift(ub));
    if (la >= 0 && lb >= 0 && la != lb) q_dir = bisect(ua, ub, la, anchored_lift);
  }
  if (!q_dir) throw Error(Errc::SegmentNotStraddling, "chord through q does not straddle the basins");

  // Grow each end toward its repeller: the arc from the end direction to
  // its image is a fundamental segment, and its preimages under T restricted
  // to the surface accumulate on the repeller.
  auto image_dir = [&](const Vec3& u) { return direction_of(map(mesh_lift(u))); };
  auto preimage_dir = [&](const Vec3& u) -> std::optional<Vec3> {
    const auto a = detail::image_preimage(map, mesh, u, mesh.lattice_coords(u));
    if (!a) return std::nullopt;
    return direction_of(mesh.surface_point(*a));
  };
  auto extend = [&](std::vector<Vec3>& line, const Vec3& target) {
    if (line.size() < 2) return;
    const Vec3 img = image_dir(line.front());
    std::size_t k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const double d = (line[i] - img).norm();
      if (d < best) {
        best = d;
        k = i;
      }
    }
    std::vector<Vec3> seg(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(k, 1)));
    const double spacing = 1e-2 * opt.h_max;
    std::vector<Vec3> head;  // reversed: head.back() is the current end
    for (int g = 0; g < opt.pullback_generations; ++g) {
      const Vec3& end = head.empty() ? line.front() : head.back();
      if ((mesh_lift(end) - target).norm() < opt.endpoint_tol) break;
      std::vector<Vec3> prev;
      for (const auto& u : seg) {
        const auto p = preimage_dir(u);
        if (!p) break;
        prev.push_back(*p);
      }
      if (prev.size() != seg.size()) break;
      for (auto it = prev.rbegin(); it != prev.rend(); ++it) {
        const Vec3& last = head.empty() ? line.front() : head.back();
        if (!head.empty() && (*it - last).norm() < spacing) head.back() = *it;
        else head.push_back(*it);
      }
      // Once the segment has shrunk, its front point's orbit is enough.
      if (prev.size() > 1 && (prev.front() - prev.back()).norm() < spacing) prev.resize(1);
      seg = std::move(prev);
    }
    line.insert(line.begin(), head.rbegin(), head.rend());
  };
  extend(dirs, r1.x);
  std::reverse(dirs.begin(), dirs.end());
  extend(dirs, r2.x);
  std::reverse(dirs.begin(), dirs.end());

  std::vector<Vec3> points;
  for (const auto& d : dirs) points.push_back(mesh_lift(d));
  const Vec3 q_point = anchored_lift(*q_dir);
  std::size_t best_pos = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t pos = 0; pos <= points.size(); ++pos) {
    double cost = 0.0;
    if (pos > 0) cost += (q_point - points[pos - 1]).norm();
    if (pos < points.size()) cost += (q_point - points[pos]).norm();
    if (pos > 0 && pos < points.size()) cost -= (points[pos] - points[pos - 1]).norm();
    if (cost < best_cost) {
      best_cost = cost;
      best_pos = pos;
    }
  }
  points.insert(points.begin() + static_cast<std::ptrdiff_t>(best_pos), q_point);

  ManifoldCurve curve;
  curve.kind = CurveKind::Stable;
  curve.tol = opt.bisection_tol;
  curve.points = std::move(points);
  curve.endpoints[0] = {r1.id, r1.x, (curve.points.front() - r1.x).norm()};
  curve.endpoints[1] = {r2.id, r2.x, (curve.points.back() - r2.x).norm()};
  curve.finalize();
  return curve;
}

/// Distance in the unit-sum chart from direction(p) to the curve's directions.
inline double chart_distance(const ManifoldCurve& c, const Vec3& p) {
  std::vector<Vec3> dirs;
  dirs.reserve(c.points.size());
  for (const auto& x : c.points) dirs.push_back(direction_of(x));
  return detail::point_polyline_distance(direction_of(p), dirs);
}

inline double hausdorff_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double h = 0.0;
  for (const auto& p : a) h = std::max(h, detail::point_polyline_distance(p, b));
  for (const auto& p : b) h = std::max(h, detail::point_polyline_distance(p, a));
  return h;
}

// ---------------------------------------------------------------------------
// Foliation diagnostics

/// ||T(x + t v) - T(x)|| / (t ||v||).
template <int Dim>
double leaf_ratio_at(const CompetitiveMap<Dim>& map, const Vec<Dim>& x, const Vec<Dim>& v, double t) {
  return (map(x + t * v) - map(x)).norm() / (t * v.norm());
}

enum class LeafStatus { Pass, NeighborhoodTooLarge, ContractionViolatedAtQ };

constexpr std::string_view to_string(LeafStatus s) {
  switch (s) {
    case LeafStatus::Pass: return "pass";
    case LeafStatus::NeighborhoodTooLarge: return "neighborhood_too_large";
    case LeafStatus::ContractionViolatedAtQ: return "contraction_violated_at_q";
  }
  return "pass";
}

struct LeafContractionOptions {
  std::optional<double> rho;
  int samples = 256;
  double radius = 0.0;  // default 1e-3 ||q||
  double secant = 0.0;  // default 1e-2 radius
  std::uint64_t seed = 1;
};

struct LeafContractionReport {
  double rho = 0.0;
  double radius = 0.0;
  double max_ratio = 0.0;
  double ratio_at_q = 0.0;
  int samples = 0;
  int violations = 0;
  LeafStatus status = LeafStatus::Pass;

  bool pass() const { return status == LeafStatus::Pass; }
};

/// Contraction along the first-order leaves (translates of span{v}) within
/// the ball of the given radius around q, against rho in (mu, min(1, nu)).
template <int Dim>
LeafContractionReport leaf_contraction_report(const CompetitiveMap<Dim>& map, const PseudoSplitting<Dim>& split,
                                              LeafContractionOptions opt = {}) {
  const int n = map.dim();
  if (opt.radius <= 0.0) opt.radius = 1e-3 * split.q.norm();
  if (opt.secant <= 0.0) opt.secant = 1e-2 * opt.radius;
  LeafContractionReport rep;
  rep.rho = opt.rho.value_or(split.default_rho());
  rep.radius = opt.radius;
  rep.ratio_at_q = leaf_ratio_at<Dim>(map, split.q, split.v, opt.secant);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  for (int k = 0; k < opt.samples; ++k) {
    Vec<Dim> dir(n);
    for (int i = 0; i < n; ++i) dir[i] = gauss(rng);
    dir.normalize();
    const Vec<Dim> x = split.q + opt.radius * std::pow(unif(rng), 1.0 / n) * dir;
    if ((x.array() < 0.0).any()) continue;
    const double ratio = leaf_ratio_at<Dim>(map, x, split.v, opt.secant);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.samples;
    if (ratio > rep.rho) ++rep.violations;
  }
  if (rep.ratio_at_q > rep.rho) rep.status = LeafStatus::ContractionViolatedAtQ;
  else if (rep.violations > 0) rep.status = LeafStatus::NeighborhoodTooLarge;
  return rep;
}

struct M2ExpansionReport {
  double sigma = 0.0;
  std::optional<int> l;
  double norm_at_l = 0.0;  // ||(DT|_W)^{-l}||
  int searched = 0;
};

/// Smallest l <= l_max with ||M^{-l}|| < sigma^{-l}, M = DT(q)|_W.
inline M2ExpansionReport m2_expansion_search(const MatX& restricted, double sigma, int l_max = 500) {
  M2ExpansionReport rep;
  rep.sigma = sigma;
  const MatX inv = restricted.inverse();
  MatX power = MatX::Identity(inv.rows(), inv.cols());
  double log_scale = 0.0;  // power holds M^{-l} / exp(log_scale)
  for (int l = 1; l <= l_max; ++l) {
    power = inv * power;
    const double s = power.cwiseAbs().maxCoeff();
    if (s > 0.0) {
      power /= s;
      log_scale += std::log(s);
    }
    rep.searched = l;
    const double log_norm = std::log(Eigen::JacobiSVD<MatX>(power).singularValues()(0)) + log_scale;
    if (log_norm < -l * std::log(sigma)) {
      rep.l = l;
      rep.norm_at_l = std::exp(log_norm);
      return rep;
    }
  }
  return rep;
}

template <int Dim>
M2ExpansionReport m2_expansion_report(const PseudoSplitting<Dim>& split, std::optional<double> sigma = std::nullopt,
                                      int l_max = 500) {
  const double s = sigma.value_or(split.default_sigma(split.default_rho()));
  return m2_expansion_search(split.restricted(), s, l_max);
}

// ---------------------------------------------------------------------------
// Conjugacy diagnostics

struct ConjugacySample {
  Vec3 xi;
  bool on_surface = true;
  bool degenerate = false;
  std::vector<double> distances;  // d_k = ||T^k(xi) - T^k(R xi)||
  double fitted_ratio = 0.0;
  bool pass = false;
};

struct ConjugacyOptions {
  std::optional<double> rho;
  int samples = 64;
  double radius = 0.0;  // default 1e-2 ||q||
  int k_max = 6;
  double slack = 0.1;
  double neighborhood_factor = 2.0;
  double off_surface_tol = 0.0;  // default one mesh edge
  std::uint64_t seed = 1;
};

struct ConjugacyReport {
  double rho = 0.0;
  double slack = 0.0;
  double radius = 0.0;
  std::vector<ConjugacySample> samples;
  double pass_fraction = 0.0;
};

/// R xi: projection of xi along v onto the plane q + W.
inline Vec3 leaf_projection(const PseudoSplitting<3>& split, const Vec3& xi) {
  const double s = split.w_normal.dot(xi - split.q) / split.w_normal.dot(split.v);
  return xi - s * split.v;
}

inline ConjugacySample conjugacy_decay_sample(const Map3& map, const PseudoSplitting<3>& split, const Vec3& xi,
                                              double rho, int k_max, double slack, double neighborhood,
                                              bool on_surface) {
  ConjugacySample s;
  s.xi = xi;
  s.on_surface = on_surface;
  Vec3 a = xi, b = leaf_projection(split, xi);
  const double floor = 1e-14 * (1.0 + split.q.norm());
  for (int k = 0; k <= k_max; ++k) {
    if ((a - split.q).norm() > neighborhood) break;
    s.distances.push_back((a - b).norm());
    a = map(a);
    b = map(b);
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < s.distances.size(); ++k) {
    if (s.distances[k] > floor) pts.emplace_back(static_cast<double>(k), std::log(s.distances[k]));
  }
  if (pts.size() < 2) {
    s.degenerate = true;
    s.pass = true;
    return s;
  }
  double mk = 0.0, ml = 0.0;
  for (const auto& [k, l] : pts) {
    mk += k;
    ml += l;
  }
  mk /= pts.size();
  ml /= pts.size();
  double num = 0.0, den = 0.0;
  for (const auto& [k, l] : pts) {
    num += (k - mk) * (l - ml);
    den += (k - mk) * (k - mk);
  }
  s.fitted_ratio = std::exp(num / den);
  s.pass = s.fitted_ratio <= rho + slack;
  return s;
}

/// Geometric decay of ||T^k(xi) - T^k(R xi)|| for surface points xi near q.
inline ConjugacyReport conjugacy_decay_report(const Map3& map, const SimplexMesh& mesh,
                                              const PseudoSplitting<3>& split, ConjugacyOptions opt = {}) {
  if (opt.radius <= 0.0) opt.radius = 1e-2 * split.q.norm();
  if (opt.off_surface_tol <= 0.0) opt.off_surface_tol = mesh.edge_length();
  ConjugacyReport rep;
  rep.rho = opt.rho.value_or(split.default_rho());
  rep.slack = opt.slack;
  rep.radius = opt.radius;
  const Vec3 uq = direction_of(split.q);
  const double reach = 2.0 * opt.radius / split.q.sum();
  const Vec3 t1 = Vec3(1.0, -1.0, 0.0).normalized();
  const Vec3 t2 = Vec3(1.0, 1.0, -2.0).normalized();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif;
  int passed = 0, attempts = 0;
  while (static_cast<int>(rep.samples.size()) < opt.samples && attempts < 100 * opt.samples) {
    ++attempts;
    const double th = 2.0 * std::numbers::pi * unif(rng);
    const double r = reach * std::sqrt(unif(rng));
    const Vec3 u = uq + r * (std::cos(th) * t1 + std::sin(th) * t2);
    if ((u.array() < 0.0).any()) continue;
    const Vec3 xi = radial_project(mesh, u);
    if ((xi - split.q).norm() > opt.radius) continue;
    auto s = conjugacy_decay_sample(map, split, xi, rep.rho, opt.k_max, opt.slack,
                                    opt.neighborhood_factor * opt.radius, true);
    passed += s.pass;
    rep.samples.push_back(std::move(s));
  }
  if (!rep.samples.empty()) rep.pass_fraction = static_cast<double>(passed) / rep.samples.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Basin raster on the direction lattice

struct BasinRaster {
  int resolution = 0;
  std::vector<std::array<int, 2>> cells;  // lattice (i, j), interior only
  std::vector<Vec3> directions;
  std::vector<int> basin;  // attractor index, kUnresolved or kOnSeparatrix
  int unresolved = 0;
  int separatrix = 0;
};

inline BasinRaster raster_basins(const Map3& map, const SimplexMesh& mesh, const std::vector<Vec3>& attractors,
                                 const Vec3& saddle, int resolution, int max_iter, double tol) {
  BasinRaster r;
  r.resolution = resolution;
  for (int i = 1; i < resolution; ++i) {
    for (int j = 1; i + j < resolution; ++j) {
      const Vec3 u(static_cast<double>(i) / resolution, static_cast<double>(j) / resolution,
                   static_cast<double>(resolution - i - j) / resolution);
      const int b = orbit_fate(map, radial_project(mesh, u), attractors, saddle, max_iter, tol, 1e-10 * saddle.norm());
      r.cells.push_back({i, j});
      r.directions.push_back(u);
      r.basin.push_back(b);
      r.unresolved += b == kUnresolved;
      r.separatrix += b == kOnSeparatrix;
    }
  }
  return r;
}

/// Closed polygon (in the chart) bounding the side of the unstable curve
/// that contains `side_point`: the curve followed by the perimeter path back.
inline std::vector<Eigen::Vector2d> unstable_side_polygon(const ManifoldCurve& unstable, const Vec3& side_point) {
  std::vector<Eigen::Vector2d> poly;
  const Vec3 start = direction_of(unstable.endpoints[0].target);
  const Vec3 end = direction_of(unstable.endpoints[1].target);
  poly.emplace_back(start[0], start[1]);
  for (const auto& p : unstable.points) {
    const Vec3 u = direction_of(p);
    poly.emplace_back(u[0], u[1]);
  }
  poly.emplace_back(end[0], end[1]);
  const double s_end = detail::perimeter_param(end);
  const double s_start = detail::perimeter_param(start);
  const double s_side = detail::perimeter_param(direction_of(side_point));
  const bool forward = detail::forward_offset(s_end, s_side) < detail::forward_offset(s_end, s_start);
  const double span = forward ? detail::forward_offset(s_end, s_start) : detail::forward_offset(s_start, s_end);
  // Walk the perimeter in steps, stopping at every triangle corner on the way.
  const int steps = 64;
  const double sign = forward ? 1.0 : -1.0;
  double prev = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double next = span * k / steps;
    const double a = s_end + sign * prev, b = s_end + sign * next;
    for (double corner = std::ceil(std::min(a, b)); corner < std::max(a, b); corner += 1.0) {
      if (corner > std::min(a, b)) {
        const Vec3 u = detail::perimeter_point(corner);
        poly.emplace_back(u[0], u[1]);
      }
    }
    if (k < steps) {
      const Vec3 u = detail::perimeter_point(b);
      poly.emplace_back(u[0], u[1]);
    }
    prev = next;
  }
  return poly;
}

inline bool point_in_polygon(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  bool inside = false;
  for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
    const auto& pa = poly[a];
    const auto& pb = poly[b];
    if ((pa.y() > p.y()) != (pb.y() > p.y())) {
      const double x = pa.x() + (p.y() - pa.y()) * (pb.x() - pa.x()) / (pb.y() - pa.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

struct RegionCount {
  int components = 0;
  std::vector<int> per_label;  // components per (basin, side) label 0..3
  int unresolved_components = 0;
  std::vector<int> region;     // per raster cell: basin * 2 + side, or the raw negative fate
};

/// Connected components of the raster labelled by (basin, side of the
/// unstable curve), on the lattice with 6-neighbour adjacency.
inline RegionCount count_regions(const BasinRaster& r, const ManifoldCurve& unstable, const Vec3& side_point) {
  const auto poly = unstable_side_polygon(unstable, side_point);
  RegionCount out;
  out.per_label.assign(4, 0);
  const int n = r.resolution;
  std::vector<int> grid((n + 1) * (n + 1), -2);
  out.region.resize(r.cells.size());
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const int side = point_in_polygon(poly, {r.directions[k][0], r.directions[k][1]}) ? 1 : 0;
    out.region[k] = r.basin[k] < 0 ? r.basin[k] : r.basin[k] * 2 + side;
    grid[r.cells[k][0] * (n + 1) + r.cells[k][1]] = out.region[k];
  }
  std::vector<char> seen(grid.size(), 0);
  const int di[6] = {1, -1, 0, 0, 1, -1};
  const int dj[6] = {0, 0, 1, -1, -1, 1};
  for (const auto& c : r.cells) {
    const int start = c[0] * (n + 1) + c[1];
    if (seen[start]) continue;
    const int lab = grid[start];
    if (lab == kOnSeparatrix) continue;
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int ci = cur / (n + 1), cj = cur % (n + 1);
      for (int d = 0; d < 6; ++d) {
        const int ni = ci + di[d], nj = cj + dj[d];
        if (ni < 0 || nj < 0 || ni > n || nj > n) continue;
        const int nb = ni * (n + 1) + nj;
        if (seen[nb] || grid[nb] != lab) continue;
        seen[nb] = 1;
        stack.push_back(nb);
      }
    }
    if (lab == kUnresolved) ++out.unresolved_components;
    else {
      ++out.per_label[lab];
      ++out.components;
    }
  }
  return out;
}

}  // namespace csx
