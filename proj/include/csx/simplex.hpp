#pragma once

// Numerical carrying simplex for n = 3: a radial graph x = rho(u) u over a
// triangular lattice on the probability simplex, computed by the graph
// transform (map the surface, re-sample along the lattice rays).
//
// Node (i, j, k)/N sits at the direction proportional to
// (g_1(i/N), g_2(j/N), g_3(k/N)). The default g(t) = t^2 clusters nodes at
// the faces, where S meets the invariant planes with a transverse profile
// s^k, 1 < k < 2; in lattice coordinates that profile becomes t^(2k).
// Adaptive gradings also equidistribute arclength of the boundary edges.
//
// Between nodes the surface is a Lagrange interpolant of rho on macro cells
// of `order` lattice steps, corrected on the boundary by the edge curves,
// which are invariant one-dimensional problems solved to high accuracy.
// Order 1 is the flat triangulation.

#include "csx/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace csx {

using Face = std::array<int, 3>;
using Basis32 = Eigen::Matrix<double, 3, 2>;

/// Monotone map g of [0, 1] onto [0, 1], from a lattice coordinate to a
/// direction weight: either t^p, or a table interpolated by monotone cubics
/// in log-log coordinates.
class Grading {
 public:
  Grading() = default;

  static Grading power(double p) {
    if (!(p >= 1.0 && p <= 8.0)) throw Error(Errc::InvalidParameter, "grading exponent must lie in [1, 8]");
    Grading g;
    g.power_ = p;
    return g;
  }

  /// Knots (a_k, g_k), both strictly increasing and positive, ending at (1, 1).
  static Grading table(const std::vector<double>& a, const std::vector<double>& g) {
    if (a.size() != g.size() || a.size() < 2) throw Error(Errc::InvalidParameter, "grading table needs >= 2 knots");
    if (std::abs(a.back() - 1.0) > 1e-12 || std::abs(g.back() - 1.0) > 1e-12) {
      throw Error(Errc::InvalidParameter, "grading table must end at (1, 1)");
    }
    Grading out;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!(a[k] > 0.0 && g[k] > 0.0) || (k > 0 && !(a[k] > a[k - 1] && g[k] > g[k - 1]))) {
        throw Error(Errc::InvalidParameter, "grading table must be positive and strictly increasing");
      }
      out.x_.push_back(std::log(a[k]));
      out.y_.push_back(std::log(g[k]));
    }
    out.x_.back() = out.y_.back() = 0.0;
    out.slopes();
    return out;
  }

  /// Same as table() but from log knots, so a persisted grading reloads bit for bit.
  static Grading table_log(const std::vector<double>& la, const std::vector<double>& lg) {
    if (la.size() != lg.size() || la.size() < 2) throw Error(Errc::InvalidParameter, "grading table needs >= 2 knots");
    for (std::size_t k = 0; k < la.size(); ++k) {
      if (!std::isfinite(la[k]) || !std::isfinite(lg[k]) || (k > 0 && !(la[k] > la[k - 1] && lg[k] > lg[k - 1]))) {
        throw Error(Errc::InvalidParameter, "grading table must be finite and strictly increasing");
      }
    }
    if (la.back() != 0.0 || lg.back() != 0.0) throw Error(Errc::InvalidParameter, "grading table must end at (1, 1)");
    Grading out;
    out.x_ = la;
    out.y_ = lg;
    out.slopes();
    return out;
  }

  const std::vector<double>& log_knots_a() const { return x_; }
  const std::vector<double>& log_knots_g() const { return y_; }

  bool is_table() const { return !x_.empty(); }
  bool is_identity() const { return !is_table() && power_ == 1.0; }
  double exponent() const { return power_; }

  std::vector<double> knots_a() const { return exps(x_); }
  std::vector<double> knots_g() const { return exps(y_); }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (!is_table()) return power_ == 1.0 ? t : power_ == 2.0 ? t * t : std::pow(t, power_);
    return std::exp(eval(std::log(t)));
  }

  double inverse(double y) const {
    if (y <= 0.0) return 0.0;
    if (!is_table()) return power_ == 1.0 ? y : power_ == 2.0 ? std::sqrt(y) : std::pow(y, 1.0 / power_);
    const double ly = std::log(y);
    const std::size_t n = x_.size();
    if (ly <= y_[0]) return std::exp(x_[0] + (ly - y_[0]) / m_[0]);
    if (ly >= y_[n - 1]) return std::exp(x_[n - 1] + (ly - y_[n - 1]) / m_[n - 1]);
    const std::size_t k = std::upper_bound(y_.begin(), y_.end(), ly) - y_.begin() - 1;
    // Safeguarded Newton on the monotone cubic piece.
    double lo = x_[k], hi = x_[k + 1];
    double x = lo + (hi - lo) * (ly - y_[k]) / (y_[k + 1] - y_[k]);
    for (int it = 0; it < 60; ++it) {
      double dy;
      const double f = piece(k, x, &dy) - ly;
      if (f > 0.0) hi = x; else lo = x;
      double xn = dy > 0.0 ? x - f / dy : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x))) return std::exp(xn);
      x = xn;
    }
    return std::exp(x);
  }

 private:
  static std::vector<double> exps(const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(std::exp(x));
    return out;
  }

  // Fritsch-Butland slopes; one-sided at the ends.
  void slopes() {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      d[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double w1 = 2.0 * h[k] + h[k - 1], w2 = h[k] + 2.0 * h[k - 1];
      m_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }

  double piece(std::size_t k, double x, double* dydx = nullptr) const {
    const double h = x_[k + 1] - x_[k], t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double y = (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
                     (t3 - t2) * h * m_[k + 1];
    if (dydx) {
      *dydx = ((6 * t2 - 6 * t) * y_[k] + (-6 * t2 + 6 * t) * y_[k + 1]) / h + (3 * t2 - 4 * t + 1) * m_[k] +
              (3 * t2 - 2 * t) * m_[k + 1];
    }
    return y;
  }

  double eval(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_[0]) return y_[0] + m_[0] * (x - x_[0]);
    if (x >= x_[n - 1]) return y_[n - 1] + m_[n - 1] * (x - x_[n - 1]);
    const std::size_t k = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
    return piece(k, x);
  }

  double power_ = 1.0;
  std::vector<double> x_, y_, m_;  // log a, log g, dlog g / dlog a
};

using Gradings = std::array<Grading, 3>;

/// Invariant curve of T in the face spanned by e_c and e_d (c < d), as a
/// radial graph: point k is rho[k] (uc[k] e_c + ud[k] e_d). Node directions
/// cluster logistically at both corners; uc and ud are each stored to full
/// relative precision near their own zero.
struct EdgeCurve {
  int c = 0, d = 1;
  std::vector<double> uc, ud, rho;
  int iterations = 0;

  std::vector<double> xi;  // log(uc / ud); infinite at the two corners

  std::size_t size() const { return rho.size(); }
  Vec3 point(std::size_t k) const {
    Vec3 x = Vec3::Zero();
    x[c] = rho[k] * uc[k];
    x[d] = rho[k] * ud[k];
    return x;
  }

  void index() {
    xi.resize(size());
    for (std::size_t k = 0; k < size(); ++k) xi[k] = std::log(uc[k] / ud[k]);
  }

  /// Radius at direction (uc, ud): cubic Hermite in xi, where the corner
  /// profiles become exponentials. Accuracy drops to O(h^r) next to a planar
  /// node, where the curve is only C^r, r = log(strong) / log(weak).
  double radius(double u_c, double u_d) const {
    const std::size_t n = size() - 1;
    if (u_c <= 0.0) return rho[0];
    if (u_d <= 0.0) return rho[n];
    const double x = std::log(u_c / u_d);
    // Beyond the outer nodes rho - rho(corner) decays like a power of u,
    // i.e. exponentially in xi; fit that rate from the two nearest nodes.
    auto tail = [&](std::size_t end, std::size_t k1, std::size_t k2) {
      const double d1 = rho[k1] - rho[end], d2 = rho[k2] - rho[end];
      const double rate = d1 != 0.0 && d2 / d1 > 0.0 ? std::log(d2 / d1) / (xi[k2] - xi[k1]) : 0.0;
      if ((end == 0 && !(rate > 0.0)) || (end != 0 && !(rate < 0.0))) {
        return end == 0 ? rho[0] + d1 * u_c / uc[1] : rho[n] + d1 * u_d / ud[n - 1];
      }
      return rho[end] + d1 * std::exp(rate * (x - xi[k1]));
    };
    if (u_c <= uc[1]) return tail(0, 1, 2);
    if (u_d <= ud[n - 1]) return tail(n, n - 1, n - 2);
    std::size_t k = std::upper_bound(xi.begin() + 1, xi.begin() + n, x) - xi.begin() - 1;
    k = std::clamp<std::size_t>(k, 1, n - 2);
    // Interior xi nodes are equispaced: fourth-order differences where the
    // stencil fits, central ones next to the corners.
    auto slope = [&](std::size_t i) {
      if (i >= 3 && i + 3 <= n) {
        return (rho[i - 2] - 8 * rho[i - 1] + 8 * rho[i + 1] - rho[i + 2]) / (6 * (xi[i + 1] - xi[i - 1]));
      }
      const std::size_t lo = std::max<std::size_t>(i - 1, 1), hi = std::min(i + 1, n - 1);
      return (rho[hi] - rho[lo]) / (xi[hi] - xi[lo]);
    };
    const double h = xi[k + 1] - xi[k], t = (x - xi[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * rho[k] + (t3 - 2 * t2 + t) * h * slope(k) + (-2 * t3 + 3 * t2) * rho[k + 1] +
           (t3 - t2) * h * slope(k + 1);
  }
};


struct SimplexMesh {
  int resolution = 0;
  Gradings grading;              // per coordinate; identity is the uniform lattice
  /// Polynomial order of the surface on macro cells of `order` lattice
  /// steps; 1 is the flat triangulation of the vertices.
  int order = 1;
  std::vector<Vec3> directions;  // unit-sum lattice directions
  std::vector<double> radii;
  std::vector<Face> faces;
  /// Boundary traces of a curved surface: empty, or edges[k]
  /// lies in the face u_k = 0.
  std::vector<EdgeCurve> edges;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> flagged;  // directions whose ray missed the image surface
  std::vector<double> log;   // residual per sweep

  std::size_t size() const { return directions.size(); }
  Vec3 vertex(std::size_t i) const { return radii[i] * directions[i]; }

  /// Lattice index of node (i, j, N-i-j).
  int index(int i, int j) const { return i * (resolution + 1) - i * (i - 1) / 2 + j; }

  /// Position of face (i, j, up/down) in `faces`; see make_lattice.
  int face_index(int i, int j, bool up) const {
    return i * (2 * resolution - 1) - i * (i - 1) + 2 * j + (up ? 0 : 1);
  }

  /// Direction of lattice coordinates a (unit sum).
  Vec3 lattice_direction(const Vec3& a) const {
    Vec3 g(grading[0](a[0]), grading[1](a[1]), grading[2](a[2]));
    return g / g.sum();
  }

  bool uniform() const {
    return grading[0].is_identity() && grading[1].is_identity() && grading[2].is_identity();
  }

  /// Inverse of lattice_direction.
  Vec3 lattice_coords(const Vec3& u) const {
    if (uniform()) return u;
    auto total = [&](double z) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += grading[c].inverse(std::min(1.0, z * std::max(0.0, u[c])));
      return s;
    };
    // The root lies below 1 / max u, where one term alone reaches 1.
    double lo = 0.0, hi = 1.0 / u.maxCoeff();
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) < 1.0 ? lo : hi) = mid;
    }
    const double z = 0.5 * (lo + hi);
    Vec3 a;
    for (int c = 0; c < 3; ++c) a[c] = grading[c].inverse(std::min(1.0, z * std::max(0.0, u[c])));
    return a / a.sum();
  }

  bool curved() const { return order > 1; }

  /// Lagrange interpolant of order m on the macro triangle containing a,
  /// plus a transfinite correction on macro edges lying in the boundary:
  /// the exact trace minus its interpolant at the projection from the
  /// opposite vertex, weighted by 1 - l_opposite.
  double curved_radius(const Vec3& a) const {
    const int n = resolution, m = order, cells = n / m;
    const double x = std::max(0.0, a[0]) * cells, y = std::max(0.0, a[1]) * cells;
    const int ci = std::clamp(static_cast<int>(std::floor(x)), 0, cells - 1);
    const int cj = std::clamp(static_cast<int>(std::floor(y)), 0, cells - 1 - ci);
    const double fa = x - ci, fb = y - cj;
    std::array<std::array<int, 2>, 3> c;
    std::array<double, 3> l;
    if (fa + fb <= 1.0 || ci + cj > cells - 2) {
      c = {{{m * ci, m * cj}, {m * ci + m, m * cj}, {m * ci, m * cj + m}}};
      l = {1.0 - fa - fb, fa, fb};
    } else {
      c = {{{m * ci + m, m * cj}, {m * ci + m, m * cj + m}, {m * ci, m * cj + m}}};
      l = {1.0 - fb, fa + fb - 1.0, 1.0 - fa};
    }
    // prod_{s < p} (m t - s) / (s + 1)
    auto factor = [m](double t, int p) {
      double f = 1.0;
      for (int s = 0; s < p; ++s) f *= (m * t - s) / (s + 1);
      return f;
    };
    auto node = [&](int p0, int p1, int p2) {
      const int i = (p0 * c[0][0] + p1 * c[1][0] + p2 * c[2][0]) / m;
      const int j = (p0 * c[0][1] + p1 * c[1][1] + p2 * c[2][1]) / m;
      return radii[index(i, j)];
    };
    double r = 0.0;
    for (int p0 = 0; p0 <= m; ++p0) {
      for (int p1 = 0; p0 + p1 <= m; ++p1) {
        const int p2 = m - p0 - p1;
        r += factor(l[0], p0) * factor(l[1], p1) * factor(l[2], p2) * node(p0, p1, p2);
      }
    }
    if (edges.empty()) return r;
    for (int k = 0; k < 3; ++k) {
      const int k1 = (k + 1) % 3;
      const auto& p = c[k];
      const auto& q = c[k1];
      const int face = p[0] == 0 && q[0] == 0 ? 0 : p[1] == 0 && q[1] == 0 ? 1 : p[0] + p[1] == n && q[0] + q[1] == n ? 2 : -1;
      const double sum = l[k] + l[k1];
      if (face < 0 || sum <= 0.0) continue;
      const double t = l[k1] / sum;
      double interp = 0.0;
      for (int s = 0; s <= m; ++s) {
        std::array<int, 3> pw{};
        pw[k] = m - s;
        pw[k1] = s;
        interp += factor(1.0 - t, m - s) * factor(t, s) * node(pw[0], pw[1], pw[2]);
      }
      const Vec3 ap = (1.0 - t) * lattice_point(p) + t * lattice_point(q);
      r += sum * (edge_radius(face, lattice_direction(ap)) - interp);
    }
    return r;
  }

  /// Interpolated radius at lattice coordinates a (unit sum, nonnegative).
  double radius_at(const Vec3& a) const {
    const int n = resolution;
    if (order > 1) return curved_radius(a);
    const double x = std::max(0.0, a[0]) * n, y = std::max(0.0, a[1]) * n;
    const int i = std::clamp(static_cast<int>(std::floor(x)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(y)), 0, n - 1 - i);
    const double fa = x - i, fb = y - j;
    if (fa + fb <= 1.0 || i + j > n - 2) {
      return (1.0 - fa - fb) * radii[index(i, j)] + fa * radii[index(i + 1, j)] + fb * radii[index(i, j + 1)];
    }
    return (1.0 - fb) * radii[index(i + 1, j)] + (fa + fb - 1.0) * radii[index(i + 1, j + 1)] +
           (1.0 - fa) * radii[index(i, j + 1)];
  }

  Vec3 lattice_point(const std::array<int, 2>& ij) const {
    return Vec3(ij[0], ij[1], resolution - ij[0] - ij[1]) / resolution;
  }

  /// Exact boundary radius on the face u_k = 0.
  double edge_radius(int k, const Vec3& u) const {
    const EdgeCurve& e = edges[k];
    return e.radius(u[e.c], u[e.d]);
  }

  /// Surface point at lattice coordinates a.
  Vec3 surface_point(const Vec3& a) const { return radius_at(a) * lattice_direction(a); }

  /// Longest 3D edge of the triangulation.
  double edge_length() const {
    double h = 0.0;
    for (const auto& f : faces) {
      for (int e = 0; e < 3; ++e) h = std::max(h, (vertex(f[e]) - vertex(f[(e + 1) % 3])).norm());
    }
    return h;
  }
};

/// Lattice directions and faces for resolution N, with zero radii.
inline SimplexMesh make_lattice(int n_sub, const Gradings& grading = {}, int order = 1) {
  if (n_sub < 1) throw Error(Errc::InvalidParameter, "mesh resolution must be >= 1");
  SimplexMesh m;
  m.resolution = n_sub;
  m.grading = grading;
  if (order < 1 || n_sub % order != 0) throw Error(Errc::InvalidParameter, "interpolation order must divide the resolution");
  m.order = order;
  const double inv = 1.0 / n_sub;
  for (int i = 0; i <= n_sub; ++i) {
    for (int j = 0; j <= n_sub - i; ++j) {
      m.directions.push_back(m.lattice_direction(Vec3(i * inv, j * inv, (n_sub - i - j) * inv)));
    }
  }
  m.radii.assign(m.directions.size(), 0.0);
  for (int i = 0; i < n_sub; ++i) {
    for (int j = 0; j < n_sub - i; ++j) {
      m.faces.push_back({m.index(i, j), m.index(i + 1, j), m.index(i, j + 1)});
      if (i + j <= n_sub - 2) m.faces.push_back({m.index(i + 1, j), m.index(i + 1, j + 1), m.index(i, j + 1)});
    }
  }
  return m;
}

inline Vec3 direction_of(const Vec3& x) {
  const double s = x.sum();
  if (!(s > 0.0)) throw Error(Errc::ZeroVector, "radial projection of the zero vector");
  return x / s;
}

namespace detail {

// Parameter t with t*u on the plane through p0, p1, p2.
inline std::optional<double> ray_plane(const Vec3& u, const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 nrm = (p1 - p0).cross(p2 - p0);
  const double den = nrm.dot(u);
  if (den == 0.0) return std::nullopt;
  return nrm.dot(p0) / den;
}

// Barycentric coordinates of (x, y) in the 2D triangle a, b, c.
inline std::array<double, 3> barycentric2(double x, double y, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                          const Eigen::Vector2d& c) {
  const double det = (b.y() - c.y()) * (a.x() - c.x()) + (c.x() - b.x()) * (a.y() - c.y());
  if (det == 0.0) return {-1.0, -1.0, -1.0};
  const double l0 = ((b.y() - c.y()) * (x - c.x()) + (c.x() - b.x()) * (y - c.y())) / det;
  const double l1 = ((c.y() - a.y()) * (x - c.x()) + (a.x() - c.x()) * (y - c.y())) / det;
  return {l0, l1, 1.0 - l0 - l1};
}

inline double point_segment_distance2(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).squaredNorm();
}

// Closest point on a 3D triangle (Ericson, Real-Time Collision Detection 5.1.5).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Uniform bucket grid over [0,1]^2 holding 2D triangles, for point location.
class TriangleLocator {
 public:
  TriangleLocator(std::vector<Eigen::Vector2d> pts, const std::vector<Face>& faces, int buckets)
      : pts_(std::move(pts)), faces_(faces), b_(std::max(1, buckets)) {
    std::vector<int> count(b_ * b_ + 1, 0);
    auto range = [&](const Face& f, int& x0, int& x1, int& y0, int& y1) {
      double lx = 1e300, hx = -1e300, ly = 1e300, hy = -1e300;
      for (int v : f) {
        lx = std::min(lx, pts_[v].x());
        hx = std::max(hx, pts_[v].x());
        ly = std::min(ly, pts_[v].y());
        hy = std::max(hy, pts_[v].y());
      }
      const double pad = 1e-9;
      x0 = cell(lx - pad), x1 = cell(hx + pad), y0 = cell(ly - pad), y1 = cell(hy + pad);
    };
    for (const auto& f : faces_) {
      int x0, x1, y0, y1;
      range(f, x0, x1, y0, y1);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) ++count[y * b_ + x + 1];
    }
    for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
    start_ = count;
    items_.resize(count.back());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi) {
      int x0, x1, y0, y1;
      range(faces_[fi], x0, x1, y0, y1);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) items_[fill[y * b_ + x]++] = fi;
    }
  }

  /// Face containing (x, y) with its barycentric weights; among several
  /// candidates (shared edges) the one with the largest minimum weight.
  std::optional<std::pair<int, std::array<double, 3>>> locate(double x, double y, double slack = 1e-11) const {
    const int c = cell(y) * b_ + cell(x);
    std::optional<std::pair<int, std::array<double, 3>>> best;
    double best_min = -slack;
    for (int k = start_[c]; k < start_[c + 1]; ++k) {
      const Face& f = faces_[items_[k]];
      const auto l = barycentric2(x, y, pts_[f[0]], pts_[f[1]], pts_[f[2]]);
      const double lo = std::min({l[0], l[1], l[2]});
      if (lo >= best_min) {
        best_min = lo;
        best = std::make_pair(items_[k], l);
      }
    }
    return best;
  }

  /// Face nearest to (x, y), used when the point falls outside every face.
  int nearest(double x, double y) const {
    const Eigen::Vector2d p(x, y);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi) {
      const Face& f = faces_[fi];
      double d = std::numeric_limits<double>::infinity();
      for (int e = 0; e < 3; ++e) d = std::min(d, point_segment_distance2(p, pts_[f[e]], pts_[f[(e + 1) % 3]]));
      if (d < best_d) {
        best_d = d;
        best = fi;
      }
    }
    return best;
  }

 private:
  int cell(double v) const { return std::clamp(static_cast<int>(v * b_), 0, b_ - 1); }

  std::vector<Eigen::Vector2d> pts_;
  const std::vector<Face>& faces_;
  int b_;
  std::vector<int> start_;
  std::vector<int> items_;
};

}  // namespace detail

/// Face of the lattice containing direction u (unit sum) with barycentric
/// weights. The cell from the inverse grading is a guess; the face with the
/// largest minimum weight among its neighbours wins.
inline std::pair<int, std::array<double, 3>> locate_direction(const SimplexMesh& m, const Vec3& u) {
  const int n = m.resolution;
  const Vec3 a = m.lattice_coords(u) * n;
  const int i0 = std::clamp(static_cast<int>(std::floor(a[0])), 0, n - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor(a[1])), 0, n - 1 - i0);
  std::pair<int, std::array<double, 3>> best{-1, {}};
  double best_min = -std::numeric_limits<double>::infinity();
  const int reach = m.uniform() ? 0 : 1;
  for (int i = std::max(0, i0 - reach); i <= std::min(n - 1, i0 + reach); ++i) {
    for (int j = std::max(0, j0 - reach); j <= std::min(n - 1 - i, j0 + reach); ++j) {
      for (int up = 1; up >= 0; --up) {
        if (!up && i + j > n - 2) continue;
        const int fi = m.face_index(i, j, up);
        const Face& f = m.faces[fi];
        std::array<double, 3> l;
        if (!m.uniform()) {
          const auto& d0 = m.directions[f[0]];
          const auto& d1 = m.directions[f[1]];
          const auto& d2 = m.directions[f[2]];
          l = detail::barycentric2(u[0], u[1], {d0[0], d0[1]}, {d1[0], d1[1]}, {d2[0], d2[1]});
        } else {
          // Uniform lattice: the weights follow from the fractional parts.
          const double fa = a[0] - i, fb = a[1] - j;
          l = up ? std::array<double, 3>{1.0 - fa - fb, fa, fb} : std::array<double, 3>{1.0 - fb, fa + fb - 1.0, 1.0 - fa};
        }
        const double lo = std::min({l[0], l[1], l[2]});
        if (lo > best_min) {
          best_min = lo;
          best = {fi, l};
        }
      }
    }
  }
  return best;
}

/// Point of the mesh surface on the ray through x.
inline Vec3 radial_project(const SimplexMesh& m, const Vec3& x) {
  const Vec3 u = direction_of(x);
  if (m.curved()) return m.radius_at(m.lattice_coords(u)) * u;
  const auto [fi, w] = locate_direction(m, u);
  const Face& f = m.faces[fi];
  const auto t = detail::ray_plane(u, m.vertex(f[0]), m.vertex(f[1]), m.vertex(f[2]));
  if (!t) return (w[0] * m.radii[f[0]] + w[1] * m.radii[f[1]] + w[2] * m.radii[f[2]]) * u;
  return *t * u;
}

inline constexpr double kDefaultGrading = 2.0;  // lattice weight t^2

/// One-dimensional graph transform on a face: map the polyline, re-sample
/// each node ray on the image, until the radii move less than tol * max w.
inline EdgeCurve edge_curve(const Map3& map, int c, int d, int nodes = 2001, double tol = 1e-13,
                            int max_iters = 20000) {
  if (c == d || c < 0 || d < 0 || c > 2 || d > 2) throw Error(Errc::InvalidParameter, "edge needs two coordinates");
  if (c > d) std::swap(c, d);
  if (nodes < 5) throw Error(Errc::InvalidParameter, "edge curve needs >= 5 nodes");
  const Vec3 w = axial_vector(map);
  EdgeCurve e;
  e.c = c;
  e.d = d;
  const int n = nodes - 1;
  // Logistic spacing over [1e-14, 1 - 1e-14], pinned to 0 and 1.
  const double span = std::log(1e14);
  auto small = [&](int k) {  // u at node k measured from its own near end, k <= n / 2
    if (k == 0) return 0.0;
    const double z = span * (1.0 - 2.0 * k / n);
    return 1.0 / (1.0 + std::exp(z));
  };
  e.uc.resize(nodes);
  e.ud.resize(nodes);
  for (int k = 0; k <= n; ++k) {
    if (2 * k <= n) {
      e.uc[k] = small(k);
      e.ud[k] = 1.0 - e.uc[k];
    } else {
      e.ud[k] = small(n - k);
      e.uc[k] = 1.0 - e.ud[k];
    }
  }
  e.rho.resize(nodes);
  for (int k = 0; k <= n; ++k) e.rho[k] = 1.0 / (e.uc[k] / w[c] + e.ud[k] / w[d]);

  std::vector<Vec3> img(nodes);
  std::vector<double> key(nodes);  // log(Q_c / Q_d), increasing along the curve
  std::vector<double> next(nodes);
  const double scale = std::max(w[c], w[d]);
  for (int it = 1; it <= max_iters; ++it) {
    for (int k = 0; k <= n; ++k) {
      img[k] = map(e.point(k));
      key[k] = k == 0 ? -std::numeric_limits<double>::infinity()
               : k == n ? std::numeric_limits<double>::infinity()
                        : std::log(img[k][c] / img[k][d]);
    }
    for (int k = 1; k < n; ++k) {
      if (!(key[k] > key[k - 1])) throw Error(Errc::NonConvergence, "edge image is not monotone");
    }
    double change = 0.0;
    next[0] = w[d];
    next[n] = w[c];
    for (int j = 1; j < n; ++j) {
      const double kj = std::log(e.uc[j] / e.ud[j]);
      const std::size_t k = std::upper_bound(key.begin(), key.end(), kj) - key.begin() - 1;
      if (k >= 2 && k + 2 < static_cast<std::size_t>(n)) {
        // Cubic in the image key; a linear chord would bias the fixed point by O(h^2).
        double s = 0.0;
        for (std::size_t a = k - 1; a <= k + 2; ++a) {
          double l = img[a][c] + img[a][d];
          for (std::size_t b = k - 1; b <= k + 2; ++b) {
            if (b != a) l *= (kj - key[b]) / (key[a] - key[b]);
          }
          s += l;
        }
        next[j] = s;
      } else {
        const Vec3& q0 = img[k];
        const Vec3& q1 = img[k + 1];
        const double f0 = q0[c] * e.ud[j] - e.uc[j] * q0[d];
        const double f1 = q1[c] * e.ud[j] - e.uc[j] * q1[d];
        const double t = f0 == f1 ? 0.0 : f0 / (f0 - f1);
        const Vec3 q = q0 + t * (q1 - q0);
        next[j] = q[c] + q[d];
      }
      change = std::max(change, std::abs(next[j] - e.rho[j]));
    }
    e.rho.swap(next);
    e.iterations = it;
    if (change < tol * scale) {
      e.index();
      return e;
    }
  }
  throw Error(Errc::NonConvergence, "edge curve did not converge");
}

/// Per-coordinate gradings that keep the default power grading near every
/// face and, in addition, equidistribute 3D arclength along the two edges
/// where the coordinate vanishes at one end. An attracting corner whose
/// tangential eigenvalue is below the normal one makes S tangent to the axis
/// there, so a long stretch of surface projects into a tiny neighbourhood of
/// the corner; the arclength term moves lattice lines into it.
inline std::vector<EdgeCurve> boundary_edges(const Map3& map, int nodes = 2001) {
  return {edge_curve(map, 1, 2, nodes), edge_curve(map, 0, 2, nodes), edge_curve(map, 0, 1, nodes)};
}

inline Gradings adaptive_grading(const std::vector<EdgeCurve>& edges, double power, double exponent = 4.0,
                                 double min_ratio = 0.25) {
  const Grading base = Grading::power(power);
  // Arclength fraction along each edge, measured from either end.
  std::array<std::vector<double>, 3> from_c, from_d;
  for (int e = 0; e < 3; ++e) {
    const auto& ed = edges[e];
    const std::size_t m = ed.size();
    std::vector<double> seg(m - 1);
    for (std::size_t k = 0; k + 1 < m; ++k) seg[k] = (ed.point(k + 1) - ed.point(k)).norm();
    from_c[e].assign(m, 0.0);
    from_d[e].assign(m, 0.0);
    for (std::size_t k = 1; k < m; ++k) from_d[e][k] = from_d[e][k - 1] + seg[k - 1];
    for (std::size_t k = m - 1; k-- > 0;) from_c[e][k] = from_c[e][k + 1] + seg[k];
    const double total = from_d[e].back();
    for (std::size_t k = 0; k < m; ++k) {
      from_d[e][k] /= total;
      from_c[e][k] /= total;
    }
  }
  Gradings out;
  for (int c = 0; c < 3; ++c) {
    // Both edges through c share the node set for u_c; index it from u_c = 0.
    std::vector<double> u, f1, f2;
    for (int e = 0; e < 3; ++e) {
      const auto& ed = edges[e];
      if (ed.c != c && ed.d != c) continue;
      const std::size_t m = ed.size();
      std::vector<double> f(m);
      if (u.empty()) u.resize(m);
      for (std::size_t k = 0; k < m; ++k) {
        if (ed.c == c) {
          // u_c = uc[k] grows with k; the distance counts from the u_c = 0 end (corner d).
          u[k] = ed.uc[k];
          f[k] = from_d[e][k];
        } else {
          u[k] = ed.ud[m - 1 - k];
          f[k] = from_c[e][m - 1 - k];
        }
      }
      (f1.empty() ? f1 : f2) = std::move(f);
    }
    std::vector<double> a, g;
    const double norm = std::pow(3.0, 1.0 / exponent);
    for (std::size_t k = 1; k < u.size(); ++k) {
      double v = std::pow(std::pow(base.inverse(u[k]), exponent) + std::pow(f1[k], exponent) +
                                    std::pow(f2[k], exponent),
                                1.0 / exponent) /
                       norm;
      // Never compress below min_ratio times the base weight.
      v = std::min(v, base.inverse(u[k] / min_ratio));
      if (!a.empty() && !(v > a.back() && u[k] > g.back())) continue;  // keep the table strictly increasing
      a.push_back(v);
      g.push_back(u[k]);
    }
    a.back() = g.back() = 1.0;
    out[c] = Grading::table(a, g);
  }
  return out;
}

struct SimplexOptions {
  int resolution = 64;
  double grading = kDefaultGrading;
  bool adaptive = true;   // arclength refinement toward the corners
  int order = 4;  // surface order; flat when it does not divide N
  std::optional<Gradings> lattice_grading;  // overrides grading / adaptive
  int max_iters = 5000;
  double tol = 1e-8;
  bool allow_unconverged = false;
  /// Initial radius per direction; default is the plane through the axial points.
  std::function<double(const Vec3&)> initial_radius;
  std::function<void(int, double)> on_sweep;
};

namespace detail {

/// Lattice coordinates a with direction(T(surface_point(a))) = u, by damped
/// Newton from a0 with a forward-difference Jacobian. Coordinates where u
/// vanishes are held at zero (T preserves supports).
inline std::optional<Vec3> image_preimage(const Map3& map, const SimplexMesh& m, const Vec3& u, Vec3 a0) {
  std::array<int, 3> free{};
  int nf = 0;
  for (int c = 0; c < 3; ++c) {
    if (u[c] > 0.0) free[nf++] = c;
    else a0[c] = 0.0;
  }
  a0 = a0.cwiseMax(0.0);
  if (nf == 1 || !(a0.sum() > 0.0)) {
    Vec3 a = Vec3::Zero();
    a[free[0]] = 1.0;
    if (nf == 1) return a;
    a0 = Vec3::Zero();
    for (int k = 0; k < nf; ++k) a0[free[k]] = 1.0 / nf;
  }
  a0 /= a0.sum();
  const int dim = nf - 1;
  auto build = [&](const Eigen::Vector2d& y) {
    Vec3 a = Vec3::Zero();
    double rest = 1.0;
    for (int k = 0; k < dim; ++k) {
      a[free[k]] = y[k];
      rest -= y[k];
    }
    a[free[dim]] = rest;
    return a;
  };
  auto inside = [&](const Vec3& a) { return (a.array() >= 0.0).all(); };
  auto resid = [&](const Vec3& a) {
    const Vec3 x = map(m.surface_point(a));
    const double sum = x.sum();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int k = 0; k < dim; ++k) g[k] = x[free[k]] / sum - u[free[k]];
    return g;
  };
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  for (int k = 0; k < dim; ++k) y[k] = a0[free[k]];
  Vec3 a = build(y);
  Eigen::Vector2d g = resid(a);
  for (int it = 0; it < 40 && g.norm() > 1e-14; ++it) {
    Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
    for (int k = 0; k < dim; ++k) {
      double h = 1e-7;
      Eigen::Vector2d yh = y;
      yh[k] += h;
      if (!inside(build(yh))) {
        h = -h;
        yh[k] = y[k] + h;
      }
      jac.col(k).head(dim) = (resid(build(yh)) - g).head(dim) / h;
    }
    Eigen::Vector2d step = Eigen::Vector2d::Zero();
    if (dim == 1) {
      if (jac(0, 0) == 0.0) return std::nullopt;
      step[0] = -g[0] / jac(0, 0);
    } else {
      const Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
      if (!lu.isInvertible()) return std::nullopt;
      step = lu.solve(-g);
    }
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      const Eigen::Vector2d yn = y + t * step;
      const Vec3 an = build(yn);
      if (!inside(an)) continue;
      const Eigen::Vector2d gn = resid(an);
      if (gn.norm() < g.norm()) {
        y = yn;
        a = an;
        g = gn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (g.norm() > 1e-11) return std::nullopt;
  return a;
}

}  // namespace detail

/// Graph transform: start from the plane through the axial fixed points,
/// then repeatedly map the surface by T and re-sample each lattice ray on the
/// image, until the largest vertex displacement < tol. Flat meshes intersect
/// rays with the image triangulation; curved meshes solve for the point of
/// the interpolated surface whose image lies on the ray.
inline SimplexMesh compute_carrying_simplex(const Map3& map, const SimplexOptions& opt = {}) {
  if (opt.resolution < 2) throw Error(Errc::InvalidParameter, "mesh resolution must be >= 2");
  if (opt.order < 1 || opt.order > 4) throw Error(Errc::InvalidParameter, "surface order must lie in [1, 4]");
  const int order = opt.order > 1 && opt.resolution % opt.order == 0 ? opt.order : 1;
  const bool curved = order > 1;
  std::vector<EdgeCurve> edges;
  if (curved || opt.adaptive) edges = boundary_edges(map);
  const Gradings grading = opt.lattice_grading ? *opt.lattice_grading : opt.adaptive ? adaptive_grading(edges, opt.grading)
                                        : Gradings{Grading::power(opt.grading), Grading::power(opt.grading),
                                                   Grading::power(opt.grading)};
  SimplexMesh mesh = make_lattice(opt.resolution, grading, order);
  if (curved) mesh.edges = std::move(edges);
  // Boundary nodes of a curved mesh take the exact traces and stay fixed.
  auto boundary_face = [&](std::size_t v) {
    const Vec3& u = mesh.directions[v];
    for (int k = 0; k < 3; ++k) {
      if (u[k] == 0.0) return k;
    }
    return -1;
  };
  const Vec3 w = axial_vector(map);
  std::vector<Vec3> lattice;
  lattice.reserve(mesh.size());
  for (int i = 0; i <= opt.resolution; ++i) {
    for (int j = 0; j <= opt.resolution - i; ++j) {
      lattice.emplace_back(static_cast<double>(i) / opt.resolution, static_cast<double>(j) / opt.resolution,
                           static_cast<double>(opt.resolution - i - j) / opt.resolution);
    }
  }
  for (std::size_t v = 0; v < mesh.size(); ++v) {
    const Vec3& u = mesh.directions[v];
    mesh.radii[v] = opt.initial_radius ? opt.initial_radius(u) : 1.0 / u.cwiseQuotient(w).sum();
    if (const int k = boundary_face(v); curved && k >= 0) mesh.radii[v] = mesh.edge_radius(k, u);
  }

  std::vector<Vec3> image(mesh.size());
  std::vector<Eigen::Vector2d> image_dir(mesh.size());
  std::vector<double> next(mesh.size());
  for (int it = 1; it <= opt.max_iters; ++it) {
    for (std::size_t v = 0; v < mesh.size(); ++v) {
      image[v] = map(mesh.vertex(v));
      const double s = image[v].sum();
      image_dir[v] = Eigen::Vector2d(image[v][0] / s, image[v][1] / s);
    }
    const detail::TriangleLocator locator(image_dir, mesh.faces, opt.resolution);
    mesh.flagged.clear();
    double residual = 0.0;
    for (std::size_t v = 0; v < mesh.size(); ++v) {
      const Vec3& u = mesh.directions[v];
      if (curved && boundary_face(v) >= 0) {
        next[v] = mesh.radii[v];
        continue;
      }
      auto hit = locator.locate(u[0], u[1]);
      int fi;
      if (hit) {
        fi = hit->first;
      } else {
        fi = locator.nearest(u[0], u[1]);
        mesh.flagged.push_back(static_cast<int>(v));
      }
      const Face& f = mesh.faces[fi];
      std::optional<double> t;
      if (curved) {
        Vec3 a0 = Vec3::Zero();
        if (hit) {
          for (int k = 0; k < 3; ++k) a0 += hit->second[k] * lattice[f[k]];
        } else {
          a0 = lattice[v];
        }
        if (const auto a = detail::image_preimage(map, mesh, u, a0)) t = map(mesh.surface_point(*a)).sum();
        else if (hit) mesh.flagged.push_back(static_cast<int>(v));
      }
      if (!t) t = detail::ray_plane(u, image[f[0]], image[f[1]], image[f[2]]);
      next[v] = t && *t > 0.0 ? *t : mesh.radii[v];
      residual = std::max(residual, std::abs(next[v] - mesh.radii[v]) * u.norm());
    }
    mesh.radii.swap(next);
    mesh.residual = residual;
    mesh.iterations = it;
    mesh.log.push_back(residual);
    if (opt.on_sweep) opt.on_sweep(it, residual);
    if (residual < opt.tol) {
      mesh.converged = true;
      break;
    }
  }
  if (!mesh.converged && !opt.allow_unconverged) {
    throw Error(Errc::NonConvergence, "graph transform residual " + std::to_string(mesh.residual) + " after " +
                                          std::to_string(mesh.iterations) + " sweeps");
  }
  return mesh;
}

/// Vertex positions plus bounding spheres for point-to-surface queries.
class SurfaceDistance {
 public:
  explicit SurfaceDistance(const SimplexMesh& m) : mesh_(m) {
    verts_.reserve(m.size());
    for (std::size_t v = 0; v < m.size(); ++v) verts_.push_back(m.vertex(v));
    for (const auto& f : m.faces) {
      const Vec3 c = (verts_[f[0]] + verts_[f[1]] + verts_[f[2]]) / 3.0;
      double r = 0.0;
      for (int v : f) r = std::max(r, (verts_[v] - c).norm());
      centers_.push_back(c);
      bounds_.push_back(r);
    }
  }

  double operator()(const Vec3& p) const {
    if (mesh_.curved() && p.sum() > 0.0 && (p.array() >= 0.0).all()) {
      return curved(p);
    }
    double best = std::numeric_limits<double>::infinity();
    if (p.sum() > 0.0 && (p.array() >= 0.0).all()) best = (radial_project(mesh_, p) - p).norm();
    for (std::size_t fi = 0; fi < mesh_.faces.size(); ++fi) {
      if ((p - centers_[fi]).norm() - bounds_[fi] >= best) continue;
      const Face& f = mesh_.faces[fi];
      best = std::min(best, (detail::closest_point_on_triangle(p, verts_[f[0]], verts_[f[1]], verts_[f[2]]) - p).norm());
    }
    return best;
  }

 private:
  // Radial distance, then Gauss-Newton on the lattice coordinates of the
  // foot point, keeping only improving steps.
  double curved(const Vec3& p) const {
    Vec3 a = mesh_.lattice_coords(direction_of(p));
    Vec3 x = mesh_.surface_point(a);
    double best = (x - p).norm();
    for (int it = 0; it < 8 && best > 0.0; ++it) {
      Eigen::Matrix<double, 3, 2> jac;
      for (int k = 0; k < 2; ++k) {
        double h = 1e-7;
        Vec3 ah = a;
        if (ah[2] - h < 0.0) h = -h;
        ah[k] += h;
        ah[2] -= h;
        jac.col(k) = (mesh_.surface_point(ah.cwiseMax(0.0)) - x) / h;
      }
      const Eigen::Vector2d dy = (jac.transpose() * jac).ldlt().solve(-jac.transpose() * (x - p));
      Vec3 an(a[0] + dy[0], a[1] + dy[1], a[2] - dy[0] - dy[1]);
      an = an.cwiseMax(0.0);
      an /= an.sum();
      const Vec3 xn = mesh_.surface_point(an);
      const double d = (xn - p).norm();
      if (!(d < best)) break;
      a = an;
      x = xn;
      best = d;
    }
    return best;
  }

  const SimplexMesh& mesh_;
  std::vector<Vec3> verts_;
  std::vector<Vec3> centers_;
  std::vector<double> bounds_;
};

inline double distance_to_surface(const SimplexMesh& m, const Vec3& p) { return SurfaceDistance(m)(p); }

/// Pairs (a, b) of vertices with x_a < x_b beyond tol: x_a <= x_b + tol in
/// every coordinate and x_a < x_b - tol in at least one.
inline std::vector<std::pair<int, int>> unordered_check(const SimplexMesh& m, double tol,
                                                        std::size_t max_report = 100000) {
  std::vector<std::pair<int, int>> out;
  std::vector<Vec3> x;
  x.reserve(m.size());
  for (std::size_t v = 0; v < m.size(); ++v) x.push_back(m.vertex(v));
  auto below = [&](const Vec3& a, const Vec3& b) {
    bool strict = false;
    for (int k = 0; k < 3; ++k) {
      if (a[k] > b[k] + tol) return false;
      if (a[k] < b[k] - tol) strict = true;
    }
    return strict;
  };
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      if (below(x[a], x[b])) out.emplace_back(static_cast<int>(a), static_cast<int>(b));
      else if (below(x[b], x[a])) out.emplace_back(static_cast<int>(b), static_cast<int>(a));
      if (out.size() >= max_report) return out;
    }
  }
  return out;
}

/// max over vertices v of dist(T(v), surface).
inline double invariance_residual(const Map3& map, const SimplexMesh& m) {
  const SurfaceDistance dist(m);
  double worst = 0.0;
  for (std::size_t v = 0; v < m.size(); ++v) worst = std::max(worst, dist(map(m.vertex(v))));
  return worst;
}

/// Points of the surface near `center`: a polar fan of directions around
/// the direction of `center`, lifted radially, kept when within `radius`.
inline std::vector<Vec3> surface_samples_near(const SimplexMesh& m, const Vec3& center, double radius, int rings = 8,
                                              int spokes = 16) {
  const Vec3 c = direction_of(center);
  const Vec3 t1 = Vec3(1.0, -1.0, 0.0).normalized();
  const Vec3 t2 = Vec3(1.0, 1.0, -2.0).normalized();
  const double reach = 2.0 * radius / radial_project(m, c).norm();
  std::vector<Vec3> out;
  for (int r = 1; r <= rings; ++r) {
    const double s = reach * r / rings;
    for (int k = 0; k < spokes; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5 * (r % 2)) / spokes;
      const Vec3 u = c + s * (std::cos(th) * t1 + std::sin(th) * t2);
      if ((u.array() < 0.0).any()) continue;
      const Vec3 p = radial_project(m, u);
      if ((p - center).norm() <= radius) out.push_back(p);
    }
  }
  return out;
}

struct TangentConeEstimate {
  Vec3 base;
  double radius = 0.0;
  std::vector<Vec3> secants;  // unit vectors
  double angle_to_W = 0.0;    // radians, in [0, pi/2]
};

/// Secant directions from `base` to mesh vertices at distance in
/// (radius/2, radius], and the worst angle between them and the plane W.
inline TangentConeEstimate estimate_tangent_cone(const SimplexMesh& m, const Vec3& base, double radius,
                                                 const Basis32& w_basis, std::size_t min_secants = 3) {
  TangentConeEstimate est;
  est.base = base;
  est.radius = radius;
  const Vec3 nrm = w_basis.col(0).cross(w_basis.col(1)).normalized();
  for (std::size_t v = 0; v < m.size(); ++v) {
    const Vec3 d = m.vertex(v) - base;
    const double len = d.norm();
    if (len > 0.5 * radius && len <= radius) {
      const Vec3 z = d / len;
      est.secants.push_back(z);
      est.angle_to_W = std::max(est.angle_to_W, std::asin(std::min(1.0, std::abs(nrm.dot(z)))));
    }
  }
  if (est.secants.size() < min_secants) {
    throw Error(Errc::TooFewNeighbors, std::to_string(est.secants.size()) + " secants within radius");
  }
  return est;
}

/// Empirical constant in ||xi - Pi(xi)|| <= Theta ||q - Pi(xi)||, where Pi
/// projects along v onto the plane q + W. Samples are mesh vertices and
/// lifted surface points within `radius` of q.
inline double estimate_theta(const SimplexMesh& m, const Vec3& q, const Vec3& v, const Basis32& w_basis,
                             double radius) {
  const Vec3 nrm = w_basis.col(0).cross(w_basis.col(1)).normalized();
  std::vector<Vec3> samples = surface_samples_near(m, q, radius);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if ((m.vertex(k) - q).norm() <= radius) samples.push_back(m.vertex(k));
  }
  double theta = 0.0;
  std::size_t used = 0;
  for (const Vec3& xi : samples) {
    const double s = nrm.dot(xi - q) / nrm.dot(v);
    const Vec3 proj = xi - s * v;
    const double base = (q - proj).norm();
    if (base <= 1e-12 * (1.0 + q.norm())) continue;
    theta = std::max(theta, (xi - proj).norm() / base);
    ++used;
  }
  if (used == 0) throw Error(Errc::EmptyNeighborhood, "no surface samples within radius");
  return theta;
}

}  // namespace csx
