#pragma once

// Fixed points of a competitive map, the spectra of DT at them, condition
// (C1), the type of a fixed point as seen from inside the carrying simplex,
// and the fixed point index.

#include "csx/models.hpp"
#include "csx/spectrum.hpp"

#include <Eigen/LU>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csx {

enum class OnSType { Attractor, Repeller, Saddle, NonHyperbolic, NotOnS };

constexpr std::string_view to_string(OnSType t) {
  switch (t) {
    case OnSType::Attractor: return "attractor";
    case OnSType::Repeller: return "repeller";
    case OnSType::Saddle: return "saddle";
    case OnSType::NonHyperbolic: return "nonhyperbolic";
    case OnSType::NotOnS: return "not_on_s";
  }
  return "not_on_s";
}

inline std::string support_label(Support s, int n) {
  const int k = support_size(s);
  if (k == 0) return "origin";
  if (k == n) return "interior";
  if (k == 1) return "axial";
  if (k == 2) return "planar";
  return "face";
}

template <int Dim>
struct C1Report {
  double det = 0.0;
  double min_inverse_entry = 0.0;
  Complex mu;
  std::optional<Vec<Dim>> perron_vector;  // unit sum, >> 0 when (C1) holds
  bool holds = false;
};

template <int Dim>
struct FixedPointRecord {
  Vec<Dim> location;
  Support support = 0;
  double residual = 0.0;
  std::vector<Complex> eigenvalues;  // of DT(location), by modulus ascending
  Complex mu;
  double nu = 0.0;
  bool c1_holds = false;
  std::optional<C1Report<Dim>> c1;  // interior points only
  bool hyperbolic = false;
  std::vector<Complex> on_s_spectrum;
  OnSType s_type = OnSType::NotOnS;
  std::optional<int> index;

  int dim() const { return static_cast<int>(location.size()); }
};

using FixedPoint3 = FixedPointRecord<3>;

/// (C1) on a Jacobian: invertible, entrywise positive inverse, and the
/// smallest-modulus eigenvalue mu real with 0 < mu < 1.
template <int Dim>
C1Report<Dim> verify_C1(const Mat<Dim>& jac, const Tolerances& tol = {}) {
  C1Report<Dim> rep;
  const int n = static_cast<int>(jac.rows());
  rep.det = jac.determinant();
  const double scale = std::max(1.0, std::pow(jac.cwiseAbs().maxCoeff(), n));
  if (!(std::abs(rep.det) > tol.singular * scale)) {
    throw Error(Errc::SingularJacobian, "det DT = " + std::to_string(rep.det));
  }
  const Mat<Dim> inv = jac.inverse();
  rep.min_inverse_entry = inv.minCoeff();
  const auto eig = eigen3(jac);
  rep.mu = eig.front();
  const bool mu_real = std::abs(rep.mu.imag()) <= 1e-12 * std::max(1.0, std::abs(rep.mu));
  rep.holds = rep.min_inverse_entry > 0.0 && mu_real && rep.mu.real() > 0.0 && rep.mu.real() < 1.0;
  if (rep.min_inverse_entry > 0.0) {
    // Power iteration on the positive matrix DT^{-1} converges to its Perron vector.
    Vec<Dim> v = Vec<Dim>::Constant(n, 1.0 / n);
    for (int it = 0; it < 10000; ++it) {
      Vec<Dim> next = inv * v;
      next /= next.sum();
      const double change = (next - v).cwiseAbs().maxCoeff();
      v = next;
      if (change < 1e-15) break;
    }
    rep.perron_vector = v;
  } else if (mu_real) {
    Vec<Dim> v = sign_normalized<Dim>(real_eigenvector<Dim>(jac, rep.mu.real()));
    rep.perron_vector = Vec<Dim>(v / v.sum());
  }
  return rep;
}

/// Type on S of a point satisfying (C1): mu is dropped and the remaining
/// n-1 eigenvalues (the spectrum of DT restricted to W) decide.
inline OnSType classify_on_S(std::span<const Complex> sorted_eigenvalues, double hyperbolic_tol = 1e-9) {
  if (sorted_eigenvalues.size() < 2) throw Error(Errc::InvalidParameter, "need at least two eigenvalues");
  int below = 0, above = 0;
  for (std::size_t k = 1; k < sorted_eigenvalues.size(); ++k) {
    const double m = std::abs(sorted_eigenvalues[k]);
    if (std::abs(m - 1.0) <= hyperbolic_tol) {
      throw Error(Errc::NonHyperbolic, "eigenvalue modulus " + std::to_string(m) + " within band of 1");
    }
    (m < 1.0 ? below : above)++;
  }
  if (above == 0) return OnSType::Attractor;
  if (below == 0) return OnSType::Repeller;
  return OnSType::Saddle;
}

template <int Dim>
OnSType classify_on_S(const FixedPointRecord<Dim>& p, double hyperbolic_tol = 1e-9) {
  if (!p.c1_holds) throw Error(Errc::C1Violated, "classify_on_S requires (C1)");
  return classify_on_S(std::span<const Complex>(p.eigenvalues), hyperbolic_tol);
}

/// sign det(I - M), which equals (-1)^m with m the number of real
/// eigenvalues > 1 counted with multiplicity.
template <int Dim>
int fixed_point_index(const Mat<Dim>& jac, double hyperbolic_tol = 1e-9) {
  for (const auto& l : eigen3(jac)) {
    if (std::abs(l - 1.0) <= hyperbolic_tol) throw Error(Errc::EigenvalueOne, "DT has eigenvalue 1");
  }
  Mat<Dim> m = -jac;
  m.diagonal().array() += 1.0;
  return m.determinant() > 0.0 ? 1 : -1;
}

template <int Dim>
int fixed_point_index(const CompetitiveMap<Dim>& map, const FixedPointRecord<Dim>& p, double hyperbolic_tol = 1e-9) {
  return fixed_point_index<Dim>(map.jacobian(p.location), hyperbolic_tol);
}

/// Eigenvalues of DT(p) along S at a nonzero fixed point p: the external
/// invasion factors F_k(p), k outside the support, together with the
/// support-block spectrum minus its smallest-modulus member (the direction
/// transverse to S inside the face).
template <int Dim>
std::vector<Complex> on_s_spectrum(const CompetitiveMap<Dim>& map, const Vec<Dim>& p) {
  const int n = map.dim();
  const Support s = support_of(p);
  const auto idx = support_indices(s, n);
  if (idx.empty()) return {};
  const Mat<Dim> jac = map.jacobian(p);
  const Vec<Dim> f = map.growth(p);
  MatX block(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = jac(idx[a], idx[b]);
  }
  auto eig = eigen3(block);
  std::vector<Complex> out(eig.begin() + 1, eig.end());
  for (int k = 0; k < n; ++k) {
    if (!support_contains(s, k)) out.emplace_back(f[k]);
  }
  detail::sort_by_modulus(out);
  return out;
}

inline OnSType classify_moduli(std::span<const Complex> on_s, double hyperbolic_tol) {
  int below = 0, above = 0;
  for (const auto& l : on_s) {
    const double m = std::abs(l);
    if (std::abs(m - 1.0) <= hyperbolic_tol) return OnSType::NonHyperbolic;
    (m < 1.0 ? below : above)++;
  }
  if (above == 0) return OnSType::Attractor;
  if (below == 0) return OnSType::Repeller;
  return OnSType::Saddle;
}

/// Full record for a point already known to be fixed.
template <int Dim>
FixedPointRecord<Dim> analyze_point(const CompetitiveMap<Dim>& map, const Vec<Dim>& x, const Tolerances& tol = {}) {
  FixedPointRecord<Dim> rec;
  const int n = map.dim();
  rec.location = x;
  rec.support = support_of(x);
  rec.residual = (map(x) - x).norm();
  const Mat<Dim> jac = map.jacobian(x);
  rec.eigenvalues = eigen3(jac);
  rec.mu = rec.eigenvalues.front();
  rec.nu = rec.eigenvalues.size() > 1 ? std::abs(rec.eigenvalues[1]) : 0.0;
  rec.hyperbolic = true;
  for (const auto& l : rec.eigenvalues) {
    if (std::abs(std::abs(l) - 1.0) <= tol.hyperbolic) rec.hyperbolic = false;
  }
  if (support_size(rec.support) == n) {
    try {
      rec.c1 = verify_C1<Dim>(jac, tol);
      rec.c1_holds = rec.c1->holds;
    } catch (const Error&) {
      rec.c1_holds = false;
    }
  }
  if (rec.support != 0) {
    rec.on_s_spectrum = on_s_spectrum(map, x);
    rec.s_type = classify_moduli(rec.on_s_spectrum, tol.hyperbolic);
  }
  try {
    rec.index = fixed_point_index<Dim>(jac, tol.hyperbolic);
  } catch (const Error&) {
    rec.index.reset();
  }
  return rec;
}

namespace detail {

// Damped Newton on T(x) - x = 0 restricted to the coordinates in `support`.
template <int Dim>
std::optional<Vec<Dim>> newton_on_face(const CompetitiveMap<Dim>& map, Support support, Vec<Dim> x,
                                       int max_iter = 200, double tol = 1e-13) {
  const int n = map.dim();
  const auto idx = support_indices(support, n);
  const int k = static_cast<int>(idx.size());
  for (int i = 0; i < n; ++i) {
    if (!support_contains(support, i)) x[i] = 0.0;
  }
  auto residual = [&](const Vec<Dim>& p) {
    const Vec<Dim> g = map(p) - p;
    VecX r(k);
    for (int a = 0; a < k; ++a) r[a] = g[idx[a]];
    return r;
  };
  VecX g = residual(x);
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() <= tol * (1.0 + x.norm())) return x;
    const Mat<Dim> jac = map.jacobian(x);
    MatX j(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) j(a, b) = jac(idx[a], idx[b]) - (a == b ? 1.0 : 0.0);
    }
    Eigen::FullPivLU<MatX> lu(j);
    if (!lu.isInvertible()) return std::nullopt;
    const VecX step = lu.solve(-g);
    double lambda = 1.0;
    bool accepted = false;
    while (lambda > 1e-10) {
      Vec<Dim> trial = x;
      for (int a = 0; a < k; ++a) trial[idx[a]] += lambda * step[a];
      const VecX gt = residual(trial);
      if (gt.norm() < (1.0 - 1e-4 * lambda) * g.norm() || gt.norm() <= tol * (1.0 + trial.norm())) {
        x = trial;
        g = gt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) return std::nullopt;
  }
  if (g.norm() <= 1e-10 * (1.0 + x.norm())) return x;
  return std::nullopt;
}

template <int Dim>
double custom_axial_root(const CompetitiveMap<Dim>& map, int i) {
  const int n = map.dim();
  auto g = [&](double t) {
    Vec<Dim> x = Vec<Dim>::Zero(n);
    x[i] = t;
    return map.growth(x)[i] - 1.0;
  };
  auto dg = [&](double t) {
    Vec<Dim> x = Vec<Dim>::Zero(n);
    x[i] = t;
    return map.growth_partials(x)(i, i);
  };
  if (!(g(0.0) > 0.0)) {
    throw Error(Errc::NoAxialFixedPoint, "F_" + std::to_string(i + 1) + "(0) <= 1");
  }
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) {
      throw Error(Errc::NoAxialFixedPoint, "F_" + std::to_string(i + 1) + " > 1 along the whole axis");
    }
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double gt = g(t);
    if (gt == 0.0) return t;
    (gt > 0.0 ? lo : hi) = t;
    const double d = dg(t);
    double next = d != 0.0 ? t - gt / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  if (!std::isfinite(t) || t <= 0.0) throw Error(Errc::NoAxialFixedPoint, "root search failed");
  return t;
}

}  // namespace detail

template <int Dim>
std::vector<FixedPointRecord<Dim>> find_axial_fixed_points(const CompetitiveMap<Dim>& map, const Tolerances& tol = {}) {
  const int n = map.dim();
  std::vector<FixedPointRecord<Dim>> out;
  for (int i = 0; i < n; ++i) {
    const double w = map.builtin() ? 1.0 / map.params().A(i, i) : detail::custom_axial_root(map, i);
    Vec<Dim> x = Vec<Dim>::Zero(n);
    x[i] = w;
    out.push_back(analyze_point(map, x, tol));
  }
  return out;
}

/// Vector w of axial fixed point coordinates.
template <int Dim>
Vec<Dim> axial_vector(const CompetitiveMap<Dim>& map) {
  const int n = map.dim();
  Vec<Dim> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = map.builtin() ? 1.0 / map.params().A(i, i) : detail::custom_axial_root(map, i);
  }
  return w;
}

/// Fixed point whose support is exactly `support`, if one exists. Builtins
/// solve sum_j a_ij x_j = 1 on the support; custom maps use damped Newton
/// from `seed` (default: mean of the axial points on the face).
template <int Dim>
std::optional<FixedPointRecord<Dim>> find_face_fixed_point(const CompetitiveMap<Dim>& map, Support support,
                                                           std::optional<Vec<Dim>> seed = std::nullopt,
                                                           const Tolerances& tol = {}) {
  const int n = map.dim();
  const auto idx = support_indices(support, n);
  const int k = static_cast<int>(idx.size());
  if (k == 0) throw Error(Errc::InvalidParameter, "empty support");
  Vec<Dim> x = Vec<Dim>::Zero(n);
  if (map.builtin()) {
    MatX a(k, k);
    for (int p = 0; p < k; ++p) {
      for (int q = 0; q < k; ++q) a(p, q) = map.params().A(idx[p], idx[q]);
    }
    Eigen::FullPivLU<MatX> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw Error(Errc::Degenerate, "interaction block on the face is singular");
    }
    const VecX y = lu.solve(VecX::Ones(k));
    for (int p = 0; p < k; ++p) {
      if (!(y[p] > 0.0)) return std::nullopt;
      x[idx[p]] = y[p];
    }
  } else {
    Vec<Dim> start;
    if (seed) {
      start = *seed;
    } else {
      start = axial_vector(map) / static_cast<double>(k);
    }
    auto sol = detail::newton_on_face(map, support, start);
    if (!sol) throw Error(Errc::NewtonDiverged, "Newton did not converge on the face");
    for (int p = 0; p < k; ++p) {
      if (!((*sol)[idx[p]] > 0.0)) return std::nullopt;
    }
    x = *sol;
  }
  return analyze_point(map, x, tol);
}

template <int Dim>
std::optional<FixedPointRecord<Dim>> find_planar_fixed_points(const CompetitiveMap<Dim>& map, int i, int j,
                                                              const Tolerances& tol = {}) {
  if (i == j) throw Error(Errc::InvalidParameter, "planar pair needs distinct indices");
  return find_face_fixed_point<Dim>(map, (Support{1} << i) | (Support{1} << j), std::nullopt, tol);
}

template <int Dim>
std::optional<FixedPointRecord<Dim>> find_interior_fixed_point(const CompetitiveMap<Dim>& map,
                                                               std::optional<Vec<Dim>> seed = std::nullopt,
                                                               const Tolerances& tol = {}) {
  const Support all = (Support{1} << map.dim()) - 1;
  return find_face_fixed_point(map, all, seed, tol);
}

template <int Dim>
FixedPointRecord<Dim> require_interior_fixed_point(const CompetitiveMap<Dim>& map,
                                                   std::optional<Vec<Dim>> seed = std::nullopt,
                                                   const Tolerances& tol = {}) {
  auto q = find_interior_fixed_point(map, seed, tol);
  if (!q) throw Error(Errc::NoInteriorFixedPoint, "no fixed point with full support");
  return *q;
}

template <int Dim>
struct FixedPointCensus {
  std::vector<FixedPointRecord<Dim>> points;  // origin first, then by support size
  std::vector<Support> degenerate_faces;
};

template <int Dim>
FixedPointCensus<Dim> find_all_fixed_points(const CompetitiveMap<Dim>& map, const Tolerances& tol = {}) {
  const int n = map.dim();
  FixedPointCensus<Dim> census;
  census.points.push_back(analyze_point<Dim>(map, Vec<Dim>::Zero(n), tol));
  for (int size = 1; size <= n; ++size) {
    for (Support s = 1; s < (Support{1} << n); ++s) {
      if (support_size(s) != size) continue;
      try {
        if (auto p = find_face_fixed_point<Dim>(map, s, std::nullopt, tol)) census.points.push_back(*p);
      } catch (const Error& e) {
        if (e.code() != Errc::Degenerate && e.code() != Errc::NewtonDiverged) throw;
        census.degenerate_faces.push_back(s);
      }
    }
  }
  return census;
}

}  // namespace csx
