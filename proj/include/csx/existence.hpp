#pragma once

// Sampled verification of the carrying-simplex existence conditions
// (A1)-(A3), and the closed-form sufficient condition for the Ricker family.

#include "csx/analysis.hpp"

#include <limits>
#include <string>
#include <vector>

namespace csx {

struct SampledCheck {
  bool pass = false;
  double margin = 0.0;
  std::size_t samples = 0;
};

template <int Dim>
struct AxialCheck {
  bool pass = false;
  std::optional<Vec<Dim>> w;
  std::string diagnostic;
};

template <int Dim>
struct ExistenceReport {
  SampledCheck a1;
  AxialCheck<Dim> a2;
  SampledCheck a3;
  int grid_resolution = 25;
  double pad = 0.1;

  bool pass() const { return a1.pass && a2.pass && a3.pass; }
};

namespace detail {

// Calls f(x) for every point of the tensor grid {k/grid * upper_i : k = k0..grid}
// restricted to the coordinates in `support` (others zero).
template <int Dim, typename F>
void for_each_grid_point(const Vec<Dim>& upper, Support support, int grid, int k0, F&& f) {
  const int n = static_cast<int>(upper.size());
  const auto idx = support_indices(support, n);
  std::vector<int> k(idx.size(), k0);
  Vec<Dim> x = Vec<Dim>::Zero(n);
  while (true) {
    for (std::size_t a = 0; a < idx.size(); ++a) x[idx[a]] = upper[idx[a]] * k[a] / grid;
    f(x);
    std::size_t a = 0;
    while (a < idx.size() && ++k[a] > grid) k[a++] = k0;
    if (a == idx.size()) break;
  }
}

}  // namespace detail

/// (A1): every sampled dF_i/dx_j < 0 over [0, w(1+pad)]; margin is the
/// largest sampled partial.
template <int Dim>
SampledCheck check_A1(const CompetitiveMap<Dim>& map, const Vec<Dim>& w, int grid = 25, double pad = 0.1) {
  SampledCheck out;
  out.margin = -std::numeric_limits<double>::infinity();
  const Support all = (Support{1} << map.dim()) - 1;
  detail::for_each_grid_point<Dim>(w * (1.0 + pad), all, grid, 0, [&](const Vec<Dim>& x) {
    out.margin = std::max(out.margin, map.growth_partials(x).maxCoeff());
    ++out.samples;
  });
  out.pass = out.margin < 0.0;
  return out;
}

template <int Dim>
AxialCheck<Dim> check_A2(const CompetitiveMap<Dim>& map) {
  AxialCheck<Dim> out;
  try {
    const Vec<Dim> w = axial_vector(map);
    out.pass = (w.array() > 0.0).all();
    out.w = w;
    if (!out.pass) out.diagnostic = "non-positive axial coordinate";
  } catch (const Error& e) {
    out.pass = false;
    out.diagnostic = e.what();
  }
  return out;
}

/// (A3) over [0,w] \ {0}, stratified by support: for each sample x and each
/// i in kappa(x), at least one of
///   F_i + sum_{j in kappa} x_j dF_i/dx_j,   F_i + sum_{j in kappa} x_i dF_i/dx_j
/// must be positive. Margin = min over samples of the larger of the two.
template <int Dim>
SampledCheck check_A3(const CompetitiveMap<Dim>& map, const Vec<Dim>& w, int grid = 25) {
  SampledCheck out;
  out.margin = std::numeric_limits<double>::infinity();
  const int n = map.dim();
  for (Support s = 1; s < (Support{1} << n); ++s) {
    const auto idx = support_indices(s, n);
    detail::for_each_grid_point<Dim>(w, s, grid, 1, [&](const Vec<Dim>& x) {
      const Vec<Dim> f = map.growth(x);
      const Mat<Dim> d = map.growth_partials(x);
      for (int i : idx) {
        double sum_xj = 0.0, sum_d = 0.0;
        for (int j : idx) {
          sum_xj += x[j] * d(i, j);
          sum_d += d(i, j);
        }
        const double e1 = f[i] + sum_xj;
        const double e2 = f[i] + x[i] * sum_d;
        out.margin = std::min(out.margin, std::max(e1, e2));
      }
      ++out.samples;
    });
  }
  out.pass = out.margin > 0.0;
  return out;
}

template <int Dim>
ExistenceReport<Dim> check_existence(const CompetitiveMap<Dim>& map, int grid = 25, double pad = 0.1) {
  ExistenceReport<Dim> rep;
  rep.grid_resolution = grid;
  rep.pad = pad;
  rep.a2 = check_A2(map);
  if (!rep.a2.pass) return rep;
  rep.a1 = check_A1(map, *rep.a2.w, grid, pad);
  rep.a3 = check_A3(map, *rep.a2.w, grid);
  return rep;
}

struct RickerSpeciesCondition {
  double r = 0.0;
  double diagonal_threshold = 0.0;  // a_ii / sum_j a_ij
  double scaled_threshold = 0.0;    // 1 / sum_j (a_ij / a_jj)
  bool pass = false;
};

struct RickerConditionReport {
  std::vector<RickerSpeciesCondition> species;
  bool pass = false;
};

/// Closed-form sufficient condition for (A1)-(A3) in the Ricker family:
/// r_i < a_ii / sum_j a_ij  or  r_i < 1 / sum_j (a_ij / a_jj), for every i.
template <int Dim>
RickerConditionReport ricker_condition(const ParameterSet<Dim>& p) {
  RickerConditionReport rep;
  rep.pass = true;
  const int n = p.n();
  for (int i = 0; i < n; ++i) {
    RickerSpeciesCondition s;
    s.r = p.r[i];
    double row = 0.0, scaled = 0.0;
    for (int j = 0; j < n; ++j) {
      row += p.A(i, j);
      scaled += p.A(i, j) / p.A(j, j);
    }
    s.diagonal_threshold = p.A(i, i) / row;
    s.scaled_threshold = 1.0 / scaled;
    s.pass = s.r < s.diagonal_threshold || s.r < s.scaled_threshold;
    rep.pass = rep.pass && s.pass;
    rep.species.push_back(s);
  }
  return rep;
}

}  // namespace csx
