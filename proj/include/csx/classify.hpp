#pragma once

// Equivalence classes 19-25 of three-species competitive maps, decided from
// the alpha/beta inequality systems over all relabelings of the species.

#include "csx/existence.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace csx {

/// alpha_ij = a_ii - a_ji, beta_ij = (a_jj - a_ij) / (a_ii a_jj - a_ij a_ji); diagonals unused.
struct AlphaBeta {
  Mat3 alpha = Mat3::Zero();
  Mat3 beta = Mat3::Zero();
};

inline void require_positive(const Mat3& a) {
  if (!(a.array() > 0.0).all() || !a.allFinite()) {
    throw Error(Errc::InvalidParameter, "interaction matrix must be entrywise positive");
  }
}

inline AlphaBeta compute_alpha_beta(const Mat3& a) {
  require_positive(a);
  const double scale = a.cwiseAbs().maxCoeff();
  AlphaBeta ab;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double den = a(i, i) * a(j, j) - a(i, j) * a(j, i);
      if (std::abs(den) < 1e-12 * scale * scale) {
        throw Error(Errc::DegenerateDenominator,
                    "a" + std::to_string(i + 1) + std::to_string(i + 1) + " a" + std::to_string(j + 1) +
                        std::to_string(j + 1) + " - a" + std::to_string(i + 1) + std::to_string(j + 1) + " a" +
                        std::to_string(j + 1) + std::to_string(i + 1) + " vanishes");
      }
      ab.alpha(i, j) = a(i, i) - a(j, i);
      ab.beta(i, j) = (a(j, j) - a(i, j)) / den;
    }
  }
  return ab;
}

using Permutation = std::array<int, 3>;

/// a'_ij = a_{s(i) s(j)}.
inline Mat3 relabel(const Mat3& a, const Permutation& s) {
  Mat3 out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out(i, j) = a(s[i], s[j]);
  }
  return out;
}

inline std::string permutation_label(const Permutation& s) {
  if (s == Permutation{0, 1, 2}) return "identity";
  std::string out;
  for (int k : s) out += static_cast<char>('1' + k);
  return out;
}

struct ClassMargin {
  std::string label;
  double value = 0.0;  // positive iff the inequality holds
};

namespace detail {

// Alpha order: 12, 13, 21, 23, 31, 32.
inline constexpr std::array<std::array<int, 2>, 6> kAlphaPairs{{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};

struct BetaCondition {
  int expr;  // 0: a12 b23 + a13 b32, 1: a21 b13 + a23 b31, 2: a31 b12 + a32 b21
  int side;  // -1: < 1, +1: > 1
};

struct ClassRule {
  int id;
  std::array<int, 6> alpha_sign;
  std::vector<BetaCondition> beta;
};

inline const std::vector<ClassRule>& table1_rules() {
  static const std::vector<ClassRule> rules{
      {19, {+1, +1, -1, -1, -1, -1}, {{0, -1}}},
      {20, {-1, -1, -1, -1, +1, -1}, {{0, -1}, {2, -1}}},
      {21, {-1, -1, -1, +1, -1, +1}, {{0, +1}, {1, -1}, {2, -1}}},
      {22, {+1, +1, -1, -1, +1, -1}, {{0, -1}, {1, +1}}},
      {23, {+1, +1, +1, +1, -1, -1}, {{2, +1}}},
      {24, {+1, +1, +1, +1, -1, +1}, {{0, +1}, {2, +1}}},
      {25, {+1, +1, +1, -1, +1, -1}, {{0, -1}, {1, +1}, {2, +1}}},
  };
  return rules;
}

inline std::array<double, 3> beta_expressions(const Mat3& a, const AlphaBeta& ab) {
  return {a(0, 1) * ab.beta(1, 2) + a(0, 2) * ab.beta(2, 1), a(1, 0) * ab.beta(0, 2) + a(1, 2) * ab.beta(2, 0),
          a(2, 0) * ab.beta(0, 1) + a(2, 1) * ab.beta(1, 0)};
}

inline const char* beta_expression_label(int e) {
  static const char* labels[] = {"a12*b23+a13*b32", "a21*b13+a23*b31", "a31*b12+a32*b21"};
  return labels[e];
}

inline std::string alpha_label(int k) {
  return "alpha" + std::to_string(kAlphaPairs[k][0] + 1) + std::to_string(kAlphaPairs[k][1] + 1);
}

}  // namespace detail

inline constexpr double kTieBand = 1e-10;

struct ClassificationResult {
  std::optional<int> class_id;  // empty: outside the tabulated classes
  Permutation permutation{0, 1, 2};
  AlphaBeta alpha_beta;          // of the relabeled matrix
  std::vector<ClassMargin> margins;
  std::array<int, 6> alpha_signs{};  // of the input matrix, for manual lookup
  std::array<double, 3> beta_values{};  // the three beta expressions after relabeling

  bool tabulated() const { return class_id.has_value(); }
};

/// Margins of one class rule for an already relabeled matrix. Alpha margins
/// are normalized by max|a|; beta margins are 1 - B or B - 1.
inline std::vector<ClassMargin> rule_margins(const detail::ClassRule& rule, const Mat3& a, const AlphaBeta& ab) {
  const double scale = a.cwiseAbs().maxCoeff();
  std::vector<ClassMargin> out;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = detail::kAlphaPairs[k];
    out.push_back({detail::alpha_label(k) + (rule.alpha_sign[k] > 0 ? ">0" : "<0"),
                   rule.alpha_sign[k] * ab.alpha(i, j) / scale});
  }
  const auto b = detail::beta_expressions(a, ab);
  for (const auto& c : rule.beta) {
    out.push_back({std::string(detail::beta_expression_label(c.expr)) + (c.side > 0 ? ">1" : "<1"),
                   c.side * (b[c.expr] - 1.0)});
  }
  return out;
}

/// First (permutation, class) in lexicographic permutation order whose
/// inequalities all hold strictly. Refuses when a system fails only through
/// margins inside the tie band.
inline ClassificationResult classify_table1(const Mat3& a) {
  const AlphaBeta base = compute_alpha_beta(a);
  ClassificationResult result;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = detail::kAlphaPairs[k];
    result.alpha_signs[k] = base.alpha(i, j) > 0 ? 1 : base.alpha(i, j) < 0 ? -1 : 0;
  }
  Permutation s{0, 1, 2};
  bool tie = false;
  do {
    const Mat3 ap = relabel(a, s);
    const AlphaBeta ab = compute_alpha_beta(ap);
    for (const auto& rule : detail::table1_rules()) {
      auto margins = rule_margins(rule, ap, ab);
      const bool strict = std::all_of(margins.begin(), margins.end(),
                                      [](const ClassMargin& m) { return m.value > kTieBand; });
      if (strict) {
        result.class_id = rule.id;
        result.permutation = s;
        result.alpha_beta = ab;
        result.margins = std::move(margins);
        result.beta_values = detail::beta_expressions(ap, ab);
        return result;
      }
      const bool near = std::all_of(margins.begin(), margins.end(),
                                    [](const ClassMargin& m) { return m.value >= -kTieBand; });
      tie = tie || near;
    }
  } while (std::next_permutation(s.begin(), s.end()));
  if (tie) throw Error(Errc::TieOnBoundary, "an inequality margin lies within 1e-10 of zero");
  result.alpha_beta = base;
  result.beta_values = detail::beta_expressions(a, base);
  return result;
}

/// Classification joined with the interior fixed point and its cross-checks.
struct ClassifiedSystem {
  ClassificationResult classification;
  std::optional<FixedPoint3> interior;
  std::optional<RickerConditionReport> ricker;
  bool saddle_confirmed = false;
  std::vector<std::string> warnings;
};

/// 0 < mu < lambda1 < 1 < lambda2, all real, band tol around 1.
inline bool saddle_eigenstructure(const std::vector<Complex>& ev, double tol = 1e-9) {
  if (ev.size() != 3) return false;
  for (const auto& l : ev) {
    if (std::abs(l.imag()) > 1e-12) return false;
  }
  const double mu = ev[0].real(), l1 = ev[1].real(), l2 = ev[2].real();
  return mu > 0.0 && mu < l1 && l1 < 1.0 - tol && l2 > 1.0 + tol;
}

inline ClassifiedSystem classify_and_analyze(const Map3& map, const Tolerances& tol = {}) {
  if (!map.builtin()) throw Error(Errc::InvalidParameter, "classification needs a builtin model");
  ClassifiedSystem out;
  out.classification = classify_table1(map.params().A);
  if (map.kind() == ModelKind::Ricker) {
    out.ricker = ricker_condition(map.params());
    if (!out.ricker->pass) {
      out.warnings.emplace_back("carrying simplex unverified: Ricker growth rates exceed the sufficient bound");
    }
  }
  out.interior = find_interior_fixed_point<3>(map, std::nullopt, tol);
  const bool tabulated = out.classification.tabulated();
  if (!out.interior) {
    if (tabulated) out.warnings.emplace_back("no interior fixed point although the class predicts one");
    return out;
  }
  const auto& q = *out.interior;
  out.saddle_confirmed = saddle_eigenstructure(q.eigenvalues, tol.hyperbolic) && q.c1_holds;
  if (tabulated) {
    if (!q.index || *q.index != -1) out.warnings.emplace_back("interior index differs from -1");
    if (!out.saddle_confirmed) {
      out.warnings.emplace_back("interior eigenstructure is not 0 < mu < lambda1 < 1 < lambda2 with (C1)");
    }
  }
  return out;
}

}  // namespace csx
