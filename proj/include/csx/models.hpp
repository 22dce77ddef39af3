#pragma once

// Kolmogorov competitive maps T(x) = (x_1 F_1(x), ..., x_n F_n(x)) with
// analytic partials. Three builtin families plus caller-supplied maps.

#include "csx/core.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace csx {

enum class ModelKind { LeslieGower, AtkinsonAllen, Ricker, Custom };

constexpr std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::LeslieGower: return "leslie_gower";
    case ModelKind::AtkinsonAllen: return "atkinson_allen";
    case ModelKind::Ricker: return "ricker";
    case ModelKind::Custom: return "custom";
  }
  return "custom";
}

template <int Dim>
struct ParameterSet {
  Vec<Dim> r;
  std::optional<Vec<Dim>> c;  // survival fractions, Atkinson-Allen only
  Mat<Dim> A;

  int n() const { return static_cast<int>(r.size()); }
};

using ParameterSet3 = ParameterSet<3>;
using ParameterSetX = ParameterSet<Eigen::Dynamic>;

/// Checks the positivity invariants for the given family. Off-diagonal
/// couplings may be zero (decoupled species); the existence checks flag that.
template <int Dim>
void validate(const ParameterSet<Dim>& p, ModelKind kind) {
  const int n = p.n();
  if (n < 1) throw Error(Errc::InvalidParameter, "dimension must be positive");
  if (p.A.rows() != n || p.A.cols() != n) {
    throw Error(Errc::InvalidParameter, "A must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (!(p.r[i] > 0.0) || !std::isfinite(p.r[i])) {
      throw Error(Errc::InvalidParameter, "r[" + std::to_string(i) + "] must be > 0");
    }
    for (int j = 0; j < n; ++j) {
      const double a = p.A(i, j);
      if (!std::isfinite(a) || a < 0.0 || (i == j && !(a > 0.0))) {
        throw Error(Errc::InvalidParameter,
                    "A[" + std::to_string(i) + "][" + std::to_string(j) + "] must be " +
                        (i == j ? "> 0" : ">= 0"));
      }
    }
  }
  if (kind == ModelKind::AtkinsonAllen) {
    if (!p.c || p.c->size() != n) throw Error(Errc::InvalidParameter, "Atkinson-Allen requires c of length n");
    for (int i = 0; i < n; ++i) {
      if (!((*p.c)[i] > 0.0 && (*p.c)[i] < 1.0)) {
        throw Error(Errc::InvalidParameter, "c[" + std::to_string(i) + "] must lie in (0,1)");
      }
    }
  } else if (p.c) {
    throw Error(Errc::InvalidParameter, "c is only meaningful for Atkinson-Allen");
  }
}

template <int Dim>
class CompetitiveMap {
 public:
  using Vector = Vec<Dim>;
  using Matrix = Mat<Dim>;
  using GrowthFn = std::function<Vector(const Vector&)>;
  using PartialsFn = std::function<Matrix(const Vector&)>;

  CompetitiveMap(ModelKind kind, ParameterSet<Dim> params) : kind_(kind), params_(std::move(params)) {
    if (kind_ == ModelKind::Custom) throw Error(Errc::InvalidParameter, "use CompetitiveMap::custom");
    validate(params_, kind_);
    n_ = params_.n();
  }

  /// A caller-defined map; both F and its partials must be supplied.
  static CompetitiveMap custom(int n, GrowthFn growth, PartialsFn partials) {
    if (!growth || !partials) throw Error(Errc::InvalidParameter, "custom maps need F and dF/dx");
    CompetitiveMap m;
    m.kind_ = ModelKind::Custom;
    m.n_ = n;
    m.growth_ = std::move(growth);
    m.partials_ = std::move(partials);
    return m;
  }

  ModelKind kind() const { return kind_; }
  bool builtin() const { return kind_ != ModelKind::Custom; }
  const ParameterSet<Dim>& params() const { return params_; }
  int dim() const { return n_; }

  /// F(x), the per-capita growth factors.
  Vector growth(const Vector& x) const {
    switch (kind_) {
      case ModelKind::LeslieGower: {
        const Vector s = params_.A * x;
        return ((Vector::Ones(n_) + params_.r).array() / (1.0 + params_.r.array() * s.array())).matrix();
      }
      case ModelKind::AtkinsonAllen: {
        const Vector s = params_.A * x;
        return ((1.0 + params_.r.array()) * (1.0 - params_.c->array()) / (1.0 + params_.r.array() * s.array()) +
                params_.c->array())
            .matrix();
      }
      case ModelKind::Ricker: {
        const Vector s = params_.A * x;
        return (params_.r.array() * (1.0 - s.array())).exp().matrix();
      }
      case ModelKind::Custom: return growth_(x);
    }
    return Vector::Zero(n_);
  }

  /// dF_i/dx_j.
  Matrix growth_partials(const Vector& x) const {
    Matrix d(n_, n_);
    switch (kind_) {
      case ModelKind::LeslieGower:
      case ModelKind::AtkinsonAllen: {
        const Vector s = params_.A * x;
        for (int i = 0; i < n_; ++i) {
          const double ri = params_.r[i];
          const double den = 1.0 + ri * s[i];
          double scale = -(1.0 + ri) * ri / (den * den);
          if (kind_ == ModelKind::AtkinsonAllen) scale *= 1.0 - (*params_.c)[i];
          d.row(i) = scale * params_.A.row(i);
        }
        return d;
      }
      case ModelKind::Ricker: {
        const Vector f = growth(x);
        for (int i = 0; i < n_; ++i) d.row(i) = -params_.r[i] * f[i] * params_.A.row(i);
        return d;
      }
      case ModelKind::Custom: return partials_(x);
    }
    return d;
  }

  Vector operator()(const Vector& x) const { return x.cwiseProduct(growth(x)); }

  /// DT(x)_ij = delta_ij F_i(x) + x_i dF_i/dx_j(x).
  Matrix jacobian(const Vector& x) const {
    Matrix j = x.asDiagonal() * growth_partials(x);
    j.diagonal() += growth(x);
    return j;
  }

 private:
  CompetitiveMap() = default;

  ModelKind kind_ = ModelKind::Custom;
  ParameterSet<Dim> params_;
  int n_ = 0;
  GrowthFn growth_;
  PartialsFn partials_;
};

using Map3 = CompetitiveMap<3>;
using MapX = CompetitiveMap<Eigen::Dynamic>;

template <int Dim>
CompetitiveMap<Dim> make_leslie_gower(ParameterSet<Dim> p) {
  return CompetitiveMap<Dim>(ModelKind::LeslieGower, std::move(p));
}

template <int Dim>
CompetitiveMap<Dim> make_atkinson_allen(ParameterSet<Dim> p) {
  return CompetitiveMap<Dim>(ModelKind::AtkinsonAllen, std::move(p));
}

template <int Dim>
CompetitiveMap<Dim> make_ricker(ParameterSet<Dim> p) {
  return CompetitiveMap<Dim>(ModelKind::Ricker, std::move(p));
}

template <int Dim>
CompetitiveMap<Dim> make_map(ModelKind kind, ParameterSet<Dim> p) {
  return CompetitiveMap<Dim>(kind, std::move(p));
}

template <int Dim>
Vec<Dim> eval_map(const CompetitiveMap<Dim>& map, const Vec<Dim>& x) {
  return map(x);
}

template <int Dim>
Mat<Dim> eval_jacobian(const CompetitiveMap<Dim>& map, const Vec<Dim>& x) {
  return map.jacobian(x);
}

/// Converts a dynamically sized parameter set to a fixed dimension.
template <int Dim>
ParameterSet<Dim> fix_dimension(const ParameterSetX& p) {
  if (Dim != Eigen::Dynamic && p.n() != Dim) {
    throw Error(Errc::DimensionMismatch, "expected n = " + std::to_string(Dim) + ", got " + std::to_string(p.n()));
  }
  ParameterSet<Dim> out;
  out.r = p.r;
  out.A = p.A;
  if (p.c) out.c = Vec<Dim>(*p.c);
  return out;
}

}  // namespace csx
