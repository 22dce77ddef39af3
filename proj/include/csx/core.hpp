#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csx {

enum class Errc {
  InvalidParameter,
  NoAxialFixedPoint,
  Degenerate,
  NoInteriorFixedPoint,
  NewtonDiverged,
  SingularJacobian,
  NonHyperbolic,
  EigenvalueOne,
  NonConvergence,
  ZeroVector,
  TooFewNeighbors,
  EmptyNeighborhood,
  C1Violated,
  NotASaddle,
  NoUnstableEigendirection,
  BranchDidNotTerminate,
  SegmentNotStraddling,
  UnresolvedOrbit,
  DegenerateDenominator,
  TieOnBoundary,
  DimensionMismatch,
  ConfigError,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NoAxialFixedPoint: return "NoAxialFixedPoint";
    case Errc::Degenerate: return "Degenerate";
    case Errc::NoInteriorFixedPoint: return "NoInteriorFixedPoint";
    case Errc::NewtonDiverged: return "NewtonDiverged";
    case Errc::SingularJacobian: return "SingularJacobian";
    case Errc::NonHyperbolic: return "NonHyperbolic";
    case Errc::EigenvalueOne: return "EigenvalueOne";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::TooFewNeighbors: return "TooFewNeighbors";
    case Errc::EmptyNeighborhood: return "EmptyNeighborhood";
    case Errc::C1Violated: return "C1Violated";
    case Errc::NotASaddle: return "NotASaddle";
    case Errc::NoUnstableEigendirection: return "NoUnstableEigendirection";
    case Errc::BranchDidNotTerminate: return "BranchDidNotTerminate";
    case Errc::SegmentNotStraddling: return "SegmentNotStraddling";
    case Errc::UnresolvedOrbit: return "UnresolvedOrbit";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::TieOnBoundary: return "TieOnBoundary";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Support kappa(x) = { i : x_i > 0 } as a bitmask (bit i set for species i).
using Support = std::uint32_t;

template <typename Derived>
Support support_of(const Eigen::MatrixBase<Derived>& x) {
  Support s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) s |= Support{1} << i;
  }
  return s;
}

inline int support_size(Support s) { return __builtin_popcount(s); }

inline std::vector<int> support_indices(Support s, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (s & (Support{1} << i)) out.push_back(i);
  }
  return out;
}

inline bool support_contains(Support s, int i) { return (s >> i) & 1u; }

/// Numerical thresholds shared across modules.
struct Tolerances {
  double hyperbolic = 1e-9;       // band around modulus 1
  double fixed_residual = 1e-10;  // relative ||T(x)-x|| acceptance
  double singular = 1e-14;        // relative determinant threshold
};

}  // namespace csx
