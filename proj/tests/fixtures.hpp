#pragma once

// Shared parameter sets and the rejection sampler for class 19-25 systems.

#include "csx/csx.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline csx::Mat3 class19_matrix() {
  csx::Mat3 a;
  a << 1.0, 1.2, 1.2, 0.5, 1.0, 2.0, 0.5, 2.0, 1.0;
  return a;
}

inline csx::ParameterSet<3> params(const csx::Vec3& r, const csx::Mat3& a) {
  csx::ParameterSet<3> p;
  p.r = r;
  p.A = a;
  return p;
}

inline csx::Map3 class19_lg() { return csx::make_leslie_gower(params(csx::Vec3(1.0, 1.0, 1.0), class19_matrix())); }

inline csx::Map3 class19_aa() {
  auto p = params(csx::Vec3(1.0, 1.0, 1.0), class19_matrix());
  p.c = csx::Vec3(0.5, 0.5, 0.5);
  return csx::make_atkinson_allen(p);
}

inline csx::Map3 class19_ricker() { return csx::make_ricker(params(csx::Vec3(0.2, 0.2, 0.2), class19_matrix())); }

/// Leslie-Gower with r = (1,1,1) and every a_ij = 1: S is the plane sum x = 1.
inline csx::Map3 symmetric_plane_lg() {
  return csx::make_leslie_gower(params(csx::Vec3(1.0, 1.0, 1.0), csx::Mat3::Ones()));
}

struct SampledSystem {
  csx::Map3 map;
  int class_id;
  std::string label;
};

/// Rejection sampler cycling through the three builtins. Accepts systems that
/// classify into 19-25 and pass the sampled existence checks.
inline std::vector<SampledSystem> sample_systems(int count, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> diag(0.5, 1.5), off(0.2, 2.5), rate(0.2, 2.0), surv(0.1, 0.7),
      frac(0.3, 0.95);
  std::vector<SampledSystem> out;
  const csx::ModelKind kinds[] = {csx::ModelKind::LeslieGower, csx::ModelKind::AtkinsonAllen, csx::ModelKind::Ricker};
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 200000) {
    ++attempts;
    const auto kind = kinds[out.size() % 3];
    csx::Mat3 a;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a(i, j) = i == j ? diag(rng) : off(rng);
    }
    csx::ParameterSet<3> p;
    p.A = a;
    if (kind == csx::ModelKind::Ricker) {
      p.r = csx::Vec3::Ones();
      const auto cond = csx::ricker_condition(p);
      double bound = 1e300;
      for (const auto& s : cond.species) bound = std::min(bound, std::max(s.diagonal_threshold, s.scaled_threshold));
      p.r = csx::Vec3::Constant(frac(rng) * bound);
      for (int i = 0; i < 3; ++i) p.r[i] *= 1.0 - 0.05 * (i * frac(rng));
    } else {
      p.r = csx::Vec3(rate(rng), rate(rng), rate(rng));
      if (kind == csx::ModelKind::AtkinsonAllen) p.c = csx::Vec3(surv(rng), surv(rng), surv(rng));
    }
    try {
      const auto cls = csx::classify_table1(a);
      if (!cls.class_id) continue;
      auto map = csx::make_map(kind, p);
      if (!csx::check_existence(map).pass()) continue;
      out.push_back({map, *cls.class_id,
                     std::string(csx::to_string(kind)) + "/class" + std::to_string(*cls.class_id) + "/#" +
                         std::to_string(out.size())});
    } catch (const csx::Error&) {
      continue;
    }
  }
  return out;
}

}  // namespace fixtures
