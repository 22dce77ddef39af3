// End-to-end acceptance run: one PASS/FAIL line per criterion, with
// indented detail lines for anything that failed. Exits non-zero when any
// criterion fails.

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace csx;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const Verdict& v, const std::string& summary) {
  std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, summary.c_str());
  for (const auto& n : v.notes) std::printf("      %s\n", n.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

// Per-system artifacts shared by criteria 4 to 9.
struct System {
  fixtures::SampledSystem s;
  std::optional<SimplexMesh> mesh;
  std::string mesh_error;
  std::optional<SaddleStructure> st;
  std::optional<PseudoSplitting<3>> split;
};

void criterion1() {
  Verdict v;
  const Vec3 q = fixtures::class19_matrix().inverse() * Vec3::Ones();
  double worst_q = 0.0, worst_j = 0.0;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Map3& map : {fixtures::class19_lg(), fixtures::class19_aa(), fixtures::class19_ricker()}) {
    const double rq = (map(q) - q).norm();
    worst_q = std::max(worst_q, rq);
    v.require(rq < 1e-12, std::string(to_string(map.kind())) + " ||T(q) - q|| = " + fmt(rq));
    const Vec3 w = axial_vector(map);
    for (int k = 0; k < 1000; ++k) {
      const Vec3 x(2 * w[0] * u(rng), 2 * w[1] * u(rng), 2 * w[2] * u(rng));
      const Mat3 j = map.jacobian(x);
      const double err = (j - oracles::fd_jacobian(map, x)).cwiseAbs().maxCoeff() / std::max(1.0, j.cwiseAbs().maxCoeff());
      worst_j = std::max(worst_j, err);
    }
  }
  v.require(worst_j < 1e-5, "Jacobian mismatch " + fmt(worst_j));
  v.require(ricker_condition(fixtures::class19_ricker().params()).pass, "Ricker r = 0.2 fails the closed-form bound");
  report(1, "fixed_point_algebra", v, "max ||T(q)-q|| " + fmt(worst_q) + ", max Jacobian error " + fmt(worst_j));
}

void criterion2() {
  Verdict v;
  const auto res = classify_table1(fixtures::class19_matrix());
  v.require(res.class_id == 19, "class19 matrix not class 19");
  v.require(permutation_label(res.permutation) == "identity", "permutation " + permutation_label(res.permutation));
  v.require(std::abs(res.beta_values[0] - 0.8) <= 1e-12, "beta expression " + fmt(res.beta_values[0]));
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> diag(0.5, 1.5), off(0.1, 2.5);
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<Permutation> perms;
  Permutation s{0, 1, 2};
  do perms.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));
  int relabelings = 0, oracle_checked = 0, mismatches = 0, attempts = 0;
  while (relabelings < 1000 && attempts < 1000000) {
    ++attempts;
    Mat3 a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = i % 4 == 0 ? diag(rng) : off(rng);
    std::optional<int> got;
    try {
      got = classify_table1(a).class_id;
    } catch (const Error&) {
      continue;
    }
    ++oracle_checked;
    if (got != oracles::table_class(a)) ++mismatches;
    if (!got) continue;
    try {
      const auto b = classify_table1(relabel(a, perms[pick(rng)]));
      if (b.class_id != got) ++mismatches;
    } catch (const Error&) {
      ++mismatches;
    }
    ++relabelings;
  }
  v.require(relabelings == 1000, "only " + std::to_string(relabelings) + " relabelings");
  v.require(mismatches == 0, std::to_string(mismatches) + " disagreements with the brute-force oracle or relabeling");
  bool degenerate = false;
  try {
    classify_table1(Mat3::Constant(1.0));
  } catch (const Error& e) {
    degenerate = e.code() == Errc::DegenerateDenominator;
  }
  v.require(degenerate, "all-equal matrix not refused with DegenerateDenominator");
  report(2, "classification", v,
         "class " + std::to_string(res.class_id.value_or(0)) + " " + permutation_label(res.permutation) + ", beta " +
             fmt(res.beta_values[0]) + ", " + std::to_string(oracle_checked) + " oracle checks, " +
             std::to_string(relabelings) + " relabelings");
}

void criterion3(const std::vector<System>& systems) {
  Verdict v;
  for (const auto& sys : systems) {
    try {
      const auto q = require_interior_fixed_point(sys.s.map);
      v.require(q.c1_holds, sys.s.label + ": (C1) fails");
      v.require(saddle_eigenstructure(q.eigenvalues, 1e-9), sys.s.label + ": eigenvalues not 0 < mu < l1 < 1 < l2");
      v.require(q.index && *q.index == -1, sys.s.label + ": index not -1");
    } catch (const Error& e) {
      v.require(false, sys.s.label + ": " + e.what());
    }
  }
  report(3, "regime_consistency", v, std::to_string(systems.size()) + " sampled systems in classes 19-25");
}

void criterion4(const std::vector<System>& systems) {
  Verdict v;
  double worst_rel = 0.0;
  int res_fail = 0;
  for (const auto& sys : systems) {
    if (!sys.mesh) {
      v.require(false, sys.s.label + ": " + sys.mesh_error);
      continue;
    }
    const auto& m = *sys.mesh;
    const Map3& map = sys.s.map;
    const Vec3 w = axial_vector(map);
    const double wn = w.norm(), h = m.edge_length();
    v.require(m.converged && m.residual < 1e-8, sys.s.label + ": mesh not converged");
    const auto un = unordered_check(m, 1e-6 * wn);
    v.require(un.empty(), sys.s.label + ": " + std::to_string(un.size()) + " ordered vertex pairs");
    const double res = invariance_residual(map, m);
    worst_rel = std::max(worst_rel, res / wn);
    if (!(res < 1e-4 * wn)) ++res_fail;
    v.require(res < 1e-4 * wn, sys.s.label + ": invariance residual " + fmt(res / wn) + " ||w||");
    bool box = true;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const Vec3 x = m.vertex(k);
      box = box && (x.array() >= 0.0).all() && (x.array() <= w.array() * (1 + 1e-6)).all();
    }
    v.require(box, sys.s.label + ": vertex outside [0, w](1 + 1e-6)");
    const SurfaceDistance dist(m);
    for (const auto& p : find_all_fixed_points(map).points) {
      if (p.support == 0) continue;
      v.require(dist(p.location) <= h, sys.s.label + ": fixed point " + fixed_point_name(p.location) + " off mesh");
    }
  }
  const SimplexMesh plane = compute_carrying_simplex(fixtures::symmetric_plane_lg());
  double plane_err = 0.0;
  for (std::size_t k = 0; k < plane.size(); ++k) plane_err = std::max(plane_err, std::abs(plane.vertex(k).sum() - 1.0));
  v.require(plane_err < 1e-6, "symmetric plane |sum rho u - 1| = " + fmt(plane_err));
  report(4, "carrying_simplex_invariants", v,
         "max invariance residual " + fmt(worst_rel) + " ||w|| (" + std::to_string(res_fail) +
             " over 1e-4), plane error " + fmt(plane_err));
}

void criterion5(std::vector<System>& systems, std::vector<std::vector<ManifoldCurve>>& curves) {
  Verdict v;
  int tested = 0;
  curves.assign(systems.size(), {});
  for (std::size_t k = 0; k < systems.size(); ++k) {
    auto& sys = systems[k];
    if (!sys.mesh || !sys.st || !sys.st->four_point_boundary() || !sys.split) continue;
    ++tested;
    const Map3& map = sys.s.map;
    const double wn = axial_vector(map).norm(), h = sys.mesh->edge_length();
    try {
      const auto un = trace_unstable(map, *sys.split, sys.st->attractors);
      const bool ends = (un.endpoints[0].id == "a1" && un.endpoints[1].id == "a2") ||
                        (un.endpoints[0].id == "a2" && un.endpoints[1].id == "a1");
      v.require(ends && std::max(un.endpoints[0].distance, un.endpoints[1].distance) <= 1e-5 * wn,
                sys.s.label + ": unstable curve ends " + un.endpoints[0].id + "/" + un.endpoints[1].id);
      const SurfaceDistance dist(*sys.mesh);
      double far = 0.0;
      for (const auto& p : un.points) far = std::max(far, dist(p));
      v.require(far <= 2 * h, sys.s.label + ": unstable point " + fmt(far) + " from mesh");
      const auto& st = *sys.st;
      const auto sc = trace_stable_on_S(map, *sys.mesh, *sys.split, st.repellers[0], st.repellers[1],
                                        st.attractors[0], st.attractors[1]);
      v.require(sc.endpoints[0].id == "r1" && sc.endpoints[1].id == "r2" &&
                    std::max(sc.endpoints[0].distance, sc.endpoints[1].distance) <= 1e-5 * wn,
                sys.s.label + ": stable curve ends");
      const double qd = detail::point_polyline_distance(sys.split->q, sc.points);
      v.require(qd <= 1e-7 * wn, sys.s.label + ": q is " + fmt(qd) + " from the stable curve");
      const std::vector<Vec3> att{st.attractors[0].x, st.attractors[1].x};
      const auto ras = raster_basins(map, *sys.mesh, att, sys.split->q, 200, 50000, 1e-4 * wn);
      const auto rc = count_regions(ras, un, st.repellers[0].x);
      v.require(rc.components == 4 && rc.unresolved_components == 0,
                sys.s.label + ": " + std::to_string(rc.components) + " regions");
      curves[k] = {un, sc};
    } catch (const Error& e) {
      v.require(false, sys.s.label + ": " + e.what());
    }
  }
  report(5, "manifold_structure", v, std::to_string(tested) + " systems with two attractors and two repellers");
}

void criterion6(const std::vector<System>& systems) {
  Verdict v;
  int worst_iter = 0, unresolved_total = 0;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const Map3& map = systems[s].s.map;
    const Vec3 w = axial_vector(map);
    const auto census = find_all_fixed_points(map);
    std::mt19937_64 rng(1000 + s);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int unresolved = 0;
    for (int k = 0; k < 500; ++k) {
      Vec3 x(u(rng) * 2 * w[0], u(rng) * 2 * w[1], u(rng) * 2 * w[2]);
      bool done = false;
      int it = 0;
      for (; it <= 50000 && !done; ++it) {
        for (const auto& p : census.points) {
          if ((x - p.location).norm() < 1e-6) {
            done = true;
            break;
          }
        }
        if (!done) x = map(x);
      }
      worst_iter = std::max(worst_iter, it);
      unresolved += !done;
    }
    unresolved_total += unresolved;
    v.require(unresolved == 0, systems[s].s.label + ": " + std::to_string(unresolved) + " unresolved orbits");
  }
  report(6, "trivial_dynamics", v,
         std::to_string(unresolved_total) + " unresolved of " + std::to_string(500 * systems.size()) +
             ", max iterations " + std::to_string(worst_iter));
}

void criterion7(const std::vector<System>& systems) {
  Verdict v;
  double worst_ratio = 0.0, worst_mu = 0.0;
  for (const auto& sys : systems) {
    if (!sys.split) {
      v.require(false, sys.s.label + ": no splitting");
      continue;
    }
    const auto& sp = *sys.split;
    const auto leaf = leaf_contraction_report(sys.s.map, sp);
    worst_ratio = std::max(worst_ratio, leaf.max_ratio / leaf.rho);
    v.require(leaf.pass(), sys.s.label + ": leaf " + std::string(to_string(leaf.status)) + " ratio " +
                               fmt(leaf.max_ratio) + " rho " + fmt(leaf.rho));
    double first = 0.0, last = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double t = 1e-4 * sp.q.norm() / (1 << k);
      const double err = std::abs(leaf_ratio_at<3>(sys.s.map, sp.q, sp.v, t) - sp.mu);
      if (k == 0) first = err;
      last = err;
      v.require(err < 1e-3, sys.s.label + ": |ratio - mu| = " + fmt(err));
    }
    worst_mu = std::max(worst_mu, last);
    v.require(last <= first * (1 + 1e-6) + 1e-12, sys.s.label + ": ratio at q moves away from mu");
    const double lambda1 = std::abs(sp.w_eigenvalues.front());
    const double sigma = std::min(sp.default_sigma(sp.default_rho()), 0.99 * lambda1);
    v.require(m2_expansion_search(sp.restricted(), sigma).l.has_value(), sys.s.label + ": no l for sigma < lambda1");
    v.require(!m2_expansion_search(sp.restricted(), sp.nu).l.has_value(), sys.s.label + ": l found for sigma = nu");
  }
  report(7, "foliation_diagnostics", v,
         "max ratio/rho " + fmt(worst_ratio) + ", max |ratio at q - mu| " + fmt(worst_mu));
}

void criterion8(const std::vector<System>& systems) {
  Verdict v;
  double worst = 1.0;
  for (const auto& sys : systems) {
    if (!sys.split || !sys.mesh) continue;
    const auto rep = conjugacy_decay_report(sys.s.map, *sys.mesh, *sys.split);
    worst = std::min(worst, rep.pass_fraction);
    v.require(rep.pass_fraction >= 0.9, sys.s.label + ": pass fraction " + fmt(rep.pass_fraction));
  }
  report(8, "conjugacy_decay", v, "min pass fraction " + fmt(worst));
}

void criterion9(const std::vector<System>& systems) {
  Verdict v;
  double worst_rise = -1e300;
  for (const auto& sys : systems) {
    if (!sys.split || !sys.mesh) continue;
    const double h = sys.mesh->edge_length();
    try {
      double prev = 1e300;
      for (double f : {8.0, 4.0, 2.0}) {
        const double a = estimate_tangent_cone(*sys.mesh, sys.split->q, f * h, sys.split->w_basis).angle_to_W;
        if (prev < 1e300) worst_rise = std::max(worst_rise, a - prev);
        v.require(a <= prev + 2 * h, sys.s.label + ": angle rises to " + fmt(a) + " at " + fmt(f) + "h");
        prev = a;
      }
    } catch (const Error& e) {
      v.require(false, sys.s.label + ": " + e.what());
    }
  }
  const Map3 plane_map = fixtures::symmetric_plane_lg();
  const SimplexMesh plane = compute_carrying_simplex(plane_map);
  const Vec3 q = Vec3::Constant(1.0 / 3);
  double plane_angle = 0.0;
  try {
    const auto sp = pseudo_splitting(plane_map, q);
    const double h = plane.edge_length();
    for (double f : {8.0, 4.0, 2.0}) {
      plane_angle = std::max(plane_angle, estimate_tangent_cone(plane, q, f * h, sp.w_basis).angle_to_W);
    }
    v.require(plane_angle < 1e-3, "symmetric plane angle " + fmt(plane_angle));
  } catch (const Error& e) {
    v.require(false, std::string("symmetric plane: ") + e.what());
  }
  report(9, "tangent_cones", v, "largest angle rise " + fmt(worst_rise) + " rad, plane angle " + fmt(plane_angle));
}

void criterion10() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / "csx_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = (dir / "run.json").string();
  io::write_file(cfg, R"({
  "model": {"kind": "atkinson_allen", "r": [1, 1, 1], "c": [0.5, 0.5, 0.5],
            "A": [[1, 1.2, 1.2], [0.5, 1, 2], [0.5, 2, 1]]},
  "numeric": {"resolution": 32},
  "seed": 11
})");
  auto run = [&](int (*cmd)(const CliOptions&, CommandIO), const std::string& out, const std::string& mesh) {
    CliOptions o;
    o.config = cfg;
    o.out = (dir / out).string();
    o.mesh = mesh;
    std::ostringstream so, se;
    const int code = cmd(o, CommandIO{so, se});
    return std::make_pair(code, io::read_file(o.out));
  };
  const std::string mesh = (dir / "mesh_a.json").string();
  const auto a1 = run(cmd_analyze, "analyze_a.json", ""), a2 = run(cmd_analyze, "analyze_b.json", "");
  const auto m1 = run(cmd_simplex, "mesh_a.json", ""), m2 = run(cmd_simplex, "mesh_b.json", "");
  const auto v1 = run(cmd_verify, "verify_a.json", mesh), v2 = run(cmd_verify, "verify_b.json", mesh);
  const auto p1 = run(cmd_portrait, "p_a.svg", mesh), p2 = run(cmd_portrait, "p_b.svg", mesh);
  v.require(a1.first == 0 && a1.second == a2.second, "analyze outputs differ");
  v.require(m1.first == 0 && m1.second == m2.second, "simplex outputs differ");
  v.require(v1.second == v2.second && !v1.second.empty(), "verify outputs differ");
  v.require(p1.first == 0 && p1.second == p2.second, "portrait outputs differ");
  fs::remove_all(dir);
  report(10, "determinism", v,
         "analyze, simplex, verify and portrait outputs compared byte for byte (" +
             std::to_string(a1.second.size() + m1.second.size() + v1.second.size() + p1.second.size()) + " bytes)");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();

  std::vector<System> systems;
  for (auto& s : fixtures::sample_systems(20)) {
    System sys{s, std::nullopt, {}, std::nullopt, std::nullopt};
    try {
      sys.mesh = compute_carrying_simplex(s.map);
    } catch (const Error& e) {
      sys.mesh_error = e.what();
    }
    try {
      sys.st = identify_saddle_structure(s.map);
      sys.split = pseudo_splitting(s.map, sys.st->q.location);
    } catch (const Error&) {
    }
    systems.push_back(std::move(sys));
  }
  if (systems.size() != 20) std::printf("      sampler returned %zu systems\n", systems.size());

  criterion3(systems);
  criterion4(systems);
  std::vector<std::vector<ManifoldCurve>> curves;
  criterion5(systems, curves);
  criterion6(systems);
  criterion7(systems);
  criterion8(systems);
  criterion9(systems);
  criterion10();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 10 criteria failed (%.0f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
