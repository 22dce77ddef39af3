#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace csx;

namespace {

const char* kModel = R"({
  "kind": "atkinson_allen",
  "r": [1.0, 1.0, 1.0],
  "c": [0.5, 0.5, 0.5],
  "A": [[1.0, 1.2, 1.2], [0.5, 1.0, 2.0], [0.5, 2.0, 1.0]]
})";

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error";
  return {};
}

}  // namespace

TEST(ModelIO, RoundTrip) {
  const ModelSpec m = model_from_text(kModel);
  EXPECT_EQ(m.kind, ModelKind::AtkinsonAllen);
  EXPECT_EQ(m.n(), 3);
  const ModelSpec back = model_from_text(to_json(m).dump());
  EXPECT_EQ(back.params.A, m.params.A);
  EXPECT_EQ(*back.params.c, *m.params.c);
  const Vec3 x(0.2, 0.3, 0.4);
  EXPECT_EQ(back.map3()(x), fixtures::class19_aa()(x));
}

TEST(ModelIO, ErrorsNamePointerAndLine) {
  std::string text = kModel;
  text.replace(text.find("2.0, 1.0]]"), 3, "-2.0");
  const auto msg = error_of([&] { model_from_text(text, "m.json"); });
  EXPECT_NE(msg.find("m.json: field /A/2/1 (line 5)"), std::string::npos) << msg;

  const auto kind = error_of([&] { model_from_text(R"({"kind": "logistic", "r": [1], "A": [[1]]})"); });
  EXPECT_NE(kind.find("/kind"), std::string::npos);
  const auto extra = error_of([&] { model_from_text(R"({"kind": "ricker", "r": [1], "A": [[1]], "z": 1})"); });
  EXPECT_NE(extra.find("z"), std::string::npos);
  const auto c = error_of([&] { model_from_text(R"({"kind": "ricker", "r": [1], "c": [0.5], "A": [[1]]})"); });
  EXPECT_NE(c.find("/c"), std::string::npos);
  const auto rows = error_of([&] { model_from_text(R"({"kind": "ricker", "r": [1, 1], "A": [[1, 1]]})"); });
  EXPECT_NE(rows.find("/A"), std::string::npos);
}

TEST(ModelIO, MalformedJsonReportsLineAndColumn) {
  const auto msg = error_of([] { model_from_text("{\n  \"kind\": \"ricker\",\n  \"r\": [1,]\n}", "bad.json"); });
  EXPECT_NE(msg.find("bad.json:3:"), std::string::npos) << msg;
}

TEST(ModelIO, GeneralDimension) {
  const ModelSpec m =
      model_from_text(R"({"kind": "leslie_gower", "r": [1, 1, 1, 1], "A": [[1,0.5,0.5,0.5],[0.5,1,0.5,0.5],[0.5,0.5,1,0.5],[0.5,0.5,0.5,1]]})");
  EXPECT_EQ(m.n(), 4);
  EXPECT_THROW(m.map3(), Error);
  EXPECT_EQ(m.map().dim(), 4);
}

TEST(LocateLine, FollowsPointerTokens) {
  const std::string text = "{\n \"a\": {\n  \"b\": 1,\n  \"c\": {\"b\": 2}\n }\n}";
  EXPECT_EQ(io::locate_line(text, "/a/b"), 3);
  EXPECT_EQ(io::locate_line(text, "/a/c/b"), 4);
  EXPECT_EQ(io::locate_line(text, "/zz"), 0);
}

TEST(Hash, StableAndSeedIndependent) {
  const std::string base = std::string(R"({"model": )") + kModel + R"(, "seed": 3})";
  RunConfig a = config_from_text(base);
  RunConfig b = config_from_text(std::string(R"({"seed": 99, "model": )") + kModel + "}");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  // Explicit defaults hash like omitted ones.
  RunConfig c = config_from_text(std::string(R"({"model": )") + kModel + R"(, "numeric": {"resolution": 64}})");
  EXPECT_EQ(a.hash(), c.hash());
  RunConfig d = config_from_text(std::string(R"({"model": )") + kModel + R"(, "numeric": {"resolution": 32}})");
  EXPECT_NE(a.hash(), d.hash());
  EXPECT_EQ(io::hex64(io::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex64(io::fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Config, RejectsBadNumerics) {
  const std::string pre = std::string(R"({"model": )") + kModel + R"(, "numeric": )";
  EXPECT_THROW(config_from_text(pre + R"({"resolution": 4}})"), Error);
  EXPECT_THROW(config_from_text(pre + R"({"rho": 1.5}})"), Error);
  EXPECT_THROW(config_from_text(pre + R"({"mesh_tol": 0}})"), Error);
  EXPECT_THROW(config_from_text(pre + R"({"bogus": 1}})"), Error);
  EXPECT_THROW(config_from_text(std::string(R"({"model": )") + kModel + R"(, "seed": -1})"), Error);
  const auto opt = simplex_options(config_from_text(pre + R"({"order": 2, "resolution": 16}})").numeric);
  EXPECT_EQ(opt.order, 2);
  EXPECT_EQ(opt.resolution, 16);
}

TEST(MeshIO, RoundTripIsExact) {
  SimplexOptions opt;
  opt.resolution = 16;
  const SimplexMesh m = compute_carrying_simplex(fixtures::class19_lg(), opt);
  const std::string text = io::dump(mesh_to_json(m, {{"command", "simplex"}}), -1);
  const SimplexMesh back = mesh_from_text(text);
  ASSERT_EQ(back.size(), m.size());
  EXPECT_EQ(back.radii, m.radii);
  EXPECT_EQ(back.order, m.order);
  EXPECT_EQ(back.edges.size(), 3u);
  for (const Vec3& u : {Vec3(0.2, 0.3, 0.5), Vec3(0.01, 0.9, 0.09)}) {
    EXPECT_EQ(radial_project(back, u), radial_project(m, u));
  }
  EXPECT_EQ(io::dump(mesh_to_json(back, {{"command", "simplex"}}), -1), text);
}

TEST(MeshIO, RejectsInconsistentDocuments) {
  SimplexOptions opt;
  opt.resolution = 8;
  opt.order = 1;
  opt.adaptive = false;
  const SimplexMesh m = compute_carrying_simplex(fixtures::class19_lg(), opt);
  Json j = mesh_to_json(m);
  j["radii"].erase(0);
  EXPECT_THROW(mesh_from_json(j), Error);
  Json k = mesh_to_json(m);
  k["unexpected"] = 1;
  EXPECT_THROW(mesh_from_json(k), Error);
}

TEST(CurveIO, RoundTrip) {
  ManifoldCurve c;
  c.kind = CurveKind::Stable;
  c.points = {Vec3(0.1, 0.2, 0.3), Vec3(0.15, 0.25, 0.35), Vec3(1.0 / 3, 0.0, 2.0 / 3)};
  c.endpoints[0] = {"r1", Vec3(0.1, 0.2, 0.3), 1e-7};
  c.endpoints[1] = {"r2", Vec3(0.4, 0.0, 0.6), 2e-7};
  c.tol = 1e-7;
  c.finalize();
  const auto back = curves_from_text(io::dump(curves_to_json({c, c}, {{"seed", 1}})));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].kind, CurveKind::Stable);
  EXPECT_EQ(back[0].points, c.points);
  EXPECT_EQ(back[0].endpoints[1].id, "r2");
  EXPECT_EQ(back[0].endpoints[1].distance, 2e-7);
  EXPECT_EQ(back[0].arc_params, c.arc_params);
  // A bare curve document is accepted too.
  EXPECT_EQ(curves_from_text(curve_to_json(c).dump()).size(), 1u);
}

TEST(JsonOutput, SignedZerosFold) {
  const Json j = io::to_json(Vec3(-0.0, 1.0, 0.0));
  EXPECT_EQ(j.dump(), "[0.0,1.0,0.0]");
}
