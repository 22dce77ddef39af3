// Command-line front end: analyze, classify, simplex, portrait, verify.

#include "csx/commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Carrying simplex analysis for three-species competitive maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(csx::kVersion));

  csx::CliOptions opt;
  std::uint64_t seed = 0;
  int resolution = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "run configuration (JSON)");
    sub->add_option("--out", opt.out, "output path (default: configured path or stdout)");
    sub->add_flag("--strict", opt.strict, "treat warnings and row errors as failures");
    sub->add_option("--seed", seed, "seed for randomized sampling");
    sub->add_option("--resolution", resolution, "mesh resolution N (>= 8)");
  };

  auto* analyze = app.add_subcommand("analyze", "fixed points, spectra, (C1), index and existence checks");
  common(analyze);
  auto* classify = app.add_subcommand("classify", "classify interaction matrices read from CSV");
  common(classify);
  classify->add_option("input,--input", opt.input, "CSV with columns a11..a33")->required();
  classify->add_flag("--json", opt.json, "emit full classification records as JSON");
  auto* simplex = app.add_subcommand("simplex", "compute the carrying simplex mesh");
  common(simplex);
  auto* portrait = app.add_subcommand("portrait", "render the phase portrait on S as SVG");
  common(portrait);
  portrait->add_option("--mesh", opt.mesh, "mesh JSON (default: outputs.mesh)");
  portrait->add_option("--curves", opt.curves, "curves JSON (default: outputs.curves, else traced)");
  portrait->add_flag("--no-basins", opt.no_basins, "omit basin shading");
  auto* verify = app.add_subcommand("verify", "run every invariant check and report margins");
  common(verify);
  verify->add_option("--mesh", opt.mesh, "reuse a mesh JSON instead of recomputing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : csx::kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--resolution")) opt.resolution = resolution;
  }

  csx::CommandIO io;
  if (*analyze) return csx::cmd_analyze(opt, io);
  if (*classify) return csx::cmd_classify(opt, io);
  if (*simplex) return csx::cmd_simplex(opt, io);
  if (*portrait) return csx::cmd_portrait(opt, io);
  return csx::cmd_verify(opt, io);
}
