// simulate <config> [--out DIR] [--seed S] [--threads K] [--freeze-spatial] [--samples N]

#include <CLI11.hpp>

#include <iostream>

#include "rephase/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Two-level bosons in a harmonic trap with an inhomogeneous field: spin dephasing,\n"
      "self-rephasing and squeezing protection.\n\n"
      "The config is an INI file. Top level: kind = contrast_decay | sector_population |\n"
      "squeezing_decay | gc_map | idealgas_fig1 | freeze_spatial_map (default contrast_decay).\n"
      "Sections and defaults:\n"
      "  [physics]    particles=5 temperature=3 beta0=0 beta1=0 beta2=0.01\n"
      "               g=0.5 c=0.01 (or g00/g01/g11)\n"
      "  [cutoffs]    modes=64 delta_q=4 max_dimension=4000000\n"
      "  [prep]       mode=diagonal|exhaustive|qmc|eigen samples=16 seed=1 theta=0\n"
      "               pulse=pi/2|none|<radians> exhaustive_tail=1e-6 qmc_max_quanta=30\n"
      "               eigen_max_quanta=6\n"
      "  [time]       start=0 end=50 points=101\n"
      "  [grid]       g=0,0.25,0.5,0.75,1 c=0,0.02 snapshot=50\n"
      "               observable=max_sector|sx|coherence|squeezing_ratio threshold=1\n"
      "  [propagator] krylov_dim=30 tol=1e-9 max_substep=2 max_substeps=1000000\n"
      "  [run]        threads=1 basis=sub_basis|frozen_spatial\n"
      "A manifest.json from an earlier run is accepted in place of the config.\n\n"
      "Exit codes: 0 success, 2 config error, 3 capacity error, 4 partial failure."};
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> samples;
  bool freeze = false;
  app.add_option("config", config, "Scenario config (INI) or manifest.json")->required();
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Override prep.seed");
  app.add_option("--threads", threads, "Override run.threads")->check(CLI::PositiveNumber);
  app.add_option("--samples", samples, "Override prep.samples")->check(CLI::PositiveNumber);
  app.add_flag("--freeze-spatial", freeze, "Restrict every sample basis to its spatial profile");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  rephase::Scenario scenario;
  try {
    scenario = rephase::load_scenario(config);
    if (seed) scenario.prep.seed = *seed;
    if (threads) scenario.threads = *threads;
    if (samples) scenario.prep.samples = *samples;
    if (freeze) scenario.basis = rephase::BasisPolicy::frozen_spatial;
    scenario.validate();
  } catch (const rephase::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto result = rephase::run_scenario(scenario);
    rephase::write_outputs(result, out);
    for (const auto& f : result.failures) std::cerr << "failed point: " << f << '\n';
    return result.exit_code();
  } catch (const rephase::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const rephase::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
