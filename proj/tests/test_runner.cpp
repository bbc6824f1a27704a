#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rephase/idealgas.hpp"
#include "rephase/runner.hpp"

using namespace rephase;
using doctest::Approx;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

const char* small_config = R"(kind = contrast_decay
[physics]
particles = 2
temperature = 1.5
beta2 = 0.02
g = 0.5
c = 0.02
[cutoffs]
delta_q = 2
[prep]
mode = diagonal
samples = 6
seed = 9
[time]
end = 6
points = 4
)";

std::string series_csv(const RunResult& r) {
  std::ostringstream out;
  write_series_csv(r, out);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const Scenario s = parse(small_config);
  CHECK(s.kind == ScenarioKind::contrast_decay);
  CHECK(s.physics.particles == 2);
  CHECK(s.physics.couplings.g01 == Approx(0.5));
  CHECK(s.physics.couplings.g11 - s.physics.couplings.g01 == Approx(0.02));
  CHECK(s.prep.samples == 6);
  CHECK(s.prep.pulse.has_value());
  CHECK(s.time.values() == std::vector<double>{0.0, 2.0, 4.0, 6.0});

  const Scenario m = parse("kind = gc_map\n[grid]\ng = 0, 0.5\nc = 0.01\nobservable = squeezing_ratio\n");
  CHECK(m.grid.g == std::vector<double>{0.0, 0.5});
  CHECK(m.grid.observable == MapObservable::squeezing_ratio);
  CHECK(parse("[prep]\npulse = none\n").prep.pulse == std::nullopt);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[physics]\nparticels = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nonsense]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[physics]\ntemperature = 3K\n"), ConfigError);
  CHECK_THROWS_AS(parse("[physics]\ng = 0.5\ng01 = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("[physics]\nparticles = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("kind = nothing\n"), ConfigError);
  CHECK_THROWS_AS(parse("[prep]\nmode = sometimes\n"), ConfigError);
  CHECK_THROWS_AS(parse("[time]\npoints = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[run]\nbasis = everything\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("a run is reproducible from its manifest") {
  const Scenario s = parse(small_config);
  const RunResult r = run_scenario(s);
  REQUIRE(r.exit_code() == 0);
  const auto dir = std::filesystem::temp_directory_path() / "rephase_test_manifest";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir / "series.csv"));
  const Scenario again = load_scenario(dir / "manifest.json");
  CHECK(to_json(again) == to_json(s));
  CHECK(series_csv(run_scenario(again)) == series_csv(r));
  std::filesystem::remove_all(dir);
}

TEST_CASE("results do not depend on the thread count") {
  Scenario s = parse(small_config);
  const auto one = series_csv(run_scenario(s));
  s.threads = 3;
  CHECK(series_csv(run_scenario(s)) == one);
}

TEST_CASE("different seeds draw different samples") {
  Scenario s = parse(small_config);
  const auto a = series_csv(run_scenario(s));
  s.prep.seed = 10;
  CHECK(series_csv(run_scenario(s)) != a);
}

TEST_CASE("series invariants") {
  const RunResult r = run_scenario(parse(small_config));
  REQUIRE(r.series.size() == 1);
  const auto& pts = r.series[0].points;
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].coherence_normalized == Approx(1.0).epsilon(1e-10));
  for (const auto& p : pts) {
    double total = 0.0;
    for (double x : p.populations) total += x;
    CHECK(total == Approx(1.0).epsilon(1e-8));
    CHECK(p.norm == Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(p.moments.mean(2)) < 1e-8);
    CHECK(p.energy == Approx(pts[0].energy).epsilon(1e-8));
    CHECK(p.leakage >= 0.0);
  }
  CHECK(r.samples.size() == 6);
}

TEST_CASE("a one-point map reproduces the time series at the snapshot") {
  Scenario s = parse(small_config);
  const RunResult series = run_scenario(s);
  s.kind = ScenarioKind::gc_map;
  s.grid.g = {0.5};
  s.grid.c = {0.02};
  s.grid.snapshot = 6.0;
  s.grid.observable = MapObservable::max_sector;
  const RunResult map = run_scenario(s);
  REQUIRE(map.map.size() == 1);
  const auto& last = series.series[0].points.back();
  CHECK(map.map[0].value == Approx(last.max_sector()).epsilon(1e-12));
  CHECK(map.map[0].sx == Approx(last.moments.mean(0)).epsilon(1e-12));
}

TEST_CASE("squeezing ratio is one at the non-interacting point") {
  Scenario s = parse(small_config);
  s.kind = ScenarioKind::gc_map;
  s.physics.particles = 3;
  s.prep.theta_tact = 0.1;
  s.grid.g = {0.0, 0.5};
  s.grid.c = {0.0};
  s.grid.observable = MapObservable::squeezing_ratio;
  s.time.end = 40.0;
  s.time.points = 41;
  s.grid.snapshot = 40.0;
  s.physics.beta2 = 0.1;
  const RunResult r = run_scenario(s);
  REQUIRE(r.map.size() == 2);
  REQUIRE(r.map[0].crossing.has_value());
  CHECK(r.map[0].value == Approx(1.0));
  CHECK(r.map[1].value > 0.0);
}

TEST_CASE("non-interacting exhaustive ensemble matches the ideal canonical gas") {
  Scenario s = parse(small_config);
  s.physics.couplings = {};
  s.physics.temperature = 1.0;
  s.physics.beta2 = 0.05;
  s.prep.mode = PrepMode::exhaustive;
  s.physics.cutoffs.delta_q = 6;
  s.prep.exhaustive_tail = 1e-7;
  s.time.end = 10.0;
  s.time.points = 6;
  const RunResult r = run_scenario(s);
  REQUIRE(r.exit_code() == 0);
  CHECK(r.omitted_weight < 1e-7);
  for (const auto& p : r.series[0].points) {
    const double ref = contrast_canonical_exact(2, 1.0, 0.0, 0.05, p.t).normalized;
    CHECK(p.coherence_normalized == Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("capacity errors are reported with exit code 3") {
  Scenario s = parse(small_config);
  s.physics.cutoffs.max_dimension = 3;
  const RunResult r = run_scenario(s);
  CHECK(r.capacity_error);
  CHECK(r.exit_code() == 3);
  CHECK_FALSE(r.failures.empty());
}
