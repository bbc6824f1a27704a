#pragma once

// Experiment orchestration: scenario configs, ensemble time series, (g, c)
// maps, the frozen-spatial ablation and result persistence.

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rephase/observables.hpp"
#include "rephase/prep.hpp"
#include "rephase/propagate.hpp"

namespace rephase {

enum class ScenarioKind {
  contrast_decay,
  sector_population,
  squeezing_decay,
  gc_map,
  idealgas_fig1,
  freeze_spatial_map,
};

/// Quantity reported in the `value` column of a map.
enum class MapObservable {
  max_sector,       ///< p_{N/2} at the snapshot time
  sx,               ///< <S_x> at the snapshot time
  coherence,        ///< C / (N/2) at the snapshot time
  squeezing_ratio,  ///< t(xi^2 > 1) / t(xi^2 > 1 at g = c = 0)
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeGrid {
  double start = 0.0;
  double end = 50.0;
  int points = 101;

  std::vector<double> values() const;
};

struct CouplingGrid {
  std::vector<double> g{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> c{0.0, 0.02};
  double snapshot = 50.0;
  MapObservable observable = MapObservable::max_sector;
  double squeezing_threshold = 1.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::contrast_decay;
  PhysicsParams physics;
  PrepConfig prep;
  PropagatorConfig propagator;
  TimeGrid time;
  CouplingGrid grid;
  BasisPolicy basis = BasisPolicy::sub_basis;
  /// Highest Q of the basis diagonalized by the eigen prep mode.
  int eigen_max_quanta = 6;
  int threads = 1;

  /// Throws ConfigError.
  void validate() const;
  bool is_map() const {
    return kind == ScenarioKind::gc_map || kind == ScenarioKind::freeze_spatial_map;
  }
};

/// Parses the key-value config (INI layout, top-level `kind`, sections
/// physics, cutoffs, prep, time, grid, propagator, run). Throws ConfigError.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

std::string_view to_string(ScenarioKind k);
std::string_view to_string(MapObservable o);

/// Ensemble observables at one time.
struct EnsemblePoint {
  double t = 0.0;
  SpinMoments moments;
  double coherence = 0.0;
  double coherence_normalized = 0.0;
  std::optional<double> xi2;
  std::vector<double> populations;  ///< ordered as EnsembleSeries::two_j
  double norm = 0.0;
  double energy = 0.0;
  double leakage = 0.0;  ///< weight in the highest quanta shell of the basis
  double se_sx = 0.0;
  double se_sy = 0.0;
  double se_max_sector = 0.0;
  double se_energy = 0.0;

  double max_sector() const { return populations.back(); }
};

struct EnsembleSeries {
  double g00 = 0.0, g01 = 0.0, g11 = 0.0;
  std::vector<int> two_j;
  std::vector<EnsemblePoint> points;
  bool failed = false;
  std::string error;
};

struct SampleSummary {
  std::string seed;
  int quanta = 0;
  double weight = 0.0;
  std::size_t dimension = 0;
  std::size_t nonzeros = 0;
  double hamiltonian_leakage = 0.0;
};

struct MapRow {
  double g = 0.0, c = 0.0;
  double value = 0.0;
  double max_sector = 0.0;
  double sx = 0.0;
  double coherence = 0.0;
  std::optional<double> xi2;
  std::optional<double> crossing;  ///< t(xi^2 > threshold)
  bool censored = false;           ///< threshold not reached by the horizon
  bool failed = false;
  std::string error;
};

struct RunResult {
  Scenario scenario;
  /// One per grid point (maps) or a single entry (time series kinds).
  std::vector<EnsembleSeries> series;
  std::vector<std::pair<double, double>> grid_points;  ///< (g, c) per series
  std::vector<MapRow> map;
  std::vector<StatisticsRow> statistics;  ///< idealgas_fig1
  std::vector<SampleSummary> samples;
  PropagationStats propagation;
  double omitted_weight = 0.0;
  double wall_seconds = 0.0;
  bool capacity_error = false;
  std::vector<std::string> failures;

  /// 0 success, 3 capacity error, 4 partial failure.
  int exit_code() const;
};

/// Runs the scenario. Per-point failures are recorded, not thrown.
RunResult run_scenario(const Scenario& s);
/// The same pipeline with every sample basis frozen to its spatial profile.
RunResult run_freeze_spatial(Scenario s);

/// Ensemble series for one coupling set; the building block of both.
/// `couplings` overrides s.physics.couplings for every listed point.
std::vector<EnsembleSeries> run_ensemble(const Scenario& s, const std::vector<Couplings>& couplings,
                                         std::vector<SampleSummary>* samples = nullptr,
                                         PropagationStats* stats = nullptr,
                                         double* omitted_weight = nullptr);

/// Map row for one series (value filled according to the scenario).
MapRow summarize_point(const Scenario& s, const EnsembleSeries& series);

void write_series_csv(const RunResult& r, std::ostream& out);
void write_map_csv(const RunResult& r, std::ostream& out);
nlohmann::json manifest(const RunResult& r);
/// series.csv or map.csv plus manifest.json into `dir` (created if needed).
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

inline constexpr const char* version = "0.1.0";

}  // namespace rephase
