#include "rephase/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace rephase {

std::vector<double> TimeGrid::values() const {
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i)
    t[i] = points == 1 ? start : start + (end - start) * i / (points - 1);
  return t;
}

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::contrast_decay: return "contrast_decay";
    case ScenarioKind::sector_population: return "sector_population";
    case ScenarioKind::squeezing_decay: return "squeezing_decay";
    case ScenarioKind::gc_map: return "gc_map";
    case ScenarioKind::idealgas_fig1: return "idealgas_fig1";
    case ScenarioKind::freeze_spatial_map: return "freeze_spatial_map";
  }
  return "?";
}

std::string_view to_string(MapObservable o) {
  switch (o) {
    case MapObservable::max_sector: return "max_sector";
    case MapObservable::sx: return "sx";
    case MapObservable::coherence: return "coherence";
    case MapObservable::squeezing_ratio: return "squeezing_ratio";
  }
  return "?";
}

void Scenario::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    physics.validate();
    prep.validate();
    propagator.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (physics.temperature < 0.0) fail("temperature must be >= 0");
  if (physics.cutoffs.modes < 1) fail("cutoffs.modes must be >= 1");
  if (physics.cutoffs.delta_q < 0) fail("cutoffs.delta_q must be >= 0");
  if (time.points < 1) fail("time.points must be >= 1");
  if (time.points > 1 && !(time.end > time.start)) fail("time grid must be strictly increasing");
  if (time.start < 0.0) fail("time.start must be >= 0");
  if (threads < 1) fail("run.threads must be >= 1");
  if (eigen_max_quanta < 0) fail("prep.eigen_max_quanta must be >= 0");
  if (is_map()) {
    if (grid.g.empty() || grid.c.empty()) fail("grid.g and grid.c must be non-empty");
    if (grid.observable != MapObservable::squeezing_ratio &&
        (grid.snapshot < time.start || grid.snapshot > time.end))
      fail("grid.snapshot must lie inside the time grid");
  }
  if ((prep.mode == PrepMode::qmc || prep.mode == PrepMode::eigen) && !(physics.temperature > 0.0))
    fail("qmc and eigen preparation need temperature > 0");
  if (kind == ScenarioKind::idealgas_fig1 && !(physics.temperature > 0.0))
    fail("idealgas_fig1 needs temperature > 0");
}

// ---------------------------------------------------------------------------
// ensemble engine

namespace {

std::vector<double> run_times(const Scenario& s) {
  auto t = s.time.values();
  if (s.is_map() && s.grid.observable != MapObservable::squeezing_ratio) {
    t.push_back(s.grid.snapshot);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            t.end());
  }
  return t;
}

// Weighted sums at one time, merged across samples in a fixed order.
struct Accumulator {
  double w = 0.0;
  SpinMoments moments;
  std::vector<double> populations;
  double norm = 0.0, energy = 0.0, leakage = 0.0;
  // for ratio-estimator standard errors of (S_x, S_y, p_max, energy)
  double w2 = 0.0;
  double w2a[4] = {0, 0, 0, 0};
  double w2aa[4] = {0, 0, 0, 0};
  std::size_t count = 0;

  void add(double weight, const SpinMoments& m, const std::vector<double>& p, double nrm,
           double e, double leak) {
    if (populations.empty()) populations.assign(p.size(), 0.0);
    w += weight;
    moments += m * weight;
    for (std::size_t j = 0; j < p.size(); ++j) populations[j] += weight * p[j];
    norm += weight * nrm;
    energy += weight * e;
    leakage += weight * leak;
    const double a[4] = {m.mean(0), m.mean(1), p.back(), e};
    w2 += weight * weight;
    for (int k = 0; k < 4; ++k) {
      w2a[k] += weight * weight * a[k];
      w2aa[k] += weight * weight * a[k] * a[k];
    }
    ++count;
  }

  void merge(const Accumulator& o) {
    if (o.count == 0) return;
    if (populations.empty()) populations.assign(o.populations.size(), 0.0);
    w += o.w;
    moments += o.moments;
    for (std::size_t j = 0; j < populations.size(); ++j) populations[j] += o.populations[j];
    norm += o.norm;
    energy += o.energy;
    leakage += o.leakage;
    w2 += o.w2;
    for (int k = 0; k < 4; ++k) {
      w2a[k] += o.w2a[k];
      w2aa[k] += o.w2aa[k];
    }
    count += o.count;
  }
};

struct PointResult {
  std::vector<Accumulator> times;
  bool failed = false;
  bool capacity = false;
  std::string error;
};

struct EntryResult {
  std::vector<PointResult> points;
  std::vector<SampleSummary> summaries;
  PropagationStats stats;
};

// One unit of work: a spatial seed (diagonal, exhaustive), a QMC draw, or the
// whole eigen ensemble.
struct Entry {
  std::vector<int> spatial;
  double weight = 1.0;
  std::uint64_t stream = 0;
};

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::vector<char> top_shell_mask(const EnumeratedBasis& basis, const FockState& seed,
                                 const Scenario& s) {
  std::vector<char> mask(basis.size(), 0);
  if (s.basis == BasisPolicy::frozen_spatial || s.prep.mode == PrepMode::eigen) return mask;
  const int cap = seed.quanta() + s.physics.cutoffs.delta_q;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    int q = 0;
    auto sl = basis.slots(i);
    for (std::size_t k = 0; k < sl.size(); ++k) q += static_cast<int>(k / 2) * sl[k];
    mask[i] = q >= cap - 1;
  }
  return mask;
}

struct Prepared {
  WeightedSample sample;
  std::shared_ptr<const CollectiveSpin> spin;
  std::shared_ptr<const SectorProjectors> projectors;
  std::vector<char> top;
};

Prepared prepare(const Scenario& s, WeightedSample sample,
                 std::shared_ptr<const CollectiveSpin> spin = nullptr,
                 std::shared_ptr<const SectorProjectors> projectors = nullptr) {
  Prepared p;
  if (!spin) spin = std::make_shared<const CollectiveSpin>(build_collective_spin(sample.basis));
  if (!projectors) projectors = std::make_shared<const SectorProjectors>(build_sector_projectors(*spin));
  p.spin = std::move(spin);
  p.projectors = std::move(projectors);
  p.top = top_shell_mask(*sample.basis, sample.seed, s);
  prepare_spin(sample, *p.spin, s.prep);
  p.sample = std::move(sample);
  return p;
}

void evolve_and_record(const Scenario& s, const std::vector<double>& times, const Prepared& p,
                       const Hamiltonian& h, double weight, PointResult& out,
                       PropagationStats& stats) {
  Eigen::VectorXcd psi = p.sample.state;
  double now = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > now) {
      psi = evolve_real(psi, h.op.matrix, times[k] - now, s.propagator, &stats);
      now = times[k];
    }
    const double nrm = psi.squaredNorm();
    const Eigen::VectorXcd unit = psi / std::sqrt(nrm);
    const SpinMoments m = spin_moments(*p.spin, unit);
    const auto pops = sector_populations(*p.projectors, unit);
    const double energy = unit.dot(h.op.matrix * unit).real();
    double leak = 0.0;
    for (Eigen::Index i = 0; i < unit.size(); ++i)
      if (p.top[static_cast<std::size_t>(i)]) leak += std::norm(unit(i));
    out.times[k].add(weight, m, pops, nrm, energy, leak);
  }
}

SampleSummary summarize(const WeightedSample& w, const Hamiltonian* h, double weight) {
  SampleSummary out;
  out.seed = w.seed.to_string();
  out.quanta = w.seed.quanta();
  out.weight = weight;
  out.dimension = w.basis->size();
  if (h) {
    out.nonzeros = static_cast<std::size_t>(h->op.nonzeros());
    out.hamiltonian_leakage = h->leakage.max_column;
  }
  return out;
}

EntryResult run_entry(const Scenario& s, const Entry& e, const std::vector<Couplings>& couplings,
                      const std::vector<double>& times) {
  EntryResult r;
  r.points.resize(couplings.size());
  for (auto& p : r.points) p.times.resize(times.size());

  std::optional<Prepared> fixed;  // H-independent preparation
  auto fail_point = [&](std::size_t k, const std::exception& ex, bool capacity) {
    r.points[k].failed = true;
    r.points[k].capacity = capacity;
    r.points[k].error = ex.what();
    for (auto& acc : r.points[k].times) acc = Accumulator{};
  };

  for (std::size_t k = 0; k < couplings.size(); ++k) {
    PhysicsParams params = s.physics;
    params.couplings = couplings[k];
    try {
      switch (s.prep.mode) {
        case PrepMode::diagonal:
        case PrepMode::exhaustive: {
          if (!fixed) {
            WeightedSample w;
            w.seed = FockState::spin_down(e.spatial);
            w.basis = sample_basis(params, w.seed, s.basis);
            w.state = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(w.basis->size()));
            w.state(static_cast<Eigen::Index>(*w.basis->index_of(w.seed.resized(w.basis->modes())))) = 1.0;
            w.mode = s.prep.mode;
            w.weight = e.weight;
            fixed = prepare(s, std::move(w));
          }
          const Hamiltonian h = build_hamiltonian(params, fixed->sample.basis);
          if (k == 0) r.summaries.push_back(summarize(fixed->sample, &h, e.weight));
          evolve_and_record(s, times, *fixed, h, e.weight, r.points[k], r.stats);
          break;
        }
        case PrepMode::qmc: {
          Rng rng = stream_rng(s.prep.seed, e.stream);
          WeightedSample w =
              sample_thermal_qmc(params, s.prep.qmc_max_quanta, rng, s.basis, s.propagator);
          const double weight = w.weight;
          Prepared p = fixed ? prepare(s, std::move(w), fixed->spin, fixed->projectors)
                             : prepare(s, std::move(w));
          if (!fixed) fixed = p;
          const Hamiltonian h = build_hamiltonian(params, p.sample.basis);
          if (k == 0) r.summaries.push_back(summarize(p.sample, &h, weight));
          evolve_and_record(s, times, p, h, weight, r.points[k], r.stats);
          break;
        }
        case PrepMode::eigen: {
          auto basis = std::make_shared<const EnumeratedBasis>(enumerate_basis(
              {params.particles, std::min(params.cutoffs.modes, s.eigen_max_quanta + 1),
               s.eigen_max_quanta, std::nullopt, params.cutoffs.max_dimension}));
          auto ensemble = thermal_eigen_ensemble(params, basis);
          const Hamiltonian h = build_hamiltonian(params, basis);
          auto spin = std::make_shared<const CollectiveSpin>(build_collective_spin(basis));
          auto projectors = std::make_shared<const SectorProjectors>(build_sector_projectors(*spin));
          for (auto& w : ensemble) {
            const double weight = w.weight;
            if (weight < 1e-14) continue;
            if (k == 0) r.summaries.push_back(summarize(w, &h, weight));
            const Prepared p = prepare(s, std::move(w), spin, projectors);
            evolve_and_record(s, times, p, h, weight, r.points[k], r.stats);
          }
          break;
        }
      }
    } catch (const CapacityError& ex) {
      fail_point(k, ex, true);
    } catch (const std::exception& ex) {
      fail_point(k, ex, false);
    }
  }
  return r;
}

double ratio_se(const Accumulator& a, int k, double mean) {
  if (a.count < 2 || a.w <= 0.0) return 0.0;
  const double ss = a.w2aa[k] - 2.0 * mean * a.w2a[k] + mean * mean * a.w2;
  const double n = static_cast<double>(a.count);
  return std::sqrt(std::max(0.0, ss) * n / (n - 1.0)) / a.w;
}

EnsemblePoint finish(const Accumulator& a, double t, int particles, bool deterministic) {
  EnsemblePoint p;
  p.t = t;
  if (a.w <= 0.0) return p;
  p.moments = a.moments * (1.0 / a.w);
  p.coherence = coherence(p.moments);
  p.coherence_normalized = coherence_normalized(p.moments, particles);
  p.xi2 = squeezing(p.moments, particles);
  p.populations = a.populations;
  for (double& x : p.populations) x /= a.w;
  p.norm = a.norm / a.w;
  p.energy = a.energy / a.w;
  p.leakage = a.leakage / a.w;
  if (!deterministic) {
    p.se_sx = ratio_se(a, 0, p.moments.mean(0));
    p.se_sy = ratio_se(a, 1, p.moments.mean(1));
    p.se_max_sector = ratio_se(a, 2, p.populations.back());
    p.se_energy = ratio_se(a, 3, p.energy);
  }
  return p;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  const int extra = std::min<int>(threads, static_cast<int>(n)) - 1;
  std::vector<std::jthread> pool;
  for (int i = 0; i < extra; ++i) pool.emplace_back(worker);
  worker();
}

}  // namespace

std::vector<EnsembleSeries> run_ensemble(const Scenario& s, const std::vector<Couplings>& couplings,
                                         std::vector<SampleSummary>* samples,
                                         PropagationStats* stats, double* omitted_weight) {
  const auto times = run_times(s);
  std::vector<Entry> entries;
  switch (s.prep.mode) {
    case PrepMode::diagonal:
      for (int i = 0; i < s.prep.samples; ++i) {
        Rng rng = stream_rng(s.prep.seed, static_cast<std::uint64_t>(i));
        entries.push_back({sample_thermal_configuration(s.physics.particles, s.physics.temperature, rng),
                           1.0, static_cast<std::uint64_t>(i)});
      }
      break;
    case PrepMode::exhaustive: {
      auto list = enumerate_thermal_configurations(s.physics.particles, s.physics.temperature,
                                                   s.prep.exhaustive_tail);
      if (omitted_weight) *omitted_weight = list.omitted_weight;
      for (auto& c : list.configurations) entries.push_back({std::move(c.spatial), c.weight, 0});
      break;
    }
    case PrepMode::qmc:
      for (int i = 0; i < s.prep.samples; ++i) entries.push_back({{}, 1.0, static_cast<std::uint64_t>(i)});
      break;
    case PrepMode::eigen:
      entries.push_back({});
      break;
  }

  std::vector<EntryResult> results(entries.size());
  parallel_for(entries.size(), s.threads,
               [&](std::size_t i) { results[i] = run_entry(s, entries[i], couplings, times); });

  const auto two_j = spin_sector_twice_j(s.physics.particles);
  const bool deterministic = s.prep.mode == PrepMode::exhaustive || s.prep.mode == PrepMode::eigen;
  std::vector<EnsembleSeries> out(couplings.size());
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    EnsembleSeries& series = out[k];
    series.g00 = couplings[k].g00;
    series.g01 = couplings[k].g01;
    series.g11 = couplings[k].g11;
    series.two_j = two_j;
    std::vector<Accumulator> total(times.size());
    for (const auto& r : results) {
      const PointResult& pr = r.points[k];
      if (pr.failed) {
        series.failed = true;
        if (series.error.empty()) series.error = pr.error;
        if (pr.capacity) series.error = "capacity: " + pr.error;
        continue;
      }
      for (std::size_t t = 0; t < times.size(); ++t) total[t].merge(pr.times[t]);
    }
    if (series.failed) continue;
    for (std::size_t t = 0; t < times.size(); ++t)
      series.points.push_back(finish(total[t], times[t], s.physics.particles, deterministic));
  }
  for (const auto& r : results) {
    if (samples) samples->insert(samples->end(), r.summaries.begin(), r.summaries.end());
    if (stats) *stats += r.stats;
  }
  return out;
}

MapRow summarize_point(const Scenario& s, const EnsembleSeries& series) {
  MapRow row;
  row.g = series.g01;
  row.c = series.g11 - series.g01;
  if (series.failed) {
    row.failed = true;
    row.error = series.error;
    row.value = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  const auto& pts = series.points;
  std::size_t snap = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(pts[i].t - s.grid.snapshot) < std::abs(pts[snap].t - s.grid.snapshot)) snap = i;
  row.max_sector = pts[snap].max_sector();
  row.sx = pts[snap].moments.mean(0);
  row.coherence = pts[snap].coherence_normalized;
  row.xi2 = pts[snap].xi2;

  std::vector<double> t, xi2;
  for (const auto& p : pts) {
    t.push_back(p.t);
    xi2.push_back(p.xi2 ? *p.xi2 : std::numeric_limits<double>::infinity());
  }
  row.crossing = crossing_time(t, xi2, s.grid.squeezing_threshold);
  row.censored = !row.crossing;
  switch (s.grid.observable) {
    case MapObservable::max_sector: row.value = row.max_sector; break;
    case MapObservable::sx: row.value = row.sx; break;
    case MapObservable::coherence: row.value = row.coherence; break;
    case MapObservable::squeezing_ratio: break;  // needs the baseline, set by the caller
  }
  return row;
}

int RunResult::exit_code() const {
  if (capacity_error) return 3;
  if (!failures.empty()) return 4;
  return 0;
}

RunResult run_scenario(const Scenario& s) {
  s.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.scenario = s;
  if (s.kind == ScenarioKind::freeze_spatial_map) r.scenario.basis = BasisPolicy::frozen_spatial;
  const Scenario& sc = r.scenario;

  if (sc.kind == ScenarioKind::idealgas_fig1) {
    const auto times = sc.time.values();
    r.statistics = statistics_comparison(sc.physics.particles, sc.physics.temperature,
                                         sc.physics.beta2, times);
  } else if (!sc.is_map()) {
    r.series = run_ensemble(sc, {sc.physics.couplings}, &r.samples, &r.propagation, &r.omitted_weight);
    r.grid_points.emplace_back(sc.physics.couplings.g01,
                               sc.physics.couplings.g11 - sc.physics.couplings.g01);
  } else {
    std::vector<Couplings> couplings;
    for (double g : sc.grid.g)
      for (double c : sc.grid.c) {
        couplings.push_back(Couplings::from_gc(g, c));
        r.grid_points.emplace_back(g, c);
      }
    std::optional<std::size_t> baseline;
    if (sc.grid.observable == MapObservable::squeezing_ratio) {
      for (std::size_t i = 0; i < r.grid_points.size(); ++i)
        if (r.grid_points[i] == std::pair<double, double>{0.0, 0.0}) baseline = i;
      if (!baseline) {
        couplings.push_back(Couplings::from_gc(0.0, 0.0));
        baseline = couplings.size() - 1;
      }
    }
    r.series = run_ensemble(sc, couplings, &r.samples, &r.propagation, &r.omitted_weight);
    for (std::size_t i = 0; i < r.grid_points.size(); ++i) {
      MapRow row = summarize_point(sc, r.series[i]);
      row.g = r.grid_points[i].first;
      row.c = r.grid_points[i].second;
      r.map.push_back(row);
    }
    if (baseline) {
      const MapRow base = summarize_point(sc, r.series[*baseline]);
      const double horizon = sc.time.end;
      for (auto& row : r.map) {
        if (row.failed) continue;
        if (base.failed || !base.crossing || *base.crossing <= 0.0) {
          row.value = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        row.value = (row.crossing ? *row.crossing : horizon) / *base.crossing;
      }
      if (*baseline >= r.grid_points.size()) r.series.pop_back();
    }
  }

  for (std::size_t i = 0; i < r.series.size(); ++i) {
    if (!r.series[i].failed) continue;
    if (r.series[i].error.starts_with("capacity")) r.capacity_error = true;
    r.failures.push_back("g=" + std::to_string(r.grid_points[i].first) +
                         " c=" + std::to_string(r.grid_points[i].second) + ": " + r.series[i].error);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RunResult run_freeze_spatial(Scenario s) {
  s.basis = BasisPolicy::frozen_spatial;
  return run_scenario(s);
}

// ---------------------------------------------------------------------------
// output

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string j_label(int two_j) {
  return two_j % 2 == 0 ? std::to_string(two_j / 2) : std::to_string(two_j) + "/2";
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_series_csv(const RunResult& r, std::ostream& out) {
  const Scenario& s = r.scenario;
  out << "# rephase " << version << " kind=" << to_string(s.kind) << " N=" << s.physics.particles
      << " T=" << num(s.physics.temperature) << " seed=" << s.prep.seed << "\n";
  if (s.kind == ScenarioKind::idealgas_fig1) {
    out << "t,C_bosons,C_fermions,C_boltzmann\n";
    for (const auto& row : r.statistics)
      out << num(row.t) << ',' << num(row.bosons) << ',' << num(row.fermions) << ','
          << num(row.boltzmann) << '\n';
    return;
  }
  const EnsembleSeries& series = r.series.front();
  out << "t,Sx,Sy,Sz,C,C_norm,xi2";
  for (int tj : series.two_j) out << ",p_j=" << j_label(tj);
  out << ",norm,energy,leakage,se_Sx,se_Sy,se_pmax,se_energy\n";
  for (const auto& p : series.points) {
    out << num(p.t) << ',' << num(p.moments.mean(0)) << ',' << num(p.moments.mean(1)) << ','
        << num(p.moments.mean(2)) << ',' << num(p.coherence) << ','
        << num(p.coherence_normalized) << ',' << opt(p.xi2);
    for (double x : p.populations) out << ',' << num(x);
    out << ',' << num(p.norm) << ',' << num(p.energy) << ',' << num(p.leakage) << ','
        << num(p.se_sx) << ',' << num(p.se_sy) << ',' << num(p.se_max_sector) << ','
        << num(p.se_energy) << '\n';
  }
}

void write_map_csv(const RunResult& r, std::ostream& out) {
  const Scenario& s = r.scenario;
  out << "# rephase " << version << " kind=" << to_string(s.kind)
      << " observable=" << to_string(s.grid.observable) << " snapshot=" << num(s.grid.snapshot)
      << " N=" << s.physics.particles << " seed=" << s.prep.seed << "\n";
  out << "g,c,value,p_max,Sx,C_norm,xi2,t_cross,censored,status\n";
  for (const auto& row : r.map) {
    out << num(row.g) << ',' << num(row.c) << ',' << num(row.value) << ','
        << num(row.max_sector) << ',' << num(row.sx) << ',' << num(row.coherence) << ','
        << opt(row.xi2) << ',' << opt(row.crossing) << ',' << (row.censored ? 1 : 0) << ','
        << (row.failed ? "failed" : "ok") << '\n';
  }
}

nlohmann::json manifest(const RunResult& r) {
  using nlohmann::json;
  json m;
  m["version"] = version;
  m["config"] = to_json(r.scenario);
  m["seed"] = r.scenario.prep.seed;
  m["wall_seconds"] = r.wall_seconds;
  m["exit_code"] = r.exit_code();
  m["failures"] = r.failures;

  json samples = json::array();
  std::size_t max_dim = 0;
  double max_leak = 0.0;
  for (const auto& s : r.samples) {
    samples.push_back({{"seed", s.seed}, {"quanta", s.quanta}, {"weight", s.weight},
                       {"dimension", s.dimension}, {"nonzeros", s.nonzeros},
                       {"hamiltonian_leakage", s.hamiltonian_leakage}});
    max_dim = std::max(max_dim, s.dimension);
    max_leak = std::max(max_leak, s.hamiltonian_leakage);
  }
  m["sample_count"] = r.samples.size();
  m["samples"] = samples;
  m["max_basis_dimension"] = max_dim;
  m["max_hamiltonian_leakage"] = max_leak;
  m["omitted_thermal_weight"] = r.omitted_weight;
  m["propagation"] = {{"substeps", r.propagation.substeps},
                      {"matvecs", r.propagation.matvecs},
                      {"rejected", r.propagation.rejected},
                      {"max_error_estimate", r.propagation.max_error_estimate}};

  double se_sx = 0.0, se_pmax = 0.0, leak = 0.0;
  for (const auto& series : r.series)
    for (const auto& p : series.points) {
      se_sx = std::max(se_sx, p.se_sx);
      se_pmax = std::max(se_pmax, p.se_max_sector);
      leak = std::max(leak, p.leakage);
    }
  m["max_standard_error"] = {{"Sx", se_sx}, {"p_max", se_pmax}};
  m["max_top_shell_weight"] = leak;
  if (!r.map.empty()) {
    json rows = json::array();
    for (const auto& row : r.map)
      rows.push_back({{"g", row.g}, {"c", row.c}, {"value", opt_json(row.value)},
                      {"t_cross", opt_json(row.crossing)}, {"status", row.failed ? row.error : "ok"}});
    m["map"] = rows;
  }
  return m;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (r.scenario.is_map() ? "map.csv" : "series.csv"));
    if (r.scenario.is_map())
      write_map_csv(r, out);
    else
      write_series_csv(r, out);
    if (!out) throw std::runtime_error("failed writing results to " + dir.string());
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest(r).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing manifest to " + dir.string());
}

}  // namespace rephase
