#include "rephase/prep.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace rephase {

std::string_view to_string(PrepMode m) {
  switch (m) {
    case PrepMode::diagonal: return "diagonal";
    case PrepMode::exhaustive: return "exhaustive";
    case PrepMode::qmc: return "qmc";
    case PrepMode::eigen: return "eigen";
  }
  return "?";
}

PrepMode parse_prep_mode(std::string_view name) {
  if (name == "diagonal") return PrepMode::diagonal;
  if (name == "exhaustive") return PrepMode::exhaustive;
  if (name == "qmc") return PrepMode::qmc;
  if (name == "eigen") return PrepMode::eigen;
  throw std::invalid_argument("unknown prep mode '" + std::string(name) + "'");
}

void PrepConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (!(exhaustive_tail > 0.0 && exhaustive_tail < 1.0))
    throw std::invalid_argument("exhaustive_tail must lie in (0, 1)");
  if (qmc_max_quanta < 0) throw std::invalid_argument("qmc_max_quanta must be >= 0");
}

std::vector<int> sample_thermal_configuration(int particles, double temperature, Rng& rng) {
  const CanonicalBoseGas gas(particles, temperature);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<int> spatial;
  int remaining = particles;
  while (remaining > 0) {
    const double u = uniform(rng);
    double cumulative = 0.0;
    int n = 0;
    for (; n < remaining; ++n) {
      cumulative += gas.lowest_level_probability(n, remaining);
      if (u < cumulative) break;
    }
    spatial.push_back(n);
    remaining -= n;
  }
  return spatial;
}

std::shared_ptr<const EnumeratedBasis> sample_basis(const PhysicsParams& p, const FockState& seed,
                                                    BasisPolicy policy) {
  if (policy == BasisPolicy::frozen_spatial)
    return std::make_shared<const EnumeratedBasis>(frozen_spatial_basis(seed));
  // without the linear term H only couples Q to Q +- 2
  return std::make_shared<const EnumeratedBasis>(
      sub_basis_around(seed, p.cutoffs.delta_q, p.cutoffs.modes, p.beta1 == 0.0,
                       p.cutoffs.max_dimension));
}

namespace {

Eigen::VectorXcd unit_vector(const EnumeratedBasis& basis, const FockState& s) {
  const auto index = basis.index_of(s.resized(basis.modes()));
  if (!index) throw std::logic_error("seed state missing from its own basis");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  v(static_cast<Eigen::Index>(*index)) = 1.0;
  return v;
}

// Partitions of `quanta` into at most `particles` parts, as per-mode
// occupation vectors.
void for_each_configuration(int particles, int quanta,
                            const std::function<void(const std::vector<int>&)>& visit,
                            int max_mode = std::numeric_limits<int>::max()) {
  std::vector<int> modes;  // non-increasing mode index per atom
  auto rec = [&](auto&& self, int left_atoms, int left_quanta, int max_mode) -> void {
    if (left_atoms == 0) {
      if (left_quanta != 0) return;
      std::vector<int> spatial(modes.empty() ? 1 : modes.front() + 1, 0);
      for (int m : modes) ++spatial[m];
      visit(spatial);
      return;
    }
    // remaining atoms can absorb at most left_atoms * max_mode quanta
    if (left_quanta > left_atoms * max_mode) return;
    for (int m = std::min(max_mode, left_quanta); m >= 0; --m) {
      modes.push_back(m);
      self(self, left_atoms - 1, left_quanta - m, m);
      modes.pop_back();
    }
  };
  rec(rec, particles, quanta, std::min(quanta, max_mode));
}

}  // namespace

WeightedSample sample_thermal_diagonal(const PhysicsParams& p, Rng& rng, BasisPolicy policy) {
  p.validate();
  const auto spatial = sample_thermal_configuration(p.particles, p.temperature, rng);
  WeightedSample s;
  s.seed = FockState::spin_down(spatial);
  s.basis = sample_basis(p, s.seed, policy);
  s.state = unit_vector(*s.basis, s.seed);
  s.mode = PrepMode::diagonal;
  return s;
}

std::uint64_t configuration_count(int particles, int quanta) {
  std::uint64_t n = 0;
  for_each_configuration(particles, quanta, [&](const std::vector<int>&) { ++n; });
  return n;
}

ConfigurationList enumerate_thermal_configurations(int particles, double temperature,
                                                   double tail) {
  const CanonicalBoseGas gas(particles, temperature);
  ConfigurationList out;
  double listed = 0.0;
  for (int q = 0; 1.0 - listed > tail; ++q) {
    const double w = gas.configuration_weight(q);
    for_each_configuration(particles, q, [&](const std::vector<int>& spatial) {
      out.configurations.push_back({spatial, w});
      listed += w;
    });
    if (w == 0.0) break;  // T = 0
  }
  out.omitted_weight = std::max(0.0, 1.0 - listed);
  return out;
}

WeightedSample sample_thermal_qmc(const PhysicsParams& p, int max_quanta, Rng& rng,
                                  BasisPolicy policy, const PropagatorConfig& cfg) {
  p.validate();
  if (!(p.temperature > 0.0)) throw std::invalid_argument("QMC sampling needs T > 0");
  const int max_mode = p.cutoffs.modes - 1;
  std::vector<std::uint64_t> counts(max_quanta + 1, 0);
  std::uint64_t total = 0;
  for (int q = 0; q <= max_quanta; ++q) {
    for_each_configuration(p.particles, q, [&](const std::vector<int>&) { ++counts[q]; }, max_mode);
    total += counts[q];
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  std::uint64_t r = pick(rng);
  int q = 0;
  while (r >= counts[q]) r -= counts[q++];
  std::vector<int> spatial;
  std::uint64_t i = 0;
  for_each_configuration(
      p.particles, q, [&](const std::vector<int>& c) {
        if (i++ == r) spatial = c;
      },
      max_mode);

  WeightedSample s;
  s.seed = FockState::spin_down(spatial);
  s.basis = sample_basis(p, s.seed, policy);
  s.mode = PrepMode::qmc;
  const Hamiltonian h = build_hamiltonian(p, s.basis, {.track_leakage = false});
  s.state = evolve_imag(unit_vector(*s.basis, s.seed), h.op.matrix, 0.5 / p.temperature, cfg);
  const double norm = s.state.norm();
  s.weight = norm * norm;
  s.state /= norm;
  return s;
}

std::vector<WeightedSample> thermal_eigen_ensemble(const PhysicsParams& p,
                                                   std::shared_ptr<const EnumeratedBasis> basis,
                                                   std::size_t max_dimension) {
  if (!(p.temperature > 0.0)) throw std::invalid_argument("thermal ensemble needs T > 0");
  std::vector<Eigen::Index> down;
  for (std::size_t i = 0; i < basis->size(); ++i)
    if (basis->state(i).spin_up_count() == 0) down.push_back(static_cast<Eigen::Index>(i));
  if (down.size() > max_dimension)
    throw CapacityError("spin-down sector of dimension " + std::to_string(down.size()) +
                        " exceeds the exact-diagonalization limit " +
                        std::to_string(max_dimension));
  const Hamiltonian h = build_hamiltonian(p, basis, {.track_leakage = false});
  const Eigen::Index n = static_cast<Eigen::Index>(down.size());
  Eigen::MatrixXd block(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) block(a, b) = h.op.matrix.coeff(down[a], down[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const double e0 = es.eigenvalues()(0);
  double z = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) z += std::exp(-(es.eigenvalues()(k) - e0) / p.temperature);

  std::vector<WeightedSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    WeightedSample s;
    s.basis = basis;
    s.mode = PrepMode::eigen;
    s.weight = std::exp(-(es.eigenvalues()(k) - e0) / p.temperature) / z;
    s.state = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
    Eigen::Index largest = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      s.state(down[a]) = es.eigenvectors()(a, k);
      if (std::abs(es.eigenvectors()(a, k)) > std::abs(es.eigenvectors()(largest, k))) largest = a;
    }
    s.seed = basis->state(static_cast<std::size_t>(down[largest]));
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

// Spin rotations act within a fixed spatial profile, where the Krylov space
// closes after at most N+1 vectors, so a tight tolerance costs nothing.
template <class Matrix>
void rotate(Eigen::VectorXcd& v, const Matrix& generator, double angle) {
  if (angle == 0.0) return;
  PropagatorConfig cfg;
  cfg.tol = 1e-14;
  const cplx direction = angle > 0 ? cplx(0, 1) : cplx(0, -1);
  v = expv(generator, direction, std::abs(angle), v, cfg);
}

}  // namespace

void apply_pulse(WeightedSample& sample, const CollectiveSpin& spin, double angle) {
  rotate(sample.state, spin.sy.matrix, angle);
}

void apply_tact(WeightedSample& sample, const CollectiveSpin& spin, double theta) {
  rotate(sample.state, build_tact_generator(spin).matrix, theta);
}

void prepare_spin(WeightedSample& sample, const CollectiveSpin& spin, const PrepConfig& cfg) {
  if (cfg.pulse) apply_pulse(sample, spin, *cfg.pulse);
  if (cfg.theta_tact != 0.0) apply_tact(sample, spin, cfg.theta_tact);
}

}  // namespace rephase
