#pragma once

// Initial states: a thermal spatial ensemble with every spin down, followed
// by a collective pi/2 pulse and optional two-axis counter-twisting.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "rephase/fock.hpp"
#include "rephase/idealgas.hpp"
#include "rephase/operators.hpp"
#include "rephase/propagate.hpp"

namespace rephase {

using Rng = std::mt19937_64;

enum class PrepMode {
  diagonal,    ///< canonical ideal-gas configurations, drawn at random
  exhaustive,  ///< every configuration with its exact canonical weight
  qmc,         ///< uniform draws propagated by exp(-H/2T)
  eigen,       ///< exact diagonalization of the spin-down sector
};

std::string_view to_string(PrepMode m);
PrepMode parse_prep_mode(std::string_view name);

/// How each thermal sample gets its working basis.
enum class BasisPolicy {
  sub_basis,       ///< all states with Q <= Q(seed) + delta_q
  frozen_spatial,  ///< only spin redistributions over the seed's profile
};

struct PrepConfig {
  PrepMode mode = PrepMode::diagonal;
  int samples = 16;
  std::uint64_t seed = 1;
  double theta_tact = 0.0;
  /// Rotation angle about S_y; nullopt leaves the spins down.
  std::optional<double> pulse = 1.5707963267948966;
  /// Exhaustive mode stops once the omitted canonical weight is below this.
  double exhaustive_tail = 1e-6;
  /// QMC draws seeds uniformly among spin-down configurations with
  /// Q <= qmc_max_quanta.
  int qmc_max_quanta = 30;

  void validate() const;
};

/// A (normalized) state with its statistical weight. For QMC samples the
/// weight is the squared norm of exp(-H/2T)|i>.
struct WeightedSample {
  std::shared_ptr<const EnumeratedBasis> basis;
  Eigen::VectorXcd state;
  double weight = 1.0;
  /// Spatial configuration the sample was built around.
  FockState seed;
  PrepMode mode = PrepMode::diagonal;
};

/// Spatial occupations (one entry per mode, trailing zeros trimmed) drawn
/// from the canonical N-boson distribution over bare oscillator levels.
/// T = 0 returns every atom in mode 0.
std::vector<int> sample_thermal_configuration(int particles, double temperature, Rng& rng);

/// Working basis for a thermal sample seeded at `seed`.
std::shared_ptr<const EnumeratedBasis> sample_basis(const PhysicsParams& p, const FockState& seed,
                                                    BasisPolicy policy);

/// Diagonal-thermal sample: the drawn all-down Fock state in its sub-basis,
/// weight 1.
WeightedSample sample_thermal_diagonal(const PhysicsParams& p, Rng& rng,
                                       BasisPolicy policy = BasisPolicy::sub_basis);

/// A spatial configuration with its canonical probability.
struct WeightedConfiguration {
  std::vector<int> spatial;
  double weight;
};

struct ConfigurationList {
  std::vector<WeightedConfiguration> configurations;
  /// Canonical weight of configurations that were not listed.
  double omitted_weight = 0.0;
};

/// Every configuration in order of increasing Q until the omitted weight is
/// below `tail`.
ConfigurationList enumerate_thermal_configurations(int particles, double temperature,
                                                   double tail);

/// QMC: a uniformly drawn spin-down configuration |i> with Q <= max_quanta
/// and every atom below the mode cutoff,
/// propagated to exp(-H/2T)|i> in its sub-basis under the Hamiltonian built
/// from `p`. weight = ||exp(-H/2T)|i>||^2, state normalized.
WeightedSample sample_thermal_qmc(const PhysicsParams& p, int max_quanta, Rng& rng,
                                  BasisPolicy policy = BasisPolicy::sub_basis,
                                  const PropagatorConfig& cfg = {});

/// Eigenstates of H restricted to the spin-down sector of `basis`, with
/// Boltzmann weights exp(-E/T) / Z. Throws CapacityError above
/// `max_dimension` spin-down states.
std::vector<WeightedSample> thermal_eigen_ensemble(const PhysicsParams& p,
                                                   std::shared_ptr<const EnumeratedBasis> basis,
                                                   std::size_t max_dimension = 4000);

/// exp(+i angle S_y): angle = pi/2 takes all spins down to the +x coherent
/// state.
void apply_pulse(WeightedSample& sample, const CollectiveSpin& spin, double angle);

/// exp(+i theta (S_y S_z + S_z S_y)).
void apply_tact(WeightedSample& sample, const CollectiveSpin& spin, double theta);

/// Pulse then TACT according to `cfg`.
void prepare_spin(WeightedSample& sample, const CollectiveSpin& spin, const PrepConfig& cfg);

/// Number of configurations with Q total quanta over N atoms (partitions of
/// Q into at most N parts).
std::uint64_t configuration_count(int particles, int quanta);

}  // namespace rephase
