#pragma once

// Measurements: collective spin moments, coherence, total-spin sector
// populations, the squeezing parameter and regime diagnostics.

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "rephase/operators.hpp"

namespace rephase {

/// First and symmetrized second moments of (S_x, S_y, S_z).
struct SpinMoments {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();  ///< <(S_a S_b + S_b S_a)/2>

  SpinMoments& operator+=(const SpinMoments& o);
  SpinMoments operator*(double w) const;
  Eigen::Matrix3d covariance() const { return second - mean * mean.transpose(); }
};

/// Moments of a normalized state.
SpinMoments spin_moments(const CollectiveSpin& spin, const Eigen::VectorXcd& psi);

/// sqrt(<S_x>^2 + <S_y>^2).
double coherence(const SpinMoments& m);
/// coherence / (N/2)
double coherence_normalized(const SpinMoments& m, int particles);

/// N Var(S . n_perp) / <S . n>^2 with n along <S> and n_perp = (n_y, -n_x, 0).
/// Off the equator |n_perp| < 1; <S_z> is reported alongside for that reason.
/// nullopt when |<S>| <= eps (no well-defined direction).
std::optional<double> squeezing(const SpinMoments& m, int particles, double eps = 1e-9);

/// P_j for j = j_min .. N/2 (ascending), built once per basis.
struct SectorProjectors {
  std::vector<int> two_j;
  std::vector<RealOperator> projectors;
};
SectorProjectors build_sector_projectors(const CollectiveSpin& spin);

/// <P_j> for a normalized state, ordered as in `projectors.two_j`.
std::vector<double> sector_populations(const SectorProjectors& projectors,
                                       const Eigen::VectorXcd& psi);

struct RegimeDiagnostics {
  double mean_density = 0.0;      ///< (1/N) integral n(x)^2 dx
  double collisional_shift = 0.0; ///< |g01| * mean_density
  double lateral_energy = 0.0;    ///< 2 g01^2 mean_density v_T / (3 pi sqrt(pi))
  double field_spread = 0.0;      ///< spread of beta1 <x> + beta2 <x^2> over occupied levels
  double thermal_velocity = 0.0;  ///< sqrt(T)
};

/// Diagnostics from mean level occupations <n_k> (spin summed).
RegimeDiagnostics regime_diagnostics(const PhysicsParams& p, std::span<const double> occupations);

/// First time the series crosses `threshold` from below, linearly
/// interpolated; nullopt if it never does. Throws std::invalid_argument on an
/// empty or non-increasing time grid.
std::optional<double> crossing_time(std::span<const double> times,
                                    std::span<const double> values, double threshold);

}  // namespace rephase
