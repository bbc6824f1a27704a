#pragma once

// Noninteracting reference results: single-level and thermal single-atom
// coherence, mean level occupations for bosons, fermions and distinguishable
// atoms, and the resulting thermal contrast.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace rephase {

enum class Statistics { bosons, fermions, boltzmann };

std::string_view to_string(Statistics s);
/// Accepts "bosons", "fermions", "boltzmann"; throws std::invalid_argument.
Statistics parse_statistics(std::string_view name);

class RootFindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (1/2) exp(-2i beta2 n t): single atom in level n, stationary overlaps
/// approximated by delta_{mn}.
std::complex<double> s_single_level(int n, double beta2, double t);

/// Boltzmann average of s_single_level over a single atom at temperature T:
/// (1/2)(1 - xi)/(1 - xi exp(-2i beta2 t)), xi = exp(-1/T).
std::complex<double> s_thermal_single(double beta2, double temperature, double t);

/// Canonical ensemble of N ideal bosons on levels E_k = k.
class CanonicalBoseGas {
 public:
  CanonicalBoseGas(int particles, double temperature);

  int particles() const { return particles_; }
  double temperature() const { return temperature_; }
  /// exp(-1/T)
  double xi() const { return xi_; }
  /// Z_n for n = 0..N (ground energy set to zero).
  double partition(int n) const { return z_[n]; }

  /// <n_k> = sum_{j=1}^{N} xi^{jk} Z_{N-j} / Z_N.
  double mean_occupation(int k) const;
  /// <n_k> for k = 0.. until the remaining weight drops below `tail`.
  std::vector<double> mean_occupations(double tail = 1e-12) const;

  /// Probability that n atoms of `remaining` sit in the lowest available
  /// level; independent of which level that is.
  double lowest_level_probability(int n, int remaining) const;

  /// Canonical probability of a spatial configuration with Q total quanta.
  double configuration_weight(int quanta) const;

 private:
  int particles_;
  double temperature_;
  double xi_;
  std::vector<double> z_;
};

/// Grand-canonical (bosons, fermions) or scaled single-particle (boltzmann)
/// level occupations with sum N; the chemical potential is found by bracketed
/// root finding. Levels are included until the remaining occupation is below
/// `tail` * N.
std::vector<double> mean_occupations(Statistics kind, int particles,
                                     double temperature, double tail = 1e-12);

/// Magnitude of the transverse spin, raw and divided by N/2.
struct Contrast {
  double raw = 0.0;
  double normalized = 0.0;
};

/// |sum_k <n_k> s_k| for given occupations and single-level coherences.
Contrast contrast_from_levels(std::span<const double> occupations,
                              std::span<const std::complex<double>> s);

/// Thermal contrast for the given statistics using s_single_level.
Contrast contrast_thermal(int particles, double temperature, double beta2,
                          double t, Statistics kind);

/// Single-atom coherences s_k(t) = (1/2) <k| exp(i H_up t) exp(-i H_down t) |k>
/// with H_sigma = (m + 1/2) +- (beta1 x + beta2 x^2), diagonalized exactly
/// in a truncated oscillator basis.
class TwoPotentialOverlap {
 public:
  /// Levels 0..levels-1 are reported; `modes` (> levels) is the working
  /// truncation of the diagonalization.
  TwoPotentialOverlap(double beta1, double beta2, int levels, int modes);

  int levels() const { return levels_; }
  std::vector<std::complex<double>> coherences(double t) const;

 private:
  int levels_;
  Eigen::VectorXd energy_up_, energy_down_;
  Eigen::MatrixXd vectors_up_, vectors_down_;
};

/// Canonical-boson contrast with exact two-potential coherences.
Contrast contrast_canonical_exact(int particles, double temperature,
                                  double beta1, double beta2, double t);

/// Rows (t, C_bosons, C_fermions, C_boltzmann), normalized contrast.
struct StatisticsRow {
  double t;
  double bosons;
  double fermions;
  double boltzmann;
};
std::vector<StatisticsRow> statistics_comparison(int particles,
                                                 double temperature,
                                                 double beta2,
                                                 std::span<const double> times);

}  // namespace rephase
