#pragma once

// Many-body operators on an EnumeratedBasis: the trap + field + contact
// Hamiltonian, collective spin operators, total-spin sector projectors and the
// two-axis counter-twisting generator.

#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

#include "rephase/fock.hpp"

namespace rephase {

using cplx = std::complex<double>;

template <class Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;

/// Contact couplings of the three scattering channels.
struct Couplings {
  double g00 = 0.0;  ///< down-down
  double g01 = 0.0;  ///< down-up
  double g11 = 0.0;  ///< up-up

  /// g00 = g - c, g01 = g, g11 = g + c.
  static Couplings from_gc(double g, double c) { return {g - c, g, g + c}; }
};

/// Truncation controls for per-sample bases.
struct Cutoffs {
  int modes = 64;          ///< M, oscillator modes 0..M-1
  int delta_q = 4;         ///< quanta allowed above the reference state
  std::size_t max_dimension = 4'000'000;
};

/// Physical constants in oscillator units. The field couplings already
/// contain the differential magnetic moment: beta_k = dmu * b_k.
struct PhysicsParams {
  int particles = 5;
  double temperature = 3.0;  ///< k_B T / (hbar omega)
  double beta0 = 0.0;        ///< uniform field; 0 is the rotating frame
  double beta1 = 0.0;
  double beta2 = 0.01;
  Couplings couplings;
  Cutoffs cutoffs;

  /// Throws std::invalid_argument on N < 1 or an unstable trap
  /// (1 - 2|beta2| <= 0).
  void validate() const;
};

/// A sparse operator on a fixed basis. `hermiticity_residual` is
/// max |A - A^dagger| measured at construction.
template <class Scalar>
struct Operator {
  std::shared_ptr<const EnumeratedBasis> basis;
  SparseMatrix<Scalar> matrix;
  double hermiticity_residual = 0.0;

  Eigen::Index dimension() const { return matrix.rows(); }
  Eigen::Index nonzeros() const { return matrix.nonZeros(); }
};

using RealOperator = Operator<double>;
using ComplexOperator = Operator<cplx>;

/// Weight of H|i> that lands outside the basis (first excluded shell).
struct LeakageReport {
  double max_column = 0.0;   ///< max_i ||(1 - P) H |i>||^2
  double mean_column = 0.0;  ///< average over basis columns
  bool tracked = false;
};

struct Hamiltonian {
  RealOperator op;
  LeakageReport leakage;
};

struct HamiltonianOptions {
  bool track_leakage = true;
};

/// H = sum_m (m+1/2) n_m + beta0 * 2 S_z + beta1 sum x sigma_z
///     + beta2 sum x^2 sigma_z + contact interaction in three channels.
/// Throws std::invalid_argument on a basis/params mismatch (particle number,
/// or a parity-restricted basis with beta1 != 0).
Hamiltonian build_hamiltonian(const PhysicsParams& p,
                              std::shared_ptr<const EnumeratedBasis> basis,
                              HamiltonianOptions options = {});

/// y = H x without materializing H. Agrees with build_hamiltonian.
void apply_hamiltonian(const PhysicsParams& p, const EnumeratedBasis& basis,
                       std::span<const cplx> x, std::span<cplx> y);

struct CollectiveSpin {
  RealOperator sx;
  ComplexOperator sy;
  RealOperator sz;
  RealOperator s_plus;
  RealOperator s_squared;
};

/// Spin-1/2 normalized: S_z = (1/2) sum_m (n_up - n_down), S_+ = sum_m
/// a^dagger_{m up} a_{m down}.
CollectiveSpin build_collective_spin(std::shared_ptr<const EnumeratedBasis> basis);

/// Allowed total-spin quantum numbers j_min .. N/2, stored as 2j.
std::vector<int> spin_sector_twice_j(int particles);

/// Projector onto total spin j (given as two_j = 2j), as a Lagrange
/// polynomial in S^2. Throws std::invalid_argument for an invalid j.
RealOperator build_spin_sector_projector(const CollectiveSpin& spin, int two_j);

/// S_y S_z + S_z S_y.
ComplexOperator build_tact_generator(const CollectiveSpin& spin);

/// max |A - A^dagger| over stored entries.
template <class Scalar>
double hermiticity_residual(const SparseMatrix<Scalar>& a);

}  // namespace rephase
