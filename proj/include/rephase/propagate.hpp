#pragma once

// Krylov (Lanczos) propagation of exp(z H) v for Hermitian H: real time
// z = -i t, imaginary time z = -tau, and the squeezing generator z = +i theta.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rephase {

struct PropagatorConfig {
  int krylov_dim = 30;
  /// Local error tolerance per substep, relative to the vector norm.
  double tol = 1e-9;
  /// Upper bound on |z| per substep.
  double max_substep = 2.0;
  std::size_t max_substeps = 1'000'000;

  void validate() const {
    if (krylov_dim < 2) throw std::invalid_argument("krylov_dim must be >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(max_substep > 0.0)) throw std::invalid_argument("max_substep must be > 0");
  }
};

struct PropagationStats {
  std::size_t substeps = 0;
  std::size_t matvecs = 0;
  std::size_t rejected = 0;
  double max_error_estimate = 0.0;

  PropagationStats& operator+=(const PropagationStats& o) {
    substeps += o.substeps;
    matvecs += o.matvecs;
    rejected += o.rejected;
    max_error_estimate = std::max(max_error_estimate, o.max_error_estimate);
    return *this;
  }
};

class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Customization point: y = A x. Overload for matrix-free operators.
template <class Scalar, int Options, class Index>
void multiply(const Eigen::SparseMatrix<Scalar, Options, Index>& a,
              const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  y.noalias() = a * x;
}

namespace detail {

// exp(z T) e_1 for real symmetric tridiagonal T of size k.
inline Eigen::VectorXcd tridiagonal_exp_e1(const Eigen::VectorXd& alpha,
                                           const Eigen::VectorXd& beta, int k,
                                           std::complex<double> z) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i + 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::MatrixXd& q = es.eigenvectors();
  Eigen::VectorXcd coeff(k);
  for (int i = 0; i < k; ++i) coeff(i) = std::exp(z * es.eigenvalues()(i)) * q(0, i);
  return q.cast<std::complex<double>>() * coeff;
}

}  // namespace detail

/// exp(direction * duration * A) v with A Hermitian, by adaptive Lanczos
/// substeps. `direction` is a unit-modulus complex number (-i for real time,
/// -1 for imaginary time). Throws PropagationError when the step size
/// collapses or the substep budget is exhausted.
template <class Matrix>
Eigen::VectorXcd expv(const Matrix& a, std::complex<double> direction,
                      double duration, const Eigen::VectorXcd& v,
                      const PropagatorConfig& cfg = {},
                      PropagationStats* stats = nullptr) {
  cfg.validate();
  if (duration < 0.0) throw std::invalid_argument("negative propagation duration");
  Eigen::VectorXcd psi = v;
  if (duration == 0.0 || psi.size() == 0) return psi;

  const Eigen::Index n = psi.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  Eigen::MatrixXcd basis(n, m_max + 1);
  Eigen::VectorXd alpha(m_max + 1);
  Eigen::VectorXd beta(m_max + 2);
  Eigen::VectorXcd w(n);
  Eigen::VectorXcd overlap;

  PropagationStats local;
  double remaining = duration;
  double h = std::min(duration, cfg.max_substep);
  const double h_floor = duration * 1e-13;

  while (remaining > 0.0) {
    if (local.substeps >= cfg.max_substeps) {
      std::ostringstream os;
      os << "Krylov propagation exceeded " << cfg.max_substeps
         << " substeps with " << remaining << " of " << duration << " left";
      throw PropagationError(os.str());
    }
    const double norm = psi.norm();
    if (norm == 0.0) break;
    h = std::min({h, remaining, cfg.max_substep});

    basis.col(0) = psi / norm;
    int k = 0;
    bool breakdown = false;
    double err = INFINITY;
    Eigen::VectorXcd y;
    beta(0) = 0.0;
    for (int j = 0; j < m_max; ++j) {
      multiply(a, basis.col(j), w);
      ++local.matvecs;
      alpha(j) = basis.col(j).dot(w).real();
      w -= alpha(j) * basis.col(j);
      if (j > 0) w -= beta(j) * basis.col(j - 1);
      overlap.noalias() = basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(j + 1) * overlap;
      beta(j + 1) = w.norm();
      k = j + 1;
      const double scale = std::abs(alpha(j)) + beta(j) + beta(j + 1);
      if (beta(j + 1) <= 1e-13 * std::max(scale, 1.0)) {
        breakdown = true;
        break;
      }
      basis.col(j + 1) = w / beta(j + 1);
      if (k >= 3 || k == m_max) {
        y = detail::tridiagonal_exp_e1(alpha, beta, k, direction * h);
        err = beta(k) * std::abs(y(k - 1));
        if (err <= cfg.tol * std::max(y.norm(), 1e-300)) break;
      }
    }

    if (breakdown) {
      // the Krylov space is invariant: exact for any step length
      h = remaining;
      y = detail::tridiagonal_exp_e1(alpha, beta, k, direction * h);
      err = 0.0;
    } else {
      y = detail::tridiagonal_exp_e1(alpha, beta, k, direction * h);
      err = beta(k) * std::abs(y(k - 1));
      while (err > cfg.tol * std::max(y.norm(), 1e-300)) {
        ++local.rejected;
        h *= 0.5;
        if (h < h_floor) {
          std::ostringstream os;
          os << "Krylov step size collapsed to " << h << " (error estimate " << err
             << ", Krylov dimension " << k << ")";
          throw PropagationError(os.str());
        }
        y = detail::tridiagonal_exp_e1(alpha, beta, k, direction * h);
        err = beta(k) * std::abs(y(k - 1));
      }
    }

    psi.noalias() = norm * (basis.leftCols(k) * y);
    local.max_error_estimate = std::max(local.max_error_estimate, err);
    ++local.substeps;
    remaining -= h;
    if (remaining < h_floor) remaining = 0.0;
    // try a longer step next time when this one converged with room to spare
    if (!breakdown && k < m_max) h *= 1.5;
  }
  if (stats) *stats += local;
  return psi;
}

/// exp(-i H t) psi.
template <class Matrix>
Eigen::VectorXcd evolve_real(const Eigen::VectorXcd& psi, const Matrix& h,
                             double t, const PropagatorConfig& cfg = {},
                             PropagationStats* stats = nullptr) {
  return expv(h, std::complex<double>(0.0, -1.0), t, psi, cfg, stats);
}

/// exp(-H tau) psi, unnormalized.
template <class Matrix>
Eigen::VectorXcd evolve_imag(const Eigen::VectorXcd& psi, const Matrix& h,
                             double tau, const PropagatorConfig& cfg = {},
                             PropagationStats* stats = nullptr) {
  return expv(h, std::complex<double>(-1.0, 0.0), tau, psi, cfg, stats);
}

}  // namespace rephase
