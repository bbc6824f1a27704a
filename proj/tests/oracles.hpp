#pragma once

// Independent reference computations used only by the tests: brute-force
// dense second quantization, grid quadrature, Dicke-space spin matrices and
// dense matrix exponentials.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// phi_0..phi_{count-1} at x in long double.
inline std::vector<long double> hermite_ld(int count, long double x) {
  std::vector<long double> h(count);
  h[0] = std::pow(std::numbers::pi_v<long double>, -0.25L) * std::exp(-x * x / 2);
  if (count > 1) h[1] = std::sqrt(2.0L) * x * h[0];
  for (int k = 1; k + 1 < count; ++k)
    h[k + 1] = std::sqrt(2.0L / (k + 1)) * x * h[k] - std::sqrt((long double)k / (k + 1)) * h[k - 1];
  return h;
}

/// Trapezoid rule on a uniform grid; spectrally accurate for the rapidly
/// decaying integrands used here.
inline double grid_integral_4(int a, int b, int c, int d) {
  const int top = std::max(std::max(a, b), std::max(c, d)) + 1;
  const long double dx = 0.005L;
  long double sum = 0;
  for (long double x = -16; x <= 16; x += dx) {
    auto h = hermite_ld(top, x);
    sum += h[a] * h[b] * h[c] * h[d];
  }
  return static_cast<double>(sum * dx);
}

inline double grid_integral_2(int a, int b, int power) {
  const int top = std::max(a, b) + 1;
  const long double dx = 0.005L;
  long double sum = 0;
  for (long double x = -16; x <= 16; x += dx) {
    auto h = hermite_ld(top, x);
    sum += h[a] * h[b] * std::pow(x, power);
  }
  return static_cast<double>(sum * dx);
}

/// Dense second quantization over `slots` bosonic slots with at most
/// `max_particles` particles in total. Slot index = 2*mode + spin.
class DenseFock {
 public:
  DenseFock(int slots, int max_particles) : slots_(slots) {
    std::vector<int> occ(slots, 0);
    build(0, max_particles, occ);
    for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = static_cast<int>(i);
    const int dim = static_cast<int>(states_.size());
    for (int s = 0; s < slots; ++s) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) {
        auto st = states_[i];
        if (st[s] == 0) continue;
        const double amp = std::sqrt(double(st[s]));
        st[s] -= 1;
        a(index_.at(st), i) = amp;
      }
      annihilators_.push_back(a);
    }
  }

  int dimension() const { return static_cast<int>(states_.size()); }
  const Eigen::MatrixXd& a(int slot) const { return annihilators_[slot]; }
  Eigen::MatrixXd adag(int slot) const { return annihilators_[slot].transpose(); }
  const std::vector<int>& state(int i) const { return states_[i]; }
  int index(const std::vector<int>& occ) const { return index_.at(occ); }

  /// Restrict a dense operator to the given list of states (in that order).
  Eigen::MatrixXd restrict(const Eigen::MatrixXd& op, const std::vector<std::vector<int>>& sel) const {
    const int n = static_cast<int>(sel.size());
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = op(index_.at(sel[i]), index_.at(sel[j]));
    return out;
  }

 private:
  void build(int slot, int remaining, std::vector<int>& occ) {
    if (slot == slots_) {
      states_.push_back(occ);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      occ[slot] = n;
      build(slot + 1, remaining - n, occ);
    }
    occ[slot] = 0;
  }

  int slots_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, int> index_;
  std::vector<Eigen::MatrixXd> annihilators_;
};

struct DickeOps {
  Eigen::MatrixXcd jx, jy, jz;
};

/// Spin-j matrices in the |j, m> basis ordered m = j, j-1, ..., -j.
inline DickeOps dicke(int two_j) {
  const int d = two_j + 1;
  const double j = two_j / 2.0;
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd jz = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = j - k;
    jz(k, k) = m;
    if (k > 0) jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  DickeOps o;
  o.jz = jz;
  o.jx = (jp + jp.adjoint()) / 2.0;
  o.jy = (jp - jp.adjoint()) / cplx(0, 2);
  return o;
}

inline Eigen::VectorXcd dense_expv(const Eigen::MatrixXcd& h, cplx z, const Eigen::VectorXcd& v) {
  Eigen::MatrixXcd m = z * h;
  return m.exp() * v;
}

/// Canonical <n_k> of N ideal bosons on levels E_k = k by brute-force
/// enumeration of every configuration with Q <= q_max.
inline std::vector<double> canonical_occupations(int n, double temperature, int q_max) {
  const double xi = std::exp(-1.0 / temperature);
  std::vector<double> occ(q_max + 1, 0.0);
  double z = 0.0;
  std::vector<int> modes;
  auto rec = [&](auto&& self, int left, int max_mode, int q) -> void {
    if (left == 0) {
      const double w = std::pow(xi, q);
      z += w;
      for (int m : modes) occ[m] += w;
      return;
    }
    for (int m = 0; m <= max_mode && q + m <= q_max; ++m) {
      modes.push_back(m);
      self(self, left - 1, m, q + m);
      modes.pop_back();
    }
  };
  rec(rec, n, q_max, 0);
  for (double& o : occ) o /= z;
  return occ;
}

/// Squeezing parameter of a state in the spin-j Dicke space (N = 2j).
inline double dicke_squeezing(const DickeOps& d, const Eigen::VectorXcd& psi) {
  const Eigen::MatrixXcd* ops[3] = {&d.jx, &d.jy, &d.jz};
  Eigen::Vector3d mean;
  for (int a = 0; a < 3; ++a) mean(a) = psi.dot(*ops[a] * psi).real();
  const Eigen::Vector3d n = mean.normalized();
  const Eigen::MatrixXcd sp = n(1) * d.jx - n(0) * d.jy;
  const double m1 = psi.dot(sp * psi).real();
  const double m2 = psi.dot(sp * (sp * psi)).real();
  const int particles = static_cast<int>(d.jz.rows()) - 1;
  return particles * (m2 - m1 * m1) / mean.squaredNorm();
}

}  // namespace oracle
