#include "rephase/spbasis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rephase {

namespace {

void check_index(int m, int cutoff) {
  if (m < 0 || m >= cutoff)
    throw std::out_of_range("mode index " + std::to_string(m) +
                            " outside [0, " + std::to_string(cutoff) + ")");
}

// Orthonormal Hermite polynomials for weight exp(-x^2), p_0 .. p_{count-1}.
void orthonormal_hermite(int count, double x, double* out) {
  const double p0 = std::pow(std::numbers::pi, -0.25);
  if (count <= 0) return;
  out[0] = p0;
  if (count == 1) return;
  out[1] = std::sqrt(2.0) * x * p0;
  for (int k = 1; k + 1 < count; ++k) {
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] -
                 std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double x_matrix_element(int m, int n, int cutoff) {
  check_index(m, cutoff);
  check_index(n, cutoff);
  if (m == n - 1) return std::sqrt(n / 2.0);
  if (m == n + 1) return std::sqrt((n + 1) / 2.0);
  return 0.0;
}

double x2_matrix_element(int m, int n, int cutoff) {
  check_index(m, cutoff);
  check_index(n, cutoff);
  if (m == n) return n + 0.5;
  const int lo = std::min(m, n);
  if (std::abs(m - n) == 2) return std::sqrt((lo + 1.0) * (lo + 2.0)) / 2.0;
  return 0.0;
}

double hermite_function(int m, double x) {
  if (m < 0) throw std::out_of_range("negative mode index");
  return hermite_functions(m + 1, x)[m];
}

std::vector<double> hermite_functions(int count, double x) {
  std::vector<double> out(std::max(count, 0));
  if (count <= 0) return out;
  // Recurrence on phi_k directly; the Gaussian factor is carried from the
  // start so intermediate values stay O(1).
  out[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (count > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (int k = 1; k + 1 < count; ++k) {
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] -
                 std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
  }
  return out;
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs n >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi,
                                                        Eigen::EigenvaluesOnly);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  std::vector<double> p(n + 1);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      orthonormal_hermite(n + 1, x, p.data());
      const double derivative = std::sqrt(2.0 * n) * p[n - 1];
      if (derivative == 0.0) break;
      x -= p[n] / derivative;
    }
    orthonormal_hermite(n, x, p.data());
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += p[k] * p[k];
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / sum;
  }
  return rule;
}

ContactTable::ContactTable(int modes) : modes_(modes) {
  if (modes < 1) throw std::invalid_argument("ContactTable needs modes >= 1");
  // phi_a phi_b phi_c phi_d = exp(-2x^2) * poly of degree <= 4(modes-1);
  // with y = sqrt(2) x a rule with 2*modes nodes is exact.
  const GaussHermiteRule rule = gauss_hermite(2 * modes);
  const int nodes = static_cast<int>(rule.nodes.size());
  // f(i, k) = p_k(y_i / sqrt 2); column k is mode k
  Eigen::ArrayXXd f(nodes, modes);
  std::vector<double> p(modes);
  for (int i = 0; i < nodes; ++i) {
    orthonormal_hermite(modes, rule.nodes[i] / std::sqrt(2.0), p.data());
    for (int k = 0; k < modes; ++k) f(i, k) = p[k];
  }
  const Eigen::ArrayXd w =
      Eigen::Map<const Eigen::ArrayXd>(rule.weights.data(), nodes) / std::sqrt(2.0);

  values_.assign(binomial(modes + 3, 4), 0.0);
  Eigen::ArrayXd pair_ab(nodes);
  Eigen::ArrayXd triple(nodes);
  for (int a = 0; a < modes; ++a) {
    for (int b = a; b < modes; ++b) {
      pair_ab = f.col(a) * f.col(b) * w;
      for (int c = b; c < modes; ++c) {
        triple = pair_ab * f.col(c);
        for (int d = c; d < modes; ++d) {
          if ((a + b + c + d) % 2 != 0) continue;
          values_[sorted_index(a, b, c, d)] = (triple * f.col(d)).sum();
        }
      }
    }
  }
}

std::size_t ContactTable::sorted_index(int a, int b, int c, int d) const {
  // combinatorial number system for multisets a <= b <= c <= d
  return binomial(a, 1) + binomial(b + 1, 2) + binomial(c + 2, 3) +
         binomial(d + 3, 4);
}

double ContactTable::operator()(int a, int b, int c, int d) const {
  std::array<int, 4> idx{a, b, c, d};
  for (int v : idx) check_index(v, modes_);
  if ((a + b + c + d) % 2 != 0) return 0.0;
  std::sort(idx.begin(), idx.end());
  return values_[sorted_index(idx[0], idx[1], idx[2], idx[3])];
}

std::shared_ptr<const ContactTable> contact_table(int modes) {
  static std::mutex mutex;
  static std::shared_ptr<const ContactTable> cached;
  std::lock_guard lock(mutex);
  if (!cached || cached->modes() < modes) {
    // grow in chunks so that slowly increasing cutoffs do not rebuild often
    const int size = std::max(modes, cached ? cached->modes() + 8 : 16);
    cached = std::make_shared<const ContactTable>(size);
  }
  return cached;
}

double contact_integral(int a, int b, int c, int d) {
  const int needed = std::max(std::max(a, b), std::max(c, d)) + 1;
  return (*contact_table(needed))(a, b, c, d);
}

}  // namespace rephase
