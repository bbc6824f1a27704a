#pragma once

// Single-particle harmonic-oscillator machinery in oscillator units
// (hbar = m = omega = 1).

#include <cstddef>
#include <memory>
#include <vector>

namespace rephase {

/// <m|x|n> for oscillator eigenstates. Throws std::out_of_range when an index
/// is not below `cutoff`.
double x_matrix_element(int m, int n, int cutoff);

/// <m|x^2|n> for oscillator eigenstates.
double x2_matrix_element(int m, int n, int cutoff);

/// Normalized Hermite function phi_m(x), evaluated by the upward recurrence
/// of normalized functions so that large m does not overflow.
double hermite_function(int m, double x);

/// Values phi_0(x) .. phi_{count-1}(x).
std::vector<double> hermite_functions(int count, double x);

/// Gauss-Hermite rule for weight exp(-x^2) with `n` nodes. Nodes are
/// Newton-polished and weights come from the Christoffel sum, so tiny tail
/// weights keep full relative precision.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

/// Table of contact integrals U_abcd = \int phi_a phi_b phi_c phi_d dx for
/// all indices below `modes`. Only sorted index tuples are stored.
class ContactTable {
 public:
  explicit ContactTable(int modes);

  int modes() const { return modes_; }

  double operator()(int a, int b, int c, int d) const;

 private:
  std::size_t sorted_index(int a, int b, int c, int d) const;

  int modes_;
  std::vector<double> values_;
};

/// Process-wide cached table covering at least `modes` modes. Safe to call
/// from several threads.
std::shared_ptr<const ContactTable> contact_table(int modes);

/// U_abcd through the shared cache.
double contact_integral(int a, int b, int c, int d);

}  // namespace rephase
