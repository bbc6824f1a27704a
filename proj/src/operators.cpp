#include "rephase/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rephase/spbasis.hpp"

namespace rephase {

void PhysicsParams::validate() const {
  if (particles < 1) throw std::invalid_argument("particle number must be >= 1");
  if (!(1.0 - 2.0 * std::abs(beta2) > 0.0))
    throw std::invalid_argument("beta2 too large: trap frequency would be imaginary");
  if (cutoffs.modes < 1) throw std::invalid_argument("mode cutoff must be >= 1");
  if (cutoffs.delta_q < 0) throw std::invalid_argument("delta_q must be >= 0");
}

template <class Scalar>
double hermiticity_residual(const SparseMatrix<Scalar>& a) {
  if (a.rows() != a.cols()) return INFINITY;
  SparseMatrix<Scalar> diff = a - SparseMatrix<Scalar>(a.adjoint());
  double r = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (typename SparseMatrix<Scalar>::InnerIterator it(diff, k); it; ++it)
      r = std::max(r, std::abs(it.value()));
  return r;
}

template double hermiticity_residual(const SparseMatrix<double>&);
template double hermiticity_residual(const SparseMatrix<cplx>&);

namespace {

// Enumerates the nonzero entries of column H|i>. Targets are reported by
// packed key together with their total quanta; targets may lie outside the
// basis when `q_limit` exceeds the basis cutoff.
class HamiltonianColumns {
 public:
  HamiltonianColumns(const PhysicsParams& p, const EnumeratedBasis& basis,
                     bool include_first_excluded_shell)
      : p_(p), basis_(basis) {
    q_cap_ = basis.spec().max_quanta;
    q_limit_ = q_cap_;
    loop_modes_ = basis.modes();
    if (include_first_excluded_shell) {
      // modes that one or two extra quanta can reach, limited by key width
      const int width_limit = (FockKey::words * 64) / basis.field_width() / 2;
      q_limit_ = q_cap_ + 2;
      loop_modes_ = std::min(q_limit_ + 1, width_limit);
      loop_modes_ = std::max(loop_modes_, basis.modes());
    }
    const bool interacting = p.couplings.g00 != 0.0 || p.couplings.g01 != 0.0 ||
                             p.couplings.g11 != 0.0;
    if (interacting) table_ = contact_table(loop_modes_);
    occ_.assign(2 * static_cast<std::size_t>(loop_modes_), 0);
  }

  int q_cap() const { return q_cap_; }

  template <class Emit>
  void column(std::size_t i, Emit&& emit) {
    const auto slots = basis_.slots(i);
    std::fill(occ_.begin(), occ_.end(), 0);
    std::copy(slots.begin(), slots.end(), occ_.begin());
    const FockKey key0 = basis_.key(slots);

    int q = 0;
    int n_up = 0;
    int n_down = 0;
    double beta2_diag = 0.0;
    for (int m = 0; m < basis_.modes(); ++m) {
      const int d = occ_[2 * m];
      const int u = occ_[2 * m + 1];
      q += m * (d + u);
      n_up += u;
      n_down += d;
      beta2_diag += (m + 0.5) * (u - d);
    }
    const double diag = q + 0.5 * (n_up + n_down) + p_.beta0 * (n_up - n_down) +
                        p_.beta2 * beta2_diag;
    emit(key0, diag, q);

    single_particle_terms(key0, q, emit);
    interaction_terms(key0, q, emit);
  }

 private:
  FockKey moved(FockKey key, int from_slot, int to_slot) const {
    basis_.shift_key(key, from_slot, -1);
    basis_.shift_key(key, to_slot, +1);
    return key;
  }

  template <class Emit>
  void single_particle_terms(const FockKey& key0, int q, Emit& emit) {
    if (p_.beta1 == 0.0 && p_.beta2 == 0.0) return;
    for (int m = 0; m < loop_modes_; ++m) {
      for (Spin s : {Spin::down, Spin::up}) {
        const int slot = 2 * m + static_cast<int>(s);
        const int n = occ_[slot];
        if (n == 0) continue;
        const double sign = spin_sign(s);
        for (int dm : {-2, -1, 1, 2}) {
          const int m2 = m + dm;
          if (m2 < 0 || m2 >= loop_modes_ || q + dm > q_limit_) continue;
          const bool linear = std::abs(dm) == 1;
          const double coupling = linear ? p_.beta1 : p_.beta2;
          if (coupling == 0.0) continue;
          const double elem = linear ? x_matrix_element(m2, m, loop_modes_)
                                     : x2_matrix_element(m2, m, loop_modes_);
          const int slot2 = 2 * m2 + static_cast<int>(s);
          const double amp = coupling * sign * elem * std::sqrt(double(n)) *
                             std::sqrt(double(occ_[slot2] + 1));
          emit(moved(key0, slot, slot2), amp, q + dm);
        }
      }
    }
  }

  template <class Emit>
  void interaction_terms(const FockKey& key0, int q, Emit& emit) {
    if (!table_) return;
    const ContactTable& u = *table_;
    const int modes = loop_modes_;

    // same-spin channels: (g/2) sum U a+_a a+_b a_c a_d over unordered pairs
    for (Spin s : {Spin::down, Spin::up}) {
      const double g = 0.5 * (s == Spin::down ? p_.couplings.g00 : p_.couplings.g11);
      if (g == 0.0) continue;
      const int sp = static_cast<int>(s);
      for (int c = 0; c < basis_.modes(); ++c) {
        const int sc = 2 * c + sp;
        if (occ_[sc] == 0) continue;
        for (int d = c; d < basis_.modes(); ++d) {
          const int sd = 2 * d + sp;
          double removal;
          if (d == c) {
            if (occ_[sc] < 2) continue;
            removal = std::sqrt(double(occ_[sc]) * (occ_[sc] - 1));
          } else {
            if (occ_[sd] == 0) continue;
            removal = std::sqrt(double(occ_[sc]) * occ_[sd]);
          }
          const double pre = g * removal * (c == d ? 1.0 : 2.0);
          --occ_[sc];
          --occ_[sd];
          FockKey key_removed = key0;
          basis_.shift_key(key_removed, sc, -1);
          basis_.shift_key(key_removed, sd, -1);
          const int q_removed = q - c - d;
          for (int a = 0; a < modes && q_removed + 2 * a <= q_limit_; ++a) {
            const int sa = 2 * a + sp;
            // b >= a with a + b = c + d (mod 2)
            for (int b = a + (c + d) % 2; b < modes; b += 2) {
              const int q_new = q_removed + a + b;
              if (q_new > q_limit_) break;
              const int sb = 2 * b + sp;
              const double addition =
                  a == b ? std::sqrt((occ_[sa] + 1.0) * (occ_[sa] + 2.0))
                         : std::sqrt((occ_[sa] + 1.0) * (occ_[sb] + 1.0));
              const double value =
                  pre * (a == b ? 1.0 : 2.0) * addition * u(a, b, c, d);
              if (value == 0.0) continue;
              FockKey key = key_removed;
              basis_.shift_key(key, sa, +1);
              basis_.shift_key(key, sb, +1);
              emit(key, value, q_new);
            }
          }
          ++occ_[sc];
          ++occ_[sd];
        }
      }
    }

    // cross channel: g01 sum U a+_{a down} a+_{b up} a_{c up} a_{d down}
    const double g01 = p_.couplings.g01;
    if (g01 == 0.0) return;
    for (int c = 0; c < basis_.modes(); ++c) {
      const int sc = 2 * c + 1;
      if (occ_[sc] == 0) continue;
      for (int d = 0; d < basis_.modes(); ++d) {
        const int sd = 2 * d;
        if (occ_[sd] == 0) continue;
        const double pre = g01 * std::sqrt(double(occ_[sc]) * occ_[sd]);
        --occ_[sc];
        --occ_[sd];
        FockKey key_removed = key0;
        basis_.shift_key(key_removed, sc, -1);
        basis_.shift_key(key_removed, sd, -1);
        const int q_removed = q - c - d;
        for (int a = 0; a < modes && q_removed + a <= q_limit_; ++a) {
          const int sa = 2 * a;
          for (int b = (c + d + a) % 2; b < modes; b += 2) {
            const int q_new = q_removed + a + b;
            if (q_new > q_limit_) break;
            const int sb = 2 * b + 1;
            const double value = pre * std::sqrt((occ_[sa] + 1.0) * (occ_[sb] + 1.0)) *
                                 u(a, b, c, d);
            if (value == 0.0) continue;
            FockKey key = key_removed;
            basis_.shift_key(key, sa, +1);
            basis_.shift_key(key, sb, +1);
            emit(key, value, q_new);
          }
        }
        ++occ_[sc];
        ++occ_[sd];
      }
    }
  }

  const PhysicsParams& p_;
  const EnumeratedBasis& basis_;
  std::shared_ptr<const ContactTable> table_;
  int q_cap_ = 0;
  int q_limit_ = 0;
  int loop_modes_ = 0;
  std::vector<int> occ_;
};

void check_compatible(const PhysicsParams& p, const EnumeratedBasis& basis) {
  p.validate();
  if (basis.particles() != p.particles)
    throw std::invalid_argument("basis has N=" + std::to_string(basis.particles()) +
                                " but params have N=" + std::to_string(p.particles));
  if (basis.spec().quanta_parity && p.beta1 != 0.0)
    throw std::invalid_argument(
        "parity-restricted basis cannot represent the linear field term");
}

SparseMatrix<double> from_triplets(Eigen::Index dim,
                                   std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix<double> m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Hamiltonian build_hamiltonian(const PhysicsParams& p,
                              std::shared_ptr<const EnumeratedBasis> basis,
                              HamiltonianOptions options) {
  check_compatible(p, *basis);
  const std::size_t dim = basis->size();
  HamiltonianColumns columns(p, *basis, options.track_leakage);

  std::vector<int> outer(dim + 1, 0);
  std::vector<int> inner;
  std::vector<double> values;
  std::vector<double> accumulator(dim, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<char> seen(dim, 0);
  std::unordered_map<FockKey, double, FockKeyHash> outside;

  LeakageReport leakage;
  leakage.tracked = options.track_leakage;
  double leakage_sum = 0.0;

  for (std::size_t i = 0; i < dim; ++i) {
    touched.clear();
    outside.clear();
    columns.column(i, [&](const FockKey& key, double amp, int q_new) {
      const auto j = q_new <= columns.q_cap() ? basis->index_of(key) : std::nullopt;
      if (j) {
        if (!seen[*j]) {
          seen[*j] = 1;
          touched.push_back(static_cast<std::uint32_t>(*j));
        }
        accumulator[*j] += amp;
      } else if (options.track_leakage) {
        outside[key] += amp;
      }
    });
    std::sort(touched.begin(), touched.end());
    // H is real symmetric: column i is stored as row i
    for (std::uint32_t j : touched) {
      if (accumulator[j] != 0.0) {
        inner.push_back(static_cast<int>(j));
        values.push_back(accumulator[j]);
      }
      accumulator[j] = 0.0;
      seen[j] = 0;
    }
    outer[i + 1] = static_cast<int>(inner.size());
    if (options.track_leakage) {
      double w = 0.0;
      for (const auto& [k, amp] : outside) w += amp * amp;
      leakage.max_column = std::max(leakage.max_column, w);
      leakage_sum += w;
    }
  }
  if (dim > 0) leakage.mean_column = leakage_sum / static_cast<double>(dim);

  Hamiltonian h;
  h.op.basis = basis;
  h.op.matrix = Eigen::Map<const SparseMatrix<double>>(
      static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim),
      static_cast<Eigen::Index>(values.size()), outer.data(), inner.data(),
      values.data());
  h.op.hermiticity_residual = hermiticity_residual(h.op.matrix);
  h.leakage = leakage;
  return h;
}

void apply_hamiltonian(const PhysicsParams& p, const EnumeratedBasis& basis,
                       std::span<const cplx> x, std::span<cplx> y) {
  check_compatible(p, basis);
  if (x.size() != basis.size() || y.size() != basis.size())
    throw std::invalid_argument("vector size does not match basis");
  HamiltonianColumns columns(p, basis, false);
  std::fill(y.begin(), y.end(), cplx{});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const cplx xi = x[i];
    if (xi == cplx{}) continue;
    columns.column(i, [&](const FockKey& key, double amp, int) {
      if (auto j = basis.index_of(key)) y[*j] += amp * xi;
    });
  }
}

CollectiveSpin build_collective_spin(std::shared_ptr<const EnumeratedBasis> basis) {
  const auto dim = static_cast<Eigen::Index>(basis->size());
  std::vector<Eigen::Triplet<double>> plus;
  std::vector<Eigen::Triplet<double>> z;
  std::vector<std::uint8_t> scratch;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto slots = basis->slots(i);
    int up = 0;
    int down = 0;
    for (int m = 0; m < basis->modes(); ++m) {
      down += slots[2 * m];
      up += slots[2 * m + 1];
    }
    z.emplace_back(i, i, 0.5 * (up - down));
    for (int m = 0; m < basis->modes(); ++m) {
      const int nd = slots[2 * m];
      if (nd == 0) continue;
      const int nu = slots[2 * m + 1];
      FockKey key = basis->key(slots);
      basis->shift_key(key, 2 * m, -1);
      basis->shift_key(key, 2 * m + 1, +1);
      const auto j = basis->index_of(key);
      if (!j)
        throw std::logic_error("basis is not closed under spin flips");
      plus.emplace_back(*j, i, std::sqrt(double(nd) * (nu + 1)));
    }
  }

  CollectiveSpin s;
  s.s_plus.basis = basis;
  s.s_plus.matrix = from_triplets(dim, plus);
  s.sz.basis = basis;
  s.sz.matrix = from_triplets(dim, z);

  const SparseMatrix<double> s_minus = s.s_plus.matrix.transpose();
  s.sx.basis = basis;
  s.sx.matrix = 0.5 * (s.s_plus.matrix + s_minus);
  s.sx.hermiticity_residual = hermiticity_residual(s.sx.matrix);

  s.sy.basis = basis;
  const SparseMatrix<cplx> plus_c = s.s_plus.matrix.cast<cplx>();
  const SparseMatrix<cplx> minus_c = s_minus.cast<cplx>();
  s.sy.matrix = cplx(0.0, -0.5) * (plus_c - minus_c);
  s.sy.hermiticity_residual = hermiticity_residual(s.sy.matrix);

  // S^2 = S_- S_+ + S_z^2 + S_z
  s.s_squared.basis = basis;
  s.s_squared.matrix = SparseMatrix<double>(s_minus * s.s_plus.matrix) +
                       SparseMatrix<double>(s.sz.matrix * s.sz.matrix) + s.sz.matrix;
  s.s_squared.matrix.prune(0.0, 1e-14);
  s.s_squared.hermiticity_residual = hermiticity_residual(s.s_squared.matrix);
  return s;
}

std::vector<int> spin_sector_twice_j(int particles) {
  std::vector<int> out;
  for (int two_j = particles % 2; two_j <= particles; two_j += 2) out.push_back(two_j);
  return out;
}

RealOperator build_spin_sector_projector(const CollectiveSpin& spin, int two_j) {
  const int n = spin.sz.basis->particles();
  const auto sectors = spin_sector_twice_j(n);
  if (std::find(sectors.begin(), sectors.end(), two_j) == sectors.end())
    throw std::invalid_argument("invalid total spin 2j=" + std::to_string(two_j) +
                                " for N=" + std::to_string(n));
  auto eigenvalue = [](int tj) { return 0.25 * tj * (tj + 2); };
  const double lambda = eigenvalue(two_j);
  const auto dim = spin.s_squared.dimension();
  SparseMatrix<double> identity(dim, dim);
  identity.setIdentity();
  SparseMatrix<double> p = identity;
  for (int other : sectors) {
    if (other == two_j) continue;
    const double mu = eigenvalue(other);
    SparseMatrix<double> factor = (spin.s_squared.matrix - mu * identity) / (lambda - mu);
    p = SparseMatrix<double>(p * factor);
    p.prune(0.0, 1e-13);
  }
  RealOperator out;
  out.basis = spin.sz.basis;
  out.matrix = std::move(p);
  out.hermiticity_residual = hermiticity_residual(out.matrix);
  return out;
}

ComplexOperator build_tact_generator(const CollectiveSpin& spin) {
  const SparseMatrix<cplx> z = spin.sz.matrix.cast<cplx>();
  ComplexOperator g;
  g.basis = spin.sz.basis;
  g.matrix = SparseMatrix<cplx>(spin.sy.matrix * z) + SparseMatrix<cplx>(z * spin.sy.matrix);
  g.matrix.prune(cplx(0.0), 1e-14);
  g.hermiticity_residual = hermiticity_residual(g.matrix);
  return g;
}

}  // namespace rephase
