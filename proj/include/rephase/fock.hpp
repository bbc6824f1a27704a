#pragma once

// Two-component bosonic Fock basis: enumeration, indexing and truncation by
// total spatial quanta.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rephase {

enum class Spin : int { down = 0, up = 1 };

/// Sign of sigma_z for a spin label: up = +1, down = -1.
constexpr int spin_sign(Spin s) { return s == Spin::up ? 1 : -1; }

/// Single-particle slot (oscillator mode, spin). Slots are numbered
/// 2*mode + spin.
struct Orbital {
  int mode = 0;
  Spin spin = Spin::down;

  constexpr int slot() const { return 2 * mode + static_cast<int>(spin); }
};

/// Thrown when a basis would exceed the configured dimension or key width.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Occupation numbers n_{m,sigma} over `modes` oscillator modes.
class FockState {
 public:
  FockState() = default;
  explicit FockState(int modes) : occ_(2 * static_cast<std::size_t>(modes), 0) {}
  explicit FockState(std::vector<std::uint8_t> slots);

  /// All `particles` atoms spin-down, distributed by `spatial` (one entry per
  /// mode).
  static FockState spin_down(std::span<const int> spatial);

  int modes() const { return static_cast<int>(occ_.size() / 2); }
  int occupation(int mode, Spin s) const { return occ_[2 * mode + static_cast<int>(s)]; }
  int occupation(Orbital o) const { return occ_[o.slot()]; }
  void set(int mode, Spin s, int n) { occ_[2 * mode + static_cast<int>(s)] = static_cast<std::uint8_t>(n); }
  /// n_{m,down} + n_{m,up}
  int spatial_occupation(int mode) const { return occ_[2 * mode] + occ_[2 * mode + 1]; }

  int particles() const;
  /// Q = sum_m m (n_{m,down} + n_{m,up})
  int quanta() const;
  int spin_up_count() const;

  std::span<const std::uint8_t> slots() const { return occ_; }

  /// Copy with the mode count changed; throws if occupied modes would be cut.
  FockState resized(int modes) const;

  std::string to_string() const;

  auto operator<=>(const FockState&) const = default;

 private:
  std::vector<std::uint8_t> occ_;
};

/// Result of a single a^dagger a action on a Fock state.
struct BilinearResult {
  FockState state;
  double amplitude = 0.0;
};

/// a^dagger_{creation} a_{annihilation} |state>. Annihilating an empty slot
/// gives amplitude 0 and the input state unchanged.
BilinearResult apply_bilinear(const FockState& state, Orbital creation,
                              Orbital annihilation);

struct BasisSpec {
  int particles = 1;
  int modes = 1;
  /// Cutoff on total spatial quanta Q.
  int max_quanta = 0;
  /// When set, only states with Q % 2 == *quanta_parity are kept. H couples
  /// Q only to Q +- 2 when the linear field term vanishes.
  std::optional<int> quanta_parity;
  std::size_t max_dimension = 4'000'000;
};

/// Packed occupation key: fixed-width bit fields (width sized from N), one
/// per slot. Fields never straddle a word boundary.
struct FockKey {
  static constexpr int words = 8;
  std::array<std::uint64_t, words> bits{};

  bool operator==(const FockKey&) const = default;
};

struct FockKeyHash {
  std::size_t operator()(const FockKey& k) const noexcept;
};

class EnumeratedBasis {
 public:
  /// Takes ownership of `states`; order is preserved as the index order.
  EnumeratedBasis(BasisSpec spec, std::vector<FockState> states);

  const BasisSpec& spec() const { return spec_; }
  std::size_t size() const { return size_; }
  int modes() const { return spec_.modes; }
  int particles() const { return spec_.particles; }
  int slot_count() const { return 2 * spec_.modes; }
  /// Bits per slot in a FockKey.
  int field_width() const { return field_width_; }

  /// Occupations of basis state i, indexed by slot.
  std::span<const std::uint8_t> slots(std::size_t i) const {
    return {occ_.data() + i * slot_count(), static_cast<std::size_t>(slot_count())};
  }
  FockState state(std::size_t i) const;

  std::optional<std::size_t> index_of(const FockState& s) const;
  std::optional<std::size_t> index_of(const FockKey& k) const;

  FockKey key(std::span<const std::uint8_t> slots) const;
  /// Adds `delta` to the field for `slot`. Caller keeps fields in [0, N].
  void shift_key(FockKey& key, int slot, int delta) const {
    const int bit = slot * field_width_;
    key.bits[bit >> 6] += static_cast<std::uint64_t>(static_cast<std::int64_t>(delta)) << (bit & 63);
  }

  /// Number of states with given spin-up count.
  std::size_t count_with_spin_up(int n_up) const;

 private:
  BasisSpec spec_;
  std::size_t size_ = 0;
  int field_width_ = 4;
  std::vector<std::uint8_t> occ_;
  std::unordered_map<FockKey, std::uint32_t, FockKeyHash> index_;
};

/// Every state with N atoms, modes < spec.modes and Q <= spec.max_quanta, in
/// lexicographically decreasing slot-occupation order (all atoms in mode 0,
/// spin down, come first).
EnumeratedBasis enumerate_basis(const BasisSpec& spec);

/// Basis of all states with Q <= Q(reference) + delta_q over `modes` modes
/// (any spin distribution). With `match_parity` only states whose Q has the
/// parity of Q(reference) are kept.
EnumeratedBasis sub_basis_around(const FockState& reference, int delta_q,
                                 int modes, bool match_parity = false,
                                 std::size_t max_dimension = 4'000'000);

/// Every spin distribution over the spatial profile of `reference`; the
/// spatial occupations are held fixed.
EnumeratedBasis frozen_spatial_basis(const FockState& reference);

}  // namespace rephase
