#include "rephase/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rephase {

FockState::FockState(std::vector<std::uint8_t> slots) : occ_(std::move(slots)) {
  if (occ_.size() % 2 != 0)
    throw std::invalid_argument("FockState needs an even number of slots");
}

FockState FockState::spin_down(std::span<const int> spatial) {
  FockState s(static_cast<int>(spatial.size()));
  for (std::size_t m = 0; m < spatial.size(); ++m) {
    if (spatial[m] < 0 || spatial[m] > 255)
      throw std::invalid_argument("occupation out of range");
    s.set(static_cast<int>(m), Spin::down, spatial[m]);
  }
  return s;
}

int FockState::particles() const {
  return std::accumulate(occ_.begin(), occ_.end(), 0);
}

int FockState::quanta() const {
  int q = 0;
  for (int m = 0; m < modes(); ++m) q += m * spatial_occupation(m);
  return q;
}

int FockState::spin_up_count() const {
  int n = 0;
  for (int m = 0; m < modes(); ++m) n += occupation(m, Spin::up);
  return n;
}

FockState FockState::resized(int modes) const {
  std::vector<std::uint8_t> out(2 * static_cast<std::size_t>(modes), 0);
  for (std::size_t s = 0; s < occ_.size(); ++s) {
    if (s < out.size()) {
      out[s] = occ_[s];
    } else if (occ_[s] != 0) {
      throw std::invalid_argument("resize would drop occupied mode");
    }
  }
  return FockState(std::move(out));
}

std::string FockState::to_string() const {
  std::ostringstream os;
  os << '[';
  bool first = true;
  for (int m = 0; m < modes(); ++m) {
    for (Spin s : {Spin::down, Spin::up}) {
      if (occupation(m, s) == 0) continue;
      if (!first) os << ' ';
      os << occupation(m, s) << '@' << m << (s == Spin::up ? "u" : "d");
      first = false;
    }
  }
  os << ']';
  return os.str();
}

BilinearResult apply_bilinear(const FockState& state, Orbital creation,
                              Orbital annihilation) {
  const int n_removed = state.occupation(annihilation);
  if (n_removed == 0) return {state, 0.0};
  FockState out = state;
  out.set(annihilation.mode, annihilation.spin, n_removed - 1);
  const int n_target = out.occupation(creation);
  out.set(creation.mode, creation.spin, n_target + 1);
  return {std::move(out), std::sqrt(double(n_removed)) * std::sqrt(double(n_target + 1))};
}

std::size_t FockKeyHash::operator()(const FockKey& k) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t w : k.bits) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 31));
}

namespace {

int field_width_for(int particles) {
  const int bits = std::bit_width(static_cast<unsigned>(particles));
  // power of two so fields never straddle 64-bit words
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(bits, 1))));
}

}  // namespace

EnumeratedBasis::EnumeratedBasis(BasisSpec spec, std::vector<FockState> states)
    : spec_(spec), size_(states.size()), field_width_(field_width_for(spec.particles)) {
  if (spec_.modes < 1) throw std::invalid_argument("basis needs at least one mode");
  if (field_width_ * slot_count() > FockKey::words * 64)
    throw CapacityError("basis with " + std::to_string(spec_.modes) +
                        " modes and N=" + std::to_string(spec_.particles) +
                        " exceeds the packed key width");
  if (size_ > spec_.max_dimension)
    throw CapacityError("basis dimension " + std::to_string(size_) +
                        " exceeds budget " + std::to_string(spec_.max_dimension));
  occ_.reserve(size_ * slot_count());
  index_.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const FockState& s = states[i];
    if (s.modes() != spec_.modes)
      throw std::invalid_argument("basis state has wrong mode count");
    occ_.insert(occ_.end(), s.slots().begin(), s.slots().end());
    if (!index_.emplace(key(s.slots()), static_cast<std::uint32_t>(i)).second)
      throw std::invalid_argument("duplicate basis state " + s.to_string());
  }
}

FockState EnumeratedBasis::state(std::size_t i) const {
  auto sl = slots(i);
  return FockState(std::vector<std::uint8_t>(sl.begin(), sl.end()));
}

FockKey EnumeratedBasis::key(std::span<const std::uint8_t> slots) const {
  FockKey k;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s] == 0) continue;
    const std::size_t bit = s * field_width_;
    k.bits[bit >> 6] |= static_cast<std::uint64_t>(slots[s]) << (bit & 63);
  }
  return k;
}

std::optional<std::size_t> EnumeratedBasis::index_of(const FockKey& k) const {
  auto it = index_.find(k);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EnumeratedBasis::index_of(const FockState& s) const {
  if (s.particles() != spec_.particles) return std::nullopt;
  if (s.modes() > spec_.modes) {
    for (int m = spec_.modes; m < s.modes(); ++m)
      if (s.spatial_occupation(m) != 0) return std::nullopt;
  }
  const FockState sized = s.modes() == spec_.modes ? s : s.resized(spec_.modes);
  return index_of(key(sized.slots()));
}

std::size_t EnumeratedBasis::count_with_spin_up(int n_up) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    auto sl = slots(i);
    int up = 0;
    for (int m = 0; m < spec_.modes; ++m) up += sl[2 * m + 1];
    if (up == n_up) ++count;
  }
  return count;
}

namespace {

struct Enumerator {
  const BasisSpec& spec;
  std::vector<std::uint8_t> current;
  std::vector<FockState> out;

  void run(int slot, int remaining, int quanta) {
    const int mode = slot / 2;
    if (remaining == 0) {
      if (spec.quanta_parity && quanta % 2 != *spec.quanta_parity) return;
      if (out.size() >= spec.max_dimension)
        throw CapacityError("basis enumeration exceeds dimension budget " +
                            std::to_string(spec.max_dimension));
      out.emplace_back(current);
      return;
    }
    if (slot >= 2 * spec.modes) return;
    // every remaining atom sits in a mode >= this one
    if (quanta + remaining * mode > spec.max_quanta) return;
    const int fit = mode == 0 ? remaining
                              : std::min(remaining, (spec.max_quanta - quanta) / mode);
    for (int n = fit; n >= 0; --n) {
      current[slot] = static_cast<std::uint8_t>(n);
      run(slot + 1, remaining - n, quanta + n * mode);
    }
    current[slot] = 0;
  }
};

}  // namespace

EnumeratedBasis enumerate_basis(const BasisSpec& spec) {
  if (spec.particles < 1 || spec.particles > 255)
    throw std::invalid_argument("particle number must be in [1, 255]");
  if (spec.modes < 1) throw std::invalid_argument("need at least one mode");
  if (spec.max_quanta < 0) throw std::invalid_argument("negative quanta cutoff");
  Enumerator e{spec, std::vector<std::uint8_t>(2 * spec.modes, 0), {}};
  e.run(0, spec.particles, 0);
  return EnumeratedBasis(spec, std::move(e.out));
}

EnumeratedBasis sub_basis_around(const FockState& reference, int delta_q,
                                 int modes, bool match_parity,
                                 std::size_t max_dimension) {
  if (delta_q < 0) throw std::invalid_argument("delta_q must be non-negative");
  const int q_ref = reference.quanta();
  for (int m = modes; m < reference.modes(); ++m)
    if (reference.spatial_occupation(m) != 0)
      throw std::invalid_argument("reference occupies a mode beyond the cutoff");
  BasisSpec spec;
  spec.particles = reference.particles();
  spec.max_quanta = q_ref + delta_q;
  // no single atom can reach a mode above the quanta cutoff
  spec.modes = std::min(modes, spec.max_quanta + 1);
  if (match_parity) spec.quanta_parity = q_ref % 2;
  spec.max_dimension = max_dimension;
  return enumerate_basis(spec);
}

EnumeratedBasis frozen_spatial_basis(const FockState& reference) {
  int last = 0;
  for (int m = 0; m < reference.modes(); ++m)
    if (reference.spatial_occupation(m) > 0) last = m;
  BasisSpec spec;
  spec.particles = reference.particles();
  spec.modes = last + 1;
  spec.max_quanta = reference.quanta();

  std::vector<FockState> states;
  FockState current(spec.modes);
  // lexicographic over modes: more spin-down first
  auto recurse = [&](auto&& self, int mode) -> void {
    if (mode == spec.modes) {
      states.push_back(current);
      return;
    }
    const int n = reference.spatial_occupation(mode);
    for (int down = n; down >= 0; --down) {
      current.set(mode, Spin::down, down);
      current.set(mode, Spin::up, n - down);
      self(self, mode + 1);
    }
  };
  recurse(recurse, 0);
  return EnumeratedBasis(spec, std::move(states));
}

}  // namespace rephase
