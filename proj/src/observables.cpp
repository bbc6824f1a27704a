#include "rephase/observables.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rephase/spbasis.hpp"

namespace rephase {

SpinMoments& SpinMoments::operator+=(const SpinMoments& o) {
  mean += o.mean;
  second += o.second;
  return *this;
}

SpinMoments SpinMoments::operator*(double w) const {
  SpinMoments out;
  out.mean = mean * w;
  out.second = second * w;
  return out;
}

SpinMoments spin_moments(const CollectiveSpin& spin, const Eigen::VectorXcd& psi) {
  const std::array<Eigen::VectorXcd, 3> s = {spin.sx.matrix * psi, spin.sy.matrix * psi,
                                             spin.sz.matrix * psi};
  SpinMoments m;
  for (int a = 0; a < 3; ++a) {
    m.mean(a) = psi.dot(s[a]).real();
    for (int b = a; b < 3; ++b) m.second(a, b) = m.second(b, a) = s[a].dot(s[b]).real();
  }
  return m;
}

double coherence(const SpinMoments& m) { return std::hypot(m.mean(0), m.mean(1)); }

double coherence_normalized(const SpinMoments& m, int particles) {
  return coherence(m) / (particles / 2.0);
}

std::optional<double> squeezing(const SpinMoments& m, int particles, double eps) {
  const double length = m.mean.norm();
  if (!(length > eps)) return std::nullopt;
  const Eigen::Vector3d n = m.mean / length;
  const Eigen::Vector3d perp(n(1), -n(0), 0.0);
  const double variance = perp.dot(m.covariance() * perp);
  const double projection = m.mean.dot(n);
  return particles * variance / (projection * projection);
}

SectorProjectors build_sector_projectors(const CollectiveSpin& spin) {
  SectorProjectors out;
  out.two_j = spin_sector_twice_j(spin.sz.basis->particles());
  for (int two_j : out.two_j) out.projectors.push_back(build_spin_sector_projector(spin, two_j));
  return out;
}

std::vector<double> sector_populations(const SectorProjectors& projectors,
                                       const Eigen::VectorXcd& psi) {
  std::vector<double> p;
  p.reserve(projectors.projectors.size());
  for (const auto& proj : projectors.projectors) p.push_back(psi.dot(proj.matrix * psi).real());
  return p;
}

RegimeDiagnostics regime_diagnostics(const PhysicsParams& p, std::span<const double> occupations) {
  RegimeDiagnostics d;
  const int levels = static_cast<int>(occupations.size());
  double particles = 0.0;
  for (double n : occupations) particles += n;
  if (levels == 0 || particles <= 0.0) throw std::invalid_argument("no occupied levels");

  // n(x) = sum_k n_k phi_k(x)^2, so int n^2 = sum_kl n_k n_l U_kkll
  auto table = contact_table(levels);
  double integral = 0.0;
  for (int k = 0; k < levels; ++k)
    for (int l = 0; l < levels; ++l)
      integral += occupations[k] * occupations[l] * (*table)(k, k, l, l);
  d.mean_density = integral / particles;

  const double g01 = p.couplings.g01;
  d.thermal_velocity = std::sqrt(p.temperature);
  d.collisional_shift = std::abs(g01) * d.mean_density;
  d.lateral_energy = 2.0 * g01 * g01 * d.mean_density * d.thermal_velocity /
                     (3.0 * std::numbers::pi * std::sqrt(std::numbers::pi));

  // <k|x|k> = 0, <k|x^2|k> = k + 1/2
  double mean = 0.0, square = 0.0;
  for (int k = 0; k < levels; ++k) {
    const double shift = p.beta2 * (k + 0.5);
    mean += occupations[k] * shift;
    square += occupations[k] * shift * shift;
  }
  mean /= particles;
  d.field_spread = std::sqrt(std::max(0.0, square / particles - mean * mean));
  return d;
}

std::optional<double> crossing_time(std::span<const double> times,
                                    std::span<const double> values, double threshold) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("crossing_time needs a non-empty series");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("time grid must increase");
  if (values[0] > threshold) return times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (values[i] > threshold) {
      const double f = (threshold - values[i - 1]) / (values[i] - values[i - 1]);
      return times[i - 1] + f * (times[i] - times[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace rephase
