#include "rephase/idealgas.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "rephase/spbasis.hpp"

namespace rephase {

std::string_view to_string(Statistics s) {
  switch (s) {
    case Statistics::bosons: return "bosons";
    case Statistics::fermions: return "fermions";
    case Statistics::boltzmann: return "boltzmann";
  }
  return "?";
}

Statistics parse_statistics(std::string_view name) {
  if (name == "bosons") return Statistics::bosons;
  if (name == "fermions") return Statistics::fermions;
  if (name == "boltzmann") return Statistics::boltzmann;
  throw std::invalid_argument("unknown statistics '" + std::string(name) + "'");
}

std::complex<double> s_single_level(int n, double beta2, double t) {
  if (n < 0) throw std::invalid_argument("level index must be >= 0");
  return 0.5 * std::exp(std::complex<double>(0.0, -2.0 * beta2 * n * t));
}

std::complex<double> s_thermal_single(double beta2, double temperature, double t) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  const double xi = std::exp(-1.0 / temperature);
  return 0.5 * (1.0 - xi) / (1.0 - xi * std::exp(std::complex<double>(0.0, -2.0 * beta2 * t)));
}

CanonicalBoseGas::CanonicalBoseGas(int particles, double temperature)
    : particles_(particles), temperature_(temperature) {
  if (particles < 1) throw std::invalid_argument("particle number must be >= 1");
  if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  xi_ = temperature == 0.0 ? 0.0 : std::exp(-1.0 / temperature);
  z_.assign(particles + 1, 1.0);
  for (int n = 1; n <= particles; ++n) z_[n] = z_[n - 1] / (1.0 - std::pow(xi_, n));
}

double CanonicalBoseGas::mean_occupation(int k) const {
  if (k < 0) throw std::invalid_argument("level index must be >= 0");
  double sum = 0.0;
  for (int j = 1; j <= particles_; ++j)
    sum += std::pow(xi_, static_cast<double>(j) * k) * z_[particles_ - j];
  return sum / z_[particles_];
}

std::vector<double> CanonicalBoseGas::mean_occupations(double tail) const {
  std::vector<double> out;
  double total = 0.0;
  for (int k = 0; total < particles_ * (1.0 - tail); ++k) {
    const double n = mean_occupation(k);
    if (n == 0.0) break;
    out.push_back(n);
    total += n;
  }
  return out;
}

double CanonicalBoseGas::lowest_level_probability(int n, int remaining) const {
  if (n < 0 || n > remaining || remaining > particles_)
    throw std::invalid_argument("invalid occupation request");
  return std::pow(xi_, remaining - n) * z_[remaining - n] / z_[remaining];
}

double CanonicalBoseGas::configuration_weight(int quanta) const {
  return std::pow(xi_, quanta) / z_[particles_];
}

namespace {

// Sum of f(k) over k >= 0, stopping once a term is negligible and the
// remainder is bounded by a geometric tail with ratio xi.
double level_sum(const std::function<double(int)>& f, double xi, double tol,
                 std::vector<double>* terms = nullptr) {
  double sum = 0.0;
  for (int k = 0;; ++k) {
    const double v = f(k);
    sum += v;
    if (terms) terms->push_back(v);
    if (k > 0 && v * xi / (1.0 - xi) < tol) break;
    if (k > 10'000'000) throw RootFindingError("level sum did not converge");
  }
  return sum;
}

double occupation(Statistics kind, int k, double mu, double temperature) {
  const double x = (k - mu) / temperature;
  return kind == Statistics::bosons ? 1.0 / std::expm1(x) : 1.0 / (std::exp(x) + 1.0);
}

}  // namespace

std::vector<double> mean_occupations(Statistics kind, int particles,
                                     double temperature, double tail) {
  if (particles < 1) throw std::invalid_argument("particle number must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  const double xi = std::exp(-1.0 / temperature);
  const double tol = tail * particles;
  std::vector<double> out;
  if (kind == Statistics::boltzmann) {
    level_sum([&](int k) { return particles * (1.0 - xi) * std::pow(xi, k); }, xi, tol, &out);
    return out;
  }

  auto excess = [&](double mu) {
    return level_sum([&](int k) { return occupation(kind, k, mu, temperature); }, xi,
                     tol * 1e-3) -
           particles;
  };
  double lo = -1.0;
  double hi = kind == Statistics::bosons ? -1e-13 : static_cast<double>(particles);
  for (int i = 0; excess(lo) > 0.0; ++i) {
    lo *= 2.0;
    if (i > 60) throw RootFindingError("no lower bracket for the chemical potential");
  }
  for (int i = 0; excess(hi) < 0.0; ++i) {
    if (kind == Statistics::bosons || i > 60) {
      std::ostringstream msg;
      msg << "chemical potential bracket [" << lo << ", " << hi << "] does not contain a root";
      throw RootFindingError(msg.str());
    }
    hi = 2.0 * hi + 1.0;
  }
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  if (iterations >= 200) {
    std::ostringstream msg;
    msg << "chemical potential did not converge in [" << a << ", " << b << "]";
    throw RootFindingError(msg.str());
  }
  const double mu = 0.5 * (a + b);
  level_sum([&](int k) { return occupation(kind, k, mu, temperature); }, xi, tol, &out);
  return out;
}

Contrast contrast_from_levels(std::span<const double> occupations,
                              std::span<const std::complex<double>> s) {
  if (s.size() < occupations.size())
    throw std::invalid_argument("fewer coherences than occupied levels");
  std::complex<double> sum = 0.0;
  double particles = 0.0;
  for (std::size_t k = 0; k < occupations.size(); ++k) {
    sum += occupations[k] * s[k];
    particles += occupations[k];
  }
  return {std::abs(sum), std::abs(sum) / (particles / 2.0)};
}

Contrast contrast_thermal(int particles, double temperature, double beta2,
                          double t, Statistics kind) {
  const auto occ = mean_occupations(kind, particles, temperature);
  std::vector<std::complex<double>> s(occ.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = s_single_level(static_cast<int>(k), beta2, t);
  Contrast c = contrast_from_levels(occ, s);
  // report against the exact N rather than the truncated occupation sum
  c.normalized = c.raw / (particles / 2.0);
  return c;
}

TwoPotentialOverlap::TwoPotentialOverlap(double beta1, double beta2, int levels, int modes)
    : levels_(levels) {
  if (levels < 1 || modes < levels)
    throw std::invalid_argument("need 1 <= levels <= modes");
  if (!(1.0 - 2.0 * std::abs(beta2) > 0.0))
    throw std::invalid_argument("unstable trap: 1 - 2|beta2| <= 0");
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(modes, modes);
  for (int m = 0; m < modes; ++m)
    for (int n = std::max(0, m - 2); n <= std::min(modes - 1, m + 2); ++n)
      field(m, n) = beta1 * x_matrix_element(m, n, modes) + beta2 * x2_matrix_element(m, n, modes);
  Eigen::MatrixXd trap = Eigen::MatrixXd::Zero(modes, modes);
  for (int m = 0; m < modes; ++m) trap(m, m) = m + 0.5;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> up(trap + field);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> down(trap - field);
  energy_up_ = up.eigenvalues();
  energy_down_ = down.eigenvalues();
  vectors_up_ = up.eigenvectors();
  vectors_down_ = down.eigenvectors();
}

std::vector<std::complex<double>> TwoPotentialOverlap::coherences(double t) const {
  using cvec = Eigen::VectorXcd;
  const std::complex<double> i(0.0, 1.0);
  const cvec phase_up = (-i * t * energy_up_.cast<std::complex<double>>()).array().exp();
  const cvec phase_down = (-i * t * energy_down_.cast<std::complex<double>>()).array().exp();
  // columns k: exp(-i H t)|k>
  const Eigen::MatrixXcd u =
      vectors_up_.cast<std::complex<double>>() * phase_up.asDiagonal() *
      vectors_up_.topRows(levels_).transpose().cast<std::complex<double>>();
  const Eigen::MatrixXcd d =
      vectors_down_.cast<std::complex<double>>() * phase_down.asDiagonal() *
      vectors_down_.topRows(levels_).transpose().cast<std::complex<double>>();
  std::vector<std::complex<double>> s(levels_);
  for (int k = 0; k < levels_; ++k) s[k] = 0.5 * u.col(k).dot(d.col(k));
  return s;
}

Contrast contrast_canonical_exact(int particles, double temperature,
                                  double beta1, double beta2, double t) {
  const CanonicalBoseGas gas(particles, temperature);
  const auto occ = gas.mean_occupations();
  const int levels = static_cast<int>(occ.size());
  const TwoPotentialOverlap overlap(beta1, beta2, levels, levels + 40);
  Contrast c = contrast_from_levels(occ, overlap.coherences(t));
  c.normalized = c.raw / (particles / 2.0);
  return c;
}

std::vector<StatisticsRow> statistics_comparison(int particles, double temperature,
                                                 double beta2,
                                                 std::span<const double> times) {
  std::vector<double> occ[3];
  const Statistics kinds[3] = {Statistics::bosons, Statistics::fermions, Statistics::boltzmann};
  for (int i = 0; i < 3; ++i) occ[i] = mean_occupations(kinds[i], particles, temperature);
  std::vector<StatisticsRow> rows;
  rows.reserve(times.size());
  for (double t : times) {
    double c[3];
    for (int i = 0; i < 3; ++i) {
      std::vector<std::complex<double>> s(occ[i].size());
      for (std::size_t k = 0; k < s.size(); ++k) s[k] = s_single_level(static_cast<int>(k), beta2, t);
      c[i] = contrast_from_levels(occ[i], s).raw / (particles / 2.0);
    }
    rows.push_back({t, c[0], c[1], c[2]});
  }
  return rows;
}

}  // namespace rephase
