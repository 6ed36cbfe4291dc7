#include "bayesdr/rng.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <cstdint>

namespace bayesdr {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::child(std::uint64_t sub_id) const {
  return RngStream{master_seed, splitmix64(stream_id ^ splitmix64(sub_id + 0x5851F42D4C957F2Dull))};
}

Philox::Philox(RngStream stream) : stream_(stream.stream_id) {
  key_[0] = static_cast<std::uint32_t>(stream.master_seed);
  key_[1] = static_cast<std::uint32_t>(stream.master_seed >> 32);
}

void Philox::refill() {
  std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                   static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(stream_),
                                   static_cast<std::uint32_t>(stream_ >> 32)};
  std::array<std::uint32_t, 2> key = key_;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  buffer_[0] = (static_cast<std::uint64_t>(ctr[0]) << 32) | ctr[1];
  buffer_[1] = (static_cast<std::uint64_t>(ctr[2]) << 32) | ctr[3];
  buffered_ = 2;
  ++block_;
}

Philox::result_type Philox::operator()() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double Rng::log_gamma_draw(double shape) {
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^{1/a}
    return log_gamma_draw(shape + 1.0) + std::log(uniform()) / shape;
  }
  // Marsaglia-Tsang
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape) {
  return std::exp(std::clamp(log_gamma_draw(shape), -700.0, 700.0));
}

double Rng::inv_gamma(double shape, double scale) {
  const double log_value = std::log(scale) - log_gamma_draw(shape);
  return std::exp(std::clamp(log_value, -700.0, 700.0));
}

double Rng::gig(double lambda, double chi, double psi) {
  constexpr double kTiny = 1e-300;
  if (lambda < 0.0) return 1.0 / gig(-lambda, psi, chi);
  // Limits of the family: Gamma(lambda, psi / 2) as chi -> 0.
  if (chi <= kTiny) return std::max(gamma(std::max(lambda, 1e-12)) * 2.0 / psi, kTiny);
  const double omega = std::sqrt(chi * psi);
  const double alpha = std::sqrt(chi / psi);
  const double lm1 = lambda - 1.0;
  const double mode = (lm1 + std::sqrt(lm1 * lm1 + omega * omega)) / omega;
  const auto log_density = [&](double y) { return lm1 * std::log(y) - 0.5 * omega * (y + 1.0 / y); };
  const double log_peak = log_density(mode);

  // Ratio of uniforms around the mode: the v-range is set by the extrema of
  // (y - mode) sqrt(f(y)), where d/dy log of that product vanishes.
  const auto slope = [&](double y) {
    return 1.0 / (y - mode) + 0.5 * (lm1 / y - 0.5 * omega + 0.5 * omega / (y * y));
  };
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 200;
  double hi = mode + 1.0 + mode;
  while (slope(hi) > 0.0) hi = mode + 2.0 * (hi - mode);
  const auto upper = boost::math::tools::toms748_solve(slope, mode * (1.0 + 1e-12) + 1e-300, hi, tol, iters);
  const double y_plus = 0.5 * (upper.first + upper.second);
  double lo = 0.5 * mode;
  while (slope(lo) < 0.0) lo *= 0.5;
  iters = 200;
  const auto lower = boost::math::tools::toms748_solve(slope, lo, mode * (1.0 - 1e-12), tol, iters);
  const double y_minus = 0.5 * (lower.first + lower.second);
  const double v_plus = (y_plus - mode) * std::exp(0.5 * (log_density(y_plus) - log_peak));
  const double v_minus = (y_minus - mode) * std::exp(0.5 * (log_density(y_minus) - log_peak));

  for (;;) {
    const double u = uniform();
    const double v = v_minus + uniform() * (v_plus - v_minus);
    const double y = v / u + mode;
    if (y <= 0.0) continue;
    if (2.0 * std::log(u) <= log_density(y) - log_peak) return std::max(alpha * y, kTiny);
  }
}

double Rng::beta(double a, double b) {
  const double lx = log_gamma_draw(a);
  const double ly = log_gamma_draw(b);
  const double hi = std::max(lx, ly);
  const double x = std::exp(lx - hi);
  const double y = std::exp(ly - hi);
  const double value = x / (x + y);
  // Keep theta strictly inside (0, 1).
  return std::clamp(value, 1e-300, 1.0 - 1e-16);
}

double Rng::lower_truncated_std_normal(double lower) {
  if (lower < 0.5) {
    for (;;) {
      const double z = normal();
      if (z > lower) return z;
    }
  }
  // Robert (1995) exponential proposal.
  const double alpha = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower - std::log(uniform()) / alpha;
    const double diff = z - alpha;
    if (std::log(uniform()) <= -0.5 * diff * diff) return z;
  }
}

double Rng::truncated_normal_unit(double mean, bool positive) {
  // Y* > 0  <=>  Z > -mean with Y* = mean + Z
  if (positive) return mean + lower_truncated_std_normal(-mean);
  return mean - lower_truncated_std_normal(mean);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_log_cdf(double x) {
  // erfc keeps full relative precision until it underflows near x = -37
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace bayesdr
