#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bayesdr {

/// Identifies one independent random stream. Streams are keyed by the
/// master seed and addressed by id, so the draws of a stream never depend
/// on which thread consumes it or on how many other streams exist.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Derive a child stream, e.g. one per bootstrap row or per replication.
  RngStream child(std::uint64_t sub_id) const;
};

/// Philox4x32-10 counter-based generator. The key is the master seed, the
/// upper half of the counter is the stream id and the lower half counts
/// output blocks.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(RngStream stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Variate generation on top of a Philox stream. All algorithms are
/// implemented here so draws are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(RngStream stream) : engine_(stream) {}
  Rng(std::uint64_t seed, std::uint64_t stream_id) : engine_(RngStream{seed, stream_id}) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, n), Lemire's multiply-shift with rejection.
  std::uint64_t index(std::uint64_t n);
  double normal();
  /// Gamma(shape, rate = 1).
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma_draw(double shape);
  /// Gamma with shape/rate parametrisation (mean shape/rate).
  double gamma(double shape, double rate) { return gamma(shape) / rate; }
  /// InvGamma(shape, scale): density ∝ x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale);
  /// Generalised inverse Gaussian: density ∝ x^{lambda-1} exp(-(chi/x + psi x)/2).
  double gig(double lambda, double chi, double psi);
  double beta(double a, double b);
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Normal(mean, 1) truncated to (0, inf) when positive, (-inf, 0) otherwise.
  double truncated_normal_unit(double mean, bool positive);
  /// Standard normal truncated below at `lower`.
  double lower_truncated_std_normal(double lower);

 private:
  Philox engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double normal_cdf(double x);
double normal_log_cdf(double x);
double normal_quantile(double p);

}  // namespace bayesdr
