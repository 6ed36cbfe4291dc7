#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "bayesdr/rng.hpp"

using namespace bayesdr;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename Draw>
Moments sample_moments(int n, Draw&& draw) {
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  return {mean, (sum2 - n * mean * mean) / (n - 1)};
}

// One-sample Kolmogorov-Smirnov statistic against a continuous cdf.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Critical value of the KS statistic at alpha = 0.01.
double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

double gig_mean(double lambda, double chi, double psi) {
  const double omega = std::sqrt(chi * psi);
  return std::sqrt(chi / psi) * boost::math::cyl_bessel_k(lambda + 1, omega) /
         boost::math::cyl_bessel_k(lambda, omega);
}

double gig_second_moment(double lambda, double chi, double psi) {
  const double omega = std::sqrt(chi * psi);
  return (chi / psi) * boost::math::cyl_bessel_k(lambda + 2, omega) /
         boost::math::cyl_bessel_k(lambda, omega);
}

}  // namespace

TEST(Rng, SameStreamSameDraws) {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.bits(), b.bits());
}

TEST(Rng, DistinctStreamsDiffer) {
  Rng a(42, 7), b(42, 8), c(43, 7);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.bits();
    same_ab += x == b.bits();
    same_ac += x == c.bits();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, ChildStreamsAreDistinctAndStable) {
  const RngStream parent{5, 9};
  std::set<std::uint64_t> ids;
  for (std::uint64_t k = 0; k < 1000; ++k) ids.insert(parent.child(k).stream_id);
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_EQ(parent.child(3).stream_id, parent.child(3).stream_id);
  EXPECT_EQ(parent.child(3).master_seed, 5u);
}

TEST(Rng, ConsecutiveStreamsUncorrelated) {
  Rng a(1, 0), b(1, 1);
  const int n = 100000;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::abs(sxy / n), 5.0 / std::sqrt(n));
}

TEST(Rng, UniformInOpenInterval) {
  Rng rng(3, 0);
  const auto m = sample_moments(200000, [&] {
    const double u = rng.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    return u;
  });
  EXPECT_NEAR(m.mean, 0.5, 5 * std::sqrt(1.0 / 12 / 200000));
  EXPECT_NEAR(m.var, 1.0 / 12, 0.002);
}

TEST(Rng, IndexIsUniform) {
  Rng rng(11, 0);
  const int n = 7, draws = 140000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) {
    const auto k = rng.index(n);
    ASSERT_LT(k, static_cast<std::uint64_t>(n));
    ++counts[k];
  }
  const double expected = draws / static_cast<double>(n);
  const double sd = std::sqrt(draws * (1.0 / n) * (1 - 1.0 / n));
  for (int c : counts) EXPECT_NEAR(c, expected, 5 * sd);
}

TEST(Rng, NormalMatchesStandardNormalCdf) {
  Rng rng(5, 1);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = rng.normal();
  const boost::math::normal_distribution<> nd;
  EXPECT_LT(ks_statistic(xs, [&](double x) { return boost::math::cdf(nd, x); }), ks_critical(xs.size()));
}

TEST(Rng, GammaMoments) {
  for (double shape : {0.1, 0.5, 1.0, 3.7, 50.0}) {
    Rng rng(9, static_cast<std::uint64_t>(shape * 100));
    const int n = 200000;
    const auto m = sample_moments(n, [&] { return rng.gamma(shape, 2.0); });
    const double mean = shape / 2.0, var = shape / 4.0;
    EXPECT_NEAR(m.mean, mean, 5 * std::sqrt(var / n)) << "shape " << shape;
    EXPECT_NEAR(m.var / var, 1.0, 0.05) << "shape " << shape;
  }
}

TEST(Rng, LogGammaDrawFiniteForTinyShape) {
  Rng rng(2, 2);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(std::isfinite(rng.log_gamma_draw(1e-3)));
}

TEST(Rng, InverseGammaMean) {
  Rng rng(4, 4);
  const int n = 100000;
  const double shape = 6.0, scale = 3.0;
  const auto m = sample_moments(n, [&] { return rng.inv_gamma(shape, scale); });
  EXPECT_NEAR(m.mean / (scale / (shape - 1)), 1.0, 0.01);
}

TEST(Rng, BetaMean) {
  Rng rng(4, 5);
  const int n = 100000;
  const auto m = sample_moments(n, [&] { return rng.beta(3.0, 4.0); });
  EXPECT_NEAR(m.mean, 3.0 / 7.0, 5 * std::sqrt(3.0 * 4.0 / (49.0 * 8.0) / n));
}

TEST(Rng, GigMomentsMatchBesselOracle) {
  struct Case {
    double lambda, chi, psi;
  };
  const Case cases[] = {{0.5, 1.0, 1.0}, {-0.5, 2.0, 1.0}, {2.0, 0.3, 4.0},
                        {-20.0, 35.0, 1.0}, {-49.5, 120.0, 1.0}, {0.1, 0.01, 1.0}};
  std::uint64_t id = 0;
  for (const auto& c : cases) {
    Rng rng(17, id++);
    const int n = 100000;
    const auto m = sample_moments(n, [&] { return rng.gig(c.lambda, c.chi, c.psi); });
    const double mean = gig_mean(c.lambda, c.chi, c.psi);
    const double var = gig_second_moment(c.lambda, c.chi, c.psi) - mean * mean;
    EXPECT_NEAR(m.mean, mean, 5 * std::sqrt(var / n)) << c.lambda << " " << c.chi << " " << c.psi;
    EXPECT_NEAR(m.var / var, 1.0, 0.06) << c.lambda << " " << c.chi << " " << c.psi;
  }
}

TEST(Rng, GigZeroChiIsGamma) {
  Rng rng(17, 99);
  const int n = 100000;
  const auto m = sample_moments(n, [&] { return rng.gig(1.5, 0.0, 2.0); });
  // density x^{1/2} e^{-x}: Gamma(shape 1.5, rate psi / 2 = 1)
  EXPECT_NEAR(m.mean, 1.5, 5 * std::sqrt(1.5 / n));
}

TEST(Rng, TruncatedNormalHalfNormalMean) {
  Rng rng(8, 8);
  const int n = 100000;
  const auto m = sample_moments(n, [&] {
    const double z = rng.truncated_normal_unit(0.0, true);
    EXPECT_GT(z, 0.0);
    return z;
  });
  EXPECT_NEAR(m.mean / std::sqrt(2.0 / std::numbers::pi), 1.0, 0.01);
}

TEST(Rng, TruncatedNormalMatchesOracleCdf) {
  const boost::math::normal_distribution<> nd;
  for (double mean : {-3.0, -0.4, 0.0, 1.2, 6.0}) {
    for (bool positive : {true, false}) {
      Rng rng(21, static_cast<std::uint64_t>((mean + 10) * 10) * 2 + positive);
      std::vector<double> xs(10000);
      for (auto& x : xs) {
        x = rng.truncated_normal_unit(mean, positive);
        ASSERT_EQ(x > 0.0, positive);
      }
      // cdf of N(mean, 1) restricted to the half line
      const double mass = positive ? boost::math::cdf(boost::math::complement(nd, -mean)) : boost::math::cdf(nd, -mean);
      auto cdf = [&](double x) {
        const double f = boost::math::cdf(nd, x - mean);
        const double lower = positive ? boost::math::cdf(nd, -mean) : 0.0;
        return (f - lower) / mass;
      };
      EXPECT_LT(ks_statistic(xs, cdf), ks_critical(xs.size())) << mean << " " << positive;
    }
  }
}

TEST(Rng, LowerTruncatedFarTail) {
  Rng rng(3, 33);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(rng.lower_truncated_std_normal(12.0), 12.0);
}

TEST(Rng, NormalCdfAndQuantile) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_log_cdf(-8.0), std::log(boost::math::cdf(boost::math::normal_distribution<>(), -8.0)), 1e-12);
  // Mills-ratio series where the cdf itself underflows
  const double x = -40.0, x2 = x * x;
  const double series = -0.5 * x2 - std::log(-x) - 0.5 * std::log(2 * std::numbers::pi) +
                        std::log1p(-1 / x2 + 3 / (x2 * x2) - 15 / (x2 * x2 * x2) + 105 / (x2 * x2 * x2 * x2));
  EXPECT_NEAR(normal_log_cdf(x), series, 1e-8);
  for (double z : {-29.0, -31.0}) EXPECT_NEAR(normal_log_cdf(z), std::log(boost::math::cdf(boost::math::normal_distribution<>(), z)), 1e-9) << z;
  for (double x : {-5.0, -1.0, 0.3, 2.5}) EXPECT_NEAR(normal_quantile(normal_cdf(x)), x, 1e-10);
}
