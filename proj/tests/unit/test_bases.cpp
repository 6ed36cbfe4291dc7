#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bayesdr/bases.hpp"
#include "bayesdr/errors.hpp"
#include "bayesdr/rng.hpp"

using namespace bayesdr;

namespace {

// Textbook Cox-de Boor recursion on an explicit knot vector.
double cox_de_boor(const std::vector<double>& knots, int i, int k, double x, bool at_upper) {
  if (k == 0) {
    const auto ui = static_cast<std::size_t>(i);
    if (at_upper) {
      // right end: the last non-degenerate interval is closed
      return knots[ui] < knots[ui + 1] && knots[ui + 1] == knots.back() ? 1.0 : 0.0;
    }
    return knots[ui] <= x && x < knots[ui + 1] ? 1.0 : 0.0;
  }
  const auto ui = static_cast<std::size_t>(i);
  const auto uk = static_cast<std::size_t>(k);
  double out = 0.0;
  const double d1 = knots[ui + uk] - knots[ui];
  const double d2 = knots[ui + uk + 1] - knots[ui + 1];
  if (d1 > 0) out += (x - knots[ui]) / d1 * cox_de_boor(knots, i, k - 1, x, at_upper);
  if (d2 > 0) out += (knots[ui + uk + 1] - x) / d2 * cox_de_boor(knots, i + 1, k - 1, x, at_upper);
  return out;
}

Eigen::MatrixXd naive_bspline(const Eigen::VectorXd& x, const std::vector<double>& interior, double lower,
                              double upper, int degree) {
  std::vector<double> knots(static_cast<std::size_t>(degree + 1), lower);
  knots.insert(knots.end(), interior.begin(), interior.end());
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), upper);
  const int n_basis = static_cast<int>(interior.size()) + degree + 1;
  Eigen::MatrixXd out(x.size(), n_basis);
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    for (int i = 0; i < n_basis; ++i) out(r, i) = cox_de_boor(knots, i, degree, x[r], x[r] >= upper);
  }
  return out;
}

Eigen::VectorXd random_points(std::size_t n, std::uint64_t id) {
  Rng rng(314, id);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST(SplineBasis, ShapeAndCentering) {
  const auto x = random_points(50, 1);
  const auto sb = spline_basis(x, 3);
  ASSERT_EQ(sb.basis.rows(), 50);
  ASSERT_EQ(sb.basis.cols(), 3);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(sb.basis.col(j).mean(), 0.0, 1e-10);
}

TEST(SplineBasis, MatchesCoxDeBoorOracle) {
  for (int df : {1, 2, 3, 5, 8}) {
    const auto x = random_points(60, static_cast<std::uint64_t>(df));
    const auto sb = spline_basis(x, df);
    // evaluate at the knots, the boundaries and the data
    Eigen::VectorXd pts(x.size() + static_cast<Eigen::Index>(sb.interior_knots.size()) + 2);
    pts << x, Eigen::Map<const Eigen::VectorXd>(sb.interior_knots.data(),
                                                static_cast<Eigen::Index>(sb.interior_knots.size())),
        sb.lower, sb.upper;
    const Eigen::MatrixXd ours = bspline_raw(pts, sb.interior_knots, sb.lower, sb.upper, sb.degree);
    const Eigen::MatrixXd oracle = naive_bspline(pts, sb.interior_knots, sb.lower, sb.upper, sb.degree);
    EXPECT_LT((ours - oracle).cwiseAbs().maxCoeff(), 1e-8) << "df " << df;
    // partition of unity
    EXPECT_LT((ours.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd centred = oracle.rightCols(df).rowwise() - sb.column_means;
    EXPECT_LT((sb.evaluate(pts) - centred).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SplineBasis, DegreeOneSingleMonotoneColumn) {
  const auto x = random_points(30, 9);
  const auto sb = spline_basis(x, 1);
  ASSERT_EQ(sb.basis.cols(), 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (x[i] < x[k]) {
        EXPECT_LE(sb.basis(i, 0), sb.basis(k, 0));
      }
    }
  }
}

TEST(SplineBasis, ShiftGivesSameSpan) {
  const auto x = random_points(40, 4);
  const Eigen::VectorXd shifted = x.array() + 7.5;
  const auto a = spline_basis(x, 4);
  const auto b = spline_basis(shifted, 4);
  EXPECT_LT((a.basis - b.basis).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SplineBasis, ConstantColumnRejected) {
  EXPECT_THROW(spline_basis(Eigen::VectorXd::Constant(10, 2.0), 3), ZeroVarianceColumn);
}

TEST(GpKernel, DiagonalAndAnalyticEntry) {
  Eigen::VectorXd x(3);
  const double phi = 0.7;
  x << 0.0, phi * std::log(2.0), 5.0;
  const auto k = gp_kernel(x, phi);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(k.sigma(i, i), 1.0);
  EXPECT_NEAR(k.sigma(0, 1), 0.5, 1e-15);
  EXPECT_EQ(k.sigma, k.sigma.transpose());
}

TEST(GpKernel, EigenReconstruction) {
  const auto x = random_points(50, 11);
  const auto k = gp_kernel(x, 1.0);
  const Eigen::MatrixXd rebuilt = k.eigenvectors * k.eigenvalues.asDiagonal() * k.eigenvectors.transpose();
  EXPECT_LE((rebuilt - k.sigma).cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 1; i < k.eigenvalues.size(); ++i) EXPECT_GE(k.eigenvalues[i - 1], k.eigenvalues[i]);
  EXPECT_GT(k.sigma.minCoeff(), 0.0);
}

TEST(GpKernel, NonPositiveBandwidth) {
  EXPECT_THROW(gp_kernel(Eigen::VectorXd::LinSpaced(4, 0, 1), 0.0), NonPositiveBandwidth);
}

TEST(Woodbury, IdentityKernelHalves) {
  // widely spaced points make the kernel the identity to machine precision
  const auto k = gp_kernel(Eigen::VectorXd::LinSpaced(5, 0, 4000), 1.0);
  EXPECT_LT((woodbury_inverse(k, 1.0) - 0.5 * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Woodbury, MatchesDenseInverse) {
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto x = random_points(rep < 10 ? 5 : 50, 100 + rep);
    const auto k = gp_kernel(x, 1.0);
    const double tau2 = 0.1 + rep;
    const Eigen::MatrixXd n_eye = Eigen::MatrixXd::Identity(x.size(), x.size());
    const Eigen::MatrixXd dense = (n_eye + k.sigma.inverse() / tau2).inverse();
    EXPECT_LT((woodbury_inverse(k, tau2) - dense).cwiseAbs().maxCoeff(), 1e-8) << rep;
  }
}

TEST(Woodbury, LargeTauApproachesIdentity) {
  const auto k = gp_kernel(random_points(20, 5), 1.0);
  EXPECT_LT((woodbury_inverse(k, 1e12) - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Woodbury, SymmetricWithEigenvaluesInUnitInterval) {
  const auto k = gp_kernel(random_points(30, 6), 0.5);
  const Eigen::MatrixXd w = woodbury_inverse(k, 2.0);
  EXPECT_EQ(w, w.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(es.eigenvalues().maxCoeff(), 1.0);
}

TEST(Quantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
}
