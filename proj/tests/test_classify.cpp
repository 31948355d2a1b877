#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsl/classify.hpp"
#include "fsl/error.hpp"
#include "test_util.hpp"

using namespace fsl;
using fsl::testing::random_matrix;

namespace {

// Direct oracle for the unpooled two-sample statistic.
double z_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  return (mean(a) - mean(b)) /
         std::sqrt(var(a) / static_cast<double>(a.size()) + var(b) / static_cast<double>(b.size()));
}

}  // namespace

TEST(KnnPredict, IdenticalPointNearestNeighbour) {
  MatrixXd train(3, 2);
  train << 0, 0, 5, 5, 9, 1;
  const auto pred = knn_predict(train, {2, 0, 1}, train.row(1), 1);
  EXPECT_EQ(pred, std::vector<int>{0});
}

TEST(KnnPredict, TieGoesToSmallerSummedDistance) {
  MatrixXd train(2, 1);
  train << 2.0, 1.0;  // class 0 at distance 2, class 1 at distance 1
  MatrixXd test = MatrixXd::Zero(1, 1);
  EXPECT_EQ(knn_predict(train, {0, 1}, test, 2), std::vector<int>{1});
  train << 1.0, 2.0;
  EXPECT_EQ(knn_predict(train, {0, 1}, test, 2), std::vector<int>{0});
}

TEST(KnnPredict, FullTieGoesToSmallerClassIndex) {
  MatrixXd train(2, 1);
  train << -1.0, 1.0;
  EXPECT_EQ(knn_predict(train, {1, 0}, MatrixXd::Zero(1, 1), 2), std::vector<int>{0});
}

TEST(KnnPredict, SeparatedBlobs) {
  std::mt19937_64 gen(1);
  MatrixXd means = MatrixXd::Zero(2, 3);
  means(1, 0) = 10.0;
  const auto train = fsl::testing::gaussian_classes(means, VectorXd::Constant(3, 0.1), 50, gen);
  const auto test = fsl::testing::gaussian_classes(means, VectorXd::Constant(3, 0.1), 10, gen);
  for (Index k : {1, 5, 10, 15}) {
    EXPECT_EQ(accuracy(knn_predict(train.features(), train.labels(), test.features(), k), test.labels()), 1.0);
  }
}

TEST(KnnPredict, PermutationInvariant) {
  std::mt19937_64 gen(2);
  const MatrixXd train = random_matrix(40, 4, gen);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = static_cast<int>(gen() % 3);
  const MatrixXd test = random_matrix(25, 4, gen);
  std::vector<Index> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  MatrixXd ptrain(40, 4);
  std::vector<int> plabels(40);
  for (Index i = 0; i < 40; ++i) {
    ptrain.row(i) = train.row(perm[i]);
    plabels[i] = labels[perm[i]];
  }
  for (Index k : {1, 3, 7, 15}) {
    EXPECT_EQ(knn_predict(train, labels, test, k), knn_predict(ptrain, plabels, test, k)) << k;
  }
}

TEST(KnnPredict, AllNeighboursGiveMajority) {
  std::mt19937_64 gen(3);
  const MatrixXd train = random_matrix(11, 2, gen);
  std::vector<int> labels = {0, 1, 1, 2, 1, 0, 1, 2, 2, 1, 0};  // class 1 has 5 votes
  const auto pred = knn_predict(train, labels, random_matrix(20, 2, gen), 11);
  for (int p : pred) EXPECT_EQ(p, 1);
}

TEST(KnnPredict, Errors) {
  const MatrixXd train = MatrixXd::Zero(3, 2);
  try {
    knn_predict(train, {0, 1, 0}, MatrixXd::Zero(1, 2), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
  EXPECT_THROW(knn_predict(train, {0, 1, 0}, MatrixXd::Zero(1, 3), 1), Error);
  EXPECT_THROW(knn_predict(train, {0, 1}, MatrixXd::Zero(1, 2), 1), Error);
  EXPECT_THROW(knn_predict(train, {0, 1, 0}, MatrixXd::Zero(1, 2), 0), Error);
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy({0, 1, 2}, {0, 1, 2}), 1.0);
  EXPECT_EQ(accuracy({0, 0}, {1, 1}), 0.0);
  EXPECT_EQ(accuracy({0, 1, 1, 0}, {0, 1, 1, 1}), 0.75);
  EXPECT_THROW(accuracy({0, 1}, {0}), Error);
}

TEST(MeanAccuracyOverK, IdenticalPredictionsAcrossK) {
  std::mt19937_64 gen(4);
  MatrixXd means = MatrixXd::Zero(2, 2);
  means(1, 1) = 20.0;
  const auto train = fsl::testing::gaussian_classes(means, VectorXd::Constant(2, 0.1), 20, gen);
  const auto test = fsl::testing::gaussian_classes(means, VectorXd::Constant(2, 0.1), 5, gen);
  EXPECT_EQ(mean_accuracy_over_k(train.features(), train.labels(), test.features(), test.labels()), 1.0);
}

TEST(MeanAccuracyOverK, MatchesPerKAverage) {
  std::mt19937_64 gen(5);
  const MatrixXd train = random_matrix(30, 3, gen);
  const MatrixXd test = random_matrix(12, 3, gen);
  std::vector<int> tl(30), sl(12);
  for (auto& l : tl) l = static_cast<int>(gen() % 2);
  for (auto& l : sl) l = static_cast<int>(gen() % 2);
  tl[0] = 0;
  tl[1] = 1;
  double sum = 0.0;
  for (Index k : {1, 5, 10, 15}) sum += accuracy(knn_predict(train, tl, test, k), sl);
  EXPECT_NEAR(mean_accuracy_over_k(train, tl, test, sl), sum / 4.0, 1e-15);
}

TEST(MeanAccuracyOverK, ArithmeticOfFourValues) {
  // k=1 -> 1.0, k=2 -> 0.5, k=3 -> 0.5, k=4 -> 0.0 over two test points.
  MatrixXd train(4, 1);
  train << 0.0, 10.0, 0.5, 10.5;
  const std::vector<int> tl = {0, 1, 1, 1};
  MatrixXd test(2, 1);
  test << 0.0, 10.0;
  const std::vector<int> sl = {0, 0};
  KnnConfig cfg;
  cfg.k_values = {1, 2, 3, 4};
  std::vector<double> accs;
  for (Index k : cfg.k_values) accs.push_back(accuracy(knn_predict(train, tl, test, k), sl));
  EXPECT_EQ(accs, (std::vector<double>{0.5, 0.5, 0.0, 0.0}));
  EXPECT_DOUBLE_EQ(mean_accuracy_over_k(train, tl, test, sl, cfg), 0.25);
}

TEST(KnnConfig, Validate) {
  KnnConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.k_values = {};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.k_values = {0, 1};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.k_values = {5, 1};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.k_values = {1, 1};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ZTest, IdenticalSamples) {
  const auto r = z_test({0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
  EXPECT_EQ(r.z, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(ZTest, WorkedExampleMatchesDirectFormula) {
  const std::vector<double> a = {0.6, 0.62, 0.58, 0.60};
  const std::vector<double> b = {0.50, 0.52, 0.48, 0.50};
  const auto r = z_test(a, b);
  EXPECT_NEAR(r.z, z_oracle(a, b), 1e-12);
  EXPECT_NEAR(r.z, 8.660254037844386, 1e-9);
  EXPECT_LT(r.p, 1e-3);
}

TEST(ZTest, Antisymmetry) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(5), b(7);
    for (auto& v : a) v = std::uniform_real_distribution<double>(0, 1)(gen);
    for (auto& v : b) v = std::uniform_real_distribution<double>(0, 1)(gen);
    const auto ab = z_test(a, b);
    const auto ba = z_test(b, a);
    EXPECT_DOUBLE_EQ(ab.z, -ba.z);
    EXPECT_DOUBLE_EQ(ab.p, ba.p);
    EXPECT_GE(ab.p, 0.0);
    EXPECT_LE(ab.p, 1.0);
    EXPECT_NEAR(ab.z, z_oracle(a, b), 1e-12 * std::max(1.0, std::abs(ab.z)));
  }
}

TEST(ZTest, PDecreasesWithMeanGap) {
  const std::vector<double> base = {0.1, 0.3, 0.2, 0.25, 0.15};
  double prev_p = 1.1;
  for (int shift = 0; shift <= 10; ++shift) {
    std::vector<double> moved = base;
    for (auto& v : moved) v += 0.02 * shift;
    const double p = z_test(moved, base).p;
    EXPECT_LT(p, prev_p);
    prev_p = p;
  }
}

TEST(ZTest, ZeroVarianceSentinels) {
  const auto r = z_test({1.0, 1.0}, {0.5, 0.5});
  EXPECT_TRUE(std::isinf(r.z));
  EXPECT_GT(r.z, 0.0);
  EXPECT_EQ(r.p, 0.0);
  const auto s = z_test({1.0, 1.0}, {1.0, 1.0});
  EXPECT_EQ(s.z, 0.0);
  EXPECT_EQ(s.p, 1.0);
}

TEST(ZTest, NeedsTwoValues) {
  try {
    z_test({1.0}, {1.0, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
}
