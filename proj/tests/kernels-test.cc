// tests/kernels-test.cc

// Copyright 2026  The svtk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.h"
#include "svtk/error.h"
#include "svtk/kernels.h"
#include "test-util.h"

namespace svtk {
namespace {

using testing::RandomMatrix;
using testing::RandomVector;

constexpr double kExact = 1e-12;

// Column mean and population standard deviation (with the variance floor)
// by explicit loops.
void ColumnMoments(const FrameMatrix &f, Eigen::VectorXd *mean,
                   Eigen::VectorXd *std) {
  const Eigen::Index t = f.rows(), d = f.cols();
  mean->setZero(d);
  std->setZero(d);
  for (Eigen::Index j = 0; j < d; j++) {
    double sum = 0;
    for (Eigen::Index i = 0; i < t; i++) sum += f(i, j);
    const double mu = sum / t;
    double ss = 0;
    for (Eigen::Index i = 0; i < t; i++) ss += (f(i, j) - mu) * (f(i, j) - mu);
    (*mean)[j] = mu;
    (*std)[j] = std::sqrt(ss / t + kStdEpsilon);
  }
}

TEST(PoolTapTest, Examples) {
  FrameMatrix one(1, 3);
  one << 1, 2, 3;
  EXPECT_EQ(PoolTap(one), Eigen::Vector3d(1, 2, 3));
  FrameMatrix same = Eigen::MatrixXd::Ones(4, 1) * one;
  EXPECT_LT((PoolTap(same) - Eigen::Vector3d(1, 2, 3)).norm(), kExact);

  std::mt19937_64 gen(1);
  FrameMatrix f = RandomMatrix(gen, 5, 3);
  Eigen::VectorXd mean, std;
  ColumnMoments(f, &mean, &std);
  EXPECT_LT((PoolTap(f) - mean).lpNorm<Eigen::Infinity>(), kExact);
}

TEST(PoolSpTest, Examples) {
  FrameMatrix same(3, 2);
  same << 1, -2, 1, -2, 1, -2;
  Eigen::VectorXd out = PoolSp(same);
  ASSERT_EQ(out.size(), 4);
  EXPECT_EQ(out.head(2), Eigen::Vector2d(1, -2));
  EXPECT_LE(out.tail(2).maxCoeff(), std::sqrt(kStdEpsilon));
  EXPECT_LE(PoolSp(same.topRows(1)).tail(2).maxCoeff(),
            std::sqrt(kStdEpsilon));

  std::mt19937_64 gen(2);
  FrameMatrix f = RandomMatrix(gen, 7, 4);
  Eigen::VectorXd mean, std;
  ColumnMoments(f, &mean, &std);
  out = PoolSp(f);
  EXPECT_LT((out.head(4) - mean).lpNorm<Eigen::Infinity>(), kExact);
  EXPECT_LT((out.tail(4) - std).lpNorm<Eigen::Infinity>(), kExact);
}

TEST(AttentionTest, WeightsAreADistribution) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; trial++) {
    FrameMatrix f = RandomMatrix(gen, 6, 4, -3, 3);
    PoolingParams p = testing::RandomPoolingParams(gen, 4, 1);
    Eigen::VectorXd a = AttentionWeights(f, p);
    EXPECT_NEAR(a.sum(), 1.0, kExact);
    EXPECT_GE(a.minCoeff(), 0.0);
  }
}

TEST(AttentionTest, SingleFrameReturnsFrame) {
  std::mt19937_64 gen(4);
  FrameMatrix f = RandomMatrix(gen, 1, 4);
  PoolingParams p = testing::RandomPoolingParams(gen, 4, 1);
  EXPECT_LT((PoolSap(f, p) - f.row(0).transpose()).norm(), kExact);
}

TEST(AttentionTest, FramePermutationInvariance) {
  std::mt19937_64 gen(5);
  FrameMatrix f = RandomMatrix(gen, 6, 4);
  PoolingParams p = testing::RandomPoolingParams(gen, 4, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 6, gen);
  FrameMatrix g = perm * f;
  EXPECT_LT((PoolSap(f, p) - PoolSap(g, p)).norm(), kExact);
  EXPECT_LT((PoolAsp(f, p) - PoolAsp(g, p)).norm(), kExact);
  EXPECT_LT((PoolMhap(f, p) - PoolMhap(g, p)).norm(), kExact);
}

TEST(ReductionTest, ZeroAttentionVector) {
  std::mt19937_64 gen(6);
  FrameMatrix f = RandomMatrix(gen, 5, 4);
  PoolingParams p = testing::RandomPoolingParams(gen, 4, 1);
  p.v.setZero();
  EXPECT_LT((PoolSap(f, p) - PoolTap(f)).lpNorm<Eigen::Infinity>(), kExact);
  EXPECT_LT((PoolAsp(f, p) - PoolSp(f)).lpNorm<Eigen::Infinity>(), kExact);
  p.heads = 4;
  EXPECT_LT((PoolMhap(f, p) - PoolTap(f)).lpNorm<Eigen::Infinity>(), kExact);
}

TEST(ReductionTest, SingleHeadMhapIsSap) {
  std::mt19937_64 gen(7);
  FrameMatrix f = RandomMatrix(gen, 5, 4);
  PoolingParams p = testing::RandomPoolingParams(gen, 4, 1);
  EXPECT_LT((PoolMhap(f, p) - PoolSap(f, p)).lpNorm<Eigen::Infinity>(),
            kExact);
}

TEST(PoolingTest, ConstantFramesAsp) {
  FrameMatrix f = Eigen::MatrixXd::Ones(4, 1) * Eigen::RowVector3d(1, 2, 3);
  std::mt19937_64 gen(8);
  PoolingParams p = testing::RandomPoolingParams(gen, 3, 1);
  Eigen::VectorXd out = PoolAsp(f, p);
  EXPECT_LT((out.head(3) - Eigen::Vector3d(1, 2, 3)).norm(), kExact);
  EXPECT_LE(out.tail(3).maxCoeff(), std::sqrt(kStdEpsilon));
}

TEST(PoolingTest, Errors) {
  std::mt19937_64 gen(9);
  PoolingParams p = testing::RandomPoolingParams(gen, 4, 3);
  FrameMatrix f = RandomMatrix(gen, 3, 4);
  EXPECT_THROW(PoolMhap(f, p), Error);
  try {
    PoolMhap(f, p);
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kHeadMismatch);
  }
  EXPECT_THROW(PoolTap(FrameMatrix(0, 4)), Error);
}

TEST(SoftmaxTest, Examples) {
  EXPECT_NEAR(SoftmaxCrossEntropy(Eigen::Vector2d(0, 0), 0).loss,
              std::log(2.0), kExact);
  LossResult r = SoftmaxCrossEntropy(Eigen::Vector2d(100, 0), 0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 0.0, 1e-40);
  r = SoftmaxCrossEntropy(Eigen::Vector2d(0, 1000), 0);
  EXPECT_NEAR(r.loss, 1000.0, kExact);
}

TEST(AamTest, ZeroMarginIsScaledSoftmax) {
  std::mt19937_64 gen(10);
  for (int i = 0; i < 20; i++) {
    Eigen::VectorXd c = RandomVector(gen, 7);
    LossResult a = AamSoftmax(c, 3, 30.0, 0.0);
    LossResult b = SoftmaxCrossEntropy(30.0 * c, 3);
    EXPECT_NEAR(a.loss, b.loss, kExact);
    EXPECT_LT((a.grad - 30.0 * b.grad).lpNorm<Eigen::Infinity>(), kExact);
  }
  EXPECT_NEAR(AamSoftmax(Eigen::Vector2d(1, 1), 0, 1.0, 0.0).loss,
              std::log(2.0), kExact);
}

TEST(AamTest, ClosedForm) {
  Eigen::VectorXd c(4);
  c << 0.9, -0.9, 0.3, -0.1;
  const double s = 30.0, m = 0.2;
  double target = s * std::cos(std::acos(0.9) + m);
  double denom = std::exp(target);
  for (int j = 1; j < 4; j++) denom += std::exp(s * c[j]);
  EXPECT_NEAR(AamSoftmax(c, 0, s, m).loss, -(target - std::log(denom)),
              kExact);
}

TEST(AamTest, Errors) {
  EXPECT_THROW(AamSoftmax(Eigen::Vector2d(0.1, 0.2), 2, 30, 0.2), Error);
  EXPECT_THROW(AamSoftmax(Eigen::Vector2d(0.1, 0.2), 0, -1, 0.2), Error);
}

TEST(SubcenterTest, SingleSubcenterIsAam) {
  std::mt19937_64 gen(11);
  SubcenterBank bank{4, 1, RandomMatrix(gen, 4, 5)};
  Eigen::VectorXd x = RandomVector(gen, 5);
  Eigen::VectorXd cos(4);
  for (int c = 0; c < 4; c++)
    cos[c] = bank.centers.row(c).dot(x) / (bank.centers.row(c).norm() *
                                           x.norm());
  EXPECT_NEAR(SubcenterAamSoftmax(x, bank, 2, 30, 0.2).loss,
              AamSoftmax(cos, 2, 30, 0.2).loss, kExact);
}

TEST(SubcenterTest, DuplicatedCentersMatchSingle) {
  std::mt19937_64 gen(12);
  Eigen::MatrixXd centers = RandomMatrix(gen, 4, 5);
  SubcenterBank one{4, 1, centers};
  SubcenterBank three{4, 3, Eigen::MatrixXd(12, 5)};
  for (int c = 0; c < 4; c++)
    for (int k = 0; k < 3; k++) three.centers.row(c * 3 + k) = centers.row(c);
  Eigen::VectorXd x = RandomVector(gen, 5);
  std::vector<int> argmax;
  SubcenterCosines(x, three, &argmax);
  for (int k : argmax) EXPECT_EQ(k, 0);
  EXPECT_EQ(SubcenterAamSoftmax(x, three, 1, 30, 0.2).loss,
            SubcenterAamSoftmax(x, one, 1, 30, 0.2).loss);
}

TEST(CircleTest, Examples) {
  CircleLossResult r = CircleLoss(Eigen::VectorXd::Ones(1),
                                  Eigen::VectorXd::Zero(1), 0.25, 64);
  EXPECT_NEAR(r.loss, std::log1p(std::exp(-8.0)), kExact);
  std::mt19937_64 gen(13);
  for (int i = 0; i < 50; i++) {
    CircleLossResult q = CircleLoss(RandomVector(gen, 3), RandomVector(gen, 5),
                                    0.25, 64);
    EXPECT_GT(q.loss, 0.0);
  }
  EXPECT_THROW(CircleLoss(Eigen::VectorXd(0), Eigen::VectorXd::Ones(2), 0.25,
                          64),
               Error);
}

TEST(LossParamsTest, Defaults) {
  LossParams p;
  EXPECT_EQ(p.scale, 30.0);
  EXPECT_EQ(p.margin, 0.2);
  EXPECT_EQ(p.circle_margin, 0.25);
  EXPECT_EQ(p.circle_gamma, 64.0);
  LossParams f = LossParams::FineTune();
  EXPECT_EQ(f.scale, 35.0);
  EXPECT_EQ(f.margin, 0.25);
}

class GradCheckTest : public ::testing::TestWithParam<int> {};

TEST_P(GradCheckTest, MatchesFiniteDifferences) {
  const testing::GradCheck check = testing::AllGradChecks()[GetParam()];
  for (uint64_t seed = 0; seed < 100; seed++)
    ASSERT_LE(check.check(seed), testing::kGradTolerance)
        << check.name << " seed " << seed;
}

INSTANTIATE_TEST_SUITE_P(
    AllKernels, GradCheckTest,
    ::testing::Range(0, static_cast<int>(testing::AllGradChecks().size())),
    [](const ::testing::TestParamInfo<int> &info) {
      std::string name = testing::AllGradChecks()[info.param].name;
      std::replace(name.begin(), name.end(), '-', '_');
      return name;
    });

}  // namespace
}  // namespace svtk
