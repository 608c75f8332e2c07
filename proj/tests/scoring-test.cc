// tests/scoring-test.cc

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
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "svtk/error.h"
#include "svtk/plda.h"
#include "svtk/scoring.h"
#include "test-util.h"

namespace svtk {
namespace {

using testing::RandomMatrix;
using testing::RandomSpd;
using testing::RandomVector;

constexpr double kExact = 1e-12;

template <typename Fn>
ErrorKind KindOf(Fn fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

// Log density of N(0, c) at x, through a fresh Cholesky factorisation.
double LogGaussian(const Eigen::VectorXd &x, const Eigen::MatrixXd &c) {
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0;
  for (Eigen::Index i = 0; i < c.rows(); i++) logdet += 2 * std::log(l(i, i));
  const Eigen::VectorXd z = llt.matrixL().solve(x);
  return -0.5 * (x.size() * std::log(2 * M_PI) + logdet + z.squaredNorm());
}

// Same-speaker joint density over [a; b] minus the two independent marginals.
double JointGaussianLlr(const Eigen::VectorXd &mu, const Eigen::MatrixXd &sb,
                        const Eigen::MatrixXd &sw, const Eigen::VectorXd &a,
                        const Eigen::VectorXd &b) {
  const Eigen::Index d = mu.size();
  const Eigen::MatrixXd t = sb + sw;
  Eigen::MatrixXd joint(2 * d, 2 * d);
  joint << t, sb, sb, t;
  Eigen::VectorXd ab(2 * d);
  ab << a - mu, b - mu;
  return LogGaussian(ab, joint) - LogGaussian(a - mu, t) -
         LogGaussian(b - mu, t);
}

std::shared_ptr<const Plda> RandomPlda(std::mt19937_64 &gen, int d) {
  return std::make_shared<Plda>(RandomVector(gen, d), RandomSpd(gen, d, 0.5),
                                RandomSpd(gen, d, 0.5));
}

TEST(CosineTest, Examples) {
  EXPECT_EQ(CosineScore(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)), 1.0);
  EXPECT_EQ(CosineScore(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 0.0);
  EXPECT_NEAR(CosineScore(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)),
              1.0 / std::sqrt(2.0), kExact);
  EXPECT_EQ(KindOf([] {
              CosineScore(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0));
            }),
            ErrorKind::kZeroNormEmbedding);
  EXPECT_EQ(KindOf([] {
              CosineScore(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0));
            }),
            ErrorKind::kDimensionMismatch);
}

TEST(CosineTest, StaysInRange) {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 200; i++) {
    Eigen::VectorXd a = RandomVector(gen, 6);
    double s = CosineScore(a, 3.7 * a);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(CosineScore(a, -a), -1.0);
    EXPECT_NEAR(s, 1.0, kExact);
  }
}

TEST(EmbeddingAverageTest, Examples) {
  Eigen::VectorXd x(3);
  x << 0.1, -0.2, 0.3;
  EXPECT_EQ(EmbeddingAverage({x}), x);
  EXPECT_LT((EmbeddingAverage({x, x, x, x}) - x).norm(), kExact);
  EXPECT_EQ(EmbeddingAverage({Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 0)}),
            Eigen::Vector2d(1, 1));
  EXPECT_EQ(KindOf([] { EmbeddingAverage({}); }),
            ErrorKind::kEmptySegmentList);
}

TEST(MatrixScoreAverageTest, Examples) {
  std::mt19937_64 gen(2);
  const ScoringBackend cos = ScoringBackend::Cosine();
  Eigen::VectorXd a = RandomVector(gen, 4), b = RandomVector(gen, 4);
  EXPECT_EQ(MatrixScoreAverage({a}, {b}, cos), CosineScore(a, b));
  EXPECT_NEAR(MatrixScoreAverage({a, a, a}, {b, b}, cos), CosineScore(a, b),
              kExact);
  std::vector<Eigen::VectorXd> x{RandomVector(gen, 4), RandomVector(gen, 4)};
  std::vector<Eigen::VectorXd> y{RandomVector(gen, 4), RandomVector(gen, 4)};
  double sum = 0;
  for (const auto &u : x)
    for (const auto &v : y) sum += testing::LoopCosine(u, v);
  EXPECT_NEAR(MatrixScoreAverage(x, y, cos), sum / 4, kExact);
}

TEST(StrategyTest, SingleSegmentsCollapse) {
  std::mt19937_64 gen(3);
  const ScoringBackend cos = ScoringBackend::Cosine();
  const ScoringBackend plda = ScoringBackend::WithPlda(RandomPlda(gen, 4));
  for (const ScoringBackend *backend : {&cos, &plda}) {
    std::vector<Eigen::VectorXd> a{RandomVector(gen, 4)}, b{RandomVector(gen, 4)};
    const double base = backend->Score(a[0], b[0]);
    for (auto s : {ScoringStrategy::kSingle, ScoringStrategy::kEmbeddingAverage,
                   ScoringStrategy::kMatrixScoreAverage,
                   ScoringStrategy::kAverageOfBoth})
      EXPECT_NEAR(ScoreUtterances(a, b, *backend, s), base, kExact);
  }
}

TEST(StrategyTest, Examples) {
  const ScoringBackend cos = ScoringBackend::Cosine();
  EXPECT_NEAR(ScoreUtterances({Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 0)},
                              {Eigen::Vector2d(1, 1)}, cos,
                              ScoringStrategy::kEmbeddingAverage),
              1.0, kExact);
  EXPECT_EQ(KindOf([&] {
              ScoreUtterances({Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 0)},
                              {Eigen::Vector2d(1, 1)}, cos,
                              ScoringStrategy::kSingle);
            }),
            ErrorKind::kMultiSegmentWithSingleStrategy);
  EXPECT_EQ(ParseStrategy("ea-msa"), ScoringStrategy::kAverageOfBoth);
  EXPECT_EQ(ParseStrategy("msa"), ScoringStrategy::kMatrixScoreAverage);
  EXPECT_THROW(ParseStrategy("max"), Error);
}

TEST(StrategyTest, EaMsaMatchesOracle) {
  std::mt19937_64 gen(4);
  const ScoringBackend cos = ScoringBackend::Cosine();
  for (int i = 0; i < 50; i++) {
    std::vector<Eigen::VectorXd> a, b;
    for (int s = 0; s < 3; s++) {
      a.push_back(RandomVector(gen, 8));
      b.push_back(RandomVector(gen, 8));
    }
    EXPECT_NEAR(ScoreUtterances(a, b, cos, ScoringStrategy::kAverageOfBoth),
                testing::OracleEaMsaCosine(a, b), kExact);
  }
}

TEST(PldaTest, ScalarGaussianOracle) {
  // d=1, mu=0, Sigma_b=Sigma_w=1, a=b=1.  Same speaker: [a;b] ~ N(0,
  // [[2,1],[1,2]]), det 3, quadratic form 2/3.  Different: two N(0, 2).
  const double same = -std::log(2 * M_PI) - 0.5 * std::log(3.0) - 1.0 / 3.0;
  const double diff = 2 * (-0.5 * std::log(2 * M_PI * 2.0) - 0.25);
  Plda plda(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1),
            Eigen::MatrixXd::Ones(1, 1));
  EXPECT_NEAR(plda.LogLikelihoodRatio(Eigen::VectorXd::Ones(1),
                                      Eigen::VectorXd::Ones(1)),
              same - diff, kExact);
}

TEST(PldaTest, JointGaussianOracle) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 30; i++) {
    const int d = 1 + i % 6;
    Eigen::VectorXd mu = RandomVector(gen, d);
    Eigen::MatrixXd sb = RandomSpd(gen, d, 0.3), sw = RandomSpd(gen, d, 0.3);
    Plda plda(mu, sb, sw);
    Eigen::VectorXd a = RandomVector(gen, d, -2, 2), b = RandomVector(gen, d, -2, 2);
    EXPECT_NEAR(plda.LogLikelihoodRatio(a, b),
                JointGaussianLlr(mu, sb, sw, a, b), 1e-9);
  }
}

TEST(PldaTest, Symmetric) {
  std::mt19937_64 gen(6);
  auto plda = RandomPlda(gen, 5);
  for (int i = 0; i < 100; i++) {
    Eigen::VectorXd a = RandomVector(gen, 5), b = RandomVector(gen, 5);
    EXPECT_NEAR(plda->LogLikelihoodRatio(a, b), plda->LogLikelihoodRatio(b, a),
                kExact);
  }
}

TEST(PldaTest, NoSpeakerVariabilityGivesZero) {
  std::mt19937_64 gen(7);
  Plda plda(RandomVector(gen, 4), Eigen::MatrixXd::Zero(4, 4),
            RandomSpd(gen, 4, 0.5));
  for (int i = 0; i < 50; i++)
    EXPECT_EQ(plda.LogLikelihoodRatio(RandomVector(gen, 4),
                                      RandomVector(gen, 4)),
              0.0);
  // And it approaches zero as the between-class covariance shrinks.
  Eigen::MatrixXd sb = RandomSpd(gen, 4, 0.5), sw = RandomSpd(gen, 4, 0.5);
  Eigen::VectorXd a = RandomVector(gen, 4), b = RandomVector(gen, 4);
  double prev = std::abs(Plda(Eigen::VectorXd::Zero(4), sb, sw)
                             .LogLikelihoodRatio(a, b));
  for (double scale : {1e-2, 1e-4, 1e-6}) {
    double cur = std::abs(Plda(Eigen::VectorXd::Zero(4), scale * sb, sw)
                              .LogLikelihoodRatio(a, b));
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(PldaTest, RejectsBadCovariances) {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(1, 1) = -1;
  EXPECT_EQ(KindOf([&] {
              Plda(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                   bad);
            }),
            ErrorKind::kNonPositiveDefinite);
  EXPECT_EQ(KindOf([&] {
              Plda(Eigen::VectorXd::Zero(2), bad,
                   Eigen::MatrixXd::Identity(2, 2));
            }),
            ErrorKind::kNonPositiveDefinite);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_EQ(KindOf([&] {
              Plda(Eigen::VectorXd::Zero(2), asym,
                   Eigen::MatrixXd::Identity(2, 2));
            }),
            ErrorKind::kNonPositiveDefinite);
}

TEST(PldaTest, FileRoundTrip) {
  std::mt19937_64 gen(8);
  testing::TempDir dir;
  auto plda = RandomPlda(gen, 3);
  WritePlda(*plda, dir.File("plda"));
  Plda back = ReadPlda(dir.File("plda"));
  EXPECT_EQ(back.Mean(), plda->Mean());
  EXPECT_EQ(back.Between(), plda->Between());
  EXPECT_EQ(back.Within(), plda->Within());
}

TEST(ScoreTrialsTest, MatchesPerTrialScoring) {
  testing::SyntheticCorpus c =
      testing::MakeSyntheticCorpus(9, 10, 3, 2, 6, 2.0, 1.0, 200);
  const ScoringBackend cos = ScoringBackend::Cosine();
  ScoreSet serial = ScoreTrials(c.embeddings, c.trials, cos,
                                ScoringStrategy::kMatrixScoreAverage, 1);
  ScoreSet parallel = ScoreTrials(c.embeddings, c.trials, cos,
                                  ScoringStrategy::kMatrixScoreAverage, 4);
  ASSERT_EQ(serial.size(), 200u);
  EXPECT_EQ(serial, parallel);
  for (size_t i = 0; i < serial.size(); i++) {
    const Trial &t = c.trials.Trials()[i];
    EXPECT_EQ(serial[i].enroll, t.enroll);
    EXPECT_EQ(serial[i].score,
              MatrixScoreAverage(c.embeddings.Segments(t.enroll),
                                 c.embeddings.Segments(t.test), cos));
  }
}

TEST(ScoreTrialsTest, MissingUtteranceReportsTrial) {
  EmbeddingSet e;
  e.AddSegment("a", Eigen::Vector2d(1, 0));
  e.AddSegment("b", Eigen::Vector2d(0, 1));
  TrialList t({{"a", "b", std::nullopt}, {"a", "zz", std::nullopt}});
  try {
    ScoreTrials(e, t, ScoringBackend::Cosine(),
                ScoringStrategy::kEmbeddingAverage);
    FAIL();
  } catch (const Error &err) {
    EXPECT_EQ(err.kind(), ErrorKind::kMissingUtterance);
    EXPECT_EQ(err.location(), 2);
  }
}

TEST(CohortTest, MatchesPairwiseScoring) {
  std::mt19937_64 gen(10);
  EmbeddingSet embs, cohort;
  for (int i = 0; i < 4; i++)
    for (int s = 0; s < 2; s++)
      embs.AddSegment("u" + std::to_string(i), RandomVector(gen, 5));
  for (int i = 0; i < 7; i++)
    cohort.AddSegment("c" + std::to_string(i), RandomVector(gen, 5));
  const ScoringBackend cos = ScoringBackend::Cosine();
  CohortScores scores = BuildCohortScores(
      embs, cohort, cos, ScoringStrategy::kEmbeddingAverage, 2);
  ASSERT_EQ(scores.size(), 4u);
  for (const auto &rec : embs.Records()) {
    const auto &v = scores.at(rec.id);
    ASSERT_EQ(v.size(), 7u);
    for (size_t j = 0; j < 7; j++)
      EXPECT_NEAR(v[j],
                  testing::LoopCosine(testing::LoopMean(rec.segments),
                                      cohort.Records()[j].segments[0]),
                  kExact);
  }
}

TEST(CohortTest, SingletonAndSelfInclusion) {
  EmbeddingSet embs;
  embs.AddSegment("a", Eigen::Vector2d(1, 2));
  embs.AddSegment("b", Eigen::Vector2d(2, -1));
  EmbeddingSet one;
  one.AddSegment("c", Eigen::Vector2d(1, 1));
  const ScoringBackend cos = ScoringBackend::Cosine();
  auto s = BuildCohortScores(embs, one, cos, ScoringStrategy::kSingle);
  EXPECT_EQ(s.at("a").size(), 1u);
  EXPECT_EQ(s.at("b").size(), 1u);
  auto self = BuildCohortScores(embs, embs, cos, ScoringStrategy::kSingle);
  EXPECT_NEAR(self.at("a")[0], 1.0, kExact);
  EXPECT_NEAR(self.at("b")[1], 1.0, kExact);
}

TEST(AsNormTest, CenteredScoreIsZero) {
  CohortScores e{{"e", {1.0, 3.0}}}, t{{"t", {0.0, 4.0}}};
  ScoreSet out = AsNorm({{"e", "t", 2.0}}, e, t, 2);
  EXPECT_EQ(out[0].score, 0.0);
}

TEST(AsNormTest, HandExample) {
  CohortScores c{{"x", {0.4, 0.2, 0.0}}};
  ScoreSet out = AsNorm({{"x", "x", 0.5}}, c, c, 2);
  EXPECT_NEAR(out[0].score, 2.0, kExact);
  // The same shape on dyadic values has no rounding at all.
  CohortScores d{{"x", {0.375, 0.125, 0.0}}};
  EXPECT_EQ(AsNorm({{"x", "x", 0.5}}, d, d, 2)[0].score, 2.0);
}

TEST(AsNormTest, MatchesOracle) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 50; i++) {
    testing::AsNormProblem p = testing::RandomAsNormProblem(gen);
    ScoreSet out = AsNorm(p.raw, p.enroll, p.test, p.top_k);
    for (size_t j = 0; j < out.size(); j++) {
      auto [me, se] = testing::OracleTopKStats(p.enroll.at(p.raw[j].enroll),
                                               p.top_k);
      auto [mt, st] = testing::OracleTopKStats(p.test.at(p.raw[j].test),
                                               p.top_k);
      const double s = p.raw[j].score;
      EXPECT_NEAR(out[j].score, 0.5 * ((s - me) / se + (s - mt) / st), 1e-10);
    }
  }
}

TEST(AsNormTest, AffineInvariance) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-10, 10);
  for (int i = 0; i < 100; i++) {
    testing::AsNormProblem p = testing::RandomAsNormProblem(gen);
    testing::AsNormProblem q = p.Affine(scale(gen), shift(gen));
    ScoreSet a = AsNorm(p.raw, p.enroll, p.test, p.top_k);
    ScoreSet b = AsNorm(q.raw, q.enroll, q.test, q.top_k);
    for (size_t j = 0; j < a.size(); j++)
      EXPECT_LT(std::abs(a[j].score - b[j].score), 1e-9);
  }
}

TEST(AsNormTest, ClampsAndErrors) {
  CohortScores c{{"x", {1.0, 2.0, 3.0}}};
  int clamped = 0;
  AsNorm({{"x", "x", 0.0}}, c, c, 300, &clamped);
  EXPECT_EQ(clamped, 2);
  EXPECT_EQ(ComputeCohortStats({1.0, 2.0, 3.0}, 300).top_k, 3);
  EXPECT_EQ(KindOf([&] { AsNorm({{"x", "y", 0.0}}, c, c, 2); }),
            ErrorKind::kMissingCohort);
  EXPECT_EQ(KindOf([] { ComputeCohortStats({1.0, 1.0, 0.0}, 2); }),
            ErrorKind::kDegenerateCohort);
  EXPECT_EQ(KindOf([] { ComputeCohortStats({1.0, 2.0}, 1); }),
            ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace svtk
