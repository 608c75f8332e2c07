// tests/calibration-test.cc

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

#include "svtk/calibration.h"
#include "svtk/error.h"
#include "test-util.h"

namespace svtk {
namespace {

using testing::GaussianLlrSystems;

SystemScores Rows(std::initializer_list<std::vector<double>> rows) {
  SystemScores d;
  d.scores.resize(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto &r : rows) {
    for (size_t j = 0; j < r.size(); j++) d.scores(i, j) = r[j];
    i++;
  }
  return d;
}

TEST(CalibrationTest, RecoversIdentityOnTrueLlrs) {
  SystemScores data = testing::StratifiedGaussianLlr(10000);
  CalibrationFit fit = FitCalibration(data);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.model.weights[0], 1.0, 0.05);
  EXPECT_NEAR(fit.model.offset, 0.0, 0.05);
  EXPECT_LE(fit.objective,
            CalibrationObjective(data, 0.05, Eigen::VectorXd::Ones(1), 0.0) +
                1e-9);
}

TEST(CalibrationTest, UndoesAffineDistortion) {
  SystemScores data = testing::StratifiedGaussianLlr(10000);
  data.scores = (0.25 * data.scores.array() + 3.0).matrix();
  CalibrationFit fit = FitCalibration(data);
  EXPECT_NEAR(fit.model.weights[0], 4.0, 0.2);
  EXPECT_NEAR(fit.model.offset, -12.0, 0.6);
}

TEST(CalibrationTest, RandomStartsAgree) {
  SystemScores data = GaussianLlrSystems(3, 4000, 2);
  CalibrationFit ref = FitCalibration(data);
  ASSERT_TRUE(ref.converged);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 5; i++) {
    CalibrationOptions opt;
    opt.init = CalibrationModel{Eigen::Vector2d(u(gen), u(gen)), u(gen)};
    CalibrationFit fit = FitCalibration(data, opt);
    EXPECT_TRUE(fit.converged);
    EXPECT_LT((fit.model.weights - ref.model.weights).lpNorm<Eigen::Infinity>(),
              1e-6);
    EXPECT_LT(std::abs(fit.model.offset - ref.model.offset), 1e-6);
  }
}

TEST(CalibrationTest, FusionNoWorseThanSingleSystems) {
  SystemScores both = GaussianLlrSystems(5, 4000, 2);
  CalibrationFit fused = FitCalibration(both);
  for (int j = 0; j < 2; j++) {
    SystemScores one{both.scores.col(j), both.is_target};
    EXPECT_LE(fused.objective, FitCalibration(one).objective + 1e-6);
  }
}

TEST(CalibrationTest, ColumnScalingRescalesWeight) {
  SystemScores data = GaussianLlrSystems(6, 4000, 2);
  SystemScores scaled = data;
  scaled.scores.col(1) *= 5.0;
  CalibrationFit a = FitCalibration(data), b = FitCalibration(scaled);
  EXPECT_NEAR(b.model.weights[1] * 5.0, a.model.weights[1],
              1e-4 * std::abs(a.model.weights[1]));
  EXPECT_NEAR(b.model.weights[0], a.model.weights[0],
              1e-4 * std::abs(a.model.weights[0]));
}

TEST(CalibrationTest, IterationCapIsReported) {
  SystemScores data = GaussianLlrSystems(7, 1000, 1);
  CalibrationOptions opt;
  opt.max_iterations = 1;
  CalibrationFit fit = FitCalibration(data, opt);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations, 1);
}

TEST(CalibrationTest, Errors) {
  SystemScores data = Rows({{1.0}, {2.0}});
  data.is_target = {true, true};
  try {
    FitCalibration(data);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingleClassLabels);
  }
  data.is_target = {true, false};
  CalibrationOptions opt;
  opt.prior = 1.0;
  EXPECT_THROW(FitCalibration(data, opt), Error);
  data.scores(1, 0) = NAN;
  EXPECT_THROW(FitCalibration(data), Error);
}

TEST(ApplyTest, Examples) {
  SystemScores one = Rows({{0.3}, {-2.5}});
  std::vector<double> out =
      ApplyCalibration({Eigen::VectorXd::Ones(1), 0.0}, one);
  EXPECT_EQ(out, (std::vector<double>{0.3, -2.5}));
  SystemScores two = Rows({{1.0, 3.0}, {-0.7, 9.0}});
  EXPECT_EQ(ApplyCalibration({Eigen::Vector2d(0.5, 0.5), 0.0}, two)[0], 2.0);
  EXPECT_EQ(ApplyCalibration({Eigen::Vector2d(1.0, 0.0), 0.0}, two),
            (std::vector<double>{1.0, -0.7}));
  EXPECT_EQ(ApplyCalibration({Eigen::VectorXd::Ones(1), 1.5}, one)[0], 1.8);
  EXPECT_THROW(ApplyCalibration({Eigen::VectorXd::Ones(3), 0.0}, two), Error);
}

TEST(ManualFusionTest, Examples) {
  SystemScores one = Rows({{0.3}, {-2.5}});
  EXPECT_EQ(ManualFusion({1.0}, one), (std::vector<double>{0.3, -2.5}));
  SystemScores two = Rows({{1.0, 3.0}, {-0.7, 9.0}});
  EXPECT_EQ(ManualFusion({0.5, 0.5}, two)[0], 2.0);
  EXPECT_EQ(ManualFusion({1.0, 0.0}, two), (std::vector<double>{1.0, -0.7}));
}

TEST(StackSystemsTest, AlignsAndLabels) {
  TrialList t({{"a", "b", true}, {"a", "c", false}});
  ScoreSet s1{{"a", "b", 1}, {"a", "c", 2}}, s2{{"a", "b", 3}, {"a", "c", 4}};
  SystemScores d = StackSystems({s1, s2}, &t);
  EXPECT_EQ(d.scores, (Eigen::Matrix2d() << 1, 3, 2, 4).finished());
  EXPECT_EQ(d.is_target, (std::vector<bool>{true, false}));
  ScoreSet bad{{"a", "c", 3}, {"a", "b", 4}};
  try {
    StackSystems({s1, bad});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMisalignedScores);
    EXPECT_EQ(e.location(), 1);
  }
}

TEST(ModelFileTest, RoundTrip) {
  testing::TempDir dir;
  CalibrationModel m{Eigen::Vector3d(0.1, -2.0 / 3.0, 1e-17), 1.0 / 7.0, 0.01};
  WriteCalibrationModel(m, dir.File("m"));
  CalibrationModel back = ReadCalibrationModel(dir.File("m"));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.offset, m.offset);
  EXPECT_EQ(back.prior, m.prior);
}

}  // namespace
}  // namespace svtk
