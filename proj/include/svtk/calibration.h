// include/svtk/calibration.h

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

#ifndef SVTK_CALIBRATION_H_
#define SVTK_CALIBRATION_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svtk/corpus-io.h"

namespace svtk {

/// One row per trial, one column per system.  Labels are present for
/// development data and empty for evaluation data.
struct SystemScores {
  Eigen::MatrixXd scores;
  std::vector<bool> is_target;

  int NumSystems() const { return static_cast<int>(scores.cols()); }
  size_t NumTrials() const { return static_cast<size_t>(scores.rows()); }
};

/// Stacks aligned score sets into columns.  Every set must have the same
/// (enroll, test) pairs in the same order as the first (MisalignedScores
/// otherwise); labels are taken from `trials` when it is labeled.
SystemScores StackSystems(const std::vector<ScoreSet> &systems,
                          const TrialList *trials = nullptr);

/// Linear fusion / calibration: llr = w's + b.  `prior` is the effective
/// target prior the model was trained for.
struct CalibrationModel {
  Eigen::VectorXd weights;
  double offset = 0.0;
  double prior = 0.05;
};

inline constexpr double kCalibrationRidge = 1e-6;

struct CalibrationOptions {
  double prior = 0.05;
  double ridge = kCalibrationRidge;
  int max_iterations = 200;
  double gradient_tolerance = 1e-9;
  /// Starting point; zero weights and offset when absent.
  std::optional<CalibrationModel> init;
};

struct CalibrationFit {
  CalibrationModel model;
  double objective;
  int iterations;
  /// False when the iteration cap was hit before the gradient tolerance.
  bool converged;
};

/// Prior-weighted logistic regression objective
///   p * mean_tar log(1 + e^{-(f + logit p)})
///     + (1 - p) * mean_non log(1 + e^{f + logit p}) + ridge * |w|^2,
/// f = w's + b, in nats.
double CalibrationObjective(const SystemScores &data, double prior,
                            const Eigen::VectorXd &weights, double offset,
                            double ridge = kCalibrationRidge);

/// Minimises CalibrationObjective by damped Newton iterations with
/// step halving.  Throws SingleClassLabels / NonFiniteScores.
CalibrationFit FitCalibration(const SystemScores &data,
                              const CalibrationOptions &options = {});

/// w's + b per trial.  Throws DimensionMismatch on a column count mismatch.
std::vector<double> ApplyCalibration(const CalibrationModel &model,
                                     const SystemScores &data);

/// Weighted sum per trial without offset.
std::vector<double> ManualFusion(const std::vector<double> &weights,
                                 const SystemScores &data);

/// key=value text: prior=, offset=, weights= (comma separated).
void WriteCalibrationModel(const CalibrationModel &model,
                           const std::string &path);
CalibrationModel ReadCalibrationModel(const std::string &path);

/// Re-attaches (enroll, test) keys from `like` to fused values.
ScoreSet WithKeys(const ScoreSet &like, const std::vector<double> &values);

}  // namespace svtk

#endif  // SVTK_CALIBRATION_H_
