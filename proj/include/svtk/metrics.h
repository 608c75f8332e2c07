// include/svtk/metrics.h

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

#ifndef SVTK_METRICS_H_
#define SVTK_METRICS_H_

#include <string>
#include <vector>

#include "svtk/corpus-io.h"

namespace svtk {

// Detection metrics.  The decision rule is "accept iff score >= threshold",
// so P_miss(t) = frac(target < t) and P_fa(t) = frac(nontarget >= t).  All
// sweeps use the thresholds -inf, the midpoints between consecutive distinct
// pooled scores, and +inf.

struct LabeledScores {
  std::vector<double> target;
  std::vector<double> nontarget;

  /// Throws EmptyClass / NonFiniteScores.
  void Check() const;
};

/// Splits aligned scores by the trial labels.  Throws MisalignedScores if
/// the score set does not match the trial list, InvalidArgument if the
/// trials are unlabeled.
LabeledScores SplitByLabel(const ScoreSet &scores, const TrialList &trials);

struct DcfParams {
  double p_target = 0.05;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void Check() const;
  /// min(C_miss * p, C_fa * (1 - p)).
  double Normalizer() const;
};

struct OperatingPoint {
  double value;
  double threshold;
};

struct DetPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

/// One point per sweep threshold, thresholds increasing (so P_miss is
/// non-decreasing and P_fa non-increasing).
std::vector<DetPoint> DetCurve(const LabeledScores &scores);

/// Equal error rate in [0, 1].  Found where the P_miss and P_fa curves
/// cross, linearly interpolated between the two bracketing sweep points; the
/// threshold is interpolated the same way when both brackets are finite.
OperatingPoint ComputeEer(const LabeledScores &scores);

/// Minimum normalised detection cost over the sweep.
OperatingPoint ComputeMinDcf(const LabeledScores &scores,
                             const DcfParams &params);

/// Normalised detection cost at a fixed threshold.
double ComputeActDcf(const LabeledScores &scores, const DcfParams &params,
                     double threshold);

/// Bayes decision threshold for calibrated natural-log LLRs: -logit(p).
double BayesThreshold(const DcfParams &params);

/// Cost of log-likelihood ratio, scores read as natural-log LLRs.
double ComputeCllr(const LabeledScores &scores);

}  // namespace svtk

#endif  // SVTK_METRICS_H_
