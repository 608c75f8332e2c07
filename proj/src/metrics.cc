// src/metrics.cc

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

#include "svtk/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "svtk/error.h"

namespace svtk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SweepPoint {
  double threshold;
  size_t misses;       // targets below threshold
  size_t false_alarms; // nontargets at or above threshold
};

// A threshold strictly between a < b that compares the same way as the exact
// midpoint: everything <= a is rejected, everything >= b accepted.
double Between(double a, double b) {
  double mid = 0.5 * a + 0.5 * b;
  return mid > a ? mid : b;
}

std::vector<SweepPoint> Sweep(const LabeledScores &scores) {
  scores.Check();
  std::vector<double> tar = scores.target, non = scores.nontarget;
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  const size_t nt = tar.size(), nn = non.size();

  std::vector<SweepPoint> points;
  points.reserve(nt + nn + 2);
  points.push_back({-kInf, 0, nn});
  size_t it = 0, in = 0;
  while (it < nt || in < nn) {
    double v = std::min(it < nt ? tar[it] : kInf, in < nn ? non[in] : kInf);
    while (it < nt && tar[it] == v) it++;
    while (in < nn && non[in] == v) in++;
    if (it == nt && in == nn) break;
    double next = std::min(it < nt ? tar[it] : kInf, in < nn ? non[in] : kInf);
    points.push_back({Between(v, next), it, nn - in});
  }
  points.push_back({kInf, nt, 0});
  return points;
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

void LabeledScores::Check() const {
  if (target.empty())
    throw Error(ErrorKind::kEmptyClass, "no target scores");
  if (nontarget.empty())
    throw Error(ErrorKind::kEmptyClass, "no nontarget scores");
  for (const auto *v : {&target, &nontarget})
    for (size_t i = 0; i < v->size(); i++)
      if (!std::isfinite((*v)[i]))
        throw Error(ErrorKind::kNonFiniteScores,
                    v == &target ? "target score" : "nontarget score",
                    static_cast<int64_t>(i) + 1);
}

LabeledScores SplitByLabel(const ScoreSet &scores, const TrialList &trials) {
  if (!trials.Labeled())
    throw Error(ErrorKind::kInvalidArgument, "trial list has no labels");
  CheckAligned(scores, trials);
  LabeledScores out;
  for (size_t i = 0; i < scores.size(); i++)
    (*trials.Trials()[i].is_target ? out.target : out.nontarget)
        .push_back(scores[i].score);
  return out;
}

void DcfParams::Check() const {
  if (!(p_target > 0.0 && p_target < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "p_target must lie in (0, 1)");
  if (!(c_miss > 0.0) || !(c_fa > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "costs must be positive");
}

double DcfParams::Normalizer() const {
  return std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

std::vector<DetPoint> DetCurve(const LabeledScores &scores) {
  std::vector<SweepPoint> sweep = Sweep(scores);
  const double nt = static_cast<double>(scores.target.size());
  const double nn = static_cast<double>(scores.nontarget.size());
  std::vector<DetPoint> out;
  out.reserve(sweep.size());
  for (const SweepPoint &p : sweep)
    out.push_back({p.threshold, p.misses / nt, p.false_alarms / nn});
  return out;
}

OperatingPoint ComputeEer(const LabeledScores &scores) {
  std::vector<DetPoint> det = DetCurve(scores);
  // det.front() has P_miss = 0 < P_fa = 1 and det.back() the reverse, so the
  // first point with P_miss >= P_fa has a predecessor.
  size_t k = 1;
  while (det[k].p_miss < det[k].p_fa) k++;
  const DetPoint &hi = det[k];
  if (hi.p_miss == hi.p_fa) return {hi.p_miss, hi.threshold};

  const DetPoint &lo = det[k - 1];
  const double dm = hi.p_miss - lo.p_miss, df = hi.p_fa - lo.p_fa;
  const double t = (lo.p_fa - lo.p_miss) / (dm - df);
  const double eer = lo.p_miss + t * dm;
  double threshold;
  if (std::isinf(lo.threshold))
    threshold = hi.threshold;
  else if (std::isinf(hi.threshold))
    threshold = lo.threshold;
  else
    threshold = lo.threshold + t * (hi.threshold - lo.threshold);
  return {eer, threshold};
}

OperatingPoint ComputeMinDcf(const LabeledScores &scores,
                             const DcfParams &params) {
  params.Check();
  std::vector<DetPoint> det = DetCurve(scores);
  const double wm = params.c_miss * params.p_target;
  const double wf = params.c_fa * (1.0 - params.p_target);
  const double norm = params.Normalizer();
  OperatingPoint best{kInf, 0.0};
  for (const DetPoint &p : det) {
    double dcf = (wm * p.p_miss + wf * p.p_fa) / norm;
    if (dcf < best.value) best = {dcf, p.threshold};
  }
  return best;
}

double ComputeActDcf(const LabeledScores &scores, const DcfParams &params,
                     double threshold) {
  scores.Check();
  params.Check();
  if (std::isnan(threshold))
    throw Error(ErrorKind::kInvalidArgument, "threshold is NaN");
  size_t misses = 0, fas = 0;
  for (double s : scores.target)
    if (s < threshold) misses++;
  for (double s : scores.nontarget)
    if (s >= threshold) fas++;
  const double p_miss =
      static_cast<double>(misses) / static_cast<double>(scores.target.size());
  const double p_fa =
      static_cast<double>(fas) / static_cast<double>(scores.nontarget.size());
  return (params.c_miss * params.p_target * p_miss +
          params.c_fa * (1.0 - params.p_target) * p_fa) /
         params.Normalizer();
}

double BayesThreshold(const DcfParams &params) {
  params.Check();
  return -std::log(params.p_target / (1.0 - params.p_target));
}

double ComputeCllr(const LabeledScores &scores) {
  scores.Check();
  double tar = 0.0, non = 0.0;
  for (double s : scores.target) tar += Softplus(-s);
  for (double s : scores.nontarget) non += Softplus(s);
  tar /= static_cast<double>(scores.target.size());
  non /= static_cast<double>(scores.nontarget.size());
  return 0.5 * (tar + non) / std::numbers::ln2;
}

}  // namespace svtk
