// include/svtk/scoring.h

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

#ifndef SVTK_SCORING_H_
#define SVTK_SCORING_H_

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "svtk/corpus-io.h"
#include "svtk/plda.h"

namespace svtk {

/// Throws ZeroNormEmbedding / DimensionMismatch.
double CosineScore(const Embedding &a, const Embedding &b);

/// Plain arithmetic mean; no length normalisation before or after.
Embedding EmbeddingAverage(const std::vector<Embedding> &segments);

/// Cosine similarity or PLDA log-likelihood ratio.
class ScoringBackend {
 public:
  static ScoringBackend Cosine() { return ScoringBackend(nullptr); }
  static ScoringBackend WithPlda(std::shared_ptr<const Plda> plda) {
    return ScoringBackend(std::move(plda));
  }

  bool IsPlda() const { return plda_ != nullptr; }
  double Score(const Embedding &a, const Embedding &b) const;

 private:
  explicit ScoringBackend(std::shared_ptr<const Plda> plda)
      : plda_(std::move(plda)) {}
  std::shared_ptr<const Plda> plda_;
};

/// Mean of the n_a x n_b matrix of pairwise segment scores.
double MatrixScoreAverage(const std::vector<Embedding> &segments_a,
                          const std::vector<Embedding> &segments_b,
                          const ScoringBackend &backend);

enum class ScoringStrategy {
  kSingle,  // exactly one segment per utterance
  kEmbeddingAverage,
  kMatrixScoreAverage,
  kAverageOfBoth,  // mean of the EA and MSA scores
};

/// Parses "single" | "ea" | "msa" | "ea-msa".
ScoringStrategy ParseStrategy(const std::string &name);

/// Scores two utterances given their segment lists.
double ScoreUtterances(const std::vector<Embedding> &segments_a,
                       const std::vector<Embedding> &segments_b,
                       const ScoringBackend &backend,
                       ScoringStrategy strategy);

/// Scores every trial, in order.  Work is split over `num_threads` threads
/// (0 = hardware concurrency); each result is written at its trial's index,
/// so the output does not depend on scheduling.
ScoreSet ScoreTrials(const EmbeddingSet &embeddings, const TrialList &trials,
                     const ScoringBackend &backend, ScoringStrategy strategy,
                     int num_threads = 1);

using CohortScores = std::unordered_map<std::string, std::vector<double>>;

/// For each utterance in `embeddings`, its scores against every cohort
/// utterance in cohort order.  An utterance present in the cohort is scored
/// against itself like any other cohort member.
CohortScores BuildCohortScores(const EmbeddingSet &embeddings,
                               const EmbeddingSet &cohort,
                               const ScoringBackend &backend,
                               ScoringStrategy strategy, int num_threads = 1);

/// Same, restricted to the given ids.
CohortScores BuildCohortScores(const EmbeddingSet &embeddings,
                               const std::vector<std::string> &ids,
                               const EmbeddingSet &cohort,
                               const ScoringBackend &backend,
                               ScoringStrategy strategy, int num_threads = 1);

inline constexpr int kDefaultTopK = 300;

struct CohortStats {
  double mean;
  double std;
  int top_k;  // entries actually used
};

/// Mean and population std of the `top_k` largest scores (clamped to the
/// vector length).  Throws InvalidArgument for fewer than two scores or
/// top_k < 2, DegenerateCohort when the std falls below 1e-12.
CohortStats ComputeCohortStats(const std::vector<double> &scores, int top_k);

/// Adaptive symmetric score normalisation:
///   s' = ((s - mu_e) / sigma_e + (s - mu_t) / sigma_t) / 2
/// with statistics over each side's top-K cohort scores.  If num_clamped is
/// given, it receives the number of ids whose cohort was shorter than K.
ScoreSet AsNorm(const ScoreSet &raw, const CohortScores &enroll_cohort,
                const CohortScores &test_cohort, int top_k,
                int *num_clamped = nullptr);

}  // namespace svtk

#endif  // SVTK_SCORING_H_
