// src/scoring.cc

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

#include "svtk/scoring.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "parallel.h"
#include "svtk/error.h"

namespace svtk {

double CosineScore(const Embedding &a, const Embedding &b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "cosine of vectors with dimensions " +
                    std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0))
    throw Error(ErrorKind::kZeroNormEmbedding, "cosine scoring");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Embedding EmbeddingAverage(const std::vector<Embedding> &segments) {
  if (segments.empty())
    throw Error(ErrorKind::kEmptySegmentList, "embedding average");
  Embedding sum = segments.front();
  for (size_t i = 1; i < segments.size(); i++) {
    if (segments[i].size() != sum.size())
      throw Error(ErrorKind::kDimensionMismatch,
                  "segments of different dimension");
    sum += segments[i];
  }
  if (segments.size() == 1) return sum;
  return sum / static_cast<double>(segments.size());
}

double ScoringBackend::Score(const Embedding &a, const Embedding &b) const {
  return plda_ ? plda_->LogLikelihoodRatio(a, b) : CosineScore(a, b);
}

double MatrixScoreAverage(const std::vector<Embedding> &segments_a,
                          const std::vector<Embedding> &segments_b,
                          const ScoringBackend &backend) {
  if (segments_a.empty() || segments_b.empty())
    throw Error(ErrorKind::kEmptySegmentList, "matrix score average");
  double sum = 0.0;
  for (const Embedding &a : segments_a)
    for (const Embedding &b : segments_b) sum += backend.Score(a, b);
  if (segments_a.size() == 1 && segments_b.size() == 1) return sum;
  return sum / static_cast<double>(segments_a.size() * segments_b.size());
}

ScoringStrategy ParseStrategy(const std::string &name) {
  if (name == "single") return ScoringStrategy::kSingle;
  if (name == "ea") return ScoringStrategy::kEmbeddingAverage;
  if (name == "msa") return ScoringStrategy::kMatrixScoreAverage;
  if (name == "ea-msa") return ScoringStrategy::kAverageOfBoth;
  throw Error(ErrorKind::kInvalidArgument, "unknown strategy '" + name + "'");
}

namespace {

// An utterance's segments plus its cached average, if the strategy needs one.
struct Prepared {
  const std::vector<Embedding> *segments = nullptr;
  Embedding average;
};

bool NeedsAverage(ScoringStrategy strategy) {
  return strategy == ScoringStrategy::kEmbeddingAverage ||
         strategy == ScoringStrategy::kAverageOfBoth;
}

Prepared Prepare(const std::string &id, const std::vector<Embedding> &segments,
                 ScoringStrategy strategy) {
  if (strategy == ScoringStrategy::kSingle && segments.size() != 1)
    throw Error(ErrorKind::kMultiSegmentWithSingleStrategy,
                "utterance " + id + " has " + std::to_string(segments.size()) +
                    " segments");
  Prepared p;
  p.segments = &segments;
  if (NeedsAverage(strategy)) p.average = EmbeddingAverage(segments);
  return p;
}

double ScorePrepared(const Prepared &a, const Prepared &b,
                     const ScoringBackend &backend, ScoringStrategy strategy) {
  switch (strategy) {
    case ScoringStrategy::kSingle:
      return backend.Score(a.segments->front(), b.segments->front());
    case ScoringStrategy::kEmbeddingAverage:
      return backend.Score(a.average, b.average);
    case ScoringStrategy::kMatrixScoreAverage:
      return MatrixScoreAverage(*a.segments, *b.segments, backend);
    case ScoringStrategy::kAverageOfBoth:
      return 0.5 * (backend.Score(a.average, b.average) +
                    MatrixScoreAverage(*a.segments, *b.segments, backend));
  }
  return 0.0;
}

using PreparedMap = std::unordered_map<std::string, Prepared>;

}  // namespace

double ScoreUtterances(const std::vector<Embedding> &segments_a,
                       const std::vector<Embedding> &segments_b,
                       const ScoringBackend &backend,
                       ScoringStrategy strategy) {
  Prepared a = Prepare("a", segments_a, strategy);
  Prepared b = Prepare("b", segments_b, strategy);
  return ScorePrepared(a, b, backend, strategy);
}

ScoreSet ScoreTrials(const EmbeddingSet &embeddings, const TrialList &trials,
                     const ScoringBackend &backend, ScoringStrategy strategy,
                     int num_threads) {
  const auto &list = trials.Trials();
  PreparedMap cache;
  for (size_t i = 0; i < list.size(); i++) {
    for (const std::string *id : {&list[i].enroll, &list[i].test}) {
      if (cache.count(*id)) continue;
      if (!embeddings.Contains(*id))
        throw Error(ErrorKind::kMissingUtterance,
                    *id + " (trial " + std::to_string(i + 1) + ")",
                    static_cast<int64_t>(i) + 1);
      cache.emplace(*id, Prepare(*id, embeddings.Segments(*id), strategy));
    }
  }
  ScoreSet out(list.size());
  ParallelFor(list.size(), num_threads, [&](size_t i) {
    const Trial &t = list[i];
    out[i] = {t.enroll, t.test,
              ScorePrepared(cache.at(t.enroll), cache.at(t.test), backend,
                            strategy)};
  });
  return out;
}

CohortScores BuildCohortScores(const EmbeddingSet &embeddings,
                               const std::vector<std::string> &ids,
                               const EmbeddingSet &cohort,
                               const ScoringBackend &backend,
                               ScoringStrategy strategy, int num_threads) {
  if (cohort.Empty())
    throw Error(ErrorKind::kInvalidArgument, "cohort set is empty");
  std::vector<Prepared> cohort_prepared;
  for (const auto &rec : cohort.Records())
    cohort_prepared.push_back(Prepare(rec.id, rec.segments, strategy));
  std::vector<Prepared> subjects;
  for (const std::string &id : ids)
    subjects.push_back(Prepare(id, embeddings.Segments(id), strategy));

  std::vector<std::vector<double>> rows(ids.size());
  ParallelFor(ids.size(), num_threads, [&](size_t i) {
    rows[i].reserve(cohort_prepared.size());
    for (const Prepared &c : cohort_prepared)
      rows[i].push_back(ScorePrepared(subjects[i], c, backend, strategy));
  });
  CohortScores out;
  for (size_t i = 0; i < ids.size(); i++) out[ids[i]] = std::move(rows[i]);
  return out;
}

CohortScores BuildCohortScores(const EmbeddingSet &embeddings,
                               const EmbeddingSet &cohort,
                               const ScoringBackend &backend,
                               ScoringStrategy strategy, int num_threads) {
  std::vector<std::string> ids;
  for (const auto &rec : embeddings.Records()) ids.push_back(rec.id);
  return BuildCohortScores(embeddings, ids, cohort, backend, strategy,
                           num_threads);
}

CohortStats ComputeCohortStats(const std::vector<double> &scores, int top_k) {
  if (top_k < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "top-K must be at least 2, got " + std::to_string(top_k));
  if (scores.size() < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "cohort needs at least two scores");
  const size_t k = std::min(scores.size(), static_cast<size_t>(top_k));
  std::vector<double> top(k);
  std::partial_sort_copy(scores.begin(), scores.end(), top.begin(), top.end(),
                         std::greater<double>());
  double mean = 0.0;
  for (double s : top) mean += s;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double s : top) var += (s - mean) * (s - mean);
  var /= static_cast<double>(k);
  const double std_dev = std::sqrt(var);
  if (!(std_dev >= 1e-12))
    throw Error(ErrorKind::kDegenerateCohort,
                "top-" + std::to_string(k) + " cohort scores have std " +
                    std::to_string(std_dev));
  return {mean, std_dev, static_cast<int>(k)};
}

ScoreSet AsNorm(const ScoreSet &raw, const CohortScores &enroll_cohort,
                const CohortScores &test_cohort, int top_k, int *num_clamped) {
  if (top_k < 2)
    throw Error(ErrorKind::kInvalidArgument,
                "top-K must be at least 2, got " + std::to_string(top_k));
  std::unordered_map<std::string, CohortStats> enroll_stats, test_stats;
  int clamped = 0;
  auto stats_for = [&](const std::string &id, const CohortScores &cohort,
                       std::unordered_map<std::string, CohortStats> &memo,
                       size_t trial) -> const CohortStats & {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    auto c = cohort.find(id);
    if (c == cohort.end())
      throw Error(ErrorKind::kMissingCohort, id,
                  static_cast<int64_t>(trial) + 1);
    CohortStats s;
    try {
      s = ComputeCohortStats(c->second, top_k);
    } catch (const Error &e) {
      throw Error(e.kind(), id + ": " + e.what(),
                  static_cast<int64_t>(trial) + 1);
    }
    if (s.top_k < top_k) clamped++;
    return memo.emplace(id, s).first->second;
  };

  ScoreSet out;
  out.reserve(raw.size());
  for (size_t i = 0; i < raw.size(); i++) {
    const ScoreEntry &e = raw[i];
    const CohortStats &se = stats_for(e.enroll, enroll_cohort, enroll_stats, i);
    const CohortStats &st = stats_for(e.test, test_cohort, test_stats, i);
    double norm =
        0.5 * ((e.score - se.mean) / se.std + (e.score - st.mean) / st.std);
    out.push_back({e.enroll, e.test, norm});
  }
  if (num_clamped) *num_clamped = clamped;
  return out;
}

}  // namespace svtk
