// include/svtk/corpus-io.h

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

#ifndef SVTK_CORPUS_IO_H_
#define SVTK_CORPUS_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace svtk {

/// A single speaker embedding.  Stored on disk as 32-bit floats, held and
/// computed on in double precision.
using Embedding = Eigen::VectorXd;

/// Utterance-id to ordered segment embeddings.  Utterances keep the order in
/// which they were first added, and segments keep their insertion order.
class EmbeddingSet {
 public:
  struct Record {
    std::string id;
    std::vector<Embedding> segments;
  };

  EmbeddingSet() = default;
  /// dim == 0 means "not yet known"; it is fixed by the first segment added.
  explicit EmbeddingSet(int32_t dim);

  int32_t Dim() const { return dim_; }
  size_t NumUtterances() const { return records_.size(); }
  size_t NumSegments() const;
  bool Empty() const { return records_.empty(); }

  /// Appends a segment to utterance `id`, creating the utterance if needed.
  void AddSegment(const std::string &id, Embedding segment);
  /// Adds a new utterance; throws DuplicateId if it already exists.
  void AddUtterance(const std::string &id, std::vector<Embedding> segments);

  bool Contains(const std::string &id) const { return index_.count(id) != 0; }
  /// Throws MissingUtterance if absent.
  const std::vector<Embedding> &Segments(const std::string &id) const;

  const std::vector<Record> &Records() const { return records_; }

  friend bool operator==(const EmbeddingSet &a, const EmbeddingSet &b);

 private:
  int32_t dim_ = 0;
  std::vector<Record> records_;
  std::unordered_map<std::string, size_t> index_;
};

enum class EmbeddingFormat { kBinary, kText };

/// Binary layout ("EMB1"): magic, u32 dim, u64 record count, then per record
/// u16 id length, id bytes, u32 segment count, count*dim f32; all
/// little-endian.  Text layout: one segment per line, `id v1 ... vd`; repeated
/// ids are successive segments of the same utterance.
EmbeddingSet LoadEmbeddings(const std::string &path, EmbeddingFormat format);
void WriteEmbeddings(const EmbeddingSet &set, const std::string &path,
                     EmbeddingFormat format);

struct Trial {
  std::string enroll;
  std::string test;
  std::optional<bool> is_target;

  friend bool operator==(const Trial &, const Trial &) = default;
};

/// Either every trial carries a label or none does.
class TrialList {
 public:
  TrialList() = default;
  explicit TrialList(std::vector<Trial> trials);

  const std::vector<Trial> &Trials() const { return trials_; }
  size_t Size() const { return trials_.size(); }
  bool Labeled() const { return labeled_; }

 private:
  std::vector<Trial> trials_;
  bool labeled_ = false;
};

TrialList LoadTrials(const std::string &path);
/// Labels are always written as "target" / "nontarget".
void WriteTrials(const TrialList &trials, const std::string &path);

struct ScoreEntry {
  std::string enroll;
  std::string test;
  double score;

  friend bool operator==(const ScoreEntry &, const ScoreEntry &) = default;
};

using ScoreSet = std::vector<ScoreEntry>;

ScoreSet LoadScores(const std::string &path);
/// Scores are printed with 17 significant digits, so they reload exactly.
void WriteScores(const ScoreSet &scores, const std::string &path);

/// Throws MisalignedScores (with the 1-based entry index) unless `scores`
/// holds exactly the trials' (enroll, test) pairs in the same order.
void CheckAligned(const ScoreSet &scores, const TrialList &trials);

/// Splits on runs of spaces/tabs; carriage returns are stripped.
std::vector<std::string> SplitFields(const std::string &line);

/// Parses a full token as a double; nullopt on any trailing garbage.
std::optional<double> ParseReal(const std::string &token);

}  // namespace svtk

#endif  // SVTK_CORPUS_IO_H_
