// src/corpus-io.cc

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

#include "svtk/corpus-io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "svtk/error.h"

namespace svtk {

EmbeddingSet::EmbeddingSet(int32_t dim) : dim_(dim) {
  if (dim < 1)
    throw Error(ErrorKind::kInvalidDimension,
                "embedding dimension must be positive, got " +
                    std::to_string(dim));
}

size_t EmbeddingSet::NumSegments() const {
  size_t n = 0;
  for (const Record &r : records_) n += r.segments.size();
  return n;
}

static void CheckId(const std::string &id) {
  if (id.empty())
    throw Error(ErrorKind::kInvalidId, "utterance id is empty");
  for (char c : id)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw Error(ErrorKind::kInvalidId,
                  "utterance id contains whitespace: '" + id + "'");
}

void EmbeddingSet::AddSegment(const std::string &id, Embedding segment) {
  CheckId(id);
  if (segment.size() < 1)
    throw Error(ErrorKind::kInvalidDimension, "empty embedding for " + id);
  if (dim_ == 0) dim_ = static_cast<int32_t>(segment.size());
  if (segment.size() != dim_)
    throw Error(ErrorKind::kDimensionMismatch,
                "utterance " + id + " has dimension " +
                    std::to_string(segment.size()) + ", expected " +
                    std::to_string(dim_));
  if (!segment.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "utterance " + id);
  auto it = index_.find(id);
  if (it == index_.end()) {
    index_.emplace(id, records_.size());
    records_.push_back({id, {}});
    records_.back().segments.push_back(std::move(segment));
  } else {
    records_[it->second].segments.push_back(std::move(segment));
  }
}

void EmbeddingSet::AddUtterance(const std::string &id,
                                std::vector<Embedding> segments) {
  if (Contains(id))
    throw Error(ErrorKind::kDuplicateId, "duplicate utterance id " + id);
  if (segments.empty())
    throw Error(ErrorKind::kEmptySegmentList, "utterance " + id);
  for (Embedding &e : segments) AddSegment(id, std::move(e));
}

const std::vector<Embedding> &EmbeddingSet::Segments(
    const std::string &id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw Error(ErrorKind::kMissingUtterance, id);
  return records_[it->second].segments;
}

bool operator==(const EmbeddingSet &a, const EmbeddingSet &b) {
  if (a.records_.size() != b.records_.size()) return false;
  if (!a.records_.empty() && a.dim_ != b.dim_) return false;
  for (size_t i = 0; i < a.records_.size(); i++) {
    const auto &ra = a.records_[i], &rb = b.records_[i];
    if (ra.id != rb.id || ra.segments.size() != rb.segments.size())
      return false;
    for (size_t s = 0; s < ra.segments.size(); s++)
      if (ra.segments[s] != rb.segments[s]) return false;
  }
  return true;
}

std::vector<std::string> SplitFields(const std::string &line) {
  std::vector<std::string> fields;
  size_t i = 0, n = line.size();
  while (i < n) {
    while (i < n && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      i++;
    size_t start = i;
    while (i < n && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') i++;
    if (i > start) fields.emplace_back(line, start, i - start);
  }
  return fields;
}

std::optional<double> ParseReal(const std::string &token) {
  double value = 0.0;
  const char *begin = token.data(), *end = token.data() + token.size();
  if (begin != end && *begin == '+') begin++;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

static std::string FormatReal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

// ---- binary EMB1 ----

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream &os) : os_(os) {}
  template <typename UInt>
  void Put(UInt v) {
    unsigned char buf[sizeof(UInt)];
    for (size_t i = 0; i < sizeof(UInt); i++)
      buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os_.write(reinterpret_cast<const char *>(buf), sizeof(UInt));
  }
  void PutFloat(float f) { Put(std::bit_cast<uint32_t>(f)); }
  void PutBytes(const std::string &s) { os_.write(s.data(), s.size()); }

 private:
  std::ostream &os_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream &is) : is_(is) {}
  template <typename UInt>
  bool Get(UInt *v) {
    unsigned char buf[sizeof(UInt)];
    if (!is_.read(reinterpret_cast<char *>(buf), sizeof(UInt))) return false;
    UInt out = 0;
    for (size_t i = 0; i < sizeof(UInt); i++)
      out |= static_cast<UInt>(buf[i]) << (8 * i);
    *v = out;
    return true;
  }
  bool GetFloat(float *f) {
    uint32_t bits;
    if (!Get(&bits)) return false;
    *f = std::bit_cast<float>(bits);
    return true;
  }
  bool GetBytes(size_t n, std::string *s) {
    s->resize(n);
    return n == 0 || static_cast<bool>(is_.read(s->data(), n));
  }

 private:
  std::istream &is_;
};

EmbeddingSet LoadBinary(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  ByteReader reader(is);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::kMalformedHeader, path + ": bad magic");
  uint32_t dim;
  uint64_t count;
  if (!reader.Get(&dim) || !reader.Get(&count))
    throw Error(ErrorKind::kMalformedHeader, path + ": truncated header");
  if (dim == 0 || dim > static_cast<uint32_t>(INT32_MAX))
    throw Error(ErrorKind::kMalformedHeader,
                path + ": invalid dimension " + std::to_string(dim));
  EmbeddingSet set(static_cast<int32_t>(dim));
  std::vector<float> buf(dim);
  for (uint64_t r = 0; r < count; r++) {
    const int64_t rec = static_cast<int64_t>(r) + 1;
    uint16_t id_len;
    std::string id;
    uint32_t num_segments;
    if (!reader.Get(&id_len) || !reader.GetBytes(id_len, &id) ||
        !reader.Get(&num_segments))
      throw Error(ErrorKind::kIo, path + ": truncated record", rec);
    if (num_segments == 0)
      throw Error(ErrorKind::kEmptySegmentList, path + ": utterance " + id,
                  rec);
    if (set.Contains(id))
      throw Error(ErrorKind::kDuplicateId, path + ": " + id, rec);
    for (uint32_t s = 0; s < num_segments; s++) {
      Embedding e(dim);
      for (uint32_t j = 0; j < dim; j++) {
        if (!reader.GetFloat(&buf[j]))
          throw Error(ErrorKind::kIo, path + ": truncated record", rec);
        if (!std::isfinite(buf[j]))
          throw Error(ErrorKind::kNonFiniteValue,
                      path + ": utterance " + id, rec);
        e[j] = buf[j];
      }
      try {
        set.AddSegment(id, std::move(e));
      } catch (const Error &err) {
        throw Error(err.kind(), path + ": " + err.what(), rec);
      }
    }
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::kMalformedHeader,
                path + ": trailing bytes after declared record count");
  return set;
}

void WriteBinary(const EmbeddingSet &set, std::ostream &os) {
  ByteWriter w(os);
  os.write(kMagic, 4);
  w.Put(static_cast<uint32_t>(set.Dim()));
  w.Put(static_cast<uint64_t>(set.NumUtterances()));
  for (const auto &rec : set.Records()) {
    if (rec.id.size() > UINT16_MAX)
      throw Error(ErrorKind::kInvalidId, "utterance id too long: " + rec.id);
    w.Put(static_cast<uint16_t>(rec.id.size()));
    w.PutBytes(rec.id);
    w.Put(static_cast<uint32_t>(rec.segments.size()));
    for (const Embedding &e : rec.segments)
      for (Eigen::Index j = 0; j < e.size(); j++)
        w.PutFloat(static_cast<float>(e[j]));
  }
}

// ---- text ----

EmbeddingSet LoadText(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  EmbeddingSet set;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    std::vector<std::string> fields = SplitFields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2)
      throw Error(ErrorKind::kWrongFieldCount,
                  path + ": expected an id followed by values", line_no);
    Embedding e(fields.size() - 1);
    for (size_t j = 1; j < fields.size(); j++) {
      std::optional<double> v = ParseReal(fields[j]);
      if (!v)
        throw Error(ErrorKind::kNonNumericScore,
                    path + ": bad value '" + fields[j] + "'", line_no);
      if (!std::isfinite(*v))
        throw Error(ErrorKind::kNonFiniteValue,
                    path + ": value '" + fields[j] + "'", line_no);
      e[j - 1] = *v;
    }
    try {
      set.AddSegment(fields[0], std::move(e));
    } catch (const Error &err) {
      throw Error(err.kind(), path + ": " + err.what(), line_no);
    }
  }
  return set;
}

void WriteText(const EmbeddingSet &set, std::ostream &os) {
  for (const auto &rec : set.Records())
    for (const Embedding &e : rec.segments) {
      os << rec.id;
      for (Eigen::Index j = 0; j < e.size(); j++) os << ' ' << FormatReal(e[j]);
      os << '\n';
    }
}

std::ofstream OpenForWrite(const std::string &path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc
                                : std::ios::trunc);
  if (!os) throw Error(ErrorKind::kUnwritablePath, path);
  return os;
}

void FinishWrite(std::ofstream &os, const std::string &path) {
  os.flush();
  if (!os) throw Error(ErrorKind::kUnwritablePath, path + ": write failed");
}

}  // namespace

EmbeddingSet LoadEmbeddings(const std::string &path, EmbeddingFormat format) {
  return format == EmbeddingFormat::kBinary ? LoadBinary(path)
                                            : LoadText(path);
}

void WriteEmbeddings(const EmbeddingSet &set, const std::string &path,
                     EmbeddingFormat format) {
  if (set.Dim() < 1)
    throw Error(ErrorKind::kInvalidDimension,
                "cannot write an embedding set of dimension " +
                    std::to_string(set.Dim()));
  std::ofstream os = OpenForWrite(path, format == EmbeddingFormat::kBinary);
  if (format == EmbeddingFormat::kBinary)
    WriteBinary(set, os);
  else
    WriteText(set, os);
  FinishWrite(os, path);
}

TrialList::TrialList(std::vector<Trial> trials) : trials_(std::move(trials)) {
  labeled_ = !trials_.empty() && trials_.front().is_target.has_value();
  for (size_t i = 0; i < trials_.size(); i++) {
    const Trial &t = trials_[i];
    if (t.enroll.empty() || t.test.empty())
      throw Error(ErrorKind::kInvalidId, "empty id in trial",
                  static_cast<int64_t>(i) + 1);
    if (t.is_target.has_value() != labeled_)
      throw Error(ErrorKind::kMixedLabeling,
                  "trial labels must be all present or all absent",
                  static_cast<int64_t>(i) + 1);
  }
}

TrialList LoadTrials(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<Trial> trials;
  std::optional<bool> labeled;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    std::vector<std::string> f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 2 && f.size() != 3)
      throw Error(ErrorKind::kWrongFieldCount,
                  path + ": expected 'enroll test [label]'", line_no);
    bool has_label = f.size() == 3;
    if (labeled && *labeled != has_label)
      throw Error(ErrorKind::kMixedLabeling, path, line_no);
    labeled = has_label;
    Trial t{f[0], f[1], std::nullopt};
    if (has_label) {
      if (f[2] == "target" || f[2] == "1")
        t.is_target = true;
      else if (f[2] == "nontarget" || f[2] == "0")
        t.is_target = false;
      else
        throw Error(ErrorKind::kUnknownLabel,
                    path + ": label '" + f[2] + "'", line_no);
    }
    trials.push_back(std::move(t));
  }
  return TrialList(std::move(trials));
}

void WriteTrials(const TrialList &trials, const std::string &path) {
  std::ofstream os = OpenForWrite(path, false);
  for (const Trial &t : trials.Trials()) {
    os << t.enroll << ' ' << t.test;
    if (t.is_target) os << ' ' << (*t.is_target ? "target" : "nontarget");
    os << '\n';
  }
  FinishWrite(os, path);
}

ScoreSet LoadScores(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  ScoreSet scores;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    std::vector<std::string> f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 3)
      throw Error(ErrorKind::kWrongFieldCount,
                  path + ": expected 'enroll test score'", line_no);
    std::optional<double> v = ParseReal(f[2]);
    if (!v)
      throw Error(ErrorKind::kNonNumericScore,
                  path + ": score '" + f[2] + "'", line_no);
    if (!std::isfinite(*v))
      throw Error(ErrorKind::kNonFiniteValue, path + ": score '" + f[2] + "'",
                  line_no);
    scores.push_back({f[0], f[1], *v});
  }
  return scores;
}

void WriteScores(const ScoreSet &scores, const std::string &path) {
  std::ofstream os = OpenForWrite(path, false);
  for (const ScoreEntry &s : scores)
    os << s.enroll << ' ' << s.test << ' ' << FormatReal(s.score) << '\n';
  FinishWrite(os, path);
}

void CheckAligned(const ScoreSet &scores, const TrialList &trials) {
  const auto &t = trials.Trials();
  size_t n = std::min(scores.size(), t.size());
  for (size_t i = 0; i < n; i++)
    if (scores[i].enroll != t[i].enroll || scores[i].test != t[i].test)
      throw Error(ErrorKind::kMisalignedScores,
                  "score entry (" + scores[i].enroll + ", " + scores[i].test +
                      ") does not match trial (" + t[i].enroll + ", " +
                      t[i].test + ")",
                  static_cast<int64_t>(i) + 1);
  if (scores.size() != t.size())
    throw Error(ErrorKind::kMisalignedScores,
                std::to_string(scores.size()) + " scores for " +
                    std::to_string(t.size()) + " trials",
                static_cast<int64_t>(n) + 1);
}

}  // namespace svtk
