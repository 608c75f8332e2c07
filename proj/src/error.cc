// src/error.cc

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

#include "svtk/error.h"

namespace svtk {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kUnwritablePath: return "UnwritablePath";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kInvalidDimension: return "InvalidDimension";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kInvalidId: return "InvalidId";
    case ErrorKind::kNonFiniteValue: return "NonFiniteValue";
    case ErrorKind::kMixedLabeling: return "MixedLabeling";
    case ErrorKind::kUnknownLabel: return "UnknownLabel";
    case ErrorKind::kWrongFieldCount: return "WrongFieldCount";
    case ErrorKind::kNonNumericScore: return "NonNumericScore";
    case ErrorKind::kMisalignedScores: return "MisalignedScores";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kHeadMismatch: return "HeadMismatch";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kEmptySimilaritySet: return "EmptySimilaritySet";
    case ErrorKind::kZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorKind::kEmptySegmentList: return "EmptySegmentList";
    case ErrorKind::kNonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorKind::kMissingUtterance: return "MissingUtterance";
    case ErrorKind::kMultiSegmentWithSingleStrategy:
      return "MultiSegmentWithSingleStrategy";
    case ErrorKind::kMissingCohort: return "MissingCohort";
    case ErrorKind::kDegenerateCohort: return "DegenerateCohort";
    case ErrorKind::kEmptyClass: return "EmptyClass";
    case ErrorKind::kSingleClassLabels: return "SingleClassLabels";
    case ErrorKind::kNonFiniteScores: return "NonFiniteScores";
    case ErrorKind::kMaskWiderThanAxis: return "MaskWiderThanAxis";
    case ErrorKind::kZeroPowerInput: return "ZeroPowerInput";
    case ErrorKind::kEmptyImpulseResponse: return "EmptyImpulseResponse";
    case ErrorKind::kSampleRateMismatch: return "SampleRateMismatch";
  }
  return "UnknownError";
}

static std::string FormatMessage(ErrorKind kind, const std::string &message,
                                 int64_t location) {
  std::string out = ErrorKindName(kind);
  if (location > 0) out += "(" + std::to_string(location) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

Error::Error(ErrorKind kind, const std::string &message, int64_t location)
    : std::runtime_error(FormatMessage(kind, message, location)),
      kind_(kind),
      location_(location) {}

}  // namespace svtk
