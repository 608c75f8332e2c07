// include/svtk/error.h

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

#ifndef SVTK_ERROR_H_
#define SVTK_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace svtk {

enum class ErrorKind {
  kIo,
  kUnwritablePath,
  kMalformedHeader,
  kInvalidDimension,
  kDimensionMismatch,
  kDuplicateId,
  kInvalidId,
  kNonFiniteValue,
  kMixedLabeling,
  kUnknownLabel,
  kWrongFieldCount,
  kNonNumericScore,
  kMisalignedScores,
  kInvalidArgument,
  kHeadMismatch,
  kIndexOutOfRange,
  kEmptySimilaritySet,
  kZeroNormEmbedding,
  kEmptySegmentList,
  kNonPositiveDefinite,
  kMissingUtterance,
  kMultiSegmentWithSingleStrategy,
  kMissingCohort,
  kDegenerateCohort,
  kEmptyClass,
  kSingleClassLabels,
  kNonFiniteScores,
  kMaskWiderThanAxis,
  kZeroPowerInput,
  kEmptyImpulseResponse,
  kSampleRateMismatch,
};

const char *ErrorKindName(ErrorKind kind);

/// Every failure raised by the library.  location() is the 1-based line or
/// record number of the offending input, or 0 when there is none.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message, int64_t location = 0);

  ErrorKind kind() const { return kind_; }
  int64_t location() const { return location_; }

 private:
  ErrorKind kind_;
  int64_t location_;
};

}  // namespace svtk

#endif  // SVTK_ERROR_H_
