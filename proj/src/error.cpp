/*
 * Copyright 2026 The alttrip Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "alttrip/error.hpp"

namespace alttrip {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kParseError: return "ParseError";
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kEmptyCatalog: return "EmptyCatalog";
    case Errc::kUnknownPoi: return "UnknownPOI";
    case Errc::kTooFewRoutes: return "TooFewRoutes";
    case Errc::kDegenerateGeometry: return "DegenerateGeometry";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kConfigMismatch: return "ConfigMismatch";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kInvalidId: return "InvalidId";
    case Errc::kEmptyPrefix: return "EmptyPrefix";
    case Errc::kBadPosition: return "BadPosition";
    case Errc::kEmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::kNoEligiblePoi: return "NoEligiblePOI";
    case Errc::kExhaustedCandidates: return "ExhaustedCandidates";
    case Errc::kConstraintUnsupported: return "ConstraintUnsupported";
    case Errc::kInfeasibleConstraints: return "InfeasibleConstraints";
    case Errc::kIllegalMove: return "IllegalMove";
    case Errc::kMissingTableEntry: return "MissingTableEntry";
    case Errc::kEmptyGroundTruth: return "EmptyGroundTruth";
    case Errc::kSingletonSet: return "SingletonSet";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kHashMismatch: return "HashMismatch";
    case Errc::kCorruptFile: return "CorruptFile";
    case Errc::kBindFailure: return "BindFailure";
    case Errc::kIoError: return "IoError";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace alttrip
