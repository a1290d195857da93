// Copyright 2026 The mdpfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdpfuzz/error.h"

namespace mdpfuzz {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInitialState: return "InvalidInitialState";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveDefiniteCovariance:
      return "NonPositiveDefiniteCovariance";
    case ErrorCode::kDegenerateComponent: return "DegenerateComponent";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kPerturbationRejected: return "PerturbationRejected";
    case ErrorCode::kSamplingExhausted: return "SamplingExhausted";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kMutationExhausted: return "MutationExhausted";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kRemoteError: return "RemoteError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kTransportClosed: return "TransportClosed";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSnapshotFormat: return "SnapshotFormat";
  }
  return "Unknown";
}

}  // namespace mdpfuzz
