// Copyright 2026 The qdev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdev {

/// Every failure raised by the library carries one of these codes, so callers
/// (and tests) can tell validation failures apart without parsing messages.
enum class ErrorCode {
  dimension_mismatch,
  non_finite,
  not_hermitian,
  not_psd,
  invalid_effect,
  observable_not_normalized,
  not_completely_positive,
  trace_increasing,
  not_a_channel,
  instrument_not_channel,
  unknown_label,
  duplicate_label,
  outcome_bound_exceeded,
  invalid_state,
  invalid_distribution,
  not_dominated,
  rank_condition,
  not_pure,
  not_minimal,
  missing_witness,
  totals_differ,
  unsupported_pair,
  not_unitary,
  parse_error,
  internal,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::not_hermitian: return "not_hermitian";
    case ErrorCode::not_psd: return "not_psd";
    case ErrorCode::invalid_effect: return "invalid_effect";
    case ErrorCode::observable_not_normalized: return "observable_not_normalized";
    case ErrorCode::not_completely_positive: return "not_completely_positive";
    case ErrorCode::trace_increasing: return "trace_increasing";
    case ErrorCode::not_a_channel: return "not_a_channel";
    case ErrorCode::instrument_not_channel: return "instrument_not_channel";
    case ErrorCode::unknown_label: return "unknown_label";
    case ErrorCode::duplicate_label: return "duplicate_label";
    case ErrorCode::outcome_bound_exceeded: return "outcome_bound_exceeded";
    case ErrorCode::invalid_state: return "invalid_state";
    case ErrorCode::invalid_distribution: return "invalid_distribution";
    case ErrorCode::not_dominated: return "not_dominated";
    case ErrorCode::rank_condition: return "rank_condition";
    case ErrorCode::not_pure: return "not_pure";
    case ErrorCode::not_minimal: return "not_minimal";
    case ErrorCode::missing_witness: return "missing_witness";
    case ErrorCode::totals_differ: return "totals_differ";
    case ErrorCode::unsupported_pair: return "unsupported_pair";
    case ErrorCode::not_unitary: return "not_unitary";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace qdev
