// Copyright (c) 2026 Prak Authors
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

#ifndef PRAK_EVAL_H_
#define PRAK_EVAL_H_

#include <string>
#include <string_view>
#include <vector>

#include "prak/textgrid.h"

namespace prak {

enum class EditOp { kMatch, kSubstitute, kDelete, kInsert };

// One step of an edit script. `ref` / `hyp` are -1 for the side the step
// does not consume.
struct EditStep {
  EditOp op = EditOp::kMatch;
  int ref = -1;
  int hyp = -1;
  bool operator==(const EditStep&) const = default;
};

// Minimal unit-cost Levenshtein script. Among equal-cost scripts, steps are
// chosen (walking back from the end) in the order match, substitution,
// deletion, insertion.
std::vector<EditStep> EditAlign(const std::vector<std::string>& ref,
                                const std::vector<std::string>& hyp);
int EditCost(const std::vector<EditStep>& script);

struct TimedPhone {
  std::string label;
  double start = 0;
  double end = 0;
  double center() const { return 0.5 * (start + end); }
};

struct ScoreOptions {
  bool include_silence = false;
  double near_threshold = 0.1;
  double far_threshold = 0.2;
};

struct EvalReport {
  long ref_phone_count = 0;
  long insertions = 0;
  long deletions = 0;
  long substitutions = 0;
  long matches = 0;
  long misplaced_near = 0;  // matched phones with center shift >= 0.1 s
  long misplaced_far = 0;   // ... >= 0.2 s

  double MismatchPct() const;
  double MisplaceNearPct() const;
  double MisplaceFarPct() const;
  double MismatchOrMisplacePct() const;

  EvalReport& operator+=(const EvalReport& other);
  bool operator==(const EvalReport&) const = default;
};

// "" and "_" are silence.
bool IsSilenceLabel(std::string_view label);

// Throws prak::Error when the reference is empty after silence stripping.
EvalReport Score(const std::vector<TimedPhone>& ref,
                 const std::vector<TimedPhone>& hyp,
                 const ScoreOptions& opts = {});

std::vector<TimedPhone> TierPhones(const TgTier& tier);
// Reads the phone tier of a TextGrid, or an alignment dump
// (`label<TAB>start<TAB>end` lines) when the file is not a TextGrid.
std::vector<TimedPhone> LoadTimedPhones(const std::string& path,
                                        const std::string& phone_tier = "phone");
std::vector<TimedPhone> ParseAlignmentDump(std::string_view text,
                                           const std::string& name);

// Plain-text table with the four percentage rows, and the same as JSON.
std::string FormatReport(const EvalReport& report, const ScoreOptions& opts);
std::string ReportJson(const EvalReport& report, const ScoreOptions& opts);

}  // namespace prak

#endif  // PRAK_EVAL_H_
