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

#ifndef PRAK_DECODER_H_
#define PRAK_DECODER_H_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "prak/g2p.h"
#include "prak/phoneset.h"

namespace prak {

inline constexpr double kFrameShiftSeconds = 0.010;

// One emitting HMM state.
struct GraphState {
  char32_t code = 0;
  int phone = 0;       // inventory index
  int slot = 0;        // sausage slot
  int alt = 0;         // alternative within the slot
  int pos = 0;         // phone position within the alternative
  bool self_loop = true;
};

// Sausage expanded into emitting states; empty alternatives are contracted
// into direct edges. States are stored in topological order.
struct AlignGraph {
  std::vector<GraphState> states;
  std::vector<std::vector<int>> next;  // successors, self-loops excluded
  std::vector<std::vector<int>> prev;
  std::vector<int> start;
  std::vector<int> end;
  std::vector<bool> is_start;
  std::vector<bool> is_end;

  // Per sausage slot: word index (-1 for boundaries) and the index of its
  // empty alternative (-1 if none).
  std::vector<int> slot_word;
  std::vector<int> slot_empty_alt;
  std::vector<std::string> words;

  // Fewest frames any complete path needs.
  int MinFrames() const;
  // Distinct phone-level paths start -> end (saturating).
  size_t PathCount() const;
};

// `min_duration` emitting states per phone, chained, the last with a
// self-loop.
AlignGraph BuildGraph(const PronSausage& sausage, const PhoneInventory& inv,
                      int min_duration = 1);

struct AlignedPhone {
  char32_t code = 0;
  int phone = 0;  // inventory index
  int start = 0;  // frames, half open
  int end = 0;
  double start_s = 0;
  double end_s = 0;
  int slot = -1;  // -1 when not taken from a sausage (bootstrap)
  int alt = -1;
  int pos = -1;
};

struct WordSpan {
  std::string word;
  int word_index = 0;
  int start = 0;
  int end = 0;
  double start_s = 0;
  double end_s = 0;
};

struct Alignment {
  int num_frames = 0;
  std::vector<AlignedPhone> phones;
  std::vector<WordSpan> words;
  // Per sausage slot, the alternative the path went through.
  std::vector<int> chosen;

  // Inventory index of every frame.
  std::vector<int> FrameLabels() const;
  PhoneString Phones() const;
};

// Normalizes frame counts to a distribution; every probability is at least
// `floor` (then renormalized). All-zero counts give the uniform prior.
std::vector<double> PriorFromCounts(const std::vector<double>& counts,
                                    double floor = 1e-5);

struct ViterbiOptions {
  double alpha = 1.0;  // prior exponent
  double frame_shift = kFrameShiftSeconds;
};

struct ViterbiResult {
  Alignment alignment;
  double score = 0;
};

// Best path under sum_t [log p(phone_t | x_t) - alpha * log prior(phone_t)].
// `log_posteriors` is T x P; `priors` may be empty (no adjustment).
ViterbiResult Viterbi(const Eigen::MatrixXf& log_posteriors,
                      const AlignGraph& graph,
                      const std::vector<double>& priors,
                      const ViterbiOptions& opts = {});

// Score of a given frame labelling under the Viterbi objective.
double PathScore(const Eigen::MatrixXf& log_posteriors,
                 const std::vector<int>& labels,
                 const std::vector<double>& priors, double alpha);

// Initial segmentation: 3 frames per phone between equal silences.
Alignment BootstrapAlignment(const PhoneString& phones, int num_frames,
                             const PhoneInventory& inv,
                             double frame_shift = kFrameShiftSeconds);

// `phone<TAB>start_s<TAB>end_s` lines, IPA symbols.
std::string DumpAlignment(const Alignment& a, const PhoneInventory& inv);

}  // namespace prak

#endif  // PRAK_DECODER_H_
