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

#ifndef PRAK_TESTS_SUPPORT_ORACLES_H_
#define PRAK_TESTS_SUPPORT_ORACLES_H_

#include <Eigen/Dense>

#include <random>
#include <set>
#include <vector>

#include "prak/am.h"
#include "prak/decoder.h"
#include "prak/g2p.h"

namespace prak::testing {

// Sausage from raw slots. A slot {"", "_"} is a boundary; every other slot
// is a word named w0, w1, ...
PronSausage MakeSausage(std::vector<std::vector<PhoneString>> slots);

// Row-normalized random log posteriors.
Eigen::MatrixXf RandomLogPosteriors(int frames, int num_phones, uint64_t seed);

// Every phone string the sausage can spell.
std::set<PhoneString> SausagePaths(const PronSausage& s);

// Best path score by enumerating every sausage path and every segmentation
// with segments of at least `min_dur` frames; -inf when none fits.
double BruteForceViterbiScore(const PronSausage& s, const Eigen::MatrixXf& log_post,
                              const PhoneInventory& inv, const std::vector<double>& priors,
                              double alpha, int min_dur);

// 1-3 slots of up to two alternatives over {a, m, ?, _, s}, with the longest
// path between 1 and `max_phones` phones.
PronSausage RandomShortSausage(std::mt19937_64& rng, int max_phones = 3);

// Random multi-word sausage with a ground-truth segmentation and posteriors
// that put 0.9 on the true phone of every frame.
struct SpanCase {
  PronSausage sausage;
  Eigen::MatrixXf log_post;
  std::vector<int> labels;  // inventory index per frame
};
SpanCase RandomSpanCase(std::mt19937_64& rng, const PhoneInventory& inv);

// Largest |analytic - numeric| / (|analytic| + |numeric|) over every weight
// and bias, numeric by central differences.
double MaxGradientRelError(ReluStack<double>* net, const ReluStack<double>::Matrix& x,
                           const std::vector<int>& y, double h = 1e-6);

}  // namespace prak::testing

#endif  // PRAK_TESTS_SUPPORT_ORACLES_H_
