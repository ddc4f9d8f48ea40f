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

#ifndef PRAK_TRAINER_H_
#define PRAK_TRAINER_H_

#include <functional>
#include <string>
#include <vector>

#include "prak/am.h"
#include "prak/decoder.h"
#include "prak/frontend.h"
#include "prak/g2p.h"
#include "prak/textnorm.h"

namespace prak {

struct ManifestEntry {
  std::string id;     // audio basename without extension
  std::string audio;  // resolved path
  std::string text;   // raw transcript
};

enum class ManifestFormat { kAuto, kTsv, kDirPairs };

struct CorpusManifest {
  ManifestFormat format = ManifestFormat::kTsv;
  std::vector<ManifestEntry> entries;
  // Entries dropped during ingestion (missing audio, unpaired files).
  std::vector<std::string> report;
};

// TSV: a header naming `path` and `sentence` columns (CommonVoice layout),
// audio resolved against the TSV's directory or its `clips/` subdirectory.
// Dir-pairs: `<name>.wav` + `<name>.txt` in one directory. kAuto picks
// dir-pairs for directories. Throws when no usable entry remains.
CorpusManifest IngestManifest(const std::string& path,
                              ManifestFormat format = ManifestFormat::kAuto);

// Acoustic material and pronunciation lattice of one training utterance.
struct TrainUtterance {
  std::string id;
  FeatureMatrix features;
  SpeakerVector speaker;
  PronSausage sausage;
};

struct TrainerOptions {
  int epochs = 10;
  double change_threshold = 0.001;  // stop below this frame-label change
  int passes_per_epoch = 1;
  uint64_t seed = 0;
  OptimizerOptions optimizer;
  AmConfig am;  // output_dim is overwritten with the inventory size
  double alpha = 1.0;
  double prior_floor = 1e-5;
  int min_duration = 1;
  int jobs = 0;  // 0: hardware concurrency
  MfccOptions mfcc;
  // Checkpoints, log and final model go here; empty disables all output.
  std::string out_dir;
  bool resume = false;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0;
  double change_fraction = 0;
  std::vector<double> counts;  // frames per phone after realignment
};

struct TrainState {
  int epoch = 0;
  std::vector<std::string> ids;
  std::vector<Alignment> alignments;
  std::vector<double> priors;          // recount of `alignments`
  std::vector<double> realign_priors;  // priors that produced `alignments`
  std::vector<EpochRecord> history;
};

struct TrainResult {
  AcousticModel model;
  TrainState state;
  std::vector<std::string> skipped;  // ids excluded with a warning
};

// Called after every epoch with the state just reached.
using EpochCallback = std::function<void(const TrainState&, const AcousticNet&)>;

// Per-phone frame totals over the alignments.
std::vector<double> CountFrames(const std::vector<Alignment>& alignments,
                                size_t num_phones);
// Floored, normalized frame totals.
std::vector<double> RecountPriors(const std::vector<Alignment>& alignments,
                                  size_t num_phones, double floor = 1e-5);

// Loads audio, computes features and the pronunciation sausage.
std::vector<TrainUtterance> PrepareCorpus(const CorpusManifest& manifest,
                                          const G2p& g2p,
                                          const ExceptionRuleSet& rules,
                                          const MfccOptions& mfcc, int jobs,
                                          std::vector<std::string>* report);

// Alternating realignment / gradient descent.
TrainResult Train(const std::vector<TrainUtterance>& corpus,
                  const PhoneInventory& inv, const TrainerOptions& opts,
                  const EpochCallback& on_epoch = nullptr);

// Viterbi realignment of one utterance with a trained network.
ViterbiResult AlignUtterance(const AcousticNet& net,
                             const FeatureMatrix& features,
                             const SpeakerVector& speaker,
                             const AlignGraph& graph,
                             const std::vector<double>& priors,
                             const ViterbiOptions& opts = {});

// Runs fn(i) for i in [0, n) on up to `jobs` threads (0: all cores).
// Rethrows the first exception.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn);

std::string CheckpointDir(const std::string& out_dir, int epoch);
// Reads a checkpoint's state.json.
TrainState LoadTrainState(const std::string& dir, const PhoneInventory& inv);

}  // namespace prak

#endif  // PRAK_TRAINER_H_
