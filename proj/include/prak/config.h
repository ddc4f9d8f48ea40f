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

#ifndef PRAK_CONFIG_H_
#define PRAK_CONFIG_H_

#include <string>
#include <string_view>

#include "prak/trainer.h"

namespace prak {

// Effective settings shared by all commands. Defaults match the library
// defaults of each module.
struct Config {
  MfccOptions mfcc;
  std::vector<int> hidden_dims = {120, 120};
  uint64_t am_seed = 0;  // 0: use the trainer seed

  // decoder
  double alpha = 1.0;
  int min_duration = 1;
  double prior_floor = 1e-5;

  // trainer
  int epochs = 10;
  double change_threshold = 0.001;
  int passes_per_epoch = 1;
  uint64_t seed = 0;
  OptimizerOptions optimizer;

  // paths; empty means built-in inventory, no rules, no model
  std::string inventory;
  std::string rules;
  std::string model;

  int jobs = 0;

  TrainerOptions ToTrainerOptions() const;
};

// Flat INI: [mfcc], [am], [decoder], [trainer], [paths], [run] sections of
// `key = value` lines. Unknown sections or keys and unparsable values throw
// prak::UsageError naming the key. Keys not given keep their current value in
// `base`.
Config ParseConfig(std::string_view text, const std::string& name = "<config>",
                   const Config& base = {});
Config LoadConfig(const std::string& path, const Config& base = {});

// The same INI format; ParseConfig(FormatConfig(c)) == c.
std::string FormatConfig(const Config& config);

}  // namespace prak

#endif  // PRAK_CONFIG_H_
