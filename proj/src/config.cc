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

#include "prak/config.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

namespace pt = boost::property_tree;

std::string Trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(d)) {
    throw UsageError("config key " + key + ": '" + v + "' is not a number");
  }
  return d;
}

long long ToInt(const std::string& key, const std::string& v) {
  size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw UsageError("config key " + key + ": '" + v + "' is not an integer");
  }
  return i;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key " + key + ": '" + v + "' is not a boolean");
}

std::string FormatDouble(double v) {
  std::ostringstream o;
  o.precision(std::numeric_limits<double>::max_digits10);
  o << v;
  return o.str();
}

std::string JoinDims(const std::vector<int>& dims) {
  std::string out;
  for (size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
  return out;
}

struct Key {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename T>
Key DoubleKey(T Config::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            c.*field = ToDouble(k, v);
          },
          [field](const Config& c) { return FormatDouble(c.*field); }};
}

Key PositiveInt(int Config::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            const long long i = ToInt(k, v);
            if (i < 1 || i > std::numeric_limits<int>::max()) {
              throw UsageError("config key " + k + " must be a positive integer");
            }
            c.*field = static_cast<int>(i);
          },
          [field](const Config& c) { return std::to_string(c.*field); }};
}

Key Seed(uint64_t Config::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            const long long i = ToInt(k, v);
            if (i < 0) throw UsageError("config key " + k + " must be non-negative");
            c.*field = static_cast<uint64_t>(i);
          },
          [field](const Config& c) { return std::to_string(c.*field); }};
}

Key PathKey(std::string Config::*field) {
  return {[field](Config& c, const std::string&, const std::string& v) { c.*field = v; },
          [field](const Config& c) { return c.*field; }};
}

template <typename T>
Key MfccDouble(T MfccOptions::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            c.mfcc.*field = ToDouble(k, v);
          },
          [field](const Config& c) { return FormatDouble(c.mfcc.*field); }};
}

Key MfccInt(int MfccOptions::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            const long long i = ToInt(k, v);
            if (i < 1 || i > 4096) throw UsageError("config key " + k + " out of range");
            c.mfcc.*field = static_cast<int>(i);
          },
          [field](const Config& c) { return std::to_string(c.mfcc.*field); }};
}

Key OptDouble(double OptimizerOptions::*field) {
  return {[field](Config& c, const std::string& k, const std::string& v) {
            c.optimizer.*field = ToDouble(k, v);
          },
          [field](const Config& c) { return FormatDouble(c.optimizer.*field); }};
}

// Ordered so FormatConfig groups sections.
const std::vector<std::pair<std::string, Key>>& Schema() {
  static const auto* schema = new std::vector<std::pair<std::string, Key>>{
      {"mfcc.frame_length", MfccDouble(&MfccOptions::frame_length)},
      {"mfcc.frame_shift", MfccDouble(&MfccOptions::frame_shift)},
      {"mfcc.preemphasis", MfccDouble(&MfccOptions::preemphasis)},
      {"mfcc.num_mel_bins", MfccInt(&MfccOptions::num_mel_bins)},
      {"mfcc.num_ceps", MfccInt(&MfccOptions::num_ceps)},
      {"mfcc.low_freq", MfccDouble(&MfccOptions::low_freq)},
      {"mfcc.high_freq", MfccDouble(&MfccOptions::high_freq)},
      {"mfcc.cepstral_lifter", MfccDouble(&MfccOptions::cepstral_lifter)},
      {"mfcc.dither",
       {[](Config& c, const std::string& k, const std::string& v) {
          c.mfcc.dither = ToBool(k, v);
        },
        [](const Config& c) { return std::string(c.mfcc.dither ? "true" : "false"); }}},
      {"mfcc.dither_value", MfccDouble(&MfccOptions::dither_value)},
      {"mfcc.dither_seed",
       {[](Config& c, const std::string& k, const std::string& v) {
          const long long i = ToInt(k, v);
          if (i < 0) throw UsageError("config key " + k + " must be non-negative");
          c.mfcc.dither_seed = static_cast<uint64_t>(i);
        },
        [](const Config& c) { return std::to_string(c.mfcc.dither_seed); }}},
      {"am.hidden_dims",
       {[](Config& c, const std::string& k, const std::string& v) {
          std::vector<int> dims;
          std::stringstream in(v);
          std::string item;
          while (std::getline(in, item, ',')) {
            const long long d = ToInt(k, Trim(item));
            if (d < 1 || d > 100000) throw UsageError("config key " + k + " out of range");
            dims.push_back(static_cast<int>(d));
          }
          c.hidden_dims = dims;
        },
        [](const Config& c) { return JoinDims(c.hidden_dims); }}},
      {"am.seed", Seed(&Config::am_seed)},
      {"decoder.alpha", DoubleKey(&Config::alpha)},
      {"decoder.min_duration", PositiveInt(&Config::min_duration)},
      {"decoder.prior_floor", DoubleKey(&Config::prior_floor)},
      {"trainer.epochs",
       {[](Config& c, const std::string& k, const std::string& v) {
          const long long i = ToInt(k, v);
          if (i < 0 || i > 1000000) throw UsageError("config key " + k + " out of range");
          c.epochs = static_cast<int>(i);
        },
        [](const Config& c) { return std::to_string(c.epochs); }}},
      {"trainer.change_threshold", DoubleKey(&Config::change_threshold)},
      {"trainer.passes_per_epoch", PositiveInt(&Config::passes_per_epoch)},
      {"trainer.seed", Seed(&Config::seed)},
      {"trainer.optimizer",
       {[](Config& c, const std::string& k, const std::string& v) {
          if (v == "adam") {
            c.optimizer.kind = OptimizerKind::kAdam;
          } else if (v == "sgd") {
            c.optimizer.kind = OptimizerKind::kSgd;
          } else {
            throw UsageError("config key " + k + ": expected adam or sgd, got '" + v + "'");
          }
        },
        [](const Config& c) {
          return std::string(c.optimizer.kind == OptimizerKind::kAdam ? "adam" : "sgd");
        }}},
      {"trainer.learning_rate", OptDouble(&OptimizerOptions::learning_rate)},
      {"trainer.beta1", OptDouble(&OptimizerOptions::beta1)},
      {"trainer.beta2", OptDouble(&OptimizerOptions::beta2)},
      {"trainer.epsilon", OptDouble(&OptimizerOptions::epsilon)},
      {"trainer.batch_size",
       {[](Config& c, const std::string& k, const std::string& v) {
          const long long i = ToInt(k, v);
          if (i < 1 || i > 1 << 24) throw UsageError("config key " + k + " out of range");
          c.optimizer.batch_size = static_cast<int>(i);
        },
        [](const Config& c) { return std::to_string(c.optimizer.batch_size); }}},
      {"paths.inventory", PathKey(&Config::inventory)},
      {"paths.rules", PathKey(&Config::rules)},
      {"paths.model", PathKey(&Config::model)},
      {"run.jobs",
       {[](Config& c, const std::string& k, const std::string& v) {
          const long long i = ToInt(k, v);
          if (i < 0 || i > 4096) throw UsageError("config key " + k + " out of range");
          c.jobs = static_cast<int>(i);
        },
        [](const Config& c) { return std::to_string(c.jobs); }}},
  };
  return *schema;
}

const Key* FindKey(const std::string& full) {
  for (const auto& [name, key] : Schema()) {
    if (name == full) return &key;
  }
  return nullptr;
}

void CheckRanges(const Config& c, const std::string& name) {
  auto fail = [&](const std::string& what) { throw UsageError(name + ": " + what); };
  if (c.mfcc.frame_length <= 0 || c.mfcc.frame_shift <= 0) fail("frame sizes must be positive");
  if (c.mfcc.low_freq < 0 || c.mfcc.high_freq <= c.mfcc.low_freq) fail("bad mel frequency range");
  if (c.mfcc.num_ceps > c.mfcc.num_mel_bins) fail("num_ceps exceeds num_mel_bins");
  if (c.hidden_dims.empty()) fail("am.hidden_dims is empty");
  if (c.alpha < 0) fail("decoder.alpha must be non-negative");
  if (c.prior_floor <= 0 || c.prior_floor >= 1) fail("decoder.prior_floor must be in (0, 1)");
  if (c.change_threshold < 0) fail("trainer.change_threshold must be non-negative");
  if (c.optimizer.learning_rate <= 0) fail("trainer.learning_rate must be positive");
}

}  // namespace

TrainerOptions Config::ToTrainerOptions() const {
  TrainerOptions t;
  t.epochs = epochs;
  t.change_threshold = change_threshold;
  t.passes_per_epoch = passes_per_epoch;
  t.seed = seed;
  t.optimizer = optimizer;
  t.am.hidden_dims = hidden_dims;
  t.am.seed = am_seed;
  t.alpha = alpha;
  t.prior_floor = prior_floor;
  t.min_duration = min_duration;
  t.jobs = jobs;
  t.mfcc = mfcc;
  return t;
}

Config ParseConfig(std::string_view text, const std::string& name, const Config& base) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config c = base;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw UsageError(name + ": key '" + section + "' outside of a section");
    }
    const bool known = std::any_of(Schema().begin(), Schema().end(), [&](const auto& k) {
      return k.first.rfind(section + ".", 0) == 0;
    });
    if (!known) throw UsageError(name + ": unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const Key* k = FindKey(full);
      if (k == nullptr) throw UsageError(name + ": unknown config key '" + full + "'");
      k->set(c, full, Trim(value.data()));
    }
  }
  CheckRanges(c, name);
  return c;
}

Config LoadConfig(const std::string& path, const Config& base) {
  if (!std::filesystem::is_regular_file(path)) {
    throw UsageError("config file not found: " + path);
  }
  return ParseConfig(DecodeTextFile(ReadFile(path)), path, base);
}

std::string FormatConfig(const Config& config) {
  std::string out;
  std::string section;
  for (const auto& [name, key] : Schema()) {
    const std::string s = name.substr(0, name.find('.'));
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += name.substr(s.size() + 1) + " = " + key.get(config) + "\n";
  }
  return out;
}

}  // namespace prak
