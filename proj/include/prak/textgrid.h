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

#ifndef PRAK_TEXTGRID_H_
#define PRAK_TEXTGRID_H_

#include <string>
#include <string_view>
#include <vector>

#include "prak/decoder.h"
#include "prak/phoneset.h"

namespace prak {

struct TgInterval {
  double xmin = 0;
  double xmax = 0;
  std::string text;  // UTF-8; empty for silence

  bool operator==(const TgInterval&) const = default;
};

struct TgTier {
  std::string name;
  double xmin = 0;
  double xmax = 0;
  std::vector<TgInterval> intervals;

  bool operator==(const TgTier&) const = default;
};

struct TextGrid {
  double xmin = 0;
  double xmax = 0;
  std::vector<TgTier> tiers;

  bool operator==(const TextGrid&) const = default;

  // Throws if a tier does not tile [xmin, xmax] or a label is not UTF-8.
  void Validate() const;
  const TgTier* Find(std::string_view name) const;
};

// Same grid up to `tolerance` seconds on every time.
bool NearlyEqual(const TextGrid& a, const TextGrid& b, double tolerance = 1e-6);

// Praat full text format, UTF-8 without BOM. Validates first.
std::string FormatTextGrid(const TextGrid& grid);
void WriteTextGrid(const std::string& path, const TextGrid& grid);

// Full or short text format; UTF-8 (optional BOM) or UTF-16 with BOM; LF or
// CRLF. Structural errors name the line.
TextGrid ParseTextGrid(std::string_view bytes, const std::string& name = "");
TextGrid ReadTextGrid(const std::string& path);

struct GridOptions {
  std::string word_tier = "word";
  std::string phone_tier = "phone";
  bool sampa = true;  // phone labels in SAMPA, else IPA
};

// Word and phone tiers of an alignment. The last interval of each tier is
// stretched to `duration` when the audio outlasts the last frame.
TextGrid AlignmentToTextGrid(const Alignment& alignment,
                             const PhoneInventory& inv, double duration,
                             const GridOptions& opts = {});

}  // namespace prak

#endif  // PRAK_TEXTGRID_H_
