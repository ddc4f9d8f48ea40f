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

#ifndef PRAK_TEXTNORM_H_
#define PRAK_TEXTNORM_H_

#include <string>
#include <string_view>
#include <vector>

namespace prak {

// Tokenized transcript: lowercase NFC words with their byte offsets in the
// raw input.
struct CleanText {
  std::vector<std::string> words;
  std::vector<size_t> offsets;

  // Words joined by single spaces; clean_text(Render()) reproduces words.
  std::string Render() const;
};

// Decodes, normalizes and tokenizes a raw transcript. Strips BOMs, folds
// line endings, composes NFD to NFC, lowercases, splits on whitespace and on
// punctuation/symbols (Unicode P* and S*). Digits are rejected so numbers
// get spelled out by the user instead of silently misaligned.
CleanText CleanTranscript(std::string_view raw);

// NFC + lowercase for a single token (used for rule files).
std::string NormalizeToken(std::string_view text);

struct ExceptionRule {
  std::u32string pattern;
  std::vector<std::u32string> replacements;
  int order = 0;  // position in the rule file
};

// Longest-match replacement rules: "pattern replacement1 replacement2 ...".
class ExceptionRuleSet {
 public:
  ExceptionRuleSet() = default;

  static ExceptionRuleSet Parse(std::string_view text,
                                const std::string& source = "<rules>");
  static ExceptionRuleSet Load(const std::string& path);

  void Add(std::string_view pattern, const std::vector<std::string>& reps);

  bool empty() const { return rules_.empty(); }
  size_t size() const { return rules_.size(); }
  // Sorted by descending pattern length, then by file order.
  const std::vector<ExceptionRule>& rules() const { return rules_; }

 private:
  std::vector<ExceptionRule> rules_;
};

// Spelling variants of `word`. The longest matching pattern (leftmost, then
// earliest rule on ties) is replaced by each of its replacements; replaced
// text is not matched again, but the remaining prefix and suffix are
// expanded recursively. A word without matches is returned unchanged.
std::vector<std::string> ApplyExceptions(std::string_view word,
                                         const ExceptionRuleSet& rules);

}  // namespace prak

#endif  // PRAK_TEXTNORM_H_
