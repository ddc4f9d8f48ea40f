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

#include "prak/textnorm.h"

#include <unicode/normalizer2.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <sstream>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

enum class CharRole { kWord, kSeparator, kDrop, kDigit };

CharRole Classify(UChar32 c) {
  if (c == '\r' || c == '\n' || c == '\t' || u_isUWhiteSpace(c)) {
    return CharRole::kSeparator;
  }
  int8_t cat = u_charType(c);
  switch (cat) {
    case U_DECIMAL_DIGIT_NUMBER:
    case U_LETTER_NUMBER:
    case U_OTHER_NUMBER:
      return CharRole::kDigit;
    case U_FORMAT_CHAR:  // BOM, zero-width joiners, soft hyphen
    case U_CONTROL_CHAR:
    case U_UNASSIGNED:
    case U_PRIVATE_USE_CHAR:
    case U_SURROGATE:
      return CharRole::kDrop;
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
    case U_SPACE_SEPARATOR:
    case U_LINE_SEPARATOR:
    case U_PARAGRAPH_SEPARATOR:
      return CharRole::kSeparator;
    default:
      return CharRole::kWord;  // letters and combining marks
  }
}

const icu::Normalizer2& Nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  return *nfc;
}

}  // namespace

std::string NormalizeToken(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString composed = Nfc().normalize(u, status);
  composed.toLower(icu::Locale("cs"));
  icu::UnicodeString out = Nfc().normalize(composed, status);
  if (U_FAILURE(status)) throw Error("Unicode normalization failed");
  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

std::string CleanText::Render() const {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

CleanText CleanTranscript(std::string_view raw) {
  size_t start = 0;
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") start = 3;
  const auto* bytes = reinterpret_cast<const uint8_t*>(raw.data());
  const auto length = static_cast<int32_t>(raw.size());

  CleanText out;
  std::string current;
  size_t current_offset = 0;
  int line = 1;
  auto flush = [&] {
    if (current.empty()) return;
    std::string word = NormalizeToken(current);
    if (!word.empty()) {
      out.words.push_back(std::move(word));
      out.offsets.push_back(current_offset);
    }
    current.clear();
  };

  int32_t i = static_cast<int32_t>(start);
  while (i < length) {
    int32_t at = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {
      throw Error("input is not valid UTF-8 (byte offset " +
                  std::to_string(at) + ")");
    }
    switch (Classify(c)) {
      case CharRole::kWord:
        if (current.empty()) current_offset = static_cast<size_t>(at);
        current.append(raw.substr(at, i - at));
        break;
      case CharRole::kSeparator:
        if (c == '\n') ++line;
        flush();
        break;
      case CharRole::kDrop:
        break;
      case CharRole::kDigit:
        throw Error("line " + std::to_string(line) +
                    ": digits are not supported, please spell out numbers "
                    "as words (found '" + U32ToUtf8(static_cast<char32_t>(c)) +
                    "')");
    }
  }
  flush();
  return out;
}

ExceptionRuleSet ExceptionRuleSet::Parse(std::string_view text,
                                         const std::string& source) {
  ExceptionRuleSet set;
  std::istringstream in{DecodeTextFile(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string pattern, rep;
    if (!(fields >> pattern)) continue;
    std::vector<std::string> reps;
    while (fields >> rep) reps.push_back(rep);
    if (reps.empty()) {
      throw Error(source + ":" + std::to_string(lineno) + ": rule '" +
                  pattern + "' has no replacement");
    }
    set.Add(pattern, reps);
  }
  return set;
}

ExceptionRuleSet ExceptionRuleSet::Load(const std::string& path) {
  return Parse(ReadFile(path), path);
}

void ExceptionRuleSet::Add(std::string_view pattern,
                           const std::vector<std::string>& reps) {
  ExceptionRule rule;
  rule.pattern = Utf8ToU32(NormalizeToken(pattern));
  if (rule.pattern.empty()) throw Error("empty exception pattern");
  if (reps.empty()) throw Error("exception rule without replacement");
  for (const auto& r : reps) {
    rule.replacements.push_back(Utf8ToU32(NormalizeToken(r)));
  }
  rule.order = static_cast<int>(rules_.size());
  rules_.push_back(std::move(rule));
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const ExceptionRule& a, const ExceptionRule& b) {
                     if (a.pattern.size() != b.pattern.size()) {
                       return a.pattern.size() > b.pattern.size();
                     }
                     return a.order < b.order;
                   });
}

namespace {

std::vector<std::u32string> Expand(const std::u32string& s,
                                   const ExceptionRuleSet& rules) {
  if (s.empty()) return {s};
  const ExceptionRule* best = nullptr;
  size_t best_pos = 0;
  for (const ExceptionRule& r : rules.rules()) {
    if (best && r.pattern.size() < best->pattern.size()) break;
    size_t pos = s.find(r.pattern);
    if (pos == std::u32string::npos) continue;
    // Equal length: leftmost wins, then rule order (already sorted).
    if (!best || pos < best_pos) {
      best = &r;
      best_pos = pos;
    }
  }
  if (!best) return {s};
  auto prefixes = Expand(s.substr(0, best_pos), rules);
  auto suffixes = Expand(s.substr(best_pos + best->pattern.size()), rules);
  std::vector<std::u32string> out;
  for (const auto& p : prefixes) {
    for (const auto& r : best->replacements) {
      for (const auto& q : suffixes) out.push_back(p + r + q);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> ApplyExceptions(std::string_view word,
                                         const ExceptionRuleSet& rules) {
  std::vector<std::string> out;
  for (const auto& v : Expand(Utf8ToU32(word), rules)) {
    out.push_back(U32ToUtf8(v));
  }
  return out;
}

}  // namespace prak
