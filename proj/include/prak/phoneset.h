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

#ifndef PRAK_PHONESET_H_
#define PRAK_PHONESET_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prak {

// Phone strings use one char32_t code per phone.
using PhoneString = std::u32string;

enum class PhoneClass {
  kVowel,
  kDiphthong,
  kObstruent,
  kSonorant,
  kGlottalStop,
  kSilence,
};

enum class Voicing { kVoiced, kVoiceless, kNone };

enum PlaceFlag : unsigned {
  kPalatalCandidate = 1u << 0,
  kVelarTrigger = 1u << 1,
  kNasal = 1u << 2,
};

struct Phone {
  char32_t code = 0;
  std::string sampa;
  std::string ipa;
  PhoneClass klass = PhoneClass::kVowel;
  Voicing voicing = Voicing::kNone;
  std::optional<char32_t> voicing_partner;
  unsigned flags = 0;

  bool Has(PlaceFlag f) const { return (flags & f) != 0; }
  bool IsVocalic() const {
    return klass == PhoneClass::kVowel || klass == PhoneClass::kDiphthong;
  }
  bool operator==(const Phone&) const = default;
};

// Ordered phone table. A phone's position is also its acoustic model output
// index, so the order of the data file matters.
class PhoneInventory {
 public:
  // Validates the table invariants; throws prak::Error on violation.
  explicit PhoneInventory(std::vector<Phone> phones);

  // The built-in 44-phone Czech inventory (data/phones.tsv).
  static const PhoneInventory& Default();
  static PhoneInventory Parse(std::string_view tsv,
                              const std::string& source = "<inventory>");
  static PhoneInventory Load(const std::string& path);

  size_t size() const { return phones_.size(); }
  const std::vector<Phone>& phones() const { return phones_; }
  const Phone& at(size_t index) const { return phones_.at(index); }

  bool Contains(char32_t code) const { return index_.count(code) != 0; }
  // Throws prak::Error for unknown codes.
  const Phone& Get(char32_t code) const;
  int IndexOf(char32_t code) const;

  char32_t silence() const { return silence_; }
  char32_t glottal_stop() const { return glottal_stop_; }

  std::string ToSampa(std::u32string_view seq) const;
  std::string ToIpa(std::u32string_view seq) const;
  std::optional<char32_t> VoicingPartner(char32_t code) const;
  std::optional<char32_t> FromSampa(std::string_view sampa) const;

  // Throws if any code is unknown; the message names the character and its
  // position in the sequence.
  void Validate(std::u32string_view seq) const;

  // FNV-1a over the ordered codes and SAMPA labels. Stored in model files to
  // reject decoding with a different phone indexing.
  uint64_t Digest() const;

  std::string ToTsv() const;

 private:
  std::vector<Phone> phones_;
  std::unordered_map<char32_t, int> index_;
  std::unordered_map<std::string, char32_t> sampa_index_;
  char32_t silence_ = 0;
  char32_t glottal_stop_ = 0;
};

}  // namespace prak

#endif  // PRAK_PHONESET_H_
