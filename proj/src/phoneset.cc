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

#include "prak/phoneset.h"

#include <set>
#include <sstream>

#include "default_phones.h"
#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

char32_t SingleCode(const std::string& field, const std::string& where) {
  std::u32string u = Utf8ToU32(field);
  if (u.size() != 1) {
    throw Error(where + ": phone code must be one character, got '" + field +
                "'");
  }
  return u[0];
}

PhoneClass ParseClass(const std::string& s, const std::string& where) {
  if (s == "vowel") return PhoneClass::kVowel;
  if (s == "diphthong") return PhoneClass::kDiphthong;
  if (s == "obstruent") return PhoneClass::kObstruent;
  if (s == "sonorant") return PhoneClass::kSonorant;
  if (s == "glottal-stop") return PhoneClass::kGlottalStop;
  if (s == "silence") return PhoneClass::kSilence;
  throw Error(where + ": unknown phone class '" + s + "'");
}

const char* ClassName(PhoneClass k) {
  switch (k) {
    case PhoneClass::kVowel: return "vowel";
    case PhoneClass::kDiphthong: return "diphthong";
    case PhoneClass::kObstruent: return "obstruent";
    case PhoneClass::kSonorant: return "sonorant";
    case PhoneClass::kGlottalStop: return "glottal-stop";
    case PhoneClass::kSilence: return "silence";
  }
  return "?";
}

Voicing ParseVoicing(const std::string& s, const std::string& where) {
  if (s == "voiced") return Voicing::kVoiced;
  if (s == "voiceless") return Voicing::kVoiceless;
  if (s == "n/a") return Voicing::kNone;
  throw Error(where + ": unknown voicing '" + s + "'");
}

unsigned ParseFlags(const std::string& s, const std::string& where) {
  if (s == "-" || s.empty()) return 0;
  unsigned flags = 0;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "palatal-candidate") {
      flags |= kPalatalCandidate;
    } else if (item == "velar-trigger") {
      flags |= kVelarTrigger;
    } else if (item == "nasal") {
      flags |= kNasal;
    } else {
      throw Error(where + ": unknown place flag '" + item + "'");
    }
  }
  return flags;
}

}  // namespace

PhoneInventory::PhoneInventory(std::vector<Phone> phones)
    : phones_(std::move(phones)) {
  int silences = 0, glottals = 0;
  std::set<std::string> ipas;
  for (size_t i = 0; i < phones_.size(); ++i) {
    const Phone& p = phones_[i];
    std::string name = "phone '" + U32ToUtf8(p.code) + "'";
    if (!index_.emplace(p.code, static_cast<int>(i)).second) {
      throw Error("duplicate " + name + " in inventory");
    }
    if (p.sampa.empty() || !sampa_index_.emplace(p.sampa, p.code).second) {
      throw Error(name + " has an empty or duplicate SAMPA label");
    }
    if (p.ipa.empty() || !ipas.insert(p.ipa).second) {
      throw Error(name + " has an empty or duplicate IPA label");
    }
    if (p.klass == PhoneClass::kSilence) {
      ++silences;
      silence_ = p.code;
    }
    if (p.klass == PhoneClass::kGlottalStop) {
      ++glottals;
      glottal_stop_ = p.code;
    }
  }
  if (silences != 1 || glottals != 1) {
    throw Error("inventory needs exactly one silence and one glottal stop");
  }
  for (const Phone& p : phones_) {
    if (!p.voicing_partner) continue;
    std::string name = "phone '" + U32ToUtf8(p.code) + "'";
    auto it = index_.find(*p.voicing_partner);
    if (it == index_.end()) {
      throw Error(name + " has an unknown voicing partner");
    }
    const Phone& q = phones_[it->second];
    bool opposite =
        (p.voicing == Voicing::kVoiced && q.voicing == Voicing::kVoiceless) ||
        (p.voicing == Voicing::kVoiceless && q.voicing == Voicing::kVoiced);
    if (q.voicing_partner != p.code || !opposite || q.klass != p.klass ||
        q.flags != p.flags) {
      throw Error(name + " and its voicing partner must pair symmetrically "
                  "and differ only in voicing");
    }
  }
}

const PhoneInventory& PhoneInventory::Default() {
  static const PhoneInventory inv =
      Parse(internal::kDefaultPhonesTsv, "<built-in inventory>");
  return inv;
}

PhoneInventory PhoneInventory::Parse(std::string_view tsv,
                                     const std::string& source) {
  std::vector<Phone> phones;
  std::istringstream in{std::string(DecodeTextFile(tsv))};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string where = source + ":" + std::to_string(lineno);
    auto f = SplitTabs(line);
    if (f.size() != 7) {
      throw Error(where + ": expected 7 tab-separated fields, got " +
                  std::to_string(f.size()));
    }
    Phone p;
    p.code = SingleCode(f[0], where);
    p.sampa = f[1];
    p.ipa = f[2];
    p.klass = ParseClass(f[3], where);
    p.voicing = ParseVoicing(f[4], where);
    if (f[5] != "-") p.voicing_partner = SingleCode(f[5], where);
    p.flags = ParseFlags(f[6], where);
    phones.push_back(std::move(p));
  }
  return PhoneInventory(std::move(phones));
}

PhoneInventory PhoneInventory::Load(const std::string& path) {
  return Parse(ReadFile(path), path);
}

const Phone& PhoneInventory::Get(char32_t code) const {
  return phones_[IndexOf(code)];
}

int PhoneInventory::IndexOf(char32_t code) const {
  auto it = index_.find(code);
  if (it == index_.end()) {
    throw Error("unknown phone code '" + U32ToUtf8(code) + "'");
  }
  return it->second;
}

void PhoneInventory::Validate(std::u32string_view seq) const {
  for (size_t i = 0; i < seq.size(); ++i) {
    if (!Contains(seq[i])) {
      throw Error("unknown phone code '" + U32ToUtf8(seq[i]) +
                  "' at position " + std::to_string(i));
    }
  }
}

std::string PhoneInventory::ToSampa(std::u32string_view seq) const {
  Validate(seq);
  std::string out;
  for (char32_t c : seq) out += Get(c).sampa;
  return out;
}

std::string PhoneInventory::ToIpa(std::u32string_view seq) const {
  Validate(seq);
  std::string out;
  for (char32_t c : seq) out += Get(c).ipa;
  return out;
}

std::optional<char32_t> PhoneInventory::VoicingPartner(char32_t code) const {
  return Get(code).voicing_partner;
}

std::optional<char32_t> PhoneInventory::FromSampa(std::string_view s) const {
  auto it = sampa_index_.find(std::string(s));
  if (it == sampa_index_.end()) return std::nullopt;
  return it->second;
}

uint64_t PhoneInventory::Digest() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
    h ^= 0xFF;
    h *= 1099511628211ull;
  };
  for (const Phone& p : phones_) {
    mix(U32ToUtf8(p.code));
    mix(p.sampa);
  }
  return h;
}

std::string PhoneInventory::ToTsv() const {
  std::string out = "# code\tsampa\tipa\tklass\tvoicing\tpartner\tflags\n";
  for (const Phone& p : phones_) {
    out += U32ToUtf8(p.code) + "\t" + p.sampa + "\t" + p.ipa + "\t" +
           ClassName(p.klass) + "\t";
    out += p.voicing == Voicing::kVoiced      ? "voiced"
           : p.voicing == Voicing::kVoiceless ? "voiceless"
                                              : "n/a";
    out += "\t";
    out += p.voicing_partner ? U32ToUtf8(*p.voicing_partner) : "-";
    out += "\t";
    std::string flags;
    if (p.Has(kPalatalCandidate)) flags += "palatal-candidate,";
    if (p.Has(kVelarTrigger)) flags += "velar-trigger,";
    if (p.Has(kNasal)) flags += "nasal,";
    if (flags.empty()) {
      flags = "-";
    } else {
      flags.pop_back();
    }
    out += flags + "\n";
  }
  return out;
}

}  // namespace prak
