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

#include "prak/g2p.h"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {
namespace {

const PhoneInventory& Inv() { return PhoneInventory::Default(); }

const G2p& Engine() {
  static const G2p g2p;
  return g2p;
}

PronSausage Gen(const std::string& text, const ExceptionRuleSet& rules = {}) {
  return Engine().Generate(CleanTranscript(text), rules);
}

std::vector<std::string> Ipa(const std::vector<PhoneString>& alts) {
  std::vector<std::string> out;
  for (const auto& a : alts) out.push_back(Inv().ToIpa(a));
  return out;
}

const SausageSlot& WordSlot(const PronSausage& s, int word) {
  for (const auto& slot : s.slots) {
    if (slot.word == word) return slot;
  }
  throw std::logic_error("no slot");
}

struct GoldenEntry {
  std::string word;
  std::vector<std::string> variants;
};

std::vector<GoldenEntry> Golden() {
  std::istringstream in(ReadFile(std::string(PRAK_SOURCE_DIR) + "/tests/data/g2p_golden.tsv"));
  std::vector<GoldenEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    GoldenEntry e{line.substr(0, tab), {}};
    std::istringstream vs(line.substr(tab + 1));
    std::string v;
    while (std::getline(vs, v, '/')) e.variants.push_back(v);
    out.push_back(std::move(e));
  }
  return out;
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

TEST(BaseTranscribe, Examples) {
  EXPECT_EQ(Engine().BaseTranscribe("vošingtnu"), U"vošingtnu");
  EXPECT_EQ(Engine().BaseTranscribe("chata"), U"xata");
  EXPECT_EQ(Engine().BaseTranscribe("dítě"), U"ďíťe");
  EXPECT_EQ(Engine().BaseTranscribe("dům"), U"dúm");
  EXPECT_EQ(Engine().BaseTranscribe("mýty"), U"míti");
  EXPECT_EQ(Engine().BaseTranscribe("taxi"), U"taksi");
  EXPECT_EQ(Engine().BaseTranscribe("qa"), U"kva");
  EXPECT_EQ(Engine().BaseTranscribe("wolf"), U"volf");
  EXPECT_EQ(Engine().BaseTranscribe("mouka"), U"mOka");
  EXPECT_EQ(Engine().BaseTranscribe("pauza"), U"pAza");
  EXPECT_EQ(Engine().BaseTranscribe("euro"), U"Ero");
  EXPECT_EQ(Engine().BaseTranscribe("džus"), U"Žus");
  EXPECT_EQ(Engine().BaseTranscribe("obě"), U"obje");
  EXPECT_EQ(Engine().BaseTranscribe("město"), U"mňesto");
  EXPECT_EQ(Engine().BaseTranscribe("nic"), U"ňic");
  EXPECT_EQ(Engine().BaseTranscribe(""), U"");
}

TEST(BaseTranscribe, RejectsUnmappable) {
  try {
    Engine().BaseTranscribe("naïve");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("ï"), std::string::npos) << msg;
    EXPECT_NE(msg.find("naïve"), std::string::npos) << msg;
  }
}

TEST(Generate, WorkedExample) {
  ExceptionRuleSet rules;
  rules.Add("washington", {"vošingtn"});
  const PronSausage s = Gen("Washingtonu", rules);
  EXPECT_EQ(Inv().ToIpa(s.CanonicalPath()), "vošiŋktnu");
  EXPECT_EQ(s.words, std::vector<std::string>{"washingtonu"});
  // Shipped rule file carries the same entry.
  const auto shipped =
      ExceptionRuleSet::Load(std::string(PRAK_SOURCE_DIR) + "/data/exceptions.txt");
  EXPECT_EQ(Inv().ToIpa(Gen("Washingtonu", shipped).CanonicalPath()), "vošiŋktnu");
  EXPECT_EQ(Ipa(WordSlot(Gen("neumí", shipped), 0).alternatives),
            std::vector<std::string>{"nɛumiː"});
}

TEST(Generate, EmptyText) {
  const PronSausage s = Gen("");
  ASSERT_EQ(s.slots.size(), 1u);
  EXPECT_EQ(s.slots[0].alternatives, (std::vector<PhoneString>{U"", U"_"}));
  EXPECT_TRUE(s.words.empty());
  EXPECT_EQ(FormatPronunciation(s, Inv(), false), "");
}

TEST(Generate, Obe) {
  const PronSausage s = Gen("obě");
  EXPECT_EQ(s.CanonicalPath(), U"obje");
  EXPECT_EQ(Ipa(WordSlot(s, 0).alternatives), (std::vector<std::string>{"objɛ", "ʔobjɛ"}));
}

TEST(Generate, RVoicing) {
  EXPECT_EQ(Ipa(WordSlot(Gen("tři"), 0).alternatives), std::vector<std::string>{"tř̊i"});
  EXPECT_EQ(Ipa(WordSlot(Gen("hřbet"), 0).alternatives), std::vector<std::string>{"ɦřbɛt"});
  EXPECT_EQ(Ipa(WordSlot(Gen("křtít"), 0).alternatives), std::vector<std::string>{"kř̊ciːt"});
  // Voiced final cluster variant before a sonorant: ř follows it.
  EXPECT_EQ(Ipa(WordSlot(Gen("křx l"), 0).alternatives),
            (std::vector<std::string>{"kř̊ks", "křgz"}));
}

TEST(Generate, CrossWordVoicing) {
  // Before a vowel/sonorant-initial word both variants stay.
  EXPECT_EQ(Ipa(WordSlot(Gen("led je"), 0).alternatives),
            (std::vector<std::string>{"lɛd", "lɛt"}));
  EXPECT_EQ(Ipa(WordSlot(Gen("led taky"), 0).alternatives), std::vector<std::string>{"lɛt"});
  EXPECT_EQ(Ipa(WordSlot(Gen("led byl"), 0).alternatives), std::vector<std::string>{"lɛd"});
  EXPECT_EQ(Ipa(WordSlot(Gen("v okně"), 0).alternatives),
            (std::vector<std::string>{"v", "f"}));
}

TEST(Generate, SlotStructure) {
  const PronSausage s = Gen("Ahoj, světe!");
  ASSERT_EQ(s.slots.size(), 5u);
  for (size_t i = 0; i < s.slots.size(); i += 2) {
    EXPECT_TRUE(s.slots[i].IsBoundary());
    EXPECT_EQ(s.slots[i].alternatives, (std::vector<PhoneString>{U"", U"_"}));
  }
  EXPECT_EQ(s.slots[1].word, 0);
  EXPECT_EQ(s.slots[3].word, 1);
  EXPECT_EQ(FormatPronunciation(s, Inv(), false),
            "[_]\nahoj\taɦoj/ʔaɦoj\n[_]\nsvěte\tsvjɛtɛ\n[_]\n");
  EXPECT_EQ(FormatPronunciation(s, Inv(), true),
            "[_]\nahoj\tah\\oj/?ah\\oj\n[_]\nsvěte\tsvjete\n[_]\n");
}

TEST(Golden, FiftyWords) {
  const auto golden = Golden();
  ASSERT_EQ(golden.size(), 50u);
  for (const auto& g : golden) {
    const PronSausage s = Gen(g.word);
    ASSERT_EQ(s.words.size(), 1u) << g.word;
    EXPECT_EQ(Ipa(WordSlot(s, 0).alternatives), g.variants) << g.word;
  }
}

TEST(Golden, VariantClasses) {
  int ntni = 0;
  int vowel_initial = 0;
  int labial_e = 0;
  for (const auto& g : Golden()) {
    const std::set<std::string> got(g.variants.begin(), g.variants.end());
    if (g.word.find("ntní") != std::string::npos) {
      ++ntni;
      // Exactly ntɲiː / ncɲiː / ɲcɲiː over the same stem.
      ASSERT_EQ(g.variants.size(), 3u) << g.word;
      const std::string stem = g.variants[0].substr(0, g.variants[0].size() - std::string("ntɲiː").size());
      EXPECT_EQ(got, (std::set<std::string>{stem + "ntɲiː", stem + "ncɲiː", stem + "ɲcɲiː"}))
          << g.word;
    }
    const std::u32string w = Utf8ToU32(g.word);
    if (std::u32string(U"aáeéiíoóuú").find(w[0]) != std::u32string::npos) {
      ++vowel_initial;
      ASSERT_EQ(g.variants.size(), 2u) << g.word;
      EXPECT_EQ(g.variants[1], "ʔ" + g.variants[0]) << g.word;
    }
    for (const auto& [spelled, ipa] : std::vector<std::pair<std::string, std::string>>{
             {"bě", "bjɛ"}, {"pě", "pjɛ"}, {"vě", "vjɛ"}, {"fě", "fjɛ"}, {"mě", "mɲɛ"}}) {
      if (g.word.find(spelled) == std::string::npos) continue;
      ++labial_e;
      for (const auto& v : g.variants) {
        // zpěv devoices nothing inside the cluster; v stays before ě.
        EXPECT_NE(v.find(ipa), std::string::npos) << g.word << " " << v;
      }
    }
  }
  EXPECT_EQ(ntni, 5);
  EXPECT_GE(vowel_initial, 8);
  EXPECT_GE(labial_e, 10);
}

// Random utterances over the Czech alphabet.
std::string RandomText(std::mt19937_64& rng) {
  static const std::vector<std::string> letters = {
      "a", "á", "b", "c", "č", "d", "ď", "e", "é", "ě", "f", "g", "h", "ch", "i", "í", "j",
      "k", "l", "m", "n", "ň", "o", "ó", "p", "r", "ř", "s", "š", "t", "ť", "u", "ú", "ů",
      "v", "x", "y", "ý", "z", "ž", "au", "ou", "eu", "nt", "nk", "ng", "dž"};
  std::uniform_int_distribution<int> words(1, 4);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<size_t> pick(0, letters.size() - 1);
  std::string out;
  const int n = words(rng);
  for (int w = 0; w < n; ++w) {
    if (w) out += ' ';
    const int l = len(rng);
    for (int i = 0; i < l; ++i) out += letters[pick(rng)];
  }
  return out;
}

bool IsObstruent(char32_t c) { return Inv().Get(c).klass == PhoneClass::kObstruent; }

TEST(Properties, SausageInvariants) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1500; ++trial) {
    const std::string text = RandomText(rng);
    const PronSausage s = Gen(text);
    size_t product = 1;
    ASSERT_TRUE(s.slots.front().IsBoundary());
    ASSERT_TRUE(s.slots.back().IsBoundary());
    for (size_t k = 0; k < s.slots.size(); ++k) {
      const SausageSlot& slot = s.slots[k];
      ASSERT_EQ(slot.IsBoundary(), k % 2 == 0) << text;
      product *= slot.alternatives.size();
      if (slot.IsBoundary()) {
        ASSERT_EQ(slot.alternatives, (std::vector<PhoneString>{U"", U"_"}));
        continue;
      }
      ASSERT_FALSE(slot.alternatives.empty());
      const std::set<PhoneString> distinct(slot.alternatives.begin(), slot.alternatives.end());
      ASSERT_EQ(distinct.size(), slot.alternatives.size()) << text;
      for (const PhoneString& alt : slot.alternatives) {
        ASSERT_FALSE(alt.empty()) << text;
        Inv().Validate(alt);
        for (size_t i = 0; i < alt.size(); ++i) {
          const char32_t c = alt[i];
          const char32_t next = i + 1 < alt.size() ? alt[i + 1] : 0;
          // Velar: no n before k/g, ŋ only before k/g.
          if (c == U'n') ASSERT_TRUE(next != U'k' && next != U'g') << text;
          if (c == U'N') ASSERT_TRUE(next == U'k' || next == U'g') << text;
          // Glottal stop only word-initially before a vowel, never alone.
          if (c == U'?') {
            ASSERT_EQ(i, 0u) << text;
            ASSERT_TRUE(next != 0 && Inv().Get(next).IsVocalic()) << text;
            ASSERT_TRUE(std::count(slot.alternatives.begin(), slot.alternatives.end(),
                                   alt.substr(1)) == 1)
                << text;
          }
          // Voicing: obstruent pairs agree unless the right one is a
          // non-triggering v or ř.
          if (next != 0 && IsObstruent(c) && IsObstruent(next) && next != U'v' &&
              next != U'ř' && next != U'Ř') {
            ASSERT_EQ(Inv().Get(c).voicing, Inv().Get(next).voicing)
                << text << " -> " << U32ToUtf8(alt);
          }
        }
      }
    }
    ASSERT_EQ(s.PathCount(), product);
    // Determinism.
    const PronSausage again = Gen(text);
    ASSERT_EQ(again.slots.size(), s.slots.size());
    for (size_t k = 0; k < s.slots.size(); ++k) {
      ASSERT_EQ(again.slots[k].alternatives, s.slots[k].alternatives);
    }
  }
}

// Forward pass over the reversed input, built only from Step().
std::set<PhoneString> ReversedForward(const BackwardFst& fst, const PhoneString& input) {
  PhoneString reversed(input.rbegin(), input.rend());
  std::set<PhoneString> out;
  std::function<void(size_t, int, PhoneString)> walk = [&](size_t i, int state,
                                                           PhoneString acc) {
    if (i == reversed.size()) {
      out.insert(PhoneString(acc.rbegin(), acc.rend()));
      return;
    }
    for (const auto& arc : fst.Step(state, reversed[i])) {
      walk(i + 1, arc.next, acc + PhoneString(arc.output.rbegin(), arc.output.rend()));
    }
  };
  walk(0, fst.initial(), {});
  return out;
}

TEST(Properties, BackwardEquivalenceAndTotality) {
  std::mt19937_64 rng(5);
  PhoneString alphabet;
  for (const Phone& p : Inv().phones()) {
    if (p.code != Inv().silence() && p.code != Inv().glottal_stop()) alphabet += p.code;
  }
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 7);
  for (const auto& fst : Engine().fsts()) {
    for (int s = 0; s < fst->num_states(); ++s) {
      for (char32_t c : alphabet + kWordBoundary) EXPECT_NO_THROW(fst->Step(s, c));
    }
    for (int trial = 0; trial < 400; ++trial) {
      PhoneString input(1, kWordBoundary);
      const int n = len(rng);
      for (int i = 0; i < n; ++i) input += alphabet[pick(rng)];
      input += kWordBoundary;
      const auto got = Transduce(*fst, input);
      ASSERT_FALSE(got.empty()) << fst->name() << " " << U32ToUtf8(input);
      ASSERT_EQ(std::set<PhoneString>(got.begin(), got.end()), ReversedForward(*fst, input))
          << fst->name();
    }
  }
}

TEST(Properties, CascadeOrder) {
  std::vector<std::string> names;
  for (const auto& fst : Engine().fsts()) names.emplace_back(fst->name());
  ASSERT_EQ(names.size(), 5u);
  EXPECT_EQ(names[0], MakeLabialEFst(Inv())->name());
  EXPECT_EQ(names[1], MakeVoicingFst(Inv())->name());
  EXPECT_EQ(names[2], MakePalatalFst(Inv())->name());
  EXPECT_EQ(names[3], MakeVelarFst(Inv())->name());
  EXPECT_EQ(names[4], MakeGlottalFst(Inv())->name());
}

TEST(Format, SausageDump) {
  const PronSausage s = Gen("ano");
  EXPECT_EQ(DumpSausage(s), "∅\t_\nano\t?ano\n∅\t_\n");
}

}  // namespace
}  // namespace prak
