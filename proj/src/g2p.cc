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

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

using Arc = BackwardFst::Arc;

constexpr size_t kMaxVariants = 4096;

PhoneString One(char32_t c) { return PhoneString(1, c); }

void RequireCodes(const PhoneInventory& inv, std::u32string_view codes,
                  std::string_view who) {
  for (char32_t c : codes) {
    if (!inv.Contains(c)) {
      throw Error(std::string(who) + " needs phone '" + U32ToUtf8(c) +
                  "' which is missing from the inventory");
    }
  }
}

// Rewrites "m j e" to "m ň e". The base transcription already spells
// bě/pě/vě/fě as C+j+e and mě as m+ň+e; this stage gives the same result for
// phone strings that reach the cascade by other routes.
class LabialEFst : public BackwardFst {
 public:
  explicit LabialEFst(const PhoneInventory& inv) {
    RequireCodes(inv, U"mjeň", name());
  }
  std::string_view name() const override { return "labial-e"; }
  int num_states() const override { return kCount; }
  int initial() const override { return kNeutral; }

  std::vector<Arc> Step(int state, char32_t sym) const override {
    if (state == kPlainJ && sym == U'm') return {};
    if (state == kJAsNj && sym != U'm') return {};
    if (sym == U'e') return {{kSeenE, One(sym)}};
    if (sym == U'j' && state == kSeenE) {
      return {{kPlainJ, One(U'j')}, {kJAsNj, One(U'ň')}};
    }
    return {{kNeutral, One(sym)}};
  }

 private:
  // kPlainJ: kept "j", left neighbour must not be m.
  // kJAsNj: turned "j" into "ň", left neighbour must be m.
  enum { kNeutral, kSeenE, kPlainJ, kJAsNj, kCount };
};

// Regressive voicing assimilation of obstruent clusters. The state carries
// the voicing imposed by the right context. v and ř undergo but do not
// trigger assimilation; ř additionally devoices after a voiceless obstruent
// (verified one step later through the check states).
class VoicingFst : public BackwardFst {
 public:
  explicit VoicingFst(const PhoneInventory& inv) : inv_(inv) {
    RequireCodes(inv, U"vřŘ", name());
  }
  std::string_view name() const override { return "voicing"; }
  int num_states() const override { return kCount; }
  // Utterance end is a pause: final devoicing.
  int initial() const override { return kVoiceless; }

  std::vector<Arc> Step(int state, char32_t sym) const override {
    if (state == kCheckVoicedLeft || state == kCheckVoicelessLeft) {
      bool want_voiceless = state == kCheckVoicelessLeft;
      if (sym == kWordBoundary) {
        if (want_voiceless) return {};
        return StepPlain(kNeutral, sym);
      }
      std::vector<Arc> out;
      for (Arc& a : StepPlain(kNeutral, sym)) {
        if (IsVoicelessObstruent(a.output.front()) == want_voiceless) {
          out.push_back(std::move(a));
        }
      }
      return out;
    }
    return StepPlain(state, sym);
  }

 private:
  enum {
    kNeutral,
    kVoiced,
    kVoiceless,
    kEither,  // left of a boundary before a vowel or sonorant
    kCheckVoicedLeft,
    kCheckVoicelessLeft,
    kCount
  };

  bool IsVoicelessObstruent(char32_t c) const {
    const Phone& p = inv_.Get(c);
    return p.klass == PhoneClass::kObstruent &&
           p.voicing == Voicing::kVoiceless;
  }

  std::vector<Arc> StepPlain(int state, char32_t sym) const {
    if (sym == kWordBoundary) {
      int next = state == kNeutral ? kEither : state;
      return {{next, One(sym)}};
    }
    const Phone& p = inv_.Get(sym);
    if (p.klass == PhoneClass::kSilence ||
        p.klass == PhoneClass::kGlottalStop) {
      return {{kVoiceless, One(sym)}};
    }
    if (p.klass != PhoneClass::kObstruent || !p.voicing_partner) {
      return {{kNeutral, One(sym)}};
    }
    const char32_t partner = *p.voicing_partner;
    const bool voiced = p.voicing == Voicing::kVoiced;
    const char32_t vd = voiced ? sym : partner;
    const char32_t vl = voiced ? partner : sym;
    const bool weak_trigger = vd == U'v' || vd == U'ř';
    auto next_for = [&](char32_t out) {
      if (out == vl) return static_cast<int>(kVoiceless);
      return static_cast<int>(weak_trigger ? kNeutral : kVoiced);
    };

    // Progressive devoicing after a voiceless obstruent only when no
    // obstruent follows; otherwise ř takes the voicing on its right.
    if (vd == U'ř' && (state == kNeutral || state == kEither)) {
      Arc keep_voiced{kCheckVoicedLeft, One(vd)};
      Arc devoiced{state == kEither ? kVoiceless : kCheckVoicelessLeft,
                   One(vl)};
      if (voiced) return {keep_voiced, devoiced};
      return {devoiced, keep_voiced};
    }
    switch (state) {
      case kVoiceless:
        return {{kVoiceless, One(vl)}};
      case kVoiced:
        return {{next_for(vd), One(vd)}};
      case kEither:
        return {{next_for(sym), One(sym)}, {next_for(partner), One(partner)}};
      default:
        return {{next_for(sym), One(sym)}};
    }
  }

  const PhoneInventory& inv_;
};

// d/t/n before ď/ť/ň: optionally palatalized, and a palatalized phone
// spreads the option further left ("ntní" -> ntňí / nťňí / ňťňí).
class PalatalFst : public BackwardFst {
 public:
  explicit PalatalFst(const PhoneInventory& inv) {
    RequireCodes(inv, U"dtnďťň", name());
  }
  std::string_view name() const override { return "dtn-palatal"; }
  int num_states() const override { return 2; }
  int initial() const override { return kNeutral; }

  std::vector<Arc> Step(int state, char32_t sym) const override {
    switch (sym) {
      case U'ď':
      case U'ť':
      case U'ň':
        return {{kPalatal, One(sym)}};
      case U'd':
      case U't':
      case U'n':
        if (state == kPalatal) {
          return {{kNeutral, One(sym)}, {kPalatal, One(Palatalize(sym))}};
        }
        return {{kNeutral, One(sym)}};
      default:
        return {{kNeutral, One(sym)}};
    }
  }

  static char32_t Palatalize(char32_t c) {
    return c == U'd' ? U'ď' : c == U't' ? U'ť' : U'ň';
  }

 private:
  enum { kNeutral, kPalatal };
};

// n -> ŋ before k/g inside a word.
class VelarFst : public BackwardFst {
 public:
  explicit VelarFst(const PhoneInventory& inv) : inv_(inv) {
    RequireCodes(inv, U"nN", name());
  }
  std::string_view name() const override { return "velar"; }
  int num_states() const override { return 2; }
  int initial() const override { return kNeutral; }

  std::vector<Arc> Step(int state, char32_t sym) const override {
    if (sym == kWordBoundary) return {{kNeutral, One(sym)}};
    if (inv_.Get(sym).Has(kVelarTrigger)) return {{kVelar, One(sym)}};
    if (sym == U'n' && state == kVelar) return {{kNeutral, One(U'N')}};
    return {{kNeutral, One(sym)}};
  }

 private:
  enum { kNeutral, kVelar };
  const PhoneInventory& inv_;
};

// Optional glottal stop before a word-initial vowel and optional j in an
// i/í + vowel hiatus. The glottal stop is emitted together with the boundary
// symbol so that it lands at the start of the following word.
class GlottalFst : public BackwardFst {
 public:
  explicit GlottalFst(const PhoneInventory& inv) : inv_(inv) {
    RequireCodes(inv, U"iíj", name());
  }
  std::string_view name() const override { return "glottal-j"; }
  int num_states() const override { return 2; }
  int initial() const override { return kNeutral; }

  std::vector<Arc> Step(int state, char32_t sym) const override {
    if (sym == kWordBoundary) {
      if (state == kSeenVowel) {
        PhoneString with_stop{kWordBoundary, inv_.glottal_stop()};
        return {{kNeutral, One(sym)}, {kNeutral, with_stop}};
      }
      return {{kNeutral, One(sym)}};
    }
    if (inv_.Get(sym).IsVocalic()) {
      if (state == kSeenVowel && (sym == U'i' || sym == U'í')) {
        return {{kSeenVowel, One(sym)}, {kSeenVowel, PhoneString{sym, U'j'}}};
      }
      return {{kSeenVowel, One(sym)}};
    }
    return {{kNeutral, One(sym)}};
  }

 private:
  enum { kNeutral, kSeenVowel };
  const PhoneInventory& inv_;
};

struct Run {
  int state;
  PhoneString output;
};

// All (end state, output) pairs for reading `input` right to left from
// `state`.
std::vector<Run> RunBackward(const BackwardFst& fst, int state,
                             std::u32string_view input) {
  std::vector<Run> frontier{{state, {}}};
  for (size_t i = input.size(); i-- > 0;) {
    std::vector<Run> next;
    for (const Run& r : frontier) {
      for (Arc& a : fst.Step(r.state, input[i])) {
        Run n{a.next, std::move(a.output)};
        n.output += r.output;
        bool dup = std::any_of(next.begin(), next.end(), [&](const Run& x) {
          return x.state == n.state && x.output == n.output;
        });
        if (!dup) next.push_back(std::move(n));
      }
    }
    frontier = std::move(next);
    if (frontier.size() > kMaxVariants) {
      throw Error("pronunciation variant explosion in transducer '" +
                  std::string(fst.name()) + "'");
    }
  }
  return frontier;
}

template <typename T>
void PushUnique(std::vector<T>* v, T x) {
  if (std::find(v->begin(), v->end(), x) == v->end()) {
    v->push_back(std::move(x));
  }
}

using WorkSlot = std::vector<PhoneString>;

// Applies one backward transducer to a sausage whose alternatives may
// contain boundary symbols. The lattice has one column per slot boundary and
// one node per live transducer state. Columns with a single surviving state
// split the result into independent slots; slots in between are merged and
// their paths enumerated.
std::vector<WorkSlot> ApplyToSausage(const BackwardFst& fst,
                                     const std::vector<WorkSlot>& in) {
  struct Edge {
    int to;  // node in the column to the left
    PhoneString label;
  };
  struct Node {
    int column;
    int state;
    std::vector<Edge> edges;
    bool alive = false;
  };
  const int n = static_cast<int>(in.size());
  std::vector<Node> nodes;
  std::vector<std::vector<int>> columns(n + 1);
  auto node_for = [&](int column, int state) {
    for (int id : columns[column]) {
      if (nodes[id].state == state) return id;
    }
    nodes.push_back(Node{column, state, {}});
    columns[column].push_back(static_cast<int>(nodes.size()) - 1);
    return static_cast<int>(nodes.size()) - 1;
  };

  node_for(n, fst.initial());
  for (int k = n - 1; k >= 0; --k) {
    // columns[k + 1] is complete; iterate by index since nodes may grow.
    for (size_t j = 0; j < columns[k + 1].size(); ++j) {
      int from = columns[k + 1][j];
      for (const PhoneString& alt : in[k]) {
        for (Run& r : RunBackward(fst, nodes[from].state, alt)) {
          int to = node_for(k, r.state);
          nodes[from].edges.push_back(Edge{to, std::move(r.output)});
        }
      }
    }
  }

  for (int id : columns[0]) nodes[id].alive = true;
  for (int k = 1; k <= n; ++k) {
    for (int id : columns[k]) {
      for (const Edge& e : nodes[id].edges) {
        if (nodes[e.to].alive) {
          nodes[id].alive = true;
          break;
        }
      }
    }
  }
  if (!nodes[columns[n][0]].alive) {
    throw Error("transducer '" + std::string(fst.name()) +
                "' rejected the utterance");
  }

  auto alive_in = [&](int column) {
    std::vector<int> out;
    for (int id : columns[column]) {
      if (nodes[id].alive) out.push_back(id);
    }
    return out;
  };

  std::vector<int> cuts{n};
  for (int k = n - 1; k > 0; --k) {
    if (alive_in(k).size() == 1) cuts.push_back(k);
  }
  cuts.push_back(0);

  std::vector<WorkSlot> out_reversed;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    const int right = cuts[c];
    const int left = cuts[c + 1];
    WorkSlot merged;
    // Depth-first from the right cut; labels are prepended.
    std::vector<std::pair<int, PhoneString>> stack;
    std::vector<std::pair<int, PhoneString>> order;
    auto dfs = [&](auto&& self, int id, const PhoneString& suffix) -> void {
      if (nodes[id].column == left) {
        PushUnique(&merged, suffix);
        if (merged.size() > kMaxVariants) {
          throw Error("too many pronunciation variants in one span");
        }
        return;
      }
      for (const Edge& e : nodes[id].edges) {
        if (!nodes[e.to].alive) continue;
        self(self, e.to, e.label + suffix);
      }
    };
    for (int id : alive_in(right)) dfs(dfs, id, PhoneString());
    out_reversed.push_back(std::move(merged));
  }
  std::reverse(out_reversed.begin(), out_reversed.end());
  return out_reversed;
}

std::vector<PhoneString> SplitAtBoundaries(const PhoneString& s) {
  std::vector<PhoneString> parts(1);
  for (char32_t c : s) {
    if (c == kWordBoundary) {
      parts.emplace_back();
    } else {
      parts.back().push_back(c);
    }
  }
  return parts;
}

}  // namespace

PhoneString PronSausage::CanonicalPath() const {
  PhoneString out;
  for (const auto& s : slots) {
    if (!s.alternatives.empty()) out += s.alternatives.front();
  }
  return out;
}

size_t PronSausage::PathCount() const {
  size_t count = 1;
  for (const auto& s : slots) {
    size_t k = s.alternatives.size();
    if (k != 0 && count > std::numeric_limits<size_t>::max() / k) {
      return std::numeric_limits<size_t>::max();
    }
    count *= k;
  }
  return count;
}

std::vector<PhoneString> Transduce(const BackwardFst& fst,
                                   std::u32string_view input) {
  std::vector<PhoneString> out;
  for (Run& r : RunBackward(fst, fst.initial(), input)) {
    PushUnique(&out, std::move(r.output));
  }
  return out;
}

std::unique_ptr<BackwardFst> MakeLabialEFst(const PhoneInventory& inv) {
  return std::make_unique<LabialEFst>(inv);
}
std::unique_ptr<BackwardFst> MakeVoicingFst(const PhoneInventory& inv) {
  return std::make_unique<VoicingFst>(inv);
}
std::unique_ptr<BackwardFst> MakePalatalFst(const PhoneInventory& inv) {
  return std::make_unique<PalatalFst>(inv);
}
std::unique_ptr<BackwardFst> MakeVelarFst(const PhoneInventory& inv) {
  return std::make_unique<VelarFst>(inv);
}
std::unique_ptr<BackwardFst> MakeGlottalFst(const PhoneInventory& inv) {
  return std::make_unique<GlottalFst>(inv);
}

G2p::G2p(const PhoneInventory& inventory) : inventory_(inventory) {
  if (inventory_.Contains(kWordBoundary)) {
    throw Error("phone code '#' is reserved for word boundaries");
  }
  RequireCodes(inventory_, U"aábcčdďeéfghxiíjklmnňoópřrsštťuúvzžOAEŽ",
               "base transcription");
  // Order: near-orthographic rewrite, voicing, place assimilation,
  // velarization, then insertions (they need final consonant identities).
  fsts_.push_back(MakeLabialEFst(inventory_));
  fsts_.push_back(MakeVoicingFst(inventory_));
  fsts_.push_back(MakePalatalFst(inventory_));
  fsts_.push_back(MakeVelarFst(inventory_));
  fsts_.push_back(MakeGlottalFst(inventory_));
}

PhoneString G2p::BaseTranscribe(std::string_view word) const {
  const std::u32string w = Utf8ToU32(word);
  PhoneString out;
  auto palatalize_last = [&out] {
    if (out.empty()) return;
    char32_t& c = out.back();
    if (c == U'd' || c == U't' || c == U'n') c = PalatalFst::Palatalize(c);
  };
  for (size_t i = 0; i < w.size(); ++i) {
    const char32_t c = w[i];
    const char32_t next = i + 1 < w.size() ? w[i + 1] : 0;
    const char32_t prev = i > 0 ? w[i - 1] : 0;
    switch (c) {
      case U'a':
        if (next == U'u') {
          out += U'A';
          ++i;
        } else {
          out += U'a';
        }
        break;
      case U'e':
        if (next == U'u') {
          out += U'E';
          ++i;
        } else {
          out += U'e';
        }
        break;
      case U'o':
        if (next == U'u') {
          out += U'O';
          ++i;
        } else {
          out += U'o';
        }
        break;
      case U'c':
        if (next == U'h') {
          out += U'x';
          ++i;
        } else {
          out += U'c';
        }
        break;
      case U'd':
        if (next == U'ž') {
          out += U'Ž';
          ++i;
        } else {
          out += U'd';
        }
        break;
      case U'ě':
        if (prev == U'b' || prev == U'p' || prev == U'v' || prev == U'f') {
          out += U"je";
        } else if (prev == U'm') {
          out += U"ňe";
        } else {
          if (prev == U'd' || prev == U't' || prev == U'n') palatalize_last();
          out += U'e';
        }
        break;
      case U'i':
      case U'í':
        if (prev == U'd' || prev == U't' || prev == U'n') palatalize_last();
        out += c;
        break;
      case U'y': out += U'i'; break;
      case U'ý': out += U'í'; break;
      case U'ů': out += U'ú'; break;
      case U'x': out += U"ks"; break;
      case U'q': out += U"kv"; break;
      case U'w': out += U'v'; break;
      case U'-': break;  // morpheme break written in exception rules
      case U'á': case U'é': case U'ó': case U'ú':
      case U'b': case U'č': case U'ď': case U'f': case U'g': case U'h':
      case U'j': case U'k': case U'l': case U'm': case U'n': case U'ň':
      case U'p': case U'r': case U'ř': case U's': case U'š': case U't':
      case U'ť': case U'u': case U'v': case U'z': case U'ž':
        out += c;
        break;
      default:
        throw Error("cannot transcribe character '" + U32ToUtf8(c) +
                    "' in word '" + std::string(word) + "'");
    }
  }
  return out;
}

PronSausage G2p::ApplyBackwardFsts(
    const std::vector<std::vector<PhoneString>>& word_variants,
    const std::vector<std::string>& words) const {
  if (word_variants.size() != words.size()) {
    throw Error("word variant list does not match the word list");
  }
  const PhoneString boundary = One(kWordBoundary);
  std::vector<WorkSlot> work{{boundary}};
  for (const auto& variants : word_variants) {
    if (variants.empty()) throw Error("word without pronunciation");
    for (const auto& v : variants) inventory_.Validate(v);
    work.push_back(variants);
    work.push_back({boundary});
  }
  for (const auto& fst : fsts_) work = ApplyToSausage(*fst, work);

  // Project back onto words: text between the i-th and (i+1)-th boundary
  // symbol belongs to word i. Constraints across boundaries are dropped.
  const size_t num_words = words.size();
  std::vector<std::vector<std::vector<PhoneString>>> parts(num_words + 2);
  size_t region = 0;
  for (const WorkSlot& slot : work) {
    std::vector<std::vector<PhoneString>> pieces;
    for (const PhoneString& alt : slot) pieces.push_back(SplitAtBoundaries(alt));
    const size_t m = pieces.front().size();
    for (size_t j = 0; j < m; ++j) {
      std::vector<PhoneString> options;
      for (const auto& p : pieces) {
        if (p.size() != m) throw Error("inconsistent word boundaries");
        PushUnique(&options, p[j]);
      }
      if (!(options.size() == 1 && options[0].empty())) {
        parts[region + j].push_back(std::move(options));
      }
    }
    region += m - 1;
  }

  PronSausage out;
  out.words = words;
  const SausageSlot pause{{PhoneString(), One(inventory_.silence())}, -1};
  out.slots.push_back(pause);
  for (size_t w = 0; w < num_words; ++w) {
    std::vector<PhoneString> variants{PhoneString()};
    for (const auto& options : parts[w + 1]) {
      std::vector<PhoneString> next;
      for (const auto& prefix : variants) {
        for (const auto& o : options) PushUnique(&next, prefix + o);
      }
      if (next.size() > kMaxVariants) {
        throw Error("too many pronunciation variants for word '" + words[w] +
                    "'");
      }
      variants = std::move(next);
    }
    out.slots.push_back(SausageSlot{std::move(variants), static_cast<int>(w)});
    out.slots.push_back(pause);
  }
  return out;
}

PronSausage G2p::Generate(const CleanText& text,
                          const ExceptionRuleSet& rules) const {
  std::vector<std::vector<PhoneString>> variants;
  for (const std::string& word : text.words) {
    std::vector<PhoneString> v;
    for (const std::string& spelling : ApplyExceptions(word, rules)) {
      PushUnique(&v, BaseTranscribe(spelling));
    }
    variants.push_back(std::move(v));
  }
  return ApplyBackwardFsts(variants, text.words);
}

std::string FormatPronunciation(const PronSausage& sausage,
                                const PhoneInventory& inv, bool sampa) {
  if (sausage.words.empty()) return "";
  auto render = [&](const PhoneString& s) {
    return sampa ? inv.ToSampa(s) : inv.ToIpa(s);
  };
  std::string out;
  for (const SausageSlot& slot : sausage.slots) {
    std::string line;
    if (slot.IsBoundary()) {
      line = "[";
      bool first = true;
      for (const auto& alt : slot.alternatives) {
        if (alt.empty()) continue;
        if (!first) line += "/";
        line += render(alt);
        first = false;
      }
      line += "]";
    } else {
      line = sausage.words[slot.word] + "\t";
      for (size_t i = 0; i < slot.alternatives.size(); ++i) {
        if (i) line += "/";
        line += render(slot.alternatives[i]);
      }
    }
    out += line + "\n";
  }
  return out;
}

std::string DumpSausage(const PronSausage& sausage) {
  std::string out;
  for (const SausageSlot& slot : sausage.slots) {
    for (size_t i = 0; i < slot.alternatives.size(); ++i) {
      if (i) out += "\t";
      out += slot.alternatives[i].empty() ? "∅"
                                          : U32ToUtf8(slot.alternatives[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace prak
