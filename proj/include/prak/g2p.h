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

#ifndef PRAK_G2P_H_
#define PRAK_G2P_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "prak/phoneset.h"
#include "prak/textnorm.h"

namespace prak {

// Symbol fed to the transducers between words and at both utterance edges.
// Never a phone code.
inline constexpr char32_t kWordBoundary = U'#';

struct SausageSlot {
  std::vector<PhoneString> alternatives;
  int word = -1;  // index into PronSausage::words, -1 for boundary slots

  bool IsBoundary() const { return word < 0; }
};

// Linear lattice of pronunciation alternatives. Word slots alternate with
// optional-silence boundary slots {"", silence}, starting and ending with a
// boundary slot.
struct PronSausage {
  std::vector<SausageSlot> slots;
  std::vector<std::string> words;

  // First alternative of every slot, concatenated.
  PhoneString CanonicalPath() const;
  // Product of the slot sizes (saturates at SIZE_MAX).
  size_t PathCount() const;
};

// Transducer run right to left over a phone string. Step() returns the
// transitions for one input symbol, preferred (least modified) arc first;
// outputs are written in left-to-right order. An empty result kills the
// branch, which lets a transducer guess a left context and verify it on the
// next step.
class BackwardFst {
 public:
  struct Arc {
    int next;
    PhoneString output;
  };

  virtual ~BackwardFst() = default;
  virtual std::string_view name() const = 0;
  virtual int num_states() const = 0;
  // State at the right edge of an utterance (an implied pause).
  virtual int initial() const = 0;
  virtual std::vector<Arc> Step(int state, char32_t symbol) const = 0;
};

// All transductions of `input` (boundary symbols allowed), in preference
// order, without duplicates.
std::vector<PhoneString> Transduce(const BackwardFst& fst,
                                   std::u32string_view input);

// Czech rule-based pronunciation generator.
class G2p {
 public:
  explicit G2p(const PhoneInventory& inventory = PhoneInventory::Default());
  G2p(const G2p&) = delete;
  G2p& operator=(const G2p&) = delete;

  // Letter-to-phone mapping of one cleaned lowercase word.
  PhoneString BaseTranscribe(std::string_view word) const;

  // Runs the transducer cascade over the utterance. `word_variants[i]` holds
  // the base transcriptions of the spelling variants of word i.
  PronSausage ApplyBackwardFsts(
      const std::vector<std::vector<PhoneString>>& word_variants,
      const std::vector<std::string>& words) const;

  // Exceptions -> base transcription -> transducers.
  PronSausage Generate(const CleanText& text,
                       const ExceptionRuleSet& rules) const;

  const PhoneInventory& inventory() const { return inventory_; }
  // Cascade in application order.
  const std::vector<std::unique_ptr<BackwardFst>>& fsts() const {
    return fsts_;
  }

 private:
  const PhoneInventory& inventory_;
  std::vector<std::unique_ptr<BackwardFst>> fsts_;
};

// Individual cascade stages, exposed for testing.
std::unique_ptr<BackwardFst> MakeLabialEFst(const PhoneInventory& inv);
std::unique_ptr<BackwardFst> MakeVoicingFst(const PhoneInventory& inv);
std::unique_ptr<BackwardFst> MakePalatalFst(const PhoneInventory& inv);
std::unique_ptr<BackwardFst> MakeVelarFst(const PhoneInventory& inv);
std::unique_ptr<BackwardFst> MakeGlottalFst(const PhoneInventory& inv);

// Human-readable listing: one line per word with IPA (or SAMPA) variants
// separated by '/', optional pauses as "[_]" lines. Empty for no words.
std::string FormatPronunciation(const PronSausage& sausage,
                                const PhoneInventory& inv, bool sampa);

// One slot per line, alternatives tab-separated in internal codes, "∅" for
// the empty alternative.
std::string DumpSausage(const PronSausage& sausage);

}  // namespace prak

#endif  // PRAK_G2P_H_
