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

#include "prak/trainer.h"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "prak/error.h"
#include "prak/utf8.h"
#include "support/synthetic.h"
#include "support/temp_dir.h"

namespace prak {
namespace {

namespace fs = std::filesystem;

using testing::TempDir;
using testing::WriteText;

void WriteTone(const std::string& path) {
  AudioBuffer a;
  a.samples.assign(8000, 0.1f);
  WriteWav(path, a);
}

TEST(Manifest, DirPairs) {
  TempDir dir;
  for (const char* n : {"a", "b"}) {
    WriteTone(dir / (std::string(n) + ".wav"));
    WriteText(dir / (std::string(n) + ".txt"), "máma");
  }
  WriteTone(dir / "lonely.wav");
  CorpusManifest m = IngestManifest(dir.path().string());
  EXPECT_EQ(m.format, ManifestFormat::kDirPairs);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].id, "a");
  EXPECT_EQ(m.entries[1].text, "máma");
  ASSERT_EQ(m.report.size(), 1u);
  EXPECT_NE(m.report[0].find("lonely.wav"), std::string::npos);
}

TEST(Manifest, TsvWithMissingFile) {
  TempDir dir;
  fs::create_directories(dir.path() / "clips");
  WriteTone(dir / "one.wav");
  WriteTone(dir / "clips/two.wav");
  WriteText(dir / "train.tsv",
            "client_id\tpath\tsentence\r\n"
            "x\tone.wav\tPrvní věta.\r\n"
            "x\tmissing.wav\tDruhá věta.\r\n"
            "x\ttwo.wav\tTřetí věta.\r\n");
  CorpusManifest m = IngestManifest(dir / "train.tsv");
  EXPECT_EQ(m.format, ManifestFormat::kTsv);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].text, "První věta.");
  EXPECT_EQ(m.entries[1].audio, (dir.path() / "clips" / "two.wav").string());
  ASSERT_EQ(m.report.size(), 1u);
  EXPECT_NE(m.report[0].find(":3:"), std::string::npos);
  EXPECT_NE(m.report[0].find("missing.wav"), std::string::npos);
}

TEST(Manifest, Errors) {
  TempDir dir;
  WriteText(dir / "empty.tsv", "");
  EXPECT_THROW(IngestManifest(dir / "empty.tsv"), Error);
  WriteText(dir / "header.tsv", "path\tsentence\n");
  EXPECT_THROW(IngestManifest(dir / "header.tsv"), Error);
  WriteText(dir / "nohdr.tsv", "file\ttext\n");
  EXPECT_THROW(IngestManifest(dir / "nohdr.tsv"), Error);
  WriteTone(dir / "ok.wav");
  WriteText(dir / "bad.tsv", "path\tsentence\nok.wav\tfine\njunk-without-tab\n");
  try {
    IngestManifest(dir / "bad.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.tsv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(IngestManifest(dir / "nope.tsv"), UsageError);
  TempDir empty_dir;
  EXPECT_THROW(IngestManifest(empty_dir.path().string()), Error);
}

Alignment Uniform(const PhoneInventory& inv, const std::u32string& phones,
                  int frames_each) {
  Alignment a;
  for (char32_t c : phones) {
    AlignedPhone p;
    p.code = c;
    p.phone = inv.IndexOf(c);
    p.start = a.num_frames;
    p.end = a.num_frames += frames_each;
    a.phones.push_back(p);
  }
  return a;
}

TEST(Priors, Recount) {
  const PhoneInventory& inv = PhoneInventory::Default();
  auto p = RecountPriors({Uniform(inv, U"_", 10)}, inv.size());
  EXPECT_NEAR(p[inv.IndexOf(U'_')], 1.0, 1e-3);
  EXPECT_NEAR(p[inv.IndexOf(U'a')], 1e-5, 1e-6);
  double sum = 0;
  for (double v : p) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);

  auto half = RecountPriors({Uniform(inv, U"am", 5)}, inv.size());
  EXPECT_NEAR(half[inv.IndexOf(U'a')], 0.5, 1e-3);
  EXPECT_NEAR(half[inv.IndexOf(U'm')], 0.5, 1e-3);
  EXPECT_EQ(RecountPriors({Uniform(inv, U"am", 5)}, inv.size()), half);
}

TEST(ParallelForTest, CoversAllAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  ParallelFor(hits.size(), 4, [&](size_t i) { hits[i]++; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(ParallelFor(100, 3,
                           [](size_t i) {
                             if (i == 50) throw Error("boom");
                           }),
               Error);
  ParallelFor(0, 2, [](size_t) { FAIL(); });
}

class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new std::vector<testing::SyntheticUtterance>(
        testing::MakeSyntheticCorpus(12, 5));
    utts_ = new std::vector<TrainUtterance>();
    for (const auto& u : *corpus_) utts_->push_back(testing::ToTrainUtterance(u));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete utts_;
  }

  TrainerOptions Options(int epochs) const {
    TrainerOptions o;
    o.epochs = epochs;
    o.change_threshold = 0;
    o.am.hidden_dims = {24};
    o.seed = 3;
    o.jobs = 2;
    return o;
  }

  PhoneInventory inv_ = testing::MiniInventory();
  static std::vector<testing::SyntheticUtterance>* corpus_;
  static std::vector<TrainUtterance>* utts_;
};

std::vector<testing::SyntheticUtterance>* TrainTest::corpus_ = nullptr;
std::vector<TrainUtterance>* TrainTest::utts_ = nullptr;

TEST_F(TrainTest, EpochZeroIsBootstrap) {
  TrainResult r = Train(*utts_, inv_, Options(0));
  ASSERT_EQ(r.state.alignments.size(), utts_->size());
  EXPECT_EQ(r.state.epoch, 0);
  for (size_t i = 0; i < utts_->size(); ++i) {
    Alignment want = BootstrapAlignment((*utts_)[i].sausage.CanonicalPath(),
                                        (*utts_)[i].features.num_frames(), inv_);
    EXPECT_EQ(r.state.alignments[i].FrameLabels(), want.FrameLabels());
    EXPECT_EQ(r.state.alignments[i].Phones(), want.Phones());
  }
}

TEST_F(TrainTest, ReproducibleAndRecordsHistory) {
  std::vector<std::vector<std::vector<int>>> seen;
  TrainResult a = Train(*utts_, inv_, Options(3), [&](const TrainState& s, const AcousticNet&) {
    std::vector<std::vector<int>> labels;
    for (const auto& al : s.alignments) labels.push_back(al.FrameLabels());
    seen.push_back(labels);
  });
  TrainResult b = Train(*utts_, inv_, Options(3));
  ASSERT_EQ(a.state.history.size(), 3u);
  ASSERT_EQ(seen.size(), 3u);
  for (size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.state.history[e].epoch, static_cast<int>(e) + 1);
    EXPECT_EQ(a.state.history[e].loss, b.state.history[e].loss);
    EXPECT_EQ(a.state.history[e].change_fraction, b.state.history[e].change_fraction);
    double frames = 0;
    for (double c : a.state.history[e].counts) frames += c;
    size_t total = 0;
    for (const auto& u : *utts_) total += u.features.num_frames();
    EXPECT_EQ(frames, static_cast<double>(total));
  }
  EXPECT_EQ(a.model.net, b.model.net);
  EXPECT_EQ(a.state.priors, RecountPriors(a.state.alignments, inv_.size()));
  for (size_t i = 0; i < utts_->size(); ++i) {
    const auto& al = a.state.alignments[i];
    ASSERT_FALSE(al.phones.empty());
    EXPECT_EQ(al.phones.front().start, 0);
    EXPECT_EQ(al.phones.back().end, al.num_frames);
  }
}

TEST_F(TrainTest, StopsWhenChangeFallsBelowThreshold) {
  TrainerOptions o = Options(10);
  o.change_threshold = 1.1;  // any change fraction is below this
  TrainResult r = Train(*utts_, inv_, o);
  EXPECT_EQ(r.state.history.size(), 1u);
}

TEST_F(TrainTest, CheckpointsLogAndResume) {
  TempDir out;
  TrainerOptions o = Options(3);
  o.out_dir = out.path().string();
  TrainResult full = Train(*utts_, inv_, o);

  // JSON-lines log, one record per epoch.
  std::ifstream log(out / "train_log.jsonl");
  std::string line;
  int records = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("epoch").get<int>(), ++records);
    EXPECT_TRUE(j.contains("loss"));
    EXPECT_TRUE(j.contains("change_fraction"));
    EXPECT_TRUE(j.at("counts").contains("_"));
  }
  EXPECT_EQ(records, 3);
  EXPECT_TRUE(fs::exists(out / "model.bin"));

  // Epoch 2 checkpoint reloaded and realigned reproduces its alignments.
  const std::string ck = CheckpointDir(o.out_dir, 2);
  TrainState s2 = LoadTrainState(ck, inv_);
  EXPECT_EQ(s2.epoch, 2);
  AcousticModel m2 = LoadModel((fs::path(ck) / "model.bin").string(), inv_.Digest(),
                               static_cast<int>(inv_.size()));
  EXPECT_EQ(m2.priors, s2.priors);
  for (size_t i = 0; i < utts_->size(); ++i) {
    const TrainUtterance& u = (*utts_)[i];
    ViterbiResult r = AlignUtterance(m2.net, u.features, u.speaker,
                                     BuildGraph(u.sausage, inv_), s2.realign_priors);
    EXPECT_EQ(r.alignment.FrameLabels(), s2.alignments[i].FrameLabels());
    EXPECT_EQ(r.alignment.chosen, s2.alignments[i].chosen);
  }

  // Resume from epoch 2: epoch 3 depends only on the epoch-2 state.
  fs::remove_all(CheckpointDir(o.out_dir, 3));
  o.resume = true;
  TrainResult resumed = Train(*utts_, inv_, o);
  ASSERT_EQ(resumed.state.history.size(), 3u);
  EXPECT_EQ(resumed.state.history[2].loss, full.state.history[2].loss);
  EXPECT_EQ(resumed.model.net, full.model.net);
  for (size_t i = 0; i < utts_->size(); ++i) {
    EXPECT_EQ(resumed.state.alignments[i].FrameLabels(),
              full.state.alignments[i].FrameLabels());
  }
  std::ifstream log2(out / "train_log.jsonl");
  int lines = 0;
  while (std::getline(log2, line)) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST_F(TrainTest, UtteranceThatDoesNotFitIsSkipped) {
  std::vector<TrainUtterance> utts(utts_->begin(), utts_->begin() + 3);
  TrainUtterance tiny = utts[0];
  tiny.id = "tiny";
  tiny.features.frames.conservativeResize(2, Eigen::NoChange);
  tiny.speaker = ComputeSpeakerVector(tiny.features);
  utts.push_back(tiny);
  TrainResult r = Train(utts, inv_, Options(1));
  EXPECT_EQ(r.skipped, std::vector<std::string>{"tiny"});
  EXPECT_EQ(r.state.alignments.size(), 3u);
  std::vector<TrainUtterance> none = {tiny};
  EXPECT_THROW(Train(none, inv_, Options(1)), Error);
}

TEST(PrepareCorpusTest, TextAndAudioFromDirectory) {
  TempDir dir;
  auto corpus = testing::MakeSyntheticCorpus(3, 9);
  for (const auto& u : corpus) {
    WriteWav(dir / (u.id + ".wav"), u.audio);
    WriteText(dir / (u.id + ".txt"), u.text + "\n");
  }
  WriteWav(dir / "bad.wav", corpus[0].audio);
  WriteText(dir / "bad.txt", "rok 1984");
  CorpusManifest m = IngestManifest(dir.path().string());
  ASSERT_EQ(m.entries.size(), 4u);
  G2p g2p;
  std::vector<std::string> report;
  auto utts = PrepareCorpus(m, g2p, ExceptionRuleSet(), MfccOptions{}, 2, &report);
  ASSERT_EQ(utts.size(), 3u);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_NE(report[0].find("bad"), std::string::npos);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(utts[i].features.num_frames(),
              static_cast<int>(corpus[i].truth.size()));
    EXPECT_EQ(utts[i].sausage.words.size(), corpus[i].sausage.words.size());
  }
}

}  // namespace
}  // namespace prak
