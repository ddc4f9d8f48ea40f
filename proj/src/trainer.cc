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

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

CorpusManifest IngestTsv(const std::string& path) {
  CorpusManifest m;
  m.format = ManifestFormat::kTsv;
  const auto lines = SplitLines(DecodeTextFile(ReadFile(path)));
  if (lines.empty()) throw Error(path + ": empty manifest, nothing to train");
  const auto header = SplitTabs(lines[0]);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int path_col = col("path");
  const int text_col = col("sentence");
  if (path_col < 0 || text_col < 0) {
    throw Error(path + ":1: header must name 'path' and 'sentence' columns");
  }
  const fs::path dir = fs::path(path).parent_path();
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = SplitTabs(lines[i]);
    const auto need = static_cast<size_t>(std::max(path_col, text_col)) + 1;
    if (cols.size() < need) {
      throw Error(path + ":" + std::to_string(i + 1) + ": malformed row (" +
                  std::to_string(cols.size()) + " columns, expected at least " +
                  std::to_string(need) + ")");
    }
    const std::string& audio = cols[path_col];
    fs::path resolved = fs::path(audio).is_absolute() ? fs::path(audio) : dir / audio;
    if (!fs::exists(resolved) && !fs::path(audio).is_absolute()) {
      const fs::path clip = dir / "clips" / audio;
      if (fs::exists(clip)) resolved = clip;
    }
    if (!fs::is_regular_file(resolved)) {
      m.report.push_back(path + ":" + std::to_string(i + 1) +
                         ": audio file not found: " + audio);
      continue;
    }
    m.entries.push_back(
        {fs::path(audio).stem().string(), resolved.string(), cols[text_col]});
  }
  return m;
}

CorpusManifest IngestDirPairs(const std::string& path) {
  CorpusManifest m;
  m.format = ManifestFormat::kDirPairs;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    fs::path other = f;
    if (f.extension() == ".wav") {
      other.replace_extension(".txt");
      if (!fs::exists(other)) {
        m.report.push_back(f.string() + ": no matching .txt transcript");
        continue;
      }
      m.entries.push_back({f.stem().string(), f.string(),
                           DecodeTextFile(ReadFile(other.string()))});
    } else if (f.extension() == ".txt") {
      other.replace_extension(".wav");
      if (!fs::exists(other)) {
        m.report.push_back(f.string() + ": no matching .wav audio");
      }
    }
  }
  return m;
}

void WriteFileAtomic(const fs::path& path,
                     const std::function<void(const std::string&)>& write) {
  const fs::path tmp = path.string() + ".tmp";
  write(tmp.string());
  fs::rename(tmp, path);
}

void WriteTextAtomic(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path, [&](const std::string& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error("failed writing " + tmp);
  });
}

json AlignmentToJson(const Alignment& a) {
  json phones = json::array();
  for (const AlignedPhone& p : a.phones) {
    phones.push_back({static_cast<uint32_t>(p.code), p.phone, p.start, p.end,
                      p.slot, p.alt, p.pos});
  }
  return {{"num_frames", a.num_frames}, {"chosen", a.chosen}, {"phones", phones}};
}

Alignment AlignmentFromJson(const json& j, double frame_shift) {
  Alignment a;
  a.num_frames = j.at("num_frames").get<int>();
  a.chosen = j.at("chosen").get<std::vector<int>>();
  for (const json& p : j.at("phones")) {
    AlignedPhone ap;
    ap.code = p.at(0).get<uint32_t>();
    ap.phone = p.at(1).get<int>();
    ap.start = p.at(2).get<int>();
    ap.end = p.at(3).get<int>();
    ap.slot = p.at(4).get<int>();
    ap.alt = p.at(5).get<int>();
    ap.pos = p.at(6).get<int>();
    ap.start_s = ap.start * frame_shift;
    ap.end_s = ap.end * frame_shift;
    a.phones.push_back(ap);
  }
  return a;
}

json RecordToJson(const EpochRecord& r, const PhoneInventory& inv) {
  json counts = json::object();
  for (size_t i = 0; i < r.counts.size() && i < inv.size(); ++i) {
    counts[inv.at(i).sampa] = r.counts[i];
  }
  return {{"epoch", r.epoch},
          {"loss", r.loss},
          {"change_fraction", r.change_fraction},
          {"counts", counts}};
}

EpochRecord RecordFromJson(const json& j, const PhoneInventory& inv) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.loss = j.at("loss").get<double>();
  r.change_fraction = j.at("change_fraction").get<double>();
  r.counts.assign(inv.size(), 0.0);
  for (size_t i = 0; i < inv.size(); ++i) {
    r.counts[i] = j.at("counts").value(inv.at(i).sampa, 0.0);
  }
  return r;
}

void WriteCheckpoint(const std::string& out_dir, const TrainState& state,
                     const AcousticModel& model,
                     const OptimizerState<float>& opt,
                     const PhoneInventory& inv) {
  const fs::path dir = CheckpointDir(out_dir, state.epoch);
  fs::create_directories(dir);
  WriteFileAtomic(dir / "model.bin",
                  [&](const std::string& tmp) { SaveModel(tmp, model); });
  WriteFileAtomic(dir / "optimizer.bin",
                  [&](const std::string& tmp) { SaveOptimizerState(tmp, opt); });
  json history = json::array();
  for (const EpochRecord& r : state.history) history.push_back(RecordToJson(r, inv));
  json alignments = json::array();
  for (const Alignment& a : state.alignments) alignments.push_back(AlignmentToJson(a));
  json j = {{"epoch", state.epoch},       {"ids", state.ids},
            {"priors", state.priors},     {"realign_priors", state.realign_priors},
            {"history", history},         {"alignments", alignments}};
  WriteTextAtomic(dir / "state.json", j.dump());
}

int LatestCheckpoint(const std::string& out_dir) {
  const fs::path root = fs::path(out_dir) / "checkpoints";
  int best = -1;
  if (!fs::is_directory(root)) return best;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("epoch-", 0) != 0) continue;
    if (!fs::exists(e.path() / "state.json")) continue;
    try {
      best = std::max(best, std::stoi(name.substr(6)));
    } catch (const std::exception&) {
    }
  }
  return best;
}

std::vector<int> Labels(const Alignment& a) { return a.FrameLabels(); }

}  // namespace

CorpusManifest IngestManifest(const std::string& path, ManifestFormat format) {
  if (!fs::exists(path)) throw UsageError("manifest not found: " + path);
  if (format == ManifestFormat::kAuto) {
    format = fs::is_directory(path) ? ManifestFormat::kDirPairs
                                    : ManifestFormat::kTsv;
  }
  CorpusManifest m = format == ManifestFormat::kTsv ? IngestTsv(path)
                                                    : IngestDirPairs(path);
  if (m.entries.empty()) {
    throw Error(path + ": manifest has no usable entries, nothing to train");
  }
  return m;
}

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  size_t threads = jobs > 0 ? static_cast<size_t>(jobs)
                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> CountFrames(const std::vector<Alignment>& alignments,
                                size_t num_phones) {
  std::vector<double> counts(num_phones, 0.0);
  for (const Alignment& a : alignments) {
    for (const AlignedPhone& p : a.phones) counts.at(p.phone) += p.end - p.start;
  }
  return counts;
}

std::vector<double> RecountPriors(const std::vector<Alignment>& alignments,
                                  size_t num_phones, double floor) {
  return PriorFromCounts(CountFrames(alignments, num_phones), floor);
}

std::vector<TrainUtterance> PrepareCorpus(const CorpusManifest& manifest,
                                          const G2p& g2p,
                                          const ExceptionRuleSet& rules,
                                          const MfccOptions& mfcc, int jobs,
                                          std::vector<std::string>* report) {
  const size_t n = manifest.entries.size();
  std::vector<TrainUtterance> utts(n);
  std::vector<std::string> problems(n);
  ParallelFor(n, jobs, [&](size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      TrainUtterance& u = utts[i];
      u.id = e.id;
      u.features = ComputeMfcc(LoadAudio(e.audio), mfcc);
      if (u.features.num_frames() == 0) {
        problems[i] = e.audio + ": audio shorter than one frame";
        return;
      }
      u.speaker = ComputeSpeakerVector(u.features);
      u.sausage = g2p.Generate(CleanTranscript(e.text), rules);
    } catch (const Error& err) {
      problems[i] = e.id + ": " + err.what();
    }
  });
  std::vector<TrainUtterance> out;
  for (size_t i = 0; i < n; ++i) {
    if (problems[i].empty()) {
      out.push_back(std::move(utts[i]));
    } else if (report != nullptr) {
      report->push_back(problems[i]);
    }
  }
  return out;
}

ViterbiResult AlignUtterance(const AcousticNet& net,
                             const FeatureMatrix& features,
                             const SpeakerVector& speaker,
                             const AlignGraph& graph,
                             const std::vector<double>& priors,
                             const ViterbiOptions& opts) {
  const Eigen::MatrixXf windows = BuildWindows(features, speaker);
  return Viterbi(net.LogPosteriors(windows), graph, priors, opts);
}

std::string CheckpointDir(const std::string& out_dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch-%03d", epoch);
  return (fs::path(out_dir) / "checkpoints" / name).string();
}

TrainState LoadTrainState(const std::string& dir, const PhoneInventory& inv) {
  const std::string path = (fs::path(dir) / "state.json").string();
  json j;
  try {
    j = json::parse(ReadFile(path));
    TrainState s;
    s.epoch = j.at("epoch").get<int>();
    s.ids = j.at("ids").get<std::vector<std::string>>();
    s.priors = j.at("priors").get<std::vector<double>>();
    s.realign_priors = j.at("realign_priors").get<std::vector<double>>();
    for (const json& r : j.at("history")) s.history.push_back(RecordFromJson(r, inv));
    for (const json& a : j.at("alignments")) {
      s.alignments.push_back(AlignmentFromJson(a, kFrameShiftSeconds));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(path + ": corrupt training state: " + e.what());
  }
}

TrainResult Train(const std::vector<TrainUtterance>& corpus,
                  const PhoneInventory& inv, const TrainerOptions& opts,
                  const EpochCallback& on_epoch) {
  TrainResult result;
  const size_t num_phones = inv.size();

  // Utterances whose shortest pronunciation does not fit are skipped.
  std::vector<const TrainUtterance*> utts;
  std::vector<AlignGraph> graphs;
  for (const TrainUtterance& u : corpus) {
    AlignGraph g = BuildGraph(u.sausage, inv, opts.min_duration);
    const int frames = u.features.num_frames();
    if (frames == 0 || g.MinFrames() > frames ||
        static_cast<int>(u.sausage.CanonicalPath().size()) > frames) {
      spdlog::warn("skipping {}: transcript too long for {} frames", u.id, frames);
      result.skipped.push_back(u.id);
      continue;
    }
    utts.push_back(&u);
    graphs.push_back(std::move(g));
  }
  if (utts.empty()) throw Error("no trainable utterances");
  const int feature_dim = utts.front()->features.dim();

  AmConfig am = opts.am;
  am.input_dim = WindowDim(feature_dim);
  am.output_dim = static_cast<int>(num_phones);
  am.seed = opts.am.seed != 0 ? opts.am.seed : opts.seed;
  AcousticNet net(am);
  OptimizerState<float> opt = net.NewOptimizerState();
  TrainState& state = result.state;
  for (const auto* u : utts) state.ids.push_back(u->id);

  const bool write = !opts.out_dir.empty();
  const fs::path log_path = fs::path(opts.out_dir) / "train_log.jsonl";
  const int resume_epoch = write && opts.resume ? LatestCheckpoint(opts.out_dir) : -1;
  if (resume_epoch >= 0) {
    const std::string dir = CheckpointDir(opts.out_dir, resume_epoch);
    TrainState loaded = LoadTrainState(dir, inv);
    if (loaded.ids != state.ids) {
      throw Error(dir + ": checkpoint was made from a different corpus");
    }
    AcousticModel m = LoadModel((fs::path(dir) / "model.bin").string(),
                                inv.Digest(), static_cast<int>(num_phones));
    net = m.net;
    opt = LoadOptimizerState((fs::path(dir) / "optimizer.bin").string(), net);
    state = std::move(loaded);
    // Drop log records of epochs after the checkpoint.
    std::ofstream log(log_path, std::ios::trunc);
    for (const EpochRecord& r : state.history) log << RecordToJson(r, inv).dump() << '\n';
    spdlog::info("resuming from epoch {}", state.epoch);
  } else {
    for (const auto* u : utts) {
      state.alignments.push_back(BootstrapAlignment(
          u->sausage.CanonicalPath(), u->features.num_frames(), inv));
    }
    state.priors = RecountPriors(state.alignments, num_phones, opts.prior_floor);
    if (write) {
      fs::create_directories(opts.out_dir);
      std::ofstream(log_path, std::ios::trunc);
    }
  }

  const bool converged_already =
      !state.history.empty() &&
      state.history.back().change_fraction < opts.change_threshold;
  for (int epoch = state.epoch + 1; epoch <= opts.epochs && !converged_already;
       ++epoch) {
    // (a) targets from the previous epoch's alignments
    std::vector<std::vector<int>> targets;
    std::vector<std::pair<uint32_t, uint32_t>> frames;
    for (size_t u = 0; u < utts.size(); ++u) {
      targets.push_back(Labels(state.alignments[u]));
      for (size_t t = 0; t < targets.back().size(); ++t) {
        frames.emplace_back(static_cast<uint32_t>(u), static_cast<uint32_t>(t));
      }
    }
    // (b) shuffled gradient passes
    std::mt19937_64 rng(opts.seed + static_cast<uint64_t>(epoch));
    const int batch = std::max(1, opts.optimizer.batch_size);
    const int dim = am.input_dim;
    double loss_sum = 0;
    size_t loss_frames = 0;
    for (int pass = 0; pass < std::max(1, opts.passes_per_epoch); ++pass) {
      std::shuffle(frames.begin(), frames.end(), rng);
      for (size_t begin = 0; begin < frames.size(); begin += batch) {
        const size_t end = std::min(frames.size(), begin + batch);
        AcousticNet::Matrix x(static_cast<Eigen::Index>(end - begin), dim);
        std::vector<int> y;
        for (size_t k = begin; k < end; ++k) {
          const auto [u, t] = frames[k];
          x.row(static_cast<Eigen::Index>(k - begin)) =
              WindowFeatures(utts[u]->features, utts[u]->speaker,
                             static_cast<int>(t))
                  .transpose();
          y.push_back(targets[u][t]);
        }
        loss_sum += net.TrainStep(x, y, &opt, opts.optimizer) *
                    static_cast<double>(end - begin);
        loss_frames += end - begin;
      }
    }
    // (c) priors from the alignments the targets came from
    const std::vector<double> realign_priors = state.priors;
    // (d) realignment
    std::vector<Alignment> next(utts.size());
    ViterbiOptions vopts;
    vopts.alpha = opts.alpha;
    ParallelFor(utts.size(), opts.jobs, [&](size_t u) {
      next[u] = AlignUtterance(net, utts[u]->features, utts[u]->speaker,
                               graphs[u], realign_priors, vopts)
                    .alignment;
    });
    // (e) change statistics
    size_t changed = 0, total = 0;
    for (size_t u = 0; u < utts.size(); ++u) {
      const auto labels = Labels(next[u]);
      for (size_t t = 0; t < labels.size(); ++t) changed += labels[t] != targets[u][t];
      total += labels.size();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(std::max<size_t>(loss_frames, 1));
    rec.change_fraction = static_cast<double>(changed) / static_cast<double>(total);
    rec.counts = CountFrames(next, num_phones);

    state.epoch = epoch;
    state.alignments = std::move(next);
    state.realign_priors = realign_priors;
    state.priors = PriorFromCounts(rec.counts, opts.prior_floor);
    state.history.push_back(rec);
    spdlog::info("epoch {}: loss {:.4f}, frame labels changed {:.2f}%", epoch,
                 rec.loss, 100.0 * rec.change_fraction);
    if (write) {
      WriteCheckpoint(opts.out_dir, state, {net, inv.Digest(), state.priors}, opt,
                      inv);
      std::ofstream log(log_path, std::ios::app);
      log << RecordToJson(rec, inv).dump() << '\n';
    }
    if (on_epoch) on_epoch(state, net);
    if (rec.change_fraction < opts.change_threshold) break;
  }

  result.model = {net, inv.Digest(), state.priors};
  if (write) {
    WriteFileAtomic(fs::path(opts.out_dir) / "model.bin", [&](const std::string& tmp) {
      SaveModel(tmp, result.model);
    });
  }
  return result;
}

}  // namespace prak
