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

#include "prak/cli.h"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include "prak/config.h"
#include "prak/error.h"
#include "prak/eval.h"
#include "prak/textgrid.h"
#include "prak/utf8.h"

namespace prak {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  bool verbose = false;
  std::optional<int> jobs;

  std::vector<std::string> audio;
  std::string text;
  std::optional<std::string> model;
  std::optional<std::string> out_dir;
  std::optional<double> alpha;
  std::optional<int> min_dur;
  std::optional<std::string> rules;
  bool sampa = false;

  std::string manifest;
  std::string manifest_format = "auto";
  bool resume = false;
  std::optional<int> epochs;
  std::optional<uint64_t> seed;

  std::vector<std::string> ref;
  std::vector<std::string> hyp;
  std::string tier = "phone";
  bool include_silence = false;
  std::string json;
};

void RequireFile(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

std::string ReadText(const std::string& path) {
  RequireFile(path, "text file");
  return DecodeTextFile(ReadFile(path));
}

// Tokenizes with the file name attached to cleanup errors.
CleanText CleanFile(const std::string& path) {
  const std::string raw = ReadText(path);
  try {
    return CleanTranscript(raw);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

struct Context {
  Config config;
  std::unique_ptr<PhoneInventory> custom_inventory;
  const PhoneInventory* inventory = nullptr;
  ExceptionRuleSet rules;

  const PhoneInventory& inv() const { return *inventory; }
};

Context MakeContext(const Config& config) {
  Context ctx;
  ctx.config = config;
  if (config.inventory.empty()) {
    ctx.inventory = &PhoneInventory::Default();
  } else {
    RequireFile(config.inventory, "phone inventory");
    ctx.custom_inventory = std::make_unique<PhoneInventory>(PhoneInventory::Load(config.inventory));
    ctx.inventory = ctx.custom_inventory.get();
  }
  if (!config.rules.empty()) {
    RequireFile(config.rules, "exception rule file");
    ctx.rules = ExceptionRuleSet::Load(config.rules);
  }
  return ctx;
}

int CmdPron(const Context& ctx, const Flags& f, std::ostream& out) {
  const CleanText text = CleanFile(f.text);
  const G2p g2p(ctx.inv());
  out << FormatPronunciation(g2p.Generate(text, ctx.rules), ctx.inv(), f.sampa);
  return kExitOk;
}

int CmdValidate(const Context& ctx, const Flags& f, std::ostream& out) {
  const CleanText text = CleanFile(f.text);
  const G2p g2p(ctx.inv());
  const PronSausage sausage = g2p.Generate(text, ctx.rules);
  out << f.text << ": " << text.words.size() << " words, " << sausage.PathCount()
      << " pronunciation paths\n";
  if (text.words.empty()) out << f.text << ": no words; alignment will be pure silence\n";
  return kExitOk;
}

int CmdAlign(const Context& ctx, const Flags& f, std::ostream& out) {
  const Config& cfg = ctx.config;
  for (const std::string& a : f.audio) RequireFile(a, "audio file");
  if (cfg.model.empty()) throw UsageError("no model given (--model or PRAK_MODEL)");
  RequireFile(cfg.model, "model file");
  const CleanText text = CleanFile(f.text);

  const AcousticModel model = LoadModel(cfg.model, ctx.inv().Digest(),
                                        static_cast<int>(ctx.inv().size()));
  const G2p g2p(ctx.inv());
  const PronSausage sausage = g2p.Generate(text, ctx.rules);
  std::optional<AlignGraph> graph;
  if (!sausage.words.empty()) graph = BuildGraph(sausage, ctx.inv(), cfg.min_duration);
  ViterbiOptions vopts;
  vopts.alpha = cfg.alpha;
  vopts.frame_shift = cfg.mfcc.frame_shift;

  if (f.out_dir) fs::create_directories(*f.out_dir);
  std::vector<std::string> written(f.audio.size());
  ParallelFor(f.audio.size(), cfg.jobs, [&](size_t i) {
    const std::string& path = f.audio[i];
    try {
      const AudioBuffer audio = LoadAudio(path);
      const FeatureMatrix feats = ComputeMfcc(audio, cfg.mfcc);
      Alignment alignment;
      if (graph) {
        alignment = AlignUtterance(model.net, feats, ComputeSpeakerVector(feats), *graph,
                                   model.priors, vopts)
                        .alignment;
      } else {
        alignment = BootstrapAlignment(U"", feats.num_frames(), ctx.inv(), vopts.frame_shift);
      }
      const TextGrid grid = AlignmentToTextGrid(alignment, ctx.inv(), audio.duration());
      const fs::path dir = f.out_dir ? fs::path(*f.out_dir) : fs::path(path).parent_path();
      const fs::path target = dir / (fs::path(path).stem().string() + ".TextGrid");
      WriteTextGrid(target.string(), grid);
      written[i] = target.string();
    } catch (const Error& e) {
      throw Error(path + ": " + e.what());
    }
  });
  for (const std::string& w : written) out << w << "\n";
  return kExitOk;
}

int CmdTrain(const Context& ctx, const Flags& f, std::ostream& out, std::ostream& err) {
  const Config& cfg = ctx.config;
  ManifestFormat format = ManifestFormat::kAuto;
  if (f.manifest_format == "tsv") format = ManifestFormat::kTsv;
  if (f.manifest_format == "dirs") format = ManifestFormat::kDirPairs;
  const CorpusManifest manifest = IngestManifest(f.manifest, format);
  std::vector<std::string> report = manifest.report;
  const G2p g2p(ctx.inv());
  const std::vector<TrainUtterance> corpus =
      PrepareCorpus(manifest, g2p, ctx.rules, cfg.mfcc, cfg.jobs, &report);
  for (const std::string& line : report) err << line << "\n";

  TrainerOptions opts = cfg.ToTrainerOptions();
  if (!f.out_dir) throw UsageError("train needs --out");
  opts.out_dir = *f.out_dir;
  opts.resume = f.resume;
  const TrainResult result =
      Train(corpus, ctx.inv(), opts, [&](const TrainState& state, const AcousticNet&) {
        const EpochRecord& r = state.history.back();
        char line[128];
        std::snprintf(line, sizeof(line), "epoch %d: loss %.4f, changed %.2f%%\n", r.epoch,
                      r.loss, 100.0 * r.change_fraction);
        out << line << std::flush;
      });
  for (const std::string& id : result.skipped) err << "skipped " << id << "\n";
  out << "model written to " << (fs::path(opts.out_dir) / "model.bin").string() << "\n";
  return kExitOk;
}

int CmdEval(const Context& ctx, const Flags& f, std::ostream& out) {
  if (f.ref.size() != f.hyp.size()) {
    throw UsageError("got " + std::to_string(f.ref.size()) + " reference and " +
                     std::to_string(f.hyp.size()) + " hypothesis files");
  }
  for (const std::string& p : f.ref) RequireFile(p, "reference file");
  for (const std::string& p : f.hyp) RequireFile(p, "hypothesis file");
  ScoreOptions opts;
  opts.include_silence = f.include_silence;
  std::vector<EvalReport> reports(f.ref.size());
  ParallelFor(f.ref.size(), ctx.config.jobs, [&](size_t i) {
    try {
      reports[i] = Score(LoadTimedPhones(f.ref[i], f.tier), LoadTimedPhones(f.hyp[i], f.tier),
                         opts);
    } catch (const Error& e) {
      throw Error(f.ref[i] + " vs " + f.hyp[i] + ": " + e.what());
    }
  });
  EvalReport total;
  for (const EvalReport& r : reports) total += r;
  out << FormatReport(total, opts);
  if (!f.json.empty()) {
    std::ofstream json(f.json, std::ios::binary | std::ios::trunc);
    if (!json) throw Error("cannot write " + f.json);
    json << ReportJson(total, opts);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Czech forced aligner", "prak"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", f.config, "INI configuration file");
  app.add_flag("-v,--verbose", f.verbose, "log progress and echo the effective config");
  app.add_option("-j,--jobs", f.jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  CLI::App* align = app.add_subcommand("align", "align text to one or more recordings");
  align->add_option("--audio", f.audio, "WAV file (repeatable)")->required();
  align->add_option("--text", f.text, "transcript")->required();
  align->add_option("--model", f.model, "acoustic model (default: $PRAK_MODEL)");
  align->add_option("--out-dir", f.out_dir, "TextGrid directory (default: next to the audio)");
  align->add_option("--alpha", f.alpha, "prior boost exponent")->check(CLI::NonNegativeNumber);
  align->add_option("--min-dur", f.min_dur, "minimum phone duration in frames")
      ->check(CLI::PositiveNumber);
  align->add_option("--rules", f.rules, "pronunciation exception rules");

  CLI::App* pron = app.add_subcommand("pron", "print pronunciation variants");
  pron->add_option("--text", f.text, "transcript")->required();
  pron->add_option("--rules", f.rules, "pronunciation exception rules");
  pron->add_flag("--sampa", f.sampa, "SAMPA instead of IPA");

  CLI::App* train = app.add_subcommand("train", "train an acoustic model");
  train->add_option("--manifest", f.manifest, "TSV manifest or directory of wav/txt pairs")
      ->required();
  train->add_option("--out,--out-dir", f.out_dir, "output directory")->required();
  train->add_option("--format", f.manifest_format, "manifest format")
      ->check(CLI::IsMember({"auto", "tsv", "dirs"}));
  train->add_flag("--resume", f.resume, "continue from the latest checkpoint");
  train->add_option("--epochs", f.epochs, "epoch limit")->check(CLI::NonNegativeNumber);
  train->add_option("--seed", f.seed, "training seed");
  train->add_option("--rules", f.rules, "pronunciation exception rules");

  CLI::App* eval = app.add_subcommand("eval", "score alignments against references");
  eval->add_option("--ref", f.ref, "reference TextGrid (repeatable)")->required();
  eval->add_option("--hyp", f.hyp, "hypothesis TextGrid (repeatable)")->required();
  eval->add_option("--tier", f.tier, "phone tier name");
  eval->add_flag("--include-silence", f.include_silence, "score silence intervals too");
  eval->add_option("--json", f.json, "also write the report as JSON");

  CLI::App* validate = app.add_subcommand("validate", "check a transcript without audio");
  validate->add_option("--text", f.text, "transcript")->required();
  validate->add_option("--rules", f.rules, "pronunciation exception rules");

  std::vector<std::string> argv_storage = {"prak"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "prak: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    spdlog::set_level(f.verbose ? spdlog::level::info : spdlog::level::warn);
    Config cfg;
    if (const char* env = std::getenv("PRAK_MODEL"); env != nullptr) cfg.model = env;
    if (!f.config.empty()) cfg = LoadConfig(f.config, cfg);
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.model) cfg.model = *f.model;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.min_dur) cfg.min_duration = *f.min_dur;
    if (f.rules) cfg.rules = *f.rules;
    if (f.epochs) cfg.epochs = *f.epochs;
    if (f.seed) cfg.seed = *f.seed;
    if (f.verbose) err << "# effective config\n" << FormatConfig(cfg) << "\n";

    const Context ctx = MakeContext(cfg);
    if (*align) return CmdAlign(ctx, f, out);
    if (*pron) return CmdPron(ctx, f, out);
    if (*train) return CmdTrain(ctx, f, out, err);
    if (*eval) return CmdEval(ctx, f, out);
    return CmdValidate(ctx, f, out);
  } catch (const UsageError& e) {
    err << "prak: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "prak: error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace prak
