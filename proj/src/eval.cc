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

#include "prak/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

constexpr double kShiftEps = 1e-9;

double Pct(long n, long d) { return d == 0 ? 0.0 : 100.0 * n / d; }

}  // namespace

std::vector<EditStep> EditAlign(const std::vector<std::string>& ref,
                                const std::vector<std::string>& hyp) {
  const size_t n = ref.size();
  const size_t m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](size_t i, size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  std::vector<EditStep> script;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    const int here = at(i, j);
    const int ri = static_cast<int>(i) - 1;
    const int hj = static_cast<int>(j) - 1;
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i - 1, j - 1) == here) {
      script.push_back({EditOp::kMatch, ri, hj});
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && at(i - 1, j - 1) + 1 == here) {
      script.push_back({EditOp::kSubstitute, ri, hj});
      --i, --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      script.push_back({EditOp::kDelete, ri, -1});
      --i;
    } else {
      script.push_back({EditOp::kInsert, -1, hj});
      --j;
    }
  }
  std::reverse(script.begin(), script.end());
  return script;
}

int EditCost(const std::vector<EditStep>& script) {
  return static_cast<int>(std::count_if(script.begin(), script.end(), [](const EditStep& s) {
    return s.op != EditOp::kMatch;
  }));
}

double EvalReport::MismatchPct() const {
  return Pct(insertions + deletions + substitutions, ref_phone_count);
}
double EvalReport::MisplaceNearPct() const { return Pct(misplaced_near, ref_phone_count); }
double EvalReport::MisplaceFarPct() const { return Pct(misplaced_far, ref_phone_count); }
double EvalReport::MismatchOrMisplacePct() const {
  return Pct(insertions + deletions + substitutions + misplaced_near, ref_phone_count);
}

EvalReport& EvalReport::operator+=(const EvalReport& o) {
  ref_phone_count += o.ref_phone_count;
  insertions += o.insertions;
  deletions += o.deletions;
  substitutions += o.substitutions;
  matches += o.matches;
  misplaced_near += o.misplaced_near;
  misplaced_far += o.misplaced_far;
  return *this;
}

bool IsSilenceLabel(std::string_view label) { return label.empty() || label == "_"; }

EvalReport Score(const std::vector<TimedPhone>& ref_in,
                 const std::vector<TimedPhone>& hyp_in, const ScoreOptions& opts) {
  auto strip = [&](const std::vector<TimedPhone>& in) {
    std::vector<TimedPhone> out;
    for (const TimedPhone& p : in) {
      if (opts.include_silence || !IsSilenceLabel(p.label)) out.push_back(p);
    }
    return out;
  };
  const std::vector<TimedPhone> ref = strip(ref_in);
  const std::vector<TimedPhone> hyp = strip(hyp_in);
  if (ref.empty()) throw Error("empty reference alignment");

  std::vector<std::string> ref_labels;
  std::vector<std::string> hyp_labels;
  for (const TimedPhone& p : ref) ref_labels.push_back(p.label);
  for (const TimedPhone& p : hyp) hyp_labels.push_back(p.label);

  EvalReport r;
  r.ref_phone_count = static_cast<long>(ref.size());
  for (const EditStep& s : EditAlign(ref_labels, hyp_labels)) {
    switch (s.op) {
      case EditOp::kMatch: {
        ++r.matches;
        const double shift = std::abs(ref[s.ref].center() - hyp[s.hyp].center());
        if (shift >= opts.near_threshold - kShiftEps) ++r.misplaced_near;
        if (shift >= opts.far_threshold - kShiftEps) ++r.misplaced_far;
        break;
      }
      case EditOp::kSubstitute: ++r.substitutions; break;
      case EditOp::kDelete: ++r.deletions; break;
      case EditOp::kInsert: ++r.insertions; break;
    }
  }
  return r;
}

std::vector<TimedPhone> TierPhones(const TgTier& tier) {
  std::vector<TimedPhone> out;
  for (const TgInterval& iv : tier.intervals) out.push_back({iv.text, iv.xmin, iv.xmax});
  return out;
}

std::vector<TimedPhone> ParseAlignmentDump(std::string_view text, const std::string& name) {
  std::vector<TimedPhone> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    TimedPhone p;
    std::string start;
    std::string end;
    std::string extra;
    if (!std::getline(fields, p.label, '\t') || !std::getline(fields, start, '\t') ||
        !std::getline(fields, end, '\t') || std::getline(fields, extra, '\t')) {
      throw Error(name + ":" + std::to_string(lineno) + ": expected label, start, end");
    }
    try {
      size_t a = 0;
      size_t b = 0;
      p.start = std::stod(start, &a);
      p.end = std::stod(end, &b);
      if (a != start.size() || b != end.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(name + ":" + std::to_string(lineno) + ": bad time value");
    }
    if (p.end < p.start) {
      throw Error(name + ":" + std::to_string(lineno) + ": interval ends before it starts");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<TimedPhone> LoadTimedPhones(const std::string& path,
                                        const std::string& phone_tier) {
  const std::string bytes = ReadFile(path);
  const std::string text = DecodeTextFile(bytes);
  if (text.find("ooTextFile") == std::string::npos) return ParseAlignmentDump(text, path);
  const TextGrid grid = ParseTextGrid(bytes, path);
  const TgTier* tier = grid.Find(phone_tier);
  if (tier == nullptr) throw Error(path + ": no tier named \"" + phone_tier + "\"");
  return TierPhones(*tier);
}

std::string FormatReport(const EvalReport& r, const ScoreOptions& opts) {
  auto row = [](std::ostringstream& o, const std::string& name, double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%7.2f %%", pct);
    o << name << std::string(name.size() < 34 ? 34 - name.size() : 1, ' ') << buf << '\n';
  };
  std::ostringstream o;
  o << "# percentages of " << r.ref_phone_count << " reference phones, silence "
    << (opts.include_silence ? "included" : "excluded") << "\n";
  o << "# matches " << r.matches << ", substitutions " << r.substitutions
    << ", deletions " << r.deletions << ", insertions " << r.insertions << "\n";
  char near[32];
  char far[32];
  std::snprintf(near, sizeof(near), "%g", opts.near_threshold);
  std::snprintf(far, sizeof(far), "%g", opts.far_threshold);
  row(o, "phone mismatch", r.MismatchPct());
  row(o, std::string("misplacement ") + near + " s+", r.MisplaceNearPct());
  row(o, std::string("misplacement ") + far + " s+", r.MisplaceFarPct());
  row(o, std::string("mismatch or misplacement ") + near + " s+", r.MismatchOrMisplacePct());
  return o.str();
}

std::string ReportJson(const EvalReport& r, const ScoreOptions& opts) {
  nlohmann::ordered_json j;
  j["ref_phone_count"] = r.ref_phone_count;
  j["matches"] = r.matches;
  j["substitutions"] = r.substitutions;
  j["deletions"] = r.deletions;
  j["insertions"] = r.insertions;
  j["misplaced_near"] = r.misplaced_near;
  j["misplaced_far"] = r.misplaced_far;
  j["near_threshold_s"] = opts.near_threshold;
  j["far_threshold_s"] = opts.far_threshold;
  j["include_silence"] = opts.include_silence;
  j["denominator"] = "ref_phone_count";
  j["mismatch_pct"] = r.MismatchPct();
  j["misplace_near_pct"] = r.MisplaceNearPct();
  j["misplace_far_pct"] = r.MisplaceFarPct();
  j["mismatch_or_misplace_pct"] = r.MismatchOrMisplacePct();
  return j.dump(2) + "\n";
}

}  // namespace prak
