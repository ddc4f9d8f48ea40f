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

#include "prak/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prak/error.h"

namespace prak {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

size_t SatAdd(size_t a, size_t b) {
  return a > SIZE_MAX - b ? SIZE_MAX : a + b;
}

}  // namespace

AlignGraph BuildGraph(const PronSausage& sausage, const PhoneInventory& inv,
                      int min_duration) {
  if (min_duration < 1) throw UsageError("minimum phone duration must be >= 1");
  AlignGraph g;
  g.words = sausage.words;
  // Frontier: last states of everything built so far. `open` means the
  // sausage prefix can be traversed without emitting anything.
  std::vector<int> frontier;
  bool open = true;
  auto add_state = [&](GraphState s) {
    g.states.push_back(s);
    g.next.emplace_back();
    g.prev.emplace_back();
    g.is_start.push_back(false);
    g.is_end.push_back(false);
    return static_cast<int>(g.states.size()) - 1;
  };
  auto link = [&](int from, int to) {
    g.next[from].push_back(to);
    g.prev[to].push_back(from);
  };

  for (size_t slot = 0; slot < sausage.slots.size(); ++slot) {
    const SausageSlot& s = sausage.slots[slot];
    if (s.alternatives.empty()) {
      throw Error("pronunciation slot " + std::to_string(slot) +
                  " has no alternatives");
    }
    g.slot_word.push_back(s.word);
    g.slot_empty_alt.push_back(-1);
    std::vector<int> next_frontier;
    bool next_open = false;
    for (size_t alt = 0; alt < s.alternatives.size(); ++alt) {
      const PhoneString& phones = s.alternatives[alt];
      if (phones.empty()) {
        if (g.slot_empty_alt.back() < 0) g.slot_empty_alt.back() = static_cast<int>(alt);
        next_frontier.insert(next_frontier.end(), frontier.begin(), frontier.end());
        next_open = next_open || open;
        continue;
      }
      int last = -1;
      for (size_t pos = 0; pos < phones.size(); ++pos) {
        const int phone = inv.IndexOf(phones[pos]);
        for (int k = 0; k < min_duration; ++k) {
          const int id = add_state({phones[pos], phone, static_cast<int>(slot),
                                    static_cast<int>(alt),
                                    static_cast<int>(pos), k + 1 == min_duration});
          if (last >= 0) {
            link(last, id);
          } else {
            for (int f : frontier) link(f, id);
            if (open) g.is_start[id] = true;
          }
          last = id;
        }
      }
      next_frontier.push_back(last);
    }
    std::sort(next_frontier.begin(), next_frontier.end());
    next_frontier.erase(std::unique(next_frontier.begin(), next_frontier.end()),
                        next_frontier.end());
    frontier = std::move(next_frontier);
    open = next_open;
  }
  if (g.states.empty()) throw Error("pronunciation graph has no phones");
  for (int f : frontier) g.is_end[f] = true;
  for (size_t i = 0; i < g.states.size(); ++i) {
    std::sort(g.next[i].begin(), g.next[i].end());
    g.next[i].erase(std::unique(g.next[i].begin(), g.next[i].end()), g.next[i].end());
    std::sort(g.prev[i].begin(), g.prev[i].end());
    g.prev[i].erase(std::unique(g.prev[i].begin(), g.prev[i].end()), g.prev[i].end());
    if (g.is_start[i]) g.start.push_back(static_cast<int>(i));
    if (g.is_end[i]) g.end.push_back(static_cast<int>(i));
  }
  return g;
}

int AlignGraph::MinFrames() const {
  std::vector<int> dist(states.size(), std::numeric_limits<int>::max());
  int best = std::numeric_limits<int>::max();
  for (size_t s = 0; s < states.size(); ++s) {
    if (is_start[s]) dist[s] = 1;
    for (int p : prev[s]) {
      if (dist[p] != std::numeric_limits<int>::max()) {
        dist[s] = std::min(dist[s], dist[p] + 1);
      }
    }
    if (is_end[s]) best = std::min(best, dist[s]);
  }
  return best;
}

size_t AlignGraph::PathCount() const {
  std::vector<size_t> ways(states.size(), 0);
  size_t total = 0;
  for (size_t s = 0; s < states.size(); ++s) {
    if (is_start[s]) ways[s] = 1;
    for (int p : prev[s]) ways[s] = SatAdd(ways[s], ways[p]);
    if (is_end[s]) total = SatAdd(total, ways[s]);
  }
  return total;
}

std::vector<int> Alignment::FrameLabels() const {
  std::vector<int> labels(num_frames, -1);
  for (const AlignedPhone& p : phones) {
    for (int t = p.start; t < p.end; ++t) labels[t] = p.phone;
  }
  return labels;
}

PhoneString Alignment::Phones() const {
  PhoneString out;
  for (const AlignedPhone& p : phones) out.push_back(p.code);
  return out;
}

std::vector<double> PriorFromCounts(const std::vector<double>& counts,
                                    double floor) {
  double total = 0;
  for (double c : counts) total += std::max(c, 0.0);
  std::vector<double> p(counts.size());
  if (counts.empty()) return p;
  double sum = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    p[i] = total > 0 ? std::max(counts[i], 0.0) / total : 1.0 / counts.size();
    p[i] = std::max(p[i], floor);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

ViterbiResult Viterbi(const Eigen::MatrixXf& log_posteriors,
                      const AlignGraph& graph,
                      const std::vector<double>& priors,
                      const ViterbiOptions& opts) {
  const int num_frames = static_cast<int>(log_posteriors.rows());
  const int num_states = static_cast<int>(graph.states.size());
  if (num_frames < 1) throw Error("cannot align zero frames");
  if (num_states == 0) throw Error("pronunciation graph has no phones");
  if (!priors.empty() &&
      static_cast<Eigen::Index>(priors.size()) != log_posteriors.cols()) {
    throw Error("prior table size does not match posterior dimension");
  }
  const int min_frames = graph.MinFrames();
  if (min_frames > num_frames) {
    throw Error("text too long for audio: the shortest pronunciation needs " +
                std::to_string(min_frames) + " frames, the audio has " +
                std::to_string(num_frames));
  }

  std::vector<double> adjust(num_states, 0.0);
  for (int s = 0; s < num_states; ++s) {
    const int phone = graph.states[s].phone;
    if (phone >= log_posteriors.cols()) {
      throw Error("phone index exceeds posterior dimension");
    }
    if (!priors.empty()) adjust[s] = -opts.alpha * std::log(priors[phone]);
  }

  // back[t * S + s]: predecessor state at t-1 (s itself for a self-loop).
  std::vector<int> back(static_cast<size_t>(num_frames) * num_states, -1);
  std::vector<double> prev(num_states, kNegInf), cur(num_states);
  for (int s = 0; s < num_states; ++s) {
    if (graph.is_start[s]) {
      prev[s] = log_posteriors(0, graph.states[s].phone) + adjust[s];
    }
  }
  for (int t = 1; t < num_frames; ++t) {
    int* bp = back.data() + static_cast<size_t>(t) * num_states;
    for (int s = 0; s < num_states; ++s) {
      double best = graph.states[s].self_loop ? prev[s] : kNegInf;
      int arg = graph.states[s].self_loop ? s : -1;
      for (int p : graph.prev[s]) {
        if (prev[p] > best) {
          best = prev[p];
          arg = p;
        }
      }
      bp[s] = arg;
      cur[s] = best == kNegInf
                   ? kNegInf
                   : best + log_posteriors(t, graph.states[s].phone) + adjust[s];
    }
    std::swap(prev, cur);
  }
  int final_state = -1;
  double score = kNegInf;
  for (int s : graph.end) {
    if (prev[s] > score) {
      score = prev[s];
      final_state = s;
    }
  }
  if (final_state < 0) {
    throw Error("text too long for audio: no complete path fits " +
                std::to_string(num_frames) + " frames");
  }

  std::vector<int> path(num_frames);
  path[num_frames - 1] = final_state;
  for (int t = num_frames - 1; t > 0; --t) {
    path[t - 1] = back[static_cast<size_t>(t) * num_states + path[t]];
  }

  ViterbiResult result;
  result.score = score;
  Alignment& a = result.alignment;
  a.num_frames = num_frames;
  a.chosen = graph.slot_empty_alt;
  for (int t = 0; t < num_frames; ++t) {
    const GraphState& st = graph.states[path[t]];
    a.chosen[st.slot] = st.alt;
    if (!a.phones.empty()) {
      AlignedPhone& last = a.phones.back();
      if (last.slot == st.slot && last.alt == st.alt && last.pos == st.pos &&
          last.end == t) {
        last.end = t + 1;
        continue;
      }
    }
    AlignedPhone p;
    p.code = st.code;
    p.phone = st.phone;
    p.start = t;
    p.end = t + 1;
    p.slot = st.slot;
    p.alt = st.alt;
    p.pos = st.pos;
    a.phones.push_back(p);
  }
  for (AlignedPhone& p : a.phones) {
    p.start_s = p.start * opts.frame_shift;
    p.end_s = p.end * opts.frame_shift;
  }
  for (const AlignedPhone& p : a.phones) {
    const int word = graph.slot_word[p.slot];
    if (word < 0) continue;
    if (!a.words.empty() && a.words.back().word_index == word) {
      a.words.back().end = p.end;
      a.words.back().end_s = p.end_s;
      continue;
    }
    a.words.push_back({graph.words[word], word, p.start, p.end, p.start_s, p.end_s});
  }
  return result;
}

double PathScore(const Eigen::MatrixXf& log_posteriors,
                 const std::vector<int>& labels,
                 const std::vector<double>& priors, double alpha) {
  double score = 0;
  for (size_t t = 0; t < labels.size(); ++t) {
    score += log_posteriors(static_cast<Eigen::Index>(t), labels[t]);
    if (!priors.empty()) score -= alpha * std::log(priors[labels[t]]);
  }
  return score;
}

Alignment BootstrapAlignment(const PhoneString& phones, int num_frames,
                             const PhoneInventory& inv, double frame_shift) {
  if (num_frames < 1) throw Error("cannot bootstrap an alignment of zero frames");
  const int n = static_cast<int>(phones.size());
  if (n > num_frames) {
    throw Error("text too long for audio: " + std::to_string(n) +
                " phones in " + std::to_string(num_frames) + " frames");
  }
  Alignment a;
  a.num_frames = num_frames;
  auto add = [&](char32_t code, int start, int end) {
    if (end <= start) return;
    AlignedPhone p;
    p.code = code;
    p.phone = inv.IndexOf(code);
    p.start = start;
    p.end = end;
    p.start_s = start * frame_shift;
    p.end_s = end * frame_shift;
    a.phones.push_back(p);
  };
  if (n == 0) {
    add(inv.silence(), 0, num_frames);
  } else if (3 * n <= num_frames) {
    const int lead = (num_frames - 3 * n) / 2;
    add(inv.silence(), 0, lead);
    for (int i = 0; i < n; ++i) add(phones[i], lead + 3 * i, lead + 3 * i + 3);
    add(inv.silence(), lead + 3 * n, num_frames);
  } else {
    for (int i = 0; i < n; ++i) {
      add(phones[i], static_cast<int>(int64_t{i} * num_frames / n),
          static_cast<int>(int64_t{i + 1} * num_frames / n));
    }
  }
  return a;
}

std::string DumpAlignment(const Alignment& a, const PhoneInventory& inv) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const AlignedPhone& p : a.phones) {
    out << inv.ToIpa(std::u32string(1, p.code)) << '\t' << p.start_s << '\t'
        << p.end_s << '\n';
  }
  return out.str();
}

}  // namespace prak
