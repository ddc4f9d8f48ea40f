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

#include "prak/textgrid.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prak/error.h"
#include "prak/utf8.h"

namespace prak {

namespace {

constexpr double kTimeEps = 1e-9;

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

bool Close(double a, double b) { return std::abs(a - b) <= kTimeEps; }

void ValidateTier(const TgTier& tier, double xmin, double xmax,
                  const std::string& where) {
  if (!Close(tier.xmin, xmin) || !Close(tier.xmax, xmax)) {
    throw Error(where + "tier \"" + tier.name + "\" bounds [" + Num(tier.xmin) +
                ", " + Num(tier.xmax) + "] differ from the grid bounds");
  }
  if (tier.intervals.empty()) {
    throw Error(where + "tier \"" + tier.name + "\" has no intervals");
  }
  double cursor = tier.xmin;
  for (size_t i = 0; i < tier.intervals.size(); ++i) {
    const TgInterval& iv = tier.intervals[i];
    const std::string label =
        where + "tier \"" + tier.name + "\" interval " + std::to_string(i + 1);
    if (iv.xmin < cursor - kTimeEps) throw Error(label + " overlaps its predecessor");
    if (iv.xmin > cursor + kTimeEps) throw Error(label + " leaves a gap before it");
    if (iv.xmax <= iv.xmin) throw Error(label + " has non-positive duration");
    Utf8ToU32(iv.text);  // throws on invalid UTF-8
    cursor = iv.xmax;
  }
  if (!Close(cursor, tier.xmax)) {
    throw Error(where + "tier \"" + tier.name + "\" ends at " + Num(cursor) +
                " instead of " + Num(tier.xmax));
  }
}

struct Token {
  enum Kind { kNumber, kString, kFlag } kind;
  std::string text;
  double number = 0;
  int line = 0;
};

std::vector<Token> Tokenize(const std::string& s, const std::string& name) {
  std::vector<Token> out;
  int line = 1;
  size_t i = 0;
  const size_t n = s.size();
  auto digit = [&](size_t k) {
    return k < n && std::isdigit(static_cast<unsigned char>(s[k]));
  };
  while (i < n) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == '"') {
      const int start_line = line;
      std::string text;
      ++i;
      while (true) {
        if (i >= n) {
          throw Error(name + ":" + std::to_string(start_line) +
                      ": unterminated string");
        }
        if (s[i] == '"') {
          if (i + 1 < n && s[i + 1] == '"') {
            text += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (s[i] == '\n') ++line;
        text += s[i++];
      }
      out.push_back({Token::kString, text, 0, start_line});
    } else if (c == '!') {
      while (i < n && s[i] != '\n') ++i;
    } else if (c == '[') {
      while (i < n && s[i] != ']' && s[i] != '\n') ++i;
    } else if (c == '<') {
      const size_t end = s.find('>', i);
      if (end == std::string::npos) {
        throw Error(name + ":" + std::to_string(line) + ": unterminated flag");
      }
      out.push_back({Token::kFlag, s.substr(i, end - i + 1), 0, line});
      i = end + 1;
    } else if (digit(i) || ((c == '-' || c == '+' || c == '.') &&
                            (digit(i + 1) || (s[i + 1] == '.' && digit(i + 2))))) {
      size_t end = i + 1;
      while (end < n && (std::isalnum(static_cast<unsigned char>(s[end])) ||
                         s[end] == '.' || s[end] == '+' || s[end] == '-')) {
        ++end;
      }
      const std::string text = s.substr(i, end - i);
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size() || !std::isfinite(v)) {
        throw Error(name + ":" + std::to_string(line) + ": bad number '" + text + "'");
      }
      out.push_back({Token::kNumber, text, v, line});
      i = end;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < n && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                       s[i] == '?')) {
        ++i;
      }
    } else {
      ++i;
    }
  }
  return out;
}

class TokenStream {
 public:
  TokenStream(std::vector<Token> tokens, std::string name)
      : tokens_(std::move(tokens)), name_(std::move(name)) {}

  const Token& Next(Token::Kind kind, const char* what) {
    if (pos_ >= tokens_.size()) {
      throw Error(name_ + ":" + std::to_string(LastLine()) +
                  ": unexpected end of file, expected " + what);
    }
    const Token& t = tokens_[pos_];
    if (t.kind != kind) {
      throw Error(name_ + ":" + std::to_string(t.line) + ": expected " + what);
    }
    ++pos_;
    return t;
  }
  double Number(const char* what) { return Next(Token::kNumber, what).number; }
  std::string String(const char* what) { return Next(Token::kString, what).text; }
  bool AtEnd() const { return pos_ >= tokens_.size(); }
  bool PeekFlag() const {
    return pos_ < tokens_.size() && tokens_[pos_].kind == Token::kFlag;
  }
  int Line() const { return pos_ < tokens_.size() ? tokens_[pos_].line : LastLine(); }
  int PrevLine() const { return pos_ > 0 ? tokens_[pos_ - 1].line : 1; }
  std::string Where(int line) const { return name_ + ":" + std::to_string(line) + ": "; }

 private:
  int LastLine() const { return tokens_.empty() ? 1 : tokens_.back().line; }

  std::vector<Token> tokens_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace

void TextGrid::Validate() const {
  if (!(xmax > xmin)) throw Error("TextGrid has an empty time domain");
  for (const TgTier& tier : tiers) ValidateTier(tier, xmin, xmax, "");
}

const TgTier* TextGrid::Find(std::string_view name) const {
  for (const TgTier& t : tiers) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

bool NearlyEqual(const TextGrid& a, const TextGrid& b, double tolerance) {
  auto near = [&](double x, double y) { return std::abs(x - y) <= tolerance; };
  if (!near(a.xmin, b.xmin) || !near(a.xmax, b.xmax) || a.tiers.size() != b.tiers.size()) {
    return false;
  }
  for (size_t t = 0; t < a.tiers.size(); ++t) {
    const TgTier& x = a.tiers[t];
    const TgTier& y = b.tiers[t];
    if (x.name != y.name || !near(x.xmin, y.xmin) || !near(x.xmax, y.xmax) ||
        x.intervals.size() != y.intervals.size()) {
      return false;
    }
    for (size_t i = 0; i < x.intervals.size(); ++i) {
      if (x.intervals[i].text != y.intervals[i].text ||
          !near(x.intervals[i].xmin, y.intervals[i].xmin) ||
          !near(x.intervals[i].xmax, y.intervals[i].xmax)) {
        return false;
      }
    }
  }
  return true;
}

std::string FormatTextGrid(const TextGrid& grid) {
  grid.Validate();
  std::ostringstream o;
  o << "File type = \"ooTextFile\"\n"
    << "Object class = \"TextGrid\"\n\n"
    << "xmin = " << Num(grid.xmin) << " \n"
    << "xmax = " << Num(grid.xmax) << " \n";
  if (grid.tiers.empty()) {
    o << "tiers? <absent> \n";
    return o.str();
  }
  o << "tiers? <exists> \n"
    << "size = " << grid.tiers.size() << " \n"
    << "item []: \n";
  for (size_t t = 0; t < grid.tiers.size(); ++t) {
    const TgTier& tier = grid.tiers[t];
    o << "    item [" << t + 1 << "]:\n"
      << "        class = \"IntervalTier\" \n"
      << "        name = " << Quote(tier.name) << " \n"
      << "        xmin = " << Num(tier.xmin) << " \n"
      << "        xmax = " << Num(tier.xmax) << " \n"
      << "        intervals: size = " << tier.intervals.size() << " \n";
    for (size_t i = 0; i < tier.intervals.size(); ++i) {
      const TgInterval& iv = tier.intervals[i];
      o << "        intervals [" << i + 1 << "]:\n"
        << "            xmin = " << Num(iv.xmin) << " \n"
        << "            xmax = " << Num(iv.xmax) << " \n"
        << "            text = " << Quote(iv.text) << " \n";
    }
  }
  return o.str();
}

void WriteTextGrid(const std::string& path, const TextGrid& grid) {
  const std::string text = FormatTextGrid(grid);  // validates before touching disk
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

TextGrid ParseTextGrid(std::string_view bytes, const std::string& name) {
  const std::string what = name.empty() ? "<textgrid>" : name;
  TokenStream ts(Tokenize(DecodeTextFile(bytes), what), what);
  if (ts.String("file type") != "ooTextFile") {
    throw Error(ts.Where(ts.PrevLine()) + "not a Praat text file");
  }
  const std::string object = ts.String("object class");
  if (object != "TextGrid") {
    throw Error(ts.Where(ts.PrevLine()) + "object class is \"" + object +
                "\", expected \"TextGrid\"");
  }
  TextGrid grid;
  grid.xmin = ts.Number("xmin");
  grid.xmax = ts.Number("xmax");
  if (!(grid.xmax > grid.xmin)) {
    throw Error(ts.Where(ts.PrevLine()) + "grid xmax must exceed xmin");
  }
  const std::string flag = ts.Next(Token::kFlag, "<exists> or <absent>").text;
  if (flag == "<absent>") return grid;
  if (flag != "<exists>") throw Error(ts.Where(ts.PrevLine()) + "unknown flag " + flag);
  const double size = ts.Number("tier count");
  if (size < 0 || size != std::floor(size)) {
    throw Error(ts.Where(ts.PrevLine()) + "bad tier count");
  }
  for (int t = 0; t < static_cast<int>(size); ++t) {
    const int tier_line = ts.Line();
    const std::string cls = ts.String("tier class");
    if (cls != "IntervalTier") {
      throw Error(ts.Where(tier_line) + "unsupported tier class \"" + cls + "\"");
    }
    TgTier tier;
    tier.name = ts.String("tier name");
    tier.xmin = ts.Number("tier xmin");
    tier.xmax = ts.Number("tier xmax");
    if (!Close(tier.xmin, grid.xmin) || !Close(tier.xmax, grid.xmax)) {
      throw Error(ts.Where(ts.PrevLine()) + "tier \"" + tier.name +
                  "\" bounds differ from the grid bounds");
    }
    const double count = ts.Number("interval count");
    if (count < 1 || count != std::floor(count)) {
      throw Error(ts.Where(ts.PrevLine()) + "bad interval count");
    }
    double cursor = tier.xmin;
    for (int i = 0; i < static_cast<int>(count); ++i) {
      const int line = ts.Line();
      TgInterval iv;
      iv.xmin = ts.Number("interval xmin");
      iv.xmax = ts.Number("interval xmax");
      iv.text = ts.String("interval text");
      if (iv.xmin < cursor - kTimeEps) {
        throw Error(ts.Where(line) + "interval overlaps its predecessor");
      }
      if (iv.xmin > cursor + kTimeEps) {
        throw Error(ts.Where(line) + "gap before interval");
      }
      if (iv.xmax <= iv.xmin) {
        throw Error(ts.Where(line) + "interval has non-positive duration");
      }
      try {
        Utf8ToU32(iv.text);
      } catch (const Error&) {
        throw Error(ts.Where(line) + "label is not valid UTF-8");
      }
      cursor = iv.xmax;
      tier.intervals.push_back(std::move(iv));
    }
    if (!Close(cursor, tier.xmax)) {
      throw Error(ts.Where(ts.PrevLine()) + "tier \"" + tier.name +
                  "\" does not reach its xmax");
    }
    grid.tiers.push_back(std::move(tier));
  }
  if (!ts.AtEnd()) throw Error(ts.Where(ts.Line()) + "unexpected trailing content");
  return grid;
}

TextGrid ReadTextGrid(const std::string& path) {
  return ParseTextGrid(ReadFile(path), path);
}

TextGrid AlignmentToTextGrid(const Alignment& alignment,
                             const PhoneInventory& inv, double duration,
                             const GridOptions& opts) {
  TextGrid grid;
  double end = 0;
  if (!alignment.phones.empty()) end = alignment.phones.back().end_s;
  grid.xmax = std::max(duration, end);
  if (!(grid.xmax > 0)) throw Error("cannot write a TextGrid of zero duration");

  // Appends an interval, merging neighbouring silences.
  auto push = [](TgTier* tier, double xmin, double xmax, std::string text) {
    if (xmax <= xmin) return;
    if (!tier->intervals.empty()) {
      TgInterval& last = tier->intervals.back();
      if (last.text.empty() && text.empty()) {
        last.xmax = xmax;
        return;
      }
    }
    tier->intervals.push_back({xmin, xmax, std::move(text)});
  };
  auto finish = [&](TgTier* tier) {
    const double last = tier->intervals.empty() ? 0 : tier->intervals.back().xmax;
    if (tier->intervals.empty() || grid.xmax - last > kTimeEps) {
      push(tier, last, grid.xmax, "");
    }
    tier->intervals.back().xmax = grid.xmax;
  };

  TgTier words{opts.word_tier, 0, grid.xmax, {}};
  double cursor = 0;
  for (const WordSpan& w : alignment.words) {
    push(&words, cursor, w.start_s, "");
    push(&words, w.start_s, w.end_s, w.word);
    cursor = w.end_s;
  }
  finish(&words);

  TgTier phones{opts.phone_tier, 0, grid.xmax, {}};
  for (const AlignedPhone& p : alignment.phones) {
    const std::u32string code(1, p.code);
    std::string label;
    if (p.code != inv.silence()) label = opts.sampa ? inv.ToSampa(code) : inv.ToIpa(code);
    push(&phones, p.start_s, p.end_s, label);
  }
  finish(&phones);

  grid.tiers = {std::move(words), std::move(phones)};
  grid.Validate();
  return grid;
}

}  // namespace prak
