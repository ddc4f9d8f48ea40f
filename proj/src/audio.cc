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

#include <cmath>
#include <fstream>
#include <numbers>

#include "binary_io.h"
#include "prak/error.h"
#include "prak/frontend.h"
#include "prak/utf8.h"

namespace prak {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer DecodeWav(std::string_view bytes, const std::string& name) {
  const std::string what = name.empty() ? "WAV data" : name;
  internal::ByteReader r(bytes, what);
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE") {
    throw Error(what + ": unsupported container (expected RIFF/WAVE)");
  }
  r.Skip(12);
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::string_view data;
  bool have_fmt = false, have_data = false;
  while (r.remaining() >= 8 && !have_data) {
    std::string_view id = r.ReadBytes(4);
    uint32_t size = r.Read<uint32_t>();
    if (id == "fmt ") {
      internal::ByteReader f(r.ReadBytes(size), what);
      format = f.Read<uint16_t>();
      channels = f.Read<uint16_t>();
      rate = f.Read<uint32_t>();
      f.Skip(6);  // byte rate, block align
      bits = f.Read<uint16_t>();
      if (format == kFormatExtensible && size >= 40) {
        f.Skip(8);  // cbSize, valid bits, channel mask
        format = f.Read<uint16_t>();  // leading bytes of the subformat GUID
      }
      have_fmt = true;
      if ((size & 1) && r.remaining() > 0) r.Skip(1);
    } else if (id == "data") {
      data = r.ReadBytes(std::min<size_t>(size, r.remaining()));
      have_data = true;
    } else {
      r.Skip(std::min<size_t>(size + (size & 1), r.remaining()));
    }
  }
  if (!have_fmt || !have_data) {
    throw Error(what + ": missing fmt or data chunk");
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(what + ": unsupported codec (format tag " +
                std::to_string(format) + ", " + std::to_string(bits) +
                " bits); use 16-bit PCM or 32-bit float WAV");
  }
  if (channels == 0 || rate == 0) throw Error(what + ": invalid fmt chunk");
  const size_t bytes_per_frame = channels * (bits / 8);
  const size_t num_frames = data.size() / bytes_per_frame;
  if (num_frames == 0) throw Error(what + ": audio has zero length");

  AudioBuffer mono;
  mono.sample_rate = static_cast<int>(rate);
  mono.samples.resize(num_frames);
  internal::ByteReader d(data, what);
  for (size_t i = 0; i < num_frames; ++i) {
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      sum += pcm16 ? d.Read<int16_t>() / 32768.0 : d.Read<float>();
    }
    mono.samples[i] = static_cast<float>(sum / channels);
  }
  if (mono.sample_rate != kSampleRate) return Resample(mono, kSampleRate);
  return mono;
}

AudioBuffer LoadAudio(const std::string& path) {
  return DecodeWav(ReadFile(path), path);
}

AudioBuffer Resample(const AudioBuffer& in, int target_rate) {
  if (in.sample_rate == target_rate) return in;
  const double ratio = static_cast<double>(target_rate) / in.sample_rate;
  const auto out_len = static_cast<size_t>(
      std::llround(static_cast<double>(in.samples.size()) * ratio));
  // Low-pass at 95% of the lower Nyquist frequency, in input-sample units.
  const double cutoff = 0.5 * std::min(1.0, ratio) * 0.95;
  const int zeros = 16;
  const double half_width = zeros / (2.0 * cutoff);
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const auto n = static_cast<long>(in.samples.size());
  for (size_t j = 0; j < out_len; ++j) {
    const double center = static_cast<double>(j) / ratio;
    const long lo = static_cast<long>(std::ceil(center - half_width));
    const long hi = static_cast<long>(std::floor(center + half_width));
    double acc = 0.0;
    for (long k = std::max(lo, 0L); k <= std::min(hi, n - 1); ++k) {
      const double d = k - center;
      const double x = 2.0 * cutoff * d;
      const double sinc =
          std::abs(x) < 1e-12 ? 1.0
                              : std::sin(std::numbers::pi * x) /
                                    (std::numbers::pi * x);
      const double w =
          0.5 + 0.5 * std::cos(std::numbers::pi * d / half_width);  // Hann
      acc += in.samples[k] * 2.0 * cutoff * sinc * w;
    }
    out.samples[j] = static_cast<float>(acc);
  }
  return out;
}

std::string EncodeWav(const std::vector<float>& interleaved, int num_channels,
                      int sample_rate, WavFormat format) {
  const bool pcm = format == WavFormat::kPcm16;
  const uint16_t bits = pcm ? 16 : 32;
  const auto data_bytes =
      static_cast<uint32_t>(interleaved.size() * (bits / 8));
  std::string out = "RIFF";
  internal::AppendLe<uint32_t>(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  internal::AppendLe<uint32_t>(&out, 16);
  internal::AppendLe<uint16_t>(&out, pcm ? kFormatPcm : kFormatFloat);
  internal::AppendLe<uint16_t>(&out, static_cast<uint16_t>(num_channels));
  internal::AppendLe<uint32_t>(&out, static_cast<uint32_t>(sample_rate));
  internal::AppendLe<uint32_t>(
      &out, static_cast<uint32_t>(sample_rate * num_channels * (bits / 8)));
  internal::AppendLe<uint16_t>(&out,
                               static_cast<uint16_t>(num_channels * bits / 8));
  internal::AppendLe<uint16_t>(&out, bits);
  out += "data";
  internal::AppendLe<uint32_t>(&out, data_bytes);
  for (float s : interleaved) {
    if (pcm) {
      double v = std::clamp(static_cast<double>(s), -1.0, 1.0) * 32767.0;
      internal::AppendLe<int16_t>(&out, static_cast<int16_t>(std::lround(v)));
    } else {
      internal::AppendLe<float>(&out, s);
    }
  }
  return out;
}

void WriteWav(const std::string& path, const AudioBuffer& audio,
              WavFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const std::string bytes = EncodeWav(audio.samples, 1, audio.sample_rate,
                                      format);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path);
}

}  // namespace prak
