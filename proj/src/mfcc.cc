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

#include <fftw3.h>

#include <cfloat>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>

#include "binary_io.h"
#include "prak/error.h"
#include "prak/frontend.h"
#include "prak/utf8.h"

namespace prak {

namespace {

// FFTW's planner is not thread safe; execution on distinct arrays is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

double MelScale(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

int WindowSamples(const MfccOptions& o) {
  return static_cast<int>(std::lround(o.frame_length * kSampleRate));
}
int ShiftSamples(const MfccOptions& o) {
  return static_cast<int>(std::lround(o.frame_shift * kSampleRate));
}

int PaddedLength(int window) {
  int n = 1;
  while (n < window) n <<= 1;
  return n;
}

// num_bins x (padded/2) triangular weights on the mel scale.
Eigen::MatrixXd MelBanks(const MfccOptions& o, int padded) {
  const int num_fft_bins = padded / 2;
  const double bin_width = static_cast<double>(kSampleRate) / padded;
  const double mel_low = MelScale(o.low_freq);
  const double mel_high = MelScale(o.high_freq);
  const double delta = (mel_high - mel_low) / (o.num_mel_bins + 1);
  Eigen::MatrixXd banks = Eigen::MatrixXd::Zero(o.num_mel_bins, num_fft_bins);
  for (int b = 0; b < o.num_mel_bins; ++b) {
    const double left = mel_low + b * delta;
    const double center = left + delta;
    const double right = center + delta;
    for (int i = 0; i < num_fft_bins; ++i) {
      const double mel = MelScale(bin_width * i);
      if (mel > left && mel < right) {
        banks(b, i) = mel <= center ? (mel - left) / (center - left)
                                    : (right - mel) / (right - center);
      }
    }
  }
  return banks;
}

struct FrameAnalysis {
  RowMatrixXf log_mel;
  Eigen::VectorXd log_energy;
};

FrameAnalysis Analyze(const AudioBuffer& audio, const MfccOptions& o) {
  if (audio.sample_rate != kSampleRate) {
    throw Error("feature extraction expects 16 kHz audio");
  }
  const int window = WindowSamples(o);
  const int shift = ShiftSamples(o);
  const int padded = PaddedLength(window);
  const int num_frames = NumFrames(audio.samples.size(), o);
  FrameAnalysis out;
  out.log_mel.resize(num_frames, o.num_mel_bins);
  out.log_energy.resize(num_frames);
  if (num_frames == 0) return out;

  const Eigen::MatrixXd banks = MelBanks(o, padded);
  Eigen::VectorXd povey(window);
  for (int i = 0; i < window; ++i) {
    povey[i] = std::pow(
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (window - 1)), 0.85);
  }

  std::vector<double> frame(padded);
  std::vector<fftw_complex> spectrum(padded / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_r2c_1d(padded, frame.data(), spectrum.data(),
                                FFTW_ESTIMATE);
  }
  std::mt19937_64 rng(o.dither_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd power(padded / 2);

  for (int t = 0; t < num_frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    // 16-bit sample scale, as Kaldi operates on integer-valued waveforms.
    double mean = 0.0;
    for (int i = 0; i < window; ++i) {
      double x = audio.samples[static_cast<size_t>(t) * shift + i] * 32768.0;
      if (o.dither) x += o.dither_value * gauss(rng);
      frame[i] = x;
      mean += x;
    }
    mean /= window;
    double energy = 0.0;
    for (int i = 0; i < window; ++i) {
      frame[i] -= mean;
      energy += frame[i] * frame[i];
    }
    out.log_energy[t] = std::log(std::max(energy, double{FLT_EPSILON}));
    for (int i = window - 1; i > 0; --i) {
      frame[i] -= o.preemphasis * frame[i - 1];
    }
    frame[0] -= o.preemphasis * frame[0];
    for (int i = 0; i < window; ++i) frame[i] *= povey[i];

    fftw_execute_dft_r2c(plan, frame.data(), spectrum.data());
    for (int k = 0; k < padded / 2; ++k) {
      power[k] = spectrum[k][0] * spectrum[k][0] +
                 spectrum[k][1] * spectrum[k][1];
    }
    Eigen::VectorXd mel = banks * power;
    for (int b = 0; b < o.num_mel_bins; ++b) {
      out.log_mel(t, b) =
          static_cast<float>(std::log(std::max(mel[b], double{FLT_EPSILON})));
    }
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

int NumFrames(size_t num_samples, const MfccOptions& opts) {
  const auto window = static_cast<size_t>(WindowSamples(opts));
  const auto shift = static_cast<size_t>(ShiftSamples(opts));
  if (num_samples < window) return 0;
  return static_cast<int>(1 + (num_samples - window) / shift);
}

std::vector<double> MelCenterFrequencies(const MfccOptions& o) {
  const double mel_low = MelScale(o.low_freq);
  const double delta = (MelScale(o.high_freq) - mel_low) / (o.num_mel_bins + 1);
  std::vector<double> out;
  for (int b = 0; b < o.num_mel_bins; ++b) {
    const double mel = mel_low + (b + 1) * delta;
    out.push_back(700.0 * (std::exp(mel / 1127.0) - 1.0));
  }
  return out;
}

RowMatrixXf ComputeLogMel(const AudioBuffer& audio, const MfccOptions& opts) {
  return Analyze(audio, opts).log_mel;
}

FeatureMatrix ComputeMfcc(const AudioBuffer& audio, const MfccOptions& o) {
  if (o.num_ceps < 1 || o.num_ceps > o.num_mel_bins) {
    throw Error("num_ceps must be in [1, num_mel_bins]");
  }
  FrameAnalysis a = Analyze(audio, o);
  const int n = o.num_mel_bins;
  Eigen::MatrixXd dct(o.num_ceps, n);
  for (int k = 0; k < o.num_ceps; ++k) {
    const double norm = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int j = 0; j < n; ++j) {
      dct(k, j) = norm * std::cos(std::numbers::pi / n * (j + 0.5) * k);
    }
  }
  Eigen::VectorXd lifter(o.num_ceps);
  for (int k = 0; k < o.num_ceps; ++k) {
    lifter[k] = 1.0 + 0.5 * o.cepstral_lifter *
                          std::sin(std::numbers::pi * k / o.cepstral_lifter);
  }
  FeatureMatrix f;
  f.frame_shift = o.frame_shift;
  f.frame_length = o.frame_length;
  f.frames.resize(a.log_mel.rows(), o.num_ceps);
  for (int t = 0; t < a.log_mel.rows(); ++t) {
    Eigen::VectorXd mel = a.log_mel.row(t).transpose().cast<double>();
    Eigen::VectorXd ceps = (dct * mel).cwiseProduct(lifter);
    ceps[0] = a.log_energy[t];
    f.frames.row(t) = ceps.transpose().cast<float>();
  }
  return f;
}

SpeakerVector ComputeSpeakerVector(const FeatureMatrix& features) {
  const int num_frames = features.num_frames();
  if (num_frames == 0) {
    throw Error("cannot compute a speaker vector from zero frames");
  }
  const int dim = features.dim();
  const auto& m = features.frames;

  auto mean_of = [&](const std::vector<int>& rows,
                     const Eigen::VectorXd& fallback) {
    if (rows.empty()) return fallback;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (int r : rows) acc += m.row(r).transpose().cast<double>();
    return Eigen::VectorXd(acc / static_cast<double>(rows.size()));
  };
  auto split = [&](const std::vector<int>& rows) {
    double energy = 0.0;
    for (int r : rows) energy += m(r, 0);
    energy /= std::max<size_t>(rows.size(), 1);
    std::pair<std::vector<int>, std::vector<int>> out;
    for (int r : rows) (m(r, 0) >= energy ? out.first : out.second).push_back(r);
    return out;
  };

  std::vector<int> all(num_frames);
  for (int t = 0; t < num_frames; ++t) all[t] = t;
  const Eigen::VectorXd global = mean_of(all, Eigen::VectorXd());
  auto [high, low] = split(all);
  // An empty group inherits the mean of the group it was split from.
  const Eigen::VectorXd high_mean = mean_of(high, global);
  const Eigen::VectorXd low_mean = mean_of(low, global);
  auto [hh, hl] = split(high);
  auto [lh, ll] = split(low);

  SpeakerVector spk;
  spk.values.resize(4 * dim);
  spk.values.segment(0 * dim, dim) = mean_of(hh, high_mean).cast<float>();
  spk.values.segment(1 * dim, dim) = mean_of(hl, high_mean).cast<float>();
  spk.values.segment(2 * dim, dim) = mean_of(lh, low_mean).cast<float>();
  spk.values.segment(3 * dim, dim) = mean_of(ll, low_mean).cast<float>();
  return spk;
}

int WindowDim(int feature_dim, int context) {
  return (2 * context + 1) * feature_dim + 4 * feature_dim;
}

Eigen::VectorXf WindowFeatures(const FeatureMatrix& features,
                               const SpeakerVector& spk, int t) {
  const int num_frames = features.num_frames();
  if (t < 0 || t >= num_frames) {
    throw Error("frame index " + std::to_string(t) + " out of range [0, " +
                std::to_string(num_frames) + ")");
  }
  const int dim = features.dim();
  Eigen::VectorXf out(WindowDim(dim));
  for (int k = -kContextFrames; k <= kContextFrames; ++k) {
    const int src = std::clamp(t + k, 0, num_frames - 1);
    out.segment((k + kContextFrames) * dim, dim) =
        features.frames.row(src).transpose();
  }
  out.tail(spk.values.size()) = spk.values;
  return out;
}

RowMatrixXf BuildWindows(const FeatureMatrix& features,
                         const SpeakerVector& spk) {
  const int num_frames = features.num_frames();
  RowMatrixXf out(num_frames, WindowDim(features.dim()));
  for (int t = 0; t < num_frames; ++t) {
    out.row(t) = WindowFeatures(features, spk, t).transpose();
  }
  return out;
}

void WriteFeatureDump(const std::string& path, const FeatureMatrix& f) {
  std::string bytes = "PRAKFEAT";
  internal::AppendLe<uint32_t>(&bytes, 1);
  internal::AppendLe<uint32_t>(&bytes, static_cast<uint32_t>(f.num_frames()));
  internal::AppendLe<uint32_t>(&bytes, static_cast<uint32_t>(f.dim()));
  for (int t = 0; t < f.num_frames(); ++t) {
    for (int d = 0; d < f.dim(); ++d) {
      internal::AppendLe<float>(&bytes, f.frames(t, d));
    }
  }
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path);
}

FeatureMatrix ReadFeatureDump(const std::string& path) {
  const std::string bytes = ReadFile(path);
  internal::ByteReader r(bytes, path);
  if (r.ReadBytes(8) != "PRAKFEAT") throw Error(path + ": not a feature dump");
  if (r.Read<uint32_t>() != 1) throw Error(path + ": unsupported version");
  const auto rows = r.Read<uint32_t>();
  const auto cols = r.Read<uint32_t>();
  FeatureMatrix f;
  f.frames.resize(rows, cols);
  for (uint32_t t = 0; t < rows; ++t) {
    for (uint32_t d = 0; d < cols; ++d) f.frames(t, d) = r.Read<float>();
  }
  return f;
}

}  // namespace prak
