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

#ifndef PRAK_FRONTEND_H_
#define PRAK_FRONTEND_H_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prak {

inline constexpr int kSampleRate = 16000;

struct AudioBuffer {
  std::vector<float> samples;  // mono, [-1, 1]
  int sample_rate = kSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a WAV file (PCM 16-bit or IEEE float 32-bit, any channel count and
// rate) and returns 16 kHz mono audio.
AudioBuffer LoadAudio(const std::string& path);
// Same, on an in-memory file image.
AudioBuffer DecodeWav(std::string_view bytes, const std::string& name = "");

// Windowed-sinc resampling.
AudioBuffer Resample(const AudioBuffer& in, int target_rate);

enum class WavFormat { kPcm16, kFloat32 };

// `interleaved` holds num_channels samples per frame.
std::string EncodeWav(const std::vector<float>& interleaved, int num_channels,
                      int sample_rate, WavFormat format = WavFormat::kPcm16);
void WriteWav(const std::string& path, const AudioBuffer& audio,
              WavFormat format = WavFormat::kPcm16);

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MfccOptions {
  double frame_length = 0.025;  // seconds
  double frame_shift = 0.010;
  double preemphasis = 0.97;
  int num_mel_bins = 23;
  int num_ceps = 13;
  double low_freq = 20.0;
  double high_freq = 8000.0;
  double cepstral_lifter = 22.0;
  bool dither = false;
  double dither_value = 1.0;  // in 16-bit sample units
  uint64_t dither_seed = 0;
};

// T x num_ceps cepstra, c0 replaced by the log frame energy.
struct FeatureMatrix {
  RowMatrixXf frames;
  double frame_shift = 0.010;
  double frame_length = 0.025;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// 1 + (num_samples - window) / shift, or 0 when shorter than one window.
int NumFrames(size_t num_samples, const MfccOptions& opts = {});

FeatureMatrix ComputeMfcc(const AudioBuffer& audio,
                          const MfccOptions& opts = {});

// T x num_mel_bins log mel energies (the stage before the DCT).
RowMatrixXf ComputeLogMel(const AudioBuffer& audio,
                          const MfccOptions& opts = {});

// Centre frequencies (Hz) of the triangular mel filters.
std::vector<double> MelCenterFrequencies(const MfccOptions& opts = {});

// Mean cepstra of four energy groups: frames are split at the mean log
// energy, each half is split again at its own mean; groups are ordered from
// loudest to quietest and concatenated.
struct SpeakerVector {
  Eigen::VectorXf values;
};

SpeakerVector ComputeSpeakerVector(const FeatureMatrix& features);

inline constexpr int kContextFrames = 9;  // on each side

int WindowDim(int feature_dim, int context = kContextFrames);

// Frames t-9..t+9 (edge frames replicated) followed by the speaker vector.
Eigen::VectorXf WindowFeatures(const FeatureMatrix& features,
                               const SpeakerVector& spk, int t);

// All windows of an utterance, one per row.
RowMatrixXf BuildWindows(const FeatureMatrix& features,
                         const SpeakerVector& spk);

// Diagnostic dump: magic "PRAKFEAT", u32 version, u32 T, u32 dim, then
// row-major little-endian float32.
void WriteFeatureDump(const std::string& path, const FeatureMatrix& f);
FeatureMatrix ReadFeatureDump(const std::string& path);

}  // namespace prak

#endif  // PRAK_FRONTEND_H_
