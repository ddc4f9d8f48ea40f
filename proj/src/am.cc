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

#include "prak/am.h"

#include <fstream>

#include "binary_io.h"
#include "prak/utf8.h"

namespace prak {

namespace {

constexpr std::string_view kModelMagic = "PRAKAM";
constexpr uint32_t kModelVersion = 1;
constexpr std::string_view kOptMagic = "PRAKOPT";
constexpr uint32_t kOptVersion = 1;

void WriteBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

// Weights row-major (out x in), then bias.
void AppendLayer(std::string* out, const AffineLayer<float>& layer) {
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      internal::AppendLe<float>(out, layer.weight(r, c));
    }
  }
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
    internal::AppendLe<float>(out, layer.bias[i]);
  }
}

AffineLayer<float> ReadLayer(internal::ByteReader* r, int in, int out) {
  AffineLayer<float> layer;
  layer.weight.resize(out, in);
  layer.bias.resize(out);
  for (int i = 0; i < out; ++i) {
    for (int j = 0; j < in; ++j) layer.weight(i, j) = r->Read<float>();
  }
  for (int i = 0; i < out; ++i) layer.bias[i] = r->Read<float>();
  if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
    throw Error("non-finite parameter in model file");
  }
  return layer;
}

}  // namespace

std::vector<int> AmConfig::LayerDims() const {
  std::vector<int> dims = {input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(output_dim);
  return dims;
}

void AmConfig::Validate() const {
  for (int d : LayerDims()) {
    if (d < 1) throw UsageError("acoustic model dimensions must be >= 1");
  }
}

int64_t ParamCount(const AmConfig& config) {
  config.Validate();
  const auto dims = config.LayerDims();
  int64_t n = 0;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    n += int64_t{dims[l]} * dims[l + 1] + dims[l + 1];
  }
  return n;
}

std::string SerializeModel(const AcousticModel& model) {
  const AmConfig& cfg = model.net.config();
  std::string out(kModelMagic);
  internal::AppendLe<uint32_t>(&out, kModelVersion);
  internal::AppendLe<uint64_t>(&out, model.inventory_digest);
  internal::AppendLe<uint64_t>(&out, cfg.seed);
  const auto dims = cfg.LayerDims();
  internal::AppendLe<uint32_t>(&out, static_cast<uint32_t>(dims.size()));
  for (int d : dims) internal::AppendLe<uint32_t>(&out, static_cast<uint32_t>(d));
  for (const auto& layer : model.net.layers()) AppendLayer(&out, layer);
  internal::AppendLe<uint32_t>(&out, static_cast<uint32_t>(model.priors.size()));
  for (double p : model.priors) internal::AppendLe<double>(&out, p);
  return out;
}

AcousticModel ParseModel(std::string_view bytes, const std::string& what) {
  internal::ByteReader r(bytes, what);
  if (bytes.size() < kModelMagic.size() ||
      r.ReadBytes(kModelMagic.size()) != kModelMagic) {
    throw Error(what + ": not a model file");
  }
  const auto version = r.Read<uint32_t>();
  if (version != kModelVersion) {
    throw Error(what + ": unsupported model format version " +
                std::to_string(version));
  }
  AcousticModel model;
  model.inventory_digest = r.Read<uint64_t>();
  AmConfig cfg;
  cfg.seed = r.Read<uint64_t>();
  const auto num_dims = r.Read<uint32_t>();
  if (num_dims < 2 || num_dims > 64) throw Error(what + ": corrupt header");
  std::vector<int> dims;
  for (uint32_t i = 0; i < num_dims; ++i) {
    const auto d = r.Read<uint32_t>();
    if (d == 0 || d > (1u << 20)) throw Error(what + ": corrupt header");
    dims.push_back(static_cast<int>(d));
  }
  cfg.input_dim = dims.front();
  cfg.output_dim = dims.back();
  cfg.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
  std::vector<AffineLayer<float>> layers;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    layers.push_back(ReadLayer(&r, dims[l], dims[l + 1]));
  }
  model.net = AcousticNet(cfg, std::move(layers));
  const auto num_priors = r.Read<uint32_t>();
  if (num_priors != 0 && num_priors != static_cast<uint32_t>(cfg.output_dim)) {
    throw Error(what + ": prior table size does not match output layer");
  }
  for (uint32_t i = 0; i < num_priors; ++i) model.priors.push_back(r.Read<double>());
  if (r.remaining() != 0) throw Error(what + ": trailing bytes after model");
  return model;
}

void SaveModel(const std::string& path, const AcousticModel& model) {
  WriteBytes(path, SerializeModel(model));
}

AcousticModel LoadModel(const std::string& path, uint64_t digest,
                        int num_phones) {
  AcousticModel model = ParseModel(ReadFile(path), path);
  if (model.net.output_dim() != num_phones || model.inventory_digest != digest) {
    throw Error(path + ": model was trained for a different phone inventory (" +
                std::to_string(model.net.output_dim()) + " outputs, " +
                std::to_string(num_phones) + " phones in current inventory)");
  }
  return model;
}

void SaveOptimizerState(const std::string& path,
                        const OptimizerState<float>& state) {
  std::string out(kOptMagic);
  internal::AppendLe<uint32_t>(&out, kOptVersion);
  internal::AppendLe<int64_t>(&out, state.step);
  internal::AppendLe<uint32_t>(&out, static_cast<uint32_t>(state.m.size()));
  for (size_t l = 0; l < state.m.size(); ++l) {
    AppendLayer(&out, state.m[l]);
    AppendLayer(&out, state.v[l]);
  }
  WriteBytes(path, out);
}

OptimizerState<float> LoadOptimizerState(const std::string& path,
                                         const AcousticNet& net) {
  const std::string bytes = ReadFile(path);
  internal::ByteReader r(bytes, path);
  if (bytes.size() < kOptMagic.size() || r.ReadBytes(kOptMagic.size()) != kOptMagic) {
    throw Error(path + ": not an optimizer state file");
  }
  if (r.Read<uint32_t>() != kOptVersion) {
    throw Error(path + ": unsupported optimizer state version");
  }
  OptimizerState<float> state;
  state.step = r.Read<int64_t>();
  const auto n = r.Read<uint32_t>();
  if (n != net.layers().size()) {
    throw Error(path + ": optimizer state does not match the model");
  }
  for (const auto& layer : net.layers()) {
    const auto in = static_cast<int>(layer.weight.cols());
    const auto out = static_cast<int>(layer.weight.rows());
    state.m.push_back(ReadLayer(&r, in, out));
    state.v.push_back(ReadLayer(&r, in, out));
  }
  if (r.remaining() != 0) throw Error(path + ": trailing bytes");
  return state;
}

}  // namespace prak
