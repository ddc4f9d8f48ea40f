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

#ifndef PRAK_AM_H_
#define PRAK_AM_H_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "prak/error.h"

namespace prak {

struct AmConfig {
  int input_dim = 299;
  std::vector<int> hidden_dims = {120, 120};
  int output_dim = 44;
  uint64_t seed = 0;

  // input, hidden..., output
  std::vector<int> LayerDims() const;
  void Validate() const;
};

// Weights plus biases over all layers.
int64_t ParamCount(const AmConfig& config);

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 256;
};

template <typename Scalar>
struct AffineLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Matrix weight;  // out x in
  Vector bias;

  bool operator==(const AffineLayer&) const = default;
};

template <typename Scalar>
struct OptimizerState {
  int64_t step = 0;
  std::vector<AffineLayer<Scalar>> m;  // first moments
  std::vector<AffineLayer<Scalar>> v;  // second moments
};

// Affine+ReLU hidden layers, affine+softmax output. Inputs and outputs are
// batches with one example per row.
template <typename Scalar>
class ReluStack {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Layer = AffineLayer<Scalar>;

  ReluStack() = default;

  // He-initialized weights, zero biases.
  explicit ReluStack(const AmConfig& config) : config_(config) {
    config.Validate();
    std::mt19937_64 rng(config.seed);
    const auto dims = config.LayerDims();
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / dims[l]));
      Layer layer;
      layer.weight.resize(dims[l + 1], dims[l]);
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
        layer.weight.data()[i] = static_cast<Scalar>(gauss(rng));
      }
      layer.bias = Vector::Zero(dims[l + 1]);
      layers_.push_back(std::move(layer));
    }
  }

  ReluStack(const AmConfig& config, std::vector<Layer> layers)
      : config_(config), layers_(std::move(layers)) {
    config.Validate();
    const auto dims = config.LayerDims();
    if (layers_.size() + 1 != dims.size()) throw Error("layer count mismatch");
    for (size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].weight.rows() != dims[l + 1] ||
          layers_[l].weight.cols() != dims[l] ||
          layers_[l].bias.size() != dims[l + 1]) {
        throw Error("layer " + std::to_string(l) + " has the wrong shape");
      }
    }
  }

  const AmConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  int input_dim() const { return config_.input_dim; }
  int output_dim() const { return config_.output_dim; }

  bool operator==(const ReluStack& o) const { return layers_ == o.layers_; }

  // Row-wise phone posteriors.
  Matrix Forward(const Matrix& inputs) const {
    std::vector<Matrix> acts;
    return Softmax(Propagate(inputs, &acts));
  }

  // Row-wise log posteriors (log-softmax of the output layer).
  Matrix LogPosteriors(const Matrix& inputs) const {
    std::vector<Matrix> acts;
    return LogSoftmax(Propagate(inputs, &acts));
  }

  // Mean cross-entropy of the batch; gradients into `grads` when non-null.
  Scalar Loss(const Matrix& inputs, const std::vector<int>& targets,
              std::vector<Layer>* grads = nullptr) const {
    CheckTargets(inputs, targets);
    std::vector<Matrix> acts;
    Matrix logp = LogSoftmax(Propagate(inputs, &acts));
    const auto batch = static_cast<Scalar>(inputs.rows());
    Scalar loss = 0;
    for (Eigen::Index r = 0; r < logp.rows(); ++r) loss -= logp(r, targets[r]);
    loss /= batch;
    if (grads == nullptr) return loss;

    // d loss / d logits = (softmax - onehot) / batch
    Matrix delta = logp.array().exp().matrix();
    for (Eigen::Index r = 0; r < delta.rows(); ++r) delta(r, targets[r]) -= 1;
    delta /= batch;
    grads->assign(layers_.size(), Layer{});
    for (size_t l = layers_.size(); l-- > 0;) {
      const Matrix& in = acts[l];
      (*grads)[l].weight = delta.transpose() * in;
      (*grads)[l].bias = delta.colwise().sum().transpose();
      if (l == 0) break;
      Matrix back = delta * layers_[l].weight;
      // ReLU derivative: acts[l] is the post-activation of layer l-1.
      delta = (in.array() > Scalar(0)).select(back, Matrix::Zero(back.rows(), back.cols()));
    }
    return loss;
  }

  OptimizerState<Scalar> NewOptimizerState() const {
    OptimizerState<Scalar> s;
    for (const Layer& l : layers_) {
      Layer z{Matrix::Zero(l.weight.rows(), l.weight.cols()),
              Vector::Zero(l.bias.size())};
      s.m.push_back(z);
      s.v.push_back(z);
    }
    return s;
  }

  // One optimizer update; returns the pre-update mean cross-entropy.
  Scalar TrainStep(const Matrix& inputs, const std::vector<int>& targets,
                   OptimizerState<Scalar>* state,
                   const OptimizerOptions& opts) {
    if (inputs.rows() == 0) throw Error("empty training batch");
    std::vector<Layer> grads;
    const Scalar loss = Loss(inputs, targets, &grads);
    const auto lr = static_cast<Scalar>(opts.learning_rate);
    if (opts.kind == OptimizerKind::kSgd) {
      for (size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].weight -= lr * grads[l].weight;
        layers_[l].bias -= lr * grads[l].bias;
      }
      return loss;
    }
    if (state->m.size() != layers_.size()) *state = NewOptimizerState();
    ++state->step;
    const auto b1 = static_cast<Scalar>(opts.beta1);
    const auto b2 = static_cast<Scalar>(opts.beta2);
    const auto eps = static_cast<Scalar>(opts.epsilon);
    const auto c1 = static_cast<Scalar>(
        1.0 - std::pow(opts.beta1, static_cast<double>(state->step)));
    const auto c2 = static_cast<Scalar>(
        1.0 - std::pow(opts.beta2, static_cast<double>(state->step)));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g.cwiseProduct(g);
      param.array() -= lr * (m.array() / c1) /
                       ((v.array() / c2).sqrt() + eps);
    };
    for (size_t l = 0; l < layers_.size(); ++l) {
      update(layers_[l].weight, state->m[l].weight, state->v[l].weight,
             grads[l].weight);
      update(layers_[l].bias, state->m[l].bias, state->v[l].bias,
             grads[l].bias);
    }
    return loss;
  }

 private:
  // Returns output-layer logits; acts[l] is the input to layer l.
  Matrix Propagate(const Matrix& inputs, std::vector<Matrix>* acts) const {
    if (inputs.cols() != config_.input_dim) {
      throw Error("acoustic model expects " + std::to_string(config_.input_dim) +
                  "-dim input, got " + std::to_string(inputs.cols()));
    }
    if (!inputs.allFinite()) {
      throw Error("non-finite value in acoustic model input (corrupt features)");
    }
    acts->clear();
    acts->push_back(inputs);
    Matrix h = inputs;
    for (size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = h * layers_[l].weight.transpose();
      z.rowwise() += layers_[l].bias.transpose();
      if (l + 1 == layers_.size()) return z;
      h = z.cwiseMax(Scalar(0));
      acts->push_back(h);
    }
    return h;
  }

  static Matrix LogSoftmax(Matrix z) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const Scalar mx = z.row(r).maxCoeff();
      z.row(r).array() -= mx;
      const Scalar lse = std::log(z.row(r).array().exp().sum());
      z.row(r).array() -= lse;
    }
    return z;
  }

  static Matrix Softmax(Matrix z) { return LogSoftmax(std::move(z)).array().exp(); }

  void CheckTargets(const Matrix& inputs, const std::vector<int>& targets) const {
    if (inputs.rows() == 0) throw Error("empty training batch");
    if (static_cast<Eigen::Index>(targets.size()) != inputs.rows()) {
      throw Error("target count does not match batch size");
    }
    for (int t : targets) {
      if (t < 0 || t >= config_.output_dim) {
        throw Error("target index " + std::to_string(t) + " out of range");
      }
    }
  }

  AmConfig config_;
  std::vector<Layer> layers_;
};

using AcousticNet = ReluStack<float>;

// A trained model as stored on disk.
struct AcousticModel {
  AcousticNet net;
  uint64_t inventory_digest = 0;
  std::vector<double> priors;  // per phone; empty when not yet estimated
};

void SaveModel(const std::string& path, const AcousticModel& model);
// Reads a model and checks it was trained for an inventory with `digest`
// and `num_phones` phones.
AcousticModel LoadModel(const std::string& path, uint64_t digest,
                        int num_phones);
// Serialization without file I/O; `what` names the source in errors.
std::string SerializeModel(const AcousticModel& model);
AcousticModel ParseModel(std::string_view bytes, const std::string& what);

void SaveOptimizerState(const std::string& path,
                        const OptimizerState<float>& state);
OptimizerState<float> LoadOptimizerState(const std::string& path,
                                         const AcousticNet& net);

}  // namespace prak

#endif  // PRAK_AM_H_
