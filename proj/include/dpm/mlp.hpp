// Copyright 2026 The Deep Pacejka Authors
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

// Feed-forward network: tanh hidden layers, identity output, batched over
// matrix columns, with an exact reverse-mode pass.

#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dpm {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MlpGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::vector<double> Flatten() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.insert(out.end(), weights[l].data(),
                 weights[l].data() + weights[l].size());
      out.insert(out.end(), biases[l].data(),
                 biases[l].data() + biases[l].size());
    }
    return out;
  }
};

struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;  // [l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;   // [l]: sizes[l+1]

  static Mlp Zeros(std::vector<int> sizes) {
    if (sizes.size() < 2) {
      throw DimensionMismatch("Mlp needs at least input and output sizes");
    }
    Mlp net;
    net.layer_sizes = std::move(sizes);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
      if (net.layer_sizes[l] <= 0 || net.layer_sizes[l + 1] <= 0) {
        throw DimensionMismatch("Mlp layer sizes must be positive");
      }
      net.weights.push_back(
          Eigen::MatrixXd::Zero(net.layer_sizes[l + 1], net.layer_sizes[l]));
      net.biases.push_back(Eigen::VectorXd::Zero(net.layer_sizes[l + 1]));
    }
    return net;
  }

  // Glorot-uniform weights, zero biases.
  template <typename Rng>
  static Mlp Random(std::vector<int> sizes, Rng& rng) {
    Mlp net = Zeros(std::move(sizes));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      auto& w = net.weights[l];
      const double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      // Column-major fill order is part of the seed contract.
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    }
    return net;
  }

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return weights.size(); }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      n += weights[l].size() + biases[l].size();
    }
    return n;
  }

  MlpGrad ZeroGrad() const {
    MlpGrad g;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      g.weights.push_back(Eigen::MatrixXd::Zero(weights[l].rows(),
                                                weights[l].cols()));
      g.biases.push_back(Eigen::VectorXd::Zero(biases[l].size()));
    }
    return g;
  }

  // Parameters in the same layout as MlpGrad::Flatten().
  std::vector<double> Flatten() const {
    std::vector<double> out;
    out.reserve(num_params());
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.insert(out.end(), weights[l].data(),
                 weights[l].data() + weights[l].size());
      out.insert(out.end(), biases[l].data(),
                 biases[l].data() + biases[l].size());
    }
    return out;
  }

  void Unflatten(std::span<const double> flat) {
    if (flat.size() != num_params()) {
      throw DimensionMismatch("Mlp::Unflatten: wrong parameter count");
    }
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].size(); ++i) {
        weights[l].data()[i] = flat[pos++];
      }
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) {
        biases[l].data()[i] = flat[pos++];
      }
    }
  }

  bool AllFinite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
  }

  bool operator==(const Mlp& o) const {
    if (layer_sizes != o.layer_sizes) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
    }
    return true;
  }
};

// Per-layer activations of a batched forward pass. post[0] is the input;
// pre[l] is the affine output of layer l and post[l+1] its activation.
struct MlpCache {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
};

struct MlpForward {
  Eigen::MatrixXd output;
  MlpCache cache;
};

// Batched forward: one sample per column of `input`.
inline MlpForward mlp_forward(const Mlp& net, const Eigen::MatrixXd& input) {
  if (input.rows() != net.input_size()) {
    throw DimensionMismatch("mlp_forward: expected input of size " +
                            std::to_string(net.input_size()) + ", got " +
                            std::to_string(input.rows()));
  }
  MlpForward f;
  f.cache.post.push_back(input);
  const std::size_t n = net.num_layers();
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::MatrixXd z = net.weights[l] * f.cache.post.back();
    z.colwise() += net.biases[l];
    f.cache.pre.push_back(z);
    if (l + 1 < n) {
      f.cache.post.push_back(z.array().tanh().matrix());
    } else {
      f.cache.post.push_back(std::move(z));
    }
  }
  f.output = f.cache.post.back();
  return f;
}

inline MlpForward mlp_forward(const Mlp& net, std::span<const double> input) {
  Eigen::MatrixXd col(static_cast<Eigen::Index>(input.size()), 1);
  for (std::size_t i = 0; i < input.size(); ++i) {
    col(static_cast<Eigen::Index>(i), 0) = input[i];
  }
  return mlp_forward(net, col);
}

struct MlpBackward {
  MlpGrad grad;                // summed over the batch
  Eigen::MatrixXd grad_input;  // per sample
};

inline MlpBackward mlp_backward(const Mlp& net, const MlpCache& cache,
                                const Eigen::MatrixXd& grad_output) {
  const std::size_t n = net.num_layers();
  if (cache.pre.size() != n || cache.post.size() != n + 1 ||
      grad_output.rows() != net.output_size() ||
      grad_output.cols() != cache.post.back().cols()) {
    throw DimensionMismatch("mlp_backward: cache/gradient shape mismatch");
  }
  MlpBackward b;
  b.grad.weights.resize(n);
  b.grad.biases.resize(n);
  Eigen::MatrixXd delta = grad_output;  // dL/d pre[n-1]
  for (std::size_t li = n; li-- > 0;) {
    b.grad.weights[li] = delta * cache.post[li].transpose();
    b.grad.biases[li] = delta.rowwise().sum();
    Eigen::MatrixXd upstream = net.weights[li].transpose() * delta;
    if (li > 0) {
      // tanh'(z) = 1 - tanh(z)^2, with tanh(z) stored in post[li].
      delta = upstream.array() *
              (1.0 - cache.post[li].array().square());
    } else {
      b.grad_input = std::move(upstream);
    }
  }
  return b;
}

}  // namespace dpm
