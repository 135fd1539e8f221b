#pragma once

// Scalar-generic forward/backward pass of the embedding-bag MLP. Training
// runs it in float; the gradient check runs it in double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "emoji/classifier.hpp"
#include "emoji/featurizer.hpp"

namespace emoji::net {

template <typename T>
struct Dense {
  std::uint32_t rows = 0;  // outputs
  std::uint32_t cols = 0;  // inputs
  std::vector<T> w;        // rows x cols
  std::vector<T> b;        // rows

  Dense() = default;
  Dense(std::uint32_t r, std::uint32_t c) : rows(r), cols(c), w(std::size_t{r} * c, T(0)), b(r, T(0)) {}
};

template <typename T>
struct Params {
  std::uint32_t buckets = 0;
  std::uint32_t dim = 0;
  std::vector<T> embedding;  // buckets x dim
  std::vector<Dense<T>> hidden;
  Dense<T> output;
};

template <typename T>
struct Activations {
  std::vector<T> input;               // mean embedding
  std::vector<std::vector<T>> hidden;  // post-tanh, one per hidden layer
  std::vector<T> probs;               // softmax over classes
};

template <typename T>
Params<T> params_from_model(const ClassifierModel& model) {
  Params<T> p;
  p.buckets = model.embedding.rows;
  p.dim = model.embedding.cols;
  p.embedding.assign(model.embedding.data.begin(), model.embedding.data.end());
  auto copy = [](const DenseLayer& layer) {
    Dense<T> d(layer.weights.rows, layer.weights.cols);
    d.w.assign(layer.weights.data.begin(), layer.weights.data.end());
    d.b.assign(layer.bias.begin(), layer.bias.end());
    return d;
  };
  for (const auto& h : model.hidden) p.hidden.push_back(copy(h));
  p.output = copy(model.output);
  return p;
}

template <typename T>
void params_to_model(const Params<T>& p, ClassifierModel& model) {
  auto to_float = [](const std::vector<T>& src, std::vector<float>& dst) {
    dst.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
  };
  to_float(p.embedding, model.embedding.data);
  for (std::size_t l = 0; l < p.hidden.size(); ++l) {
    to_float(p.hidden[l].w, model.hidden[l].weights.data);
    to_float(p.hidden[l].b, model.hidden[l].bias);
  }
  to_float(p.output.w, model.output.weights.data);
  to_float(p.output.b, model.output.bias);
}

template <typename T>
void affine(const Dense<T>& layer, std::span<const T> in, std::vector<T>& out) {
  out.resize(layer.rows);
  for (std::uint32_t r = 0; r < layer.rows; ++r) {
    const T* row = layer.w.data() + std::size_t{r} * layer.cols;
    T acc = T(0);
    for (std::uint32_t c = 0; c < layer.cols; ++c) acc += row[c] * in[c];
    out[r] = acc + layer.b[r];
  }
}

template <typename T>
void softmax_inplace(std::vector<T>& z) {
  const T max = *std::max_element(z.begin(), z.end());
  T sum = T(0);
  for (T& v : z) {
    v = std::exp(v - max);
    sum += v;
  }
  for (T& v : z) v /= sum;
}

template <typename T>
void forward(const Params<T>& p, const FeatureVector& fv, Activations<T>& act) {
  act.input.assign(p.dim, T(0));
  const T total = static_cast<T>(fv.total_weight());
  if (total > T(0)) {
    for (std::size_t i = 0; i < fv.indices.size(); ++i) {
      const T* row = p.embedding.data() + std::size_t{fv.indices[i]} * p.dim;
      const T v = static_cast<T>(fv.values[i]);
      for (std::uint32_t d = 0; d < p.dim; ++d) act.input[d] += v * row[d];
    }
    for (T& x : act.input) x /= total;
  }
  act.hidden.resize(p.hidden.size());
  std::span<const T> in = act.input;
  for (std::size_t l = 0; l < p.hidden.size(); ++l) {
    affine(p.hidden[l], in, act.hidden[l]);
    for (T& x : act.hidden[l]) x = std::tanh(x);
    in = act.hidden[l];
  }
  affine(p.output, in, act.probs);
  softmax_inplace(act.probs);
}

template <typename T>
T cross_entropy(const Activations<T>& act, std::size_t label) {
  return -std::log(std::max(act.probs[label], std::numeric_limits<T>::min()));
}

/// Dense gradients accumulate into `grad` (same shapes as the params);
/// embedding gradients go to `emb_grad(row)` which returns a dim-length
/// pointer for the given bucket.
template <typename T, typename EmbGrad>
void backward(const Params<T>& p, const FeatureVector& fv, const Activations<T>& act, std::size_t label,
              std::vector<Dense<T>>& hidden_grad, Dense<T>& output_grad, EmbGrad&& emb_grad) {
  std::vector<T> delta(act.probs.begin(), act.probs.end());
  delta[label] -= T(1);

  auto layer_backward = [](const Dense<T>& layer, std::span<const T> in, std::span<const T> d_out,
                           Dense<T>& g, std::vector<T>& d_in) {
    d_in.assign(layer.cols, T(0));
    for (std::uint32_t r = 0; r < layer.rows; ++r) {
      const T dr = d_out[r];
      if (dr == T(0)) continue;
      const T* row = layer.w.data() + std::size_t{r} * layer.cols;
      T* grow = g.w.data() + std::size_t{r} * layer.cols;
      for (std::uint32_t c = 0; c < layer.cols; ++c) {
        grow[c] += dr * in[c];
        d_in[c] += dr * row[c];
      }
      g.b[r] += dr;
    }
  };

  std::vector<T> d_in;
  std::span<const T> last = p.hidden.empty() ? std::span<const T>(act.input) : std::span<const T>(act.hidden.back());
  layer_backward(p.output, last, delta, output_grad, d_in);
  for (std::size_t l = p.hidden.size(); l-- > 0;) {
    std::vector<T> d_pre(d_in.size());
    for (std::size_t i = 0; i < d_in.size(); ++i) d_pre[i] = d_in[i] * (T(1) - act.hidden[l][i] * act.hidden[l][i]);
    std::span<const T> in = l == 0 ? std::span<const T>(act.input) : std::span<const T>(act.hidden[l - 1]);
    layer_backward(p.hidden[l], in, d_pre, hidden_grad[l], d_in);
  }

  const T total = static_cast<T>(fv.total_weight());
  if (total <= T(0)) return;
  for (std::size_t i = 0; i < fv.indices.size(); ++i) {
    T* g = emb_grad(fv.indices[i]);
    const T scale = static_cast<T>(fv.values[i]) / total;
    for (std::uint32_t d = 0; d < p.dim; ++d) g[d] += scale * d_in[d];
  }
}

}  // namespace emoji::net
