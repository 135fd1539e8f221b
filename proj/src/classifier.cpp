#include "emoji/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emoji/error.hpp"
#include "emoji/random.hpp"

namespace emoji {

std::string_view to_string(Precision p) noexcept { return p == Precision::kInt8Weights ? "int8_weights" : "float32"; }

float Matrix::at(std::size_t r, std::size_t c) const {
  const std::size_t i = r * cols + c;
  return quantized() ? static_cast<float>(q[i]) * scales[r] : data[i];
}

void ModelArchitecture::validate() const {
  if (embedding_dim == 0) throw InvalidConfigError("embedding_dim must be positive");
  if (hidden_layers > 3) throw InvalidConfigError("hidden_layers must be in 0..3");
  if (hidden_layers > 0 && hidden_dim == 0) throw InvalidConfigError("hidden_dim must be positive");
  if (n_classes == 0) throw InvalidConfigError("n_classes must be positive");
}

std::size_t parameter_count(const ModelArchitecture& arch, const FeaturizerConfig& featurizer) {
  std::size_t n = std::size_t{featurizer.n_buckets} * arch.embedding_dim;
  std::size_t in = arch.embedding_dim;
  for (std::uint32_t l = 0; l < arch.hidden_layers; ++l) {
    n += std::size_t{arch.hidden_dim} * in + arch.hidden_dim;
    in = arch.hidden_dim;
  }
  return n + std::size_t{arch.n_classes} * in + arch.n_classes;
}

std::size_t ClassifierModel::parameter_count() const noexcept {
  return emoji::parameter_count(architecture, featurizer);
}

void ClassifierModel::validate() const {
  architecture.validate();
  featurizer.validate();
  if (class_ids.size() != architecture.n_classes) throw Error("class list length does not match n_classes");
  const bool q = precision == Precision::kInt8Weights;
  auto check = [q](const Matrix& m, std::uint32_t rows, std::uint32_t cols, const char* name) {
    const std::size_t n = std::size_t{rows} * cols;
    const bool ok = m.rows == rows && m.cols == cols &&
                    (q ? (m.q.size() == n && m.scales.size() == rows && m.data.empty())
                       : (m.data.size() == n && m.q.empty() && m.scales.empty()));
    if (!ok) throw Error(std::string("tensor shape mismatch: ") + name);
  };
  check(embedding, featurizer.n_buckets, architecture.embedding_dim, "embedding");
  if (hidden.size() != architecture.hidden_layers) throw Error("hidden layer count mismatch");
  std::uint32_t in = architecture.embedding_dim;
  for (const auto& h : hidden) {
    check(h.weights, architecture.hidden_dim, in, "hidden");
    if (h.bias.size() != architecture.hidden_dim) throw Error("tensor shape mismatch: hidden bias");
    in = architecture.hidden_dim;
  }
  check(output.weights, architecture.n_classes, in, "output");
  if (output.bias.size() != architecture.n_classes) throw Error("tensor shape mismatch: output bias");
}

ClassifierModel init_model(const ModelArchitecture& arch_in, const FeaturizerConfig& featurizer,
                           std::vector<EmojiId> class_ids, std::uint64_t seed) {
  ModelArchitecture arch = arch_in;
  arch.n_classes = static_cast<std::uint32_t>(class_ids.size());
  arch.validate();
  featurizer.validate();

  Rng rng(seed);
  ClassifierModel model;
  model.architecture = arch;
  model.featurizer = featurizer;
  model.class_ids = std::move(class_ids);
  model.embedding = Matrix(featurizer.n_buckets, arch.embedding_dim);
  const double emb_range = 1.0 / std::sqrt(static_cast<double>(arch.embedding_dim));
  for (float& v : model.embedding.data) v = static_cast<float>(rng.uniform(-emb_range, emb_range));

  auto dense = [&rng](std::uint32_t out, std::uint32_t in) {
    DenseLayer layer{Matrix(out, in), std::vector<float>(out, 0.0f)};
    const double limit = std::sqrt(6.0 / (in + out));
    for (float& v : layer.weights.data) v = static_cast<float>(rng.uniform(-limit, limit));
    return layer;
  };
  std::uint32_t in = arch.embedding_dim;
  for (std::uint32_t l = 0; l < arch.hidden_layers; ++l) {
    model.hidden.push_back(dense(arch.hidden_dim, in));
    in = arch.hidden_dim;
  }
  model.output = dense(arch.n_classes, in);
  return model;
}

// ---------------------------------------------------------------------------
// Inference

namespace {

void matvec(const DenseLayer& layer, const std::vector<float>& in, std::vector<float>& out) {
  const Matrix& w = layer.weights;
  out.resize(w.rows);
  if (w.quantized()) {
    for (std::uint32_t r = 0; r < w.rows; ++r) {
      const std::int8_t* row = w.q.data() + std::size_t{r} * w.cols;
      float acc = 0.0f;
      for (std::uint32_t c = 0; c < w.cols; ++c) acc += static_cast<float>(row[c]) * in[c];
      out[r] = acc * w.scales[r] + layer.bias[r];
    }
  } else {
    for (std::uint32_t r = 0; r < w.rows; ++r) {
      const float* row = w.row(r);
      float acc = 0.0f;
      for (std::uint32_t c = 0; c < w.cols; ++c) acc += row[c] * in[c];
      out[r] = acc + layer.bias[r];
    }
  }
}

std::vector<float> logits(const ClassifierModel& model, const FeatureVector& fv) {
  const std::uint32_t dim = model.embedding.cols;
  std::vector<float> x(dim, 0.0f);
  const float total = fv.total_weight();
  if (total > 0.0f) {
    for (std::size_t i = 0; i < fv.indices.size(); ++i) {
      const std::size_t r = fv.indices[i];
      const float v = fv.values[i];
      if (model.embedding.quantized()) {
        const std::int8_t* row = model.embedding.q.data() + r * dim;
        const float s = model.embedding.scales[r];
        for (std::uint32_t d = 0; d < dim; ++d) x[d] += v * (static_cast<float>(row[d]) * s);
      } else {
        const float* row = model.embedding.row(r);
        for (std::uint32_t d = 0; d < dim; ++d) x[d] += v * row[d];
      }
    }
    for (float& e : x) e /= total;
  }
  std::vector<float> h;
  for (const auto& layer : model.hidden) {
    matvec(layer, x, h);
    for (float& e : h) e = std::tanh(e);
    x.swap(h);
  }
  std::vector<float> z;
  matvec(model.output, x, z);
  return z;
}

}  // namespace

std::vector<double> class_probabilities(const ClassifierModel& model, const FeatureVector& features) {
  const std::vector<float> z = logits(model, features);
  const double max = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (p[i] = std::exp(static_cast<double>(z[i]) - max));
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> class_probabilities(const ClassifierModel& model, std::string_view text) {
  return class_probabilities(model, featurize(model.featurizer, text));
}

Prediction rank_distribution(const ClassifierModel& model, const std::vector<double>& probs, std::size_t k) {
  if (k == 0 || k > probs.size())
    throw InvalidConfigError("k must be in 1.." + std::to_string(probs.size()) + ", got " + std::to_string(k));
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&probs](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  Prediction pred;
  pred.ranked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) pred.ranked.push_back({model.class_ids[order[i]], probs[order[i]], order[i]});
  return pred;
}

Prediction predict(const ClassifierModel& model, std::string_view text, std::size_t k) {
  return rank_distribution(model, class_probabilities(model, text), k);
}

// ---------------------------------------------------------------------------
// Quantization

RowQuantization quantize_row(const float* values, std::size_t n) {
  RowQuantization out;
  out.q.resize(n);
  float max_abs = 0.0f;
  for (std::size_t i = 0; i < n; ++i) max_abs = std::max(max_abs, std::fabs(values[i]));
  out.scale = max_abs > 0.0f ? max_abs / 127.0f : 1.0f;
  // Divide by the stored float scale so dequantization stays within scale/2.
  const double scale = out.scale;
  for (std::size_t i = 0; i < n; ++i) {
    // std::round rounds half away from zero.
    const double r = std::round(static_cast<double>(values[i]) / scale);
    out.q[i] = static_cast<std::int8_t>(std::clamp(r, -127.0, 127.0));
  }
  return out;
}

namespace {

Matrix quantize_matrix(const Matrix& m) {
  Matrix out;
  out.rows = m.rows;
  out.cols = m.cols;
  out.q.resize(m.data.size());
  out.scales.resize(m.rows);
  for (std::uint32_t r = 0; r < m.rows; ++r) {
    RowQuantization row = quantize_row(m.row(r), m.cols);
    std::copy(row.q.begin(), row.q.end(), out.q.begin() + static_cast<std::ptrdiff_t>(std::size_t{r} * m.cols));
    out.scales[r] = row.scale;
  }
  return out;
}

}  // namespace

ClassifierModel quantize(const ClassifierModel& model) {
  if (model.precision != Precision::kFloat32) throw InvalidPrecisionError("model is already int8-quantized");
  ClassifierModel out;
  out.architecture = model.architecture;
  out.featurizer = model.featurizer;
  out.class_ids = model.class_ids;
  out.precision = Precision::kInt8Weights;
  out.embedding = quantize_matrix(model.embedding);
  for (const auto& h : model.hidden) out.hidden.push_back({quantize_matrix(h.weights), h.bias});
  out.output = {quantize_matrix(model.output.weights), model.output.bias};
  return out;
}

}  // namespace emoji
