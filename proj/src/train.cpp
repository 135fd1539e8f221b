#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "emoji/classifier.hpp"
#include "emoji/error.hpp"
#include "emoji/network.hpp"
#include "emoji/random.hpp"

namespace emoji {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidConfigError("weight_decay must be non-negative");
  if (batch_size == 0) throw InvalidConfigError("batch_size must be positive");
  if (epochs == 0) throw InvalidConfigError("epochs must be positive");
}

namespace {

// Per-batch sparse gradient for embedding rows, kept in first-touch order.
class SparseRows {
 public:
  explicit SparseRows(std::uint32_t dim) : dim_(dim) {}

  float* row(std::uint32_t bucket) {
    auto [it, inserted] = slot_.try_emplace(bucket, static_cast<std::uint32_t>(rows_.size()));
    if (inserted) {
      rows_.push_back(bucket);
      values_.resize(values_.size() + dim_, 0.0f);
    }
    return values_.data() + std::size_t{it->second} * dim_;
  }

  const std::vector<std::uint32_t>& rows() const { return rows_; }
  const float* values(std::size_t i) const { return values_.data() + i * dim_; }

  void clear() {
    slot_.clear();
    rows_.clear();
    values_.clear();
  }

 private:
  std::uint32_t dim_;
  std::unordered_map<std::uint32_t, std::uint32_t> slot_;
  std::vector<std::uint32_t> rows_;
  std::vector<float> values_;
};

void zero(net::Dense<float>& d) {
  std::fill(d.w.begin(), d.w.end(), 0.0f);
  std::fill(d.b.begin(), d.b.end(), 0.0f);
}

// w <- w * keep - lr * g for weights; b <- b - lr * g for biases.
void apply(net::Dense<float>& p, const net::Dense<float>& g, float lr, float keep) {
  for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] = p.w[i] * keep - lr * g.w[i];
  for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= lr * g.b[i];
}

}  // namespace

ClassifierModel train(const Corpus& corpus, const EmojiVocabulary& classes, ModelArchitecture arch,
                      const TrainConfig& cfg, const FeaturizerConfig& featurizer, TrainStats* stats) {
  if (corpus.empty()) throw EmptyCorpusError("training corpus has no examples");
  if (classes.empty()) throw EmptyCorpusError("no classes");
  cfg.validate();
  featurizer.validate();
  if (arch.n_classes != 0 && arch.n_classes != classes.size())
    throw InvalidConfigError("n_classes (" + std::to_string(arch.n_classes) + ") does not match vocabulary size (" +
                             std::to_string(classes.size()) + ")");
  arch.n_classes = static_cast<std::uint32_t>(classes.size());

  std::vector<FeatureVector> features;
  std::vector<std::uint32_t> labels;
  features.reserve(corpus.size());
  labels.reserve(corpus.size());
  for (const auto& ex : corpus.examples()) {
    const std::ptrdiff_t id = classes.find(ex.label);
    if (id < 0) throw UnknownLabelError(ex.label.str());
    features.push_back(featurize(featurizer, ex.text));
    labels.push_back(static_cast<std::uint32_t>(id));
  }

  ClassifierModel model = init_model(arch, featurizer, classes.classes(), cfg.seed);
  net::Params<float> params = net::params_from_model<float>(model);

  std::vector<net::Dense<float>> hidden_grad;
  for (const auto& h : params.hidden) hidden_grad.emplace_back(h.rows, h.cols);
  net::Dense<float> output_grad(params.output.rows, params.output.cols);
  SparseRows emb_grad(params.dim);

  const auto lr = static_cast<float>(cfg.learning_rate);
  const double keep_d = 1.0 - cfg.learning_rate * cfg.weight_decay;
  const auto keep = static_cast<float>(keep_d);
  // Decay steps already applied to each embedding row; rows catch up when touched.
  std::vector<std::uint64_t> decayed(params.buckets, 0);
  auto catch_up = [&](std::uint32_t bucket, std::uint64_t step) {
    const std::uint64_t missing = step - decayed[bucket];
    if (missing == 0) return;
    const auto factor = static_cast<float>(std::pow(keep_d, static_cast<double>(missing)));
    float* row = params.embedding.data() + std::size_t{bucket} * params.dim;
    for (std::uint32_t d = 0; d < params.dim; ++d) row[d] *= factor;
    decayed[bucket] = step;
  };

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed ^ 0x5DEECE66DULL);
  net::Activations<float> act;
  std::uint64_t step = 0;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& g : hidden_grad) zero(g);
      zero(output_grad);
      emb_grad.clear();

      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t ex = order[i];
        net::forward(params, features[ex], act);
        batch_loss += net::cross_entropy(act, labels[ex]);
        net::backward(params, features[ex], act, labels[ex], hidden_grad, output_grad,
                      [&emb_grad](std::uint32_t bucket) { return emb_grad.row(bucket); });
      }
      if (!std::isfinite(batch_loss))
        throw TrainingDivergedError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                    std::to_string(step) + "; lower the learning rate");
      epoch_loss += batch_loss;

      const float step_lr = lr / static_cast<float>(end - start);
      for (std::size_t l = 0; l < params.hidden.size(); ++l) apply(params.hidden[l], hidden_grad[l], step_lr, keep);
      apply(params.output, output_grad, step_lr, keep);
      for (std::size_t i = 0; i < emb_grad.rows().size(); ++i) {
        const std::uint32_t bucket = emb_grad.rows()[i];
        catch_up(bucket, step);
        float* row = params.embedding.data() + std::size_t{bucket} * params.dim;
        const float* g = emb_grad.values(i);
        for (std::uint32_t d = 0; d < params.dim; ++d) row[d] = row[d] * keep - step_lr * g[d];
        decayed[bucket] = step + 1;
      }
    }
    if (stats != nullptr) stats->epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  for (std::uint32_t bucket = 0; bucket < params.buckets; ++bucket) catch_up(bucket, step);

  net::params_to_model(params, model);
  return model;
}

ClassifierModel train(const Corpus& corpus, ModelArchitecture arch, const TrainConfig& cfg,
                      const FeaturizerConfig& featurizer, TrainStats* stats) {
  if (corpus.empty()) throw EmptyCorpusError("training corpus has no examples");
  return train(corpus, corpus.vocabulary(), arch, cfg, featurizer, stats);
}

}  // namespace emoji
