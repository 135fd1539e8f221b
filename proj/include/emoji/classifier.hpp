#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emoji/corpus.hpp"
#include "emoji/featurizer.hpp"

namespace emoji {

struct ModelArchitecture {
  std::uint32_t embedding_dim = 64;
  std::uint32_t hidden_layers = 1;  // 0..3
  std::uint32_t hidden_dim = 128;
  std::uint32_t n_classes = 0;

  void validate() const;
  friend bool operator==(const ModelArchitecture&, const ModelArchitecture&) = default;
};

enum class Precision { kFloat32, kInt8Weights };
std::string_view to_string(Precision p) noexcept;

/// Row-major matrix. Dense layers store [out x in] so each row is one
/// output unit; the embedding table stores [bucket x dim].
struct Matrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;  // float32 weights, empty when quantized
  std::vector<std::int8_t> q;  // int8 weights, empty when float
  std::vector<float> scales;   // one per row, present iff quantized

  Matrix() = default;
  Matrix(std::uint32_t r, std::uint32_t c) : rows(r), cols(c), data(std::size_t{r} * c, 0.0f) {}

  bool quantized() const noexcept { return !q.empty(); }
  float* row(std::size_t r) { return data.data() + r * cols; }
  const float* row(std::size_t r) const { return data.data() + r * cols; }
  /// Element value, dequantizing when needed.
  float at(std::size_t r, std::size_t c) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct DenseLayer {
  Matrix weights;
  std::vector<float> bias;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class ClassifierModel {
 public:
  ModelArchitecture architecture;
  FeaturizerConfig featurizer;
  std::vector<EmojiId> class_ids;
  Matrix embedding;
  std::vector<DenseLayer> hidden;  // hidden_layers entries, tanh
  DenseLayer output;               // n_classes x (hidden_dim or embedding_dim)
  Precision precision = Precision::kFloat32;

  std::size_t n_classes() const noexcept { return class_ids.size(); }
  std::size_t parameter_count() const noexcept;
  /// Checks tensor shapes against the architecture. Throws emoji::Error.
  void validate() const;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

/// Closed-form parameter count for an architecture.
std::size_t parameter_count(const ModelArchitecture& arch, const FeaturizerConfig& featurizer);

/// Randomly initialized float model (uniform +-1/sqrt(dim) embeddings, Xavier
/// dense layers, zero biases).
ClassifierModel init_model(const ModelArchitecture& arch, const FeaturizerConfig& featurizer,
                           std::vector<EmojiId> class_ids, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 2e-4;
  double weight_decay = 0.01;
  std::uint32_t batch_size = 256;
  std::uint32_t epochs = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Minibatch SGD with decoupled weight decay on weight matrices (not
/// biases). Classes are the corpus vocabulary in class-id order.
ClassifierModel train(const Corpus& corpus, ModelArchitecture arch, const TrainConfig& cfg,
                      const FeaturizerConfig& featurizer = {}, TrainStats* stats = nullptr);

/// Same, with an explicit class list. Throws UnknownLabelError if an
/// example label is not in `classes`.
ClassifierModel train(const Corpus& corpus, const EmojiVocabulary& classes, ModelArchitecture arch,
                      const TrainConfig& cfg, const FeaturizerConfig& featurizer = {},
                      TrainStats* stats = nullptr);

struct Prediction {
  struct Entry {
    EmojiId emoji;
    double probability = 0.0;
    std::size_t class_id = 0;
  };
  std::vector<Entry> ranked;  // descending probability, ties by class id
};

/// Softmax over all classes, by class id.
std::vector<double> class_probabilities(const ClassifierModel& model, std::string_view text);
std::vector<double> class_probabilities(const ClassifierModel& model, const FeatureVector& features);

/// Top-k classes. Throws InvalidConfigError when k is 0 or exceeds n_classes.
Prediction predict(const ClassifierModel& model, std::string_view text, std::size_t k);

/// Orders a full distribution into a Prediction truncated to k.
Prediction rank_distribution(const ClassifierModel& model, const std::vector<double>& probs, std::size_t k);

struct RowQuantization {
  std::vector<std::int8_t> q;
  float scale = 1.0f;
};

/// Symmetric int8: scale = max|x| / 127 (1 for an all-zero row),
/// q = round_half_away(x / scale) clamped to [-127, 127].
RowQuantization quantize_row(const float* values, std::size_t n);

/// Weight-only int8 copy of a float model. Biases stay float32.
/// Throws InvalidPrecisionError on an already quantized model.
ClassifierModel quantize(const ClassifierModel& model);

// Container: "EMOJ", version byte, u32 LE metadata length, UTF-8 JSON
// metadata with the tensor directory, then little-endian tensor blobs.
inline constexpr std::uint8_t kContainerVersion = 1;
std::vector<std::uint8_t> serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(const std::vector<std::uint8_t>& bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

/// Hex FNV-1a 64 of the container bytes.
std::string model_version(const std::vector<std::uint8_t>& container);

struct ModelSizeReport {
  std::size_t bytes_on_disk = 0;
  std::size_t parameter_count = 0;
  Precision precision = Precision::kFloat32;
};
ModelSizeReport model_size_report(const ClassifierModel& model);

}  // namespace emoji
