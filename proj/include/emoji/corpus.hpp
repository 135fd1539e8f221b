#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace emoji {

/// One emoji class, identified by its exact code point sequence.
/// Construction trims surrounding whitespace and rejects empty values.
class EmojiId {
 public:
  EmojiId() = default;
  explicit EmojiId(std::string_view codepoints);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  // UTF-8 byte order equals code point order.
  friend auto operator<=>(const EmojiId&, const EmojiId&) = default;

 private:
  std::string value_;
};

enum class Origin { kHuman, kSynthetic };

std::string_view to_string(Origin origin) noexcept;
Origin origin_from_string(std::string_view s);  // throws emoji::Error

struct LabeledExample {
  std::string text;
  EmojiId label;
  Origin origin = Origin::kHuman;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Emoji classes ordered by descending count, ties by ascending code points.
/// The position of a class is its class id.
class EmojiVocabulary {
 public:
  struct Entry {
    EmojiId emoji;
    std::uint64_t count = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  EmojiVocabulary() = default;
  /// Sorts `entries` into canonical order. Throws on duplicate emojis.
  explicit EmojiVocabulary(std::vector<Entry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const EmojiId& emoji(std::size_t class_id) const { return entries_.at(class_id).emoji; }
  std::uint64_t count(std::size_t class_id) const { return entries_.at(class_id).count; }
  std::uint64_t total() const noexcept;

  /// Class id of `e`, or -1.
  std::ptrdiff_t find(const EmojiId& e) const;
  bool contains(const EmojiId& e) const { return find(e) >= 0; }

  std::vector<EmojiId> classes() const;

  friend bool operator==(const EmojiVocabulary& a, const EmojiVocabulary& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Labeled examples plus the vocabulary of their label frequencies.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<LabeledExample> examples);

  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  const EmojiVocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.examples_ == b.examples_; }

 private:
  std::vector<LabeledExample> examples_;
  EmojiVocabulary vocabulary_;
};

/// Top `max_classes` labels by frequency. Throws EmptyCorpusError on empty input.
EmojiVocabulary build_vocabulary(const std::vector<LabeledExample>& examples, std::size_t max_classes);

struct CoveragePoint {
  std::size_t k = 0;
  double coverage = 0.0;
};

/// Fraction of examples explained by the top-K classes, for K = 1..|classes|.
/// The last point is exactly 1.0.
std::vector<CoveragePoint> coverage_curve(const EmojiVocabulary& vocab);

/// Bottom ceil(n/4) class ids of an n-class vocabulary.
std::vector<std::size_t> tail_quartile_ids(std::size_t n_classes);

/// Keeps only examples whose label is in `vocab`.
Corpus restrict_to(const Corpus& corpus, const EmojiVocabulary& vocab);

/// Deterministic split; `test_fraction` of examples go to the second corpus.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed);

/// One example per emoji occurrence in `text`, with every emoji stripped from
/// the example text. Texts that are empty after stripping yield nothing.
std::vector<LabeledExample> examples_from_text(std::string_view text, Origin origin = Origin::kHuman);

// Line-delimited JSON records {"text", "emoji", "origin"}.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus parse_corpus(std::string_view content);
std::string serialize_corpus(const Corpus& corpus);

// JSON array of {"emoji", "count"} in class-id order.
EmojiVocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const EmojiVocabulary& vocab, const std::filesystem::path& path);

struct ZipfCorpusOptions {
  std::size_t n_classes = 200;
  std::size_t n_examples = 50000;
  double zipf_exponent = 1.2;
  std::uint64_t seed = 0;
  /// Probability that a generated text mentions one of its class keywords;
  /// the rest are built from shared filler only.
  double keyword_rate = 0.7;
};

/// Probability of the class at 1-based `rank` under Zipf(`exponent`) over `n` classes.
std::vector<double> zipf_probabilities(std::size_t n_classes, double exponent);

/// Synthetic imbalanced corpus: class of rank r drawn with probability
/// proportional to r^-exponent, text drawn from a per-class template bank
/// built around the class keywords of the bundled emoji lexicon.
Corpus generate_zipf_corpus(const ZipfCorpusOptions& options);

}  // namespace emoji

template <>
struct std::hash<emoji::EmojiId> {
  std::size_t operator()(const emoji::EmojiId& e) const noexcept { return std::hash<std::string>{}(e.str()); }
};
