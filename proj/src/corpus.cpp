#include "emoji/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "emoji/error.hpp"
#include "emoji/lexicon.hpp"
#include "emoji/random.hpp"
#include "emoji/utf8.hpp"

namespace emoji {

EmojiId::EmojiId(std::string_view codepoints) : value_(utf8::trim(codepoints)) {
  if (value_.empty()) throw Error("empty emoji id");
}

std::string_view to_string(Origin origin) noexcept {
  return origin == Origin::kSynthetic ? "synthetic" : "human";
}

Origin origin_from_string(std::string_view s) {
  if (s == "human") return Origin::kHuman;
  if (s == "synthetic") return Origin::kSynthetic;
  throw Error("unknown origin '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// EmojiVocabulary

EmojiVocabulary::EmojiVocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.emoji < b.emoji;
  });
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].emoji.str(), i).second)
      throw Error("duplicate emoji in vocabulary: " + entries_[i].emoji.str());
  }
}

std::uint64_t EmojiVocabulary::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& e : entries_) sum += e.count;
  return sum;
}

std::ptrdiff_t EmojiVocabulary::find(const EmojiId& e) const {
  const auto it = index_.find(e.str());
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<EmojiId> EmojiVocabulary::classes() const {
  std::vector<EmojiId> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.emoji);
  return out;
}

namespace {

std::vector<EmojiVocabulary::Entry> count_labels(const std::vector<LabeledExample>& examples) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& ex : examples) ++counts[ex.label.str()];
  std::vector<EmojiVocabulary::Entry> entries;
  entries.reserve(counts.size());
  for (auto& [emoji, count] : counts) entries.push_back({EmojiId(emoji), count});
  return entries;
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<LabeledExample> examples)
    : examples_(std::move(examples)), vocabulary_(count_labels(examples_)) {}

EmojiVocabulary build_vocabulary(const std::vector<LabeledExample>& examples, std::size_t max_classes) {
  if (examples.empty()) throw EmptyCorpusError("cannot build a vocabulary from zero examples");
  if (max_classes == 0) throw InvalidConfigError("max_classes must be positive");
  EmojiVocabulary full(count_labels(examples));
  std::vector<EmojiVocabulary::Entry> top(full.entries().begin(),
                                          full.entries().begin() + std::min(max_classes, full.size()));
  return EmojiVocabulary(std::move(top));
}

std::vector<CoveragePoint> coverage_curve(const EmojiVocabulary& vocab) {
  const std::uint64_t total = vocab.total();
  if (total == 0) throw EmptyCorpusError("coverage of a vocabulary with zero observations");
  std::vector<CoveragePoint> curve;
  curve.reserve(vocab.size());
  std::uint64_t running = 0;
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    running += vocab.count(k);
    // Integer prefix sums keep the curve monotone and the last point exact.
    curve.push_back({k + 1, static_cast<double>(running) / static_cast<double>(total)});
  }
  return curve;
}

std::vector<std::size_t> tail_quartile_ids(std::size_t n_classes) {
  const std::size_t tail = (n_classes + 3) / 4;
  std::vector<std::size_t> ids;
  for (std::size_t i = n_classes - tail; i < n_classes; ++i) ids.push_back(i);
  return ids;
}

Corpus restrict_to(const Corpus& corpus, const EmojiVocabulary& vocab) {
  std::vector<LabeledExample> kept;
  for (const auto& ex : corpus.examples())
    if (vocab.contains(ex.label)) kept.push_back(ex);
  return Corpus(std::move(kept));
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw InvalidConfigError("test_fraction must be in [0,1]");
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(order.size())));
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_test ? test : train).push_back(corpus.examples()[order[i]]);
  return {Corpus(std::move(train)), Corpus(std::move(test))};
}

std::vector<LabeledExample> examples_from_text(std::string_view text, Origin origin) {
  utf8::EmojiSplit split = utf8::split_emojis(text);
  std::string stripped = utf8::trim(split.remainder);
  std::vector<LabeledExample> out;
  if (stripped.empty()) return out;
  for (const auto& e : split.emojis) out.push_back({stripped, EmojiId(e), origin});
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic Zipf corpus

std::vector<double> zipf_probabilities(std::size_t n_classes, double exponent) {
  std::vector<double> p(n_classes);
  double norm = 0.0;
  for (std::size_t r = 1; r <= n_classes; ++r) {
    p[r - 1] = std::pow(static_cast<double>(r), -exponent);
    norm += p[r - 1];
  }
  for (double& v : p) v /= norm;
  return p;
}

namespace {

// Filler vocabulary shared by every class; none of these are lexicon tags.
constexpr const char* kFiller[] = {
    "just",  "really", "today",  "so",     "my",    "the",    "this",  "that",   "we",     "you",
    "they",  "again",  "right",  "now",    "honestly", "literally", "with", "about", "still", "maybe",
    "always", "never", "kinda",  "pretty", "much",  "very",   "some",  "our",    "their",  "what",
    "when",  "here",   "there",  "gonna",  "got",   "was",    "is",    "are",    "have",   "had",
    "saw",   "think",  "know",   "feel",   "thing", "stuff",  "guys",  "everyone", "tonight", "tomorrow",
    "weekend", "later", "soon",  "also",   "too",   "and",    "but",   "or",     "for",    "from"};

constexpr const char* kClosers[] = {"", "!", "!!", ".", "...", "?", " haha", " tbh", " rn", " fr"};

std::string make_text(Rng& rng, const LexiconEntry& entry, bool with_keyword) {
  const std::size_t n_filler = 2 + rng.index(5);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_filler; ++i) words.emplace_back(kFiller[rng.index(std::size(kFiller))]);
  if (with_keyword) {
    const std::string& tag = entry.tags[rng.index(entry.tags.size())];
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.index(words.size() + 1)), tag);
  }
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += words[i];
  }
  text += kClosers[rng.index(std::size(kClosers))];
  return text;
}

}  // namespace

Corpus generate_zipf_corpus(const ZipfCorpusOptions& options) {
  if (options.n_classes < 2) throw InvalidConfigError("n_classes must be >= 2");
  if (options.n_examples == 0) throw InvalidConfigError("n_examples must be positive");
  if (!(options.zipf_exponent >= 0.0)) throw InvalidConfigError("zipf_exponent must be non-negative");
  const auto lexicon = emoji_lexicon();
  if (options.n_classes > lexicon.size())
    throw InvalidConfigError("n_classes exceeds the bundled lexicon (" + std::to_string(lexicon.size()) + ")");

  const std::vector<double> p = zipf_probabilities(options.n_classes, options.zipf_exponent);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
  cdf.back() = 1.0;

  Rng rng(options.seed);
  std::vector<LabeledExample> examples;
  examples.reserve(options.n_examples);
  for (std::size_t n = 0; n < options.n_examples; ++n) {
    const double u = rng.uniform();
    const std::size_t cls =
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const LexiconEntry& entry = lexicon[std::min(cls, options.n_classes - 1)];
    const bool with_keyword = rng.bernoulli(options.keyword_rate);
    examples.push_back({make_text(rng, entry, with_keyword), EmojiId(entry.emoji), Origin::kHuman});
  }
  return Corpus(std::move(examples));
}

}  // namespace emoji
