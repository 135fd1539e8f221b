#include "emoji/featurizer.hpp"

#include <algorithm>
#include <numeric>

#include "emoji/error.hpp"
#include "emoji/utf8.hpp"

namespace emoji {

void FeaturizerConfig::validate() const {
  if (n_buckets < (1u << 10) || (n_buckets & (n_buckets - 1)) != 0)
    throw InvalidConfigError("n_buckets must be a power of two >= 1024, got " + std::to_string(n_buckets));
  if (max_tokens == 0) throw InvalidConfigError("max_tokens must be positive");
}

float FeatureVector::total_weight() const noexcept { return std::accumulate(values.begin(), values.end(), 0.0f); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_whitespace(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (utf8::is_punctuation(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      std::string punct;
      utf8::append(punct, cp);
      tokens.push_back(std::move(punct));
    } else {
      utf8::append(current, utf8::to_lower(cp));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

FeatureVector featurize(const FeaturizerConfig& config, std::string_view text) {
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.size() > config.max_tokens) tokens.resize(config.max_tokens);

  std::vector<std::uint32_t> buckets;
  buckets.reserve(tokens.size() * 2);
  const std::uint64_t mask = config.n_buckets - 1;  // power of two
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    buckets.push_back(static_cast<std::uint32_t>(fnv1a64(tokens[i]) & mask));
    if (config.use_bigrams && i + 1 < tokens.size()) {
      std::string bigram = tokens[i];
      bigram.push_back('\x1F');
      bigram += tokens[i + 1];
      buckets.push_back(static_cast<std::uint32_t>(fnv1a64(bigram) & mask));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  FeatureVector fv;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    fv.indices.push_back(buckets[i]);
    fv.values.push_back(static_cast<float>(j - i));
    i = j;
  }
  return fv;
}

}  // namespace emoji
