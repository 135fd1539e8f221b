#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emoji {

inline constexpr std::string_view kFeatureHashName = "fnv1a64";

struct FeaturizerConfig {
  std::uint32_t n_buckets = 1u << 18;  // power of two, >= 2^10
  bool use_bigrams = true;
  std::uint32_t max_tokens = 50;

  /// Throws InvalidConfigError when the invariants do not hold.
  void validate() const;

  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

/// Sparse bag of hashed n-grams. Indices strictly increasing; values are
/// occurrence counts.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<float> values;

  bool empty() const noexcept { return indices.empty(); }
  std::size_t size() const noexcept { return indices.size(); }
  float total_weight() const noexcept;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lowercases, then splits on whitespace and punctuation. Every punctuation
/// code point is its own token.
std::vector<std::string> tokenize(std::string_view text);

/// tokenize -> truncate to max_tokens -> hash unigrams and adjacent bigrams
/// (t1 0x1F t2) with FNV-1a 64 -> bucket = hash mod n_buckets.
FeatureVector featurize(const FeaturizerConfig& config, std::string_view text);

}  // namespace emoji
