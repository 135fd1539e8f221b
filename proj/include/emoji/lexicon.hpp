#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emoji {

struct LexiconEntry {
  std::string emoji;
  std::vector<std::string> tags;  // one-word, lowercase
};

/// Bundled emoji -> tag dictionary, roughly in descending popularity.
/// Entries past the hand-written table are generated deterministically:
/// unassigned pictographic code points paired with pronounceable pseudo-words.
std::span<const LexiconEntry> emoji_lexicon();

/// Number of hand-written entries at the head of emoji_lexicon().
std::size_t curated_lexicon_size();

std::optional<std::vector<std::string>> lexicon_tags(std::string_view emoji);

}  // namespace emoji
