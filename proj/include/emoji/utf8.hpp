#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emoji::utf8 {

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8. Invalid or truncated sequences decode to U+FFFD, one per bad byte.
std::u32string decode(std::string_view bytes);
void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

/// Simple one-to-one lowercase mapping covering Latin, Greek, Cyrillic,
/// Armenian and fullwidth Latin. Other code points map to themselves.
char32_t to_lower(char32_t cp) noexcept;

bool is_whitespace(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;

/// Code points that start or continue an emoji presentation sequence.
bool is_emoji_base(char32_t cp) noexcept;

/// Splits `text` into maximal emoji sequences and the text between them.
/// ZWJ chains, variation selectors, skin-tone modifiers, keycaps, tag
/// sequences and regional-indicator pairs stay in one sequence.
struct EmojiSplit {
  std::vector<std::string> emojis;
  std::string remainder;  // text with every emoji sequence removed
};
EmojiSplit split_emojis(std::string_view text);

std::string trim(std::string_view s);
std::size_t length(std::string_view bytes);  // in code points

}  // namespace emoji::utf8
