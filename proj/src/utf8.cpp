#include "emoji/utf8.hpp"

#include <algorithm>

namespace emoji::utf8 {

namespace {

// Decodes one code point at `i`; sets `len` to the bytes consumed (>= 1).
char32_t next(std::string_view bytes, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(bytes[i]);
  len = 1;
  if (b0 < 0x80) return b0;
  std::size_t extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3, cp = b0 & 0x07, min = 0x10000;
  } else {
    return kReplacement;
  }
  if (i + extra >= bytes.size()) return kReplacement;
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(bytes[i + k]);
    if ((b & 0xC0) != 0x80) return kReplacement;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
  len = extra + 1;
  return cp;
}

}  // namespace

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t len = 0;
  for (std::size_t i = 0; i < bytes.size(); i += len) out.push_back(next(bytes, i, len));
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

char32_t to_lower(char32_t cp) noexcept {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  // Latin-1
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 0x69;
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  // Greek
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48A && cp <= 0x4BF)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x4D0 && cp <= 0x52F) return (cp % 2 == 0) ? cp + 1 : cp;
  // Armenian
  if (cp >= 0x531 && cp <= 0x556) return cp + 0x30;
  // Latin Extended Additional
  if (cp >= 0x1E00 && cp <= 0x1E95) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x1EA0 && cp <= 0x1EFF) return (cp % 2 == 0) ? cp + 1 : cp;
  // Fullwidth Latin
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
  return cp;
}

bool is_whitespace(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punctuation(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x37E: case 0x387: case 0x55D: case 0x589: case 0x5BE:
      return true;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  if ((cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0x3014 && cp <= 0x301F)) return true;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
      (cp >= 0xFF5B && cp <= 0xFF65))
    return true;
  return false;
}

bool is_emoji_base(char32_t cp) noexcept {
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return true;
  if (cp >= 0x2600 && cp <= 0x27BF) return true;
  if (cp >= 0x2300 && cp <= 0x23FF) return true;
  if (cp >= 0x2B00 && cp <= 0x2BFF) return true;
  if (cp >= 0x2190 && cp <= 0x21FF) return true;
  if (cp >= 0x25A0 && cp <= 0x25FF) return true;
  switch (cp) {
    case 0xA9: case 0xAE: case 0x203C: case 0x2049: case 0x2122: case 0x2139:
    case 0x3030: case 0x303D: case 0x3297: case 0x3299:
      return true;
    default:
      return false;
  }
}

namespace {

bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
bool is_keycap_base(char32_t cp) { return (cp >= '0' && cp <= '9') || cp == '#' || cp == '*'; }
bool is_modifier(char32_t cp) {
  return cp == 0xFE0F || cp == 0xFE0E || cp == 0x20E3 || (cp >= 0x1F3FB && cp <= 0x1F3FF) ||
         (cp >= 0xE0020 && cp <= 0xE007F);
}

// Length of the emoji sequence starting at `i`, or 0 if none starts there.
std::size_t emoji_run(const std::u32string& cps, std::size_t i) {
  const std::size_t n = cps.size();
  if (is_keycap_base(cps[i])) {
    std::size_t j = i + 1;
    if (j < n && cps[j] == 0xFE0F) ++j;
    if (j < n && cps[j] == 0x20E3) return j + 1 - i;
    return 0;
  }
  if (is_regional_indicator(cps[i])) {
    if (i + 1 < n && is_regional_indicator(cps[i + 1])) return 2;
    return 1;
  }
  if (!is_emoji_base(cps[i])) return 0;
  std::size_t j = i + 1;
  for (;;) {
    while (j < n && is_modifier(cps[j])) ++j;
    if (j + 1 < n && cps[j] == 0x200D && is_emoji_base(cps[j + 1])) {
      j += 2;
      continue;
    }
    break;
  }
  return j - i;
}

}  // namespace

EmojiSplit split_emojis(std::string_view text) {
  EmojiSplit result;
  const std::u32string cps = decode(text);
  std::u32string rest;
  std::size_t i = 0;
  while (i < cps.size()) {
    const std::size_t run = emoji_run(cps, i);
    if (run == 0) {
      rest.push_back(cps[i]);
      ++i;
      continue;
    }
    result.emojis.push_back(encode(std::u32string_view(cps).substr(i, run)));
    i += run;
  }
  result.remainder = encode(rest);
  return result;
}

std::string trim(std::string_view s) {
  std::size_t begin = s.size();
  std::size_t end = 0;
  std::size_t len = 0;
  for (std::size_t i = 0; i < s.size(); i += len) {
    if (!is_whitespace(next(s, i, len))) {
      begin = std::min(begin, i);
      end = i + len;
    }
  }
  return begin < end ? std::string(s.substr(begin, end - begin)) : std::string();
}

std::size_t length(std::string_view bytes) {
  return static_cast<std::size_t>(std::count_if(bytes.begin(), bytes.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

}  // namespace emoji::utf8
