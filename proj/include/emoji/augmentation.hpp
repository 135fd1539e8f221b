#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emoji/corpus.hpp"
#include "emoji/error.hpp"

namespace emoji {

/// Prompt sent per emoji to obtain its one-word tags.
std::string tag_prompt(const EmojiId& emoji);
/// Prompt sent per (tag, style) to obtain one synthetic sentence.
std::string sentence_prompt(std::string_view tag, std::uint64_t style_seed);

/// Normalizes a generator reply into tags: split on commas, trim,
/// lowercase, drop empty and multi-word entries, drop duplicates.
std::vector<std::string> parse_tag_reply(std::string_view reply);

/// True when `tag` occurs in `sentence` as a whole token, case-insensitively.
bool contains_word(std::string_view sentence, std::string_view tag);

class AdapterError : public Error {
 public:
  using Error::Error;
};

/// Source of emoji tags and tagged sentences. Implementations either return
/// or throw AdapterError; they never block past their configured timeout.
class GeneratorAdapter {
 public:
  virtual ~GeneratorAdapter() = default;
  /// Raw tag candidates for `emoji`; build_tag_mapping normalizes them.
  virtual std::vector<std::string> generate_tags(const EmojiId& emoji) = 0;
  virtual std::string generate_sentence(std::string_view tag, std::uint64_t style_seed) = 0;
  /// Whether calls may be issued from several threads at once.
  virtual bool concurrent() const { return false; }
};

/// Offline adapter: tags from a static dictionary (the bundled lexicon by
/// default), sentences from a seeded template bank. Fully deterministic.
class TemplateAdapter final : public GeneratorAdapter {
 public:
  TemplateAdapter();
  explicit TemplateAdapter(std::map<std::string, std::vector<std::string>> dictionary);

  std::vector<std::string> generate_tags(const EmojiId& emoji) override;
  std::string generate_sentence(std::string_view tag, std::uint64_t style_seed) override;
  bool concurrent() const override { return true; }

  static std::size_t template_count();

 private:
  std::optional<std::map<std::string, std::vector<std::string>>> dictionary_;
};

struct RemoteAdapterConfig {
  std::string url;    // http://host[:port]/path
  std::string token;  // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;

  /// EMOJI_GEN_URL and EMOJI_GEN_TOKEN.
  static RemoteAdapterConfig from_env();
};

/// HTTP adapter: POST {"prompt": ...} to the configured endpoint, expects
/// {"text": ...} back.
class RemoteAdapter final : public GeneratorAdapter {
 public:
  explicit RemoteAdapter(RemoteAdapterConfig config);
  ~RemoteAdapter() override;

  std::vector<std::string> generate_tags(const EmojiId& emoji) override;
  std::string generate_sentence(std::string_view tag, std::uint64_t style_seed) override;
  bool concurrent() const override { return true; }

  std::string complete(const std::string& prompt);

 private:
  RemoteAdapterConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

struct TagMapping {
  struct Entry {
    EmojiId emoji;
    std::vector<std::string> tags;
  };
  std::vector<Entry> entries;     // vocabulary order
  std::vector<EmojiId> unmapped;  // no usable tag or adapter failure

  const std::vector<std::string>* tags_for(const EmojiId& emoji) const;
};

struct TagMappingOptions {
  std::size_t max_in_flight = 4;
  /// When set, the mapping is written here before returning so an operator
  /// can review and edit it ahead of sentence generation.
  std::optional<std::filesystem::path> review_path;
};

TagMapping build_tag_mapping(const EmojiVocabulary& vocab, GeneratorAdapter& adapter,
                             const TagMappingOptions& options = {});

// One {"emoji", "tags"} record per line.
void save_tag_mapping(const TagMapping& mapping, const std::filesystem::path& path);
TagMapping load_tag_mapping(const std::filesystem::path& path);

struct AugmentationPlan {
  std::uint64_t target_count = 100;
  std::map<EmojiId, std::uint64_t> per_class_target;  // overrides target_count
  bool rare_only_quartile = false;
  bool dedupe = true;
  int max_attempts = 3;
  std::size_t max_in_flight = 4;

  std::uint64_t target_for(const EmojiId& emoji) const;
};

struct Shortfall {
  EmojiId emoji;
  std::uint64_t requested = 0;
  std::uint64_t produced = 0;
  std::string reason;
};

struct AugmentationResult {
  Corpus synthetic;
  std::vector<Shortfall> shortfall;
};

/// Generates (target - existing)+ synthetic examples per targeted class,
/// round-robin over the class tags, each labeled with its emoji.
AugmentationResult generate_synthetic(const TagMapping& mapping, const AugmentationPlan& plan, const Corpus& base,
                                      GeneratorAdapter& adapter, std::uint64_t seed);

/// Concatenation. Throws UnknownLabelError if a synthetic label is not in
/// the base vocabulary.
Corpus merge(const Corpus& base, const Corpus& synthetic);

}  // namespace emoji
