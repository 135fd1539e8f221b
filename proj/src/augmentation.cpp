#include "emoji/augmentation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "emoji/featurizer.hpp"
#include "emoji/lexicon.hpp"
#include "emoji/utf8.hpp"

namespace emoji {

using nlohmann::json;
using nlohmann::ordered_json;

std::string tag_prompt(const EmojiId& emoji) {
  return "Get me a textual description consisting of only one word for " + emoji.str() + " separated by comma.";
}

std::string sentence_prompt(std::string_view tag, std::uint64_t style_seed) {
  return "Create a sentence with the keyword " + std::string(tag) + ". Variation " +
         std::to_string(style_seed % 1000) + ".";
}

std::vector<std::string> parse_tag_reply(std::string_view reply) {
  std::vector<std::string> tags;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t comma = reply.find(',', pos);
    if (comma == std::string_view::npos) comma = reply.size();
    std::string_view piece = reply.substr(pos, comma - pos);
    pos = comma + 1;

    // Exactly one non-punctuation token survives; surrounding quotes and
    // periods are tolerated.
    std::vector<std::string> tokens = tokenize(piece);
    std::vector<std::string> words;
    for (auto& t : tokens) {
      const std::u32string cps = utf8::decode(t);
      if (!(cps.size() == 1 && utf8::is_punctuation(cps[0]))) words.push_back(std::move(t));
    }
    if (words.size() != 1) continue;
    const std::string& word = words.front();
    if (std::find(tags.begin(), tags.end(), word) == tags.end()) tags.push_back(word);
  }
  return tags;
}

bool contains_word(std::string_view sentence, std::string_view tag) {
  const std::vector<std::string> want = tokenize(tag);
  if (want.size() != 1) return false;
  const std::vector<std::string> tokens = tokenize(sentence);
  return std::find(tokens.begin(), tokens.end(), want.front()) != tokens.end();
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; fn must write its
// own result slot. The first exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t style_seed(std::uint64_t seed, const EmojiId& emoji, std::uint64_t index, int attempt) {
  return mix(mix(mix(seed ^ fnv1a64(emoji.str())) + index) + static_cast<std::uint64_t>(attempt));
}

// None of the fixed words here are lexicon tags.
constexpr const char* kTemplates[] = {
    "I really want some {tag} tonight",
    "can't stop talking about {tag}",
    "{tag} is all I need right now",
    "nothing beats {tag} on a Friday",
    "just saw the {tag} and I can't even",
    "my whole day was about {tag}",
    "who else is into {tag} lately",
    "this {tag} made my day",
    "we should talk about {tag} later",
    "honestly the {tag} was unreal",
    "send me more {tag} pics",
    "can we get {tag} after class",
    "so much {tag} going on today",
    "I keep dreaming about {tag}",
    "the {tag} situation is getting serious",
    "guess what, {tag} again",
    "still can't believe the {tag} thing",
    "my sister sent me {tag} earlier",
    "all I see everywhere is {tag}",
    "need {tag} before the weekend",
    "tell me about your {tag} plans",
    "feeling all the {tag} vibes",
    "that {tag} moment when everything clicks",
    "{tag} with friends is the best",
};
constexpr const char* kOpeners[] = {"", "hey, ", "so ", "wait, ", "honestly ", "yo ", "guys ", "listen, ", "btw ", "update: "};
constexpr const char* kEndings[] = {"", "!", "!!", ".", "...", " haha", " for real", " right?"};

}  // namespace

// ---------------------------------------------------------------------------
// Adapters

TemplateAdapter::TemplateAdapter() = default;

TemplateAdapter::TemplateAdapter(std::map<std::string, std::vector<std::string>> dictionary)
    : dictionary_(std::move(dictionary)) {}

std::size_t TemplateAdapter::template_count() { return std::size(kTemplates); }

std::vector<std::string> TemplateAdapter::generate_tags(const EmojiId& emoji) {
  if (dictionary_) {
    const auto it = dictionary_->find(emoji.str());
    if (it == dictionary_->end()) throw AdapterError("no dictionary entry for " + emoji.str());
    return it->second;
  }
  auto tags = lexicon_tags(emoji.str());
  if (!tags) throw AdapterError("no dictionary entry for " + emoji.str());
  return *tags;
}

std::string TemplateAdapter::generate_sentence(std::string_view tag, std::uint64_t style) {
  std::uint64_t x = mix(style);
  const std::string_view tmpl = kTemplates[x % std::size(kTemplates)];
  x /= std::size(kTemplates);
  std::string sentence = kOpeners[x % std::size(kOpeners)];
  x /= std::size(kOpeners);
  const std::size_t at = tmpl.find("{tag}");
  sentence += tmpl.substr(0, at);
  sentence += tag;
  sentence += tmpl.substr(at + 5);
  sentence += kEndings[x % std::size(kEndings)];
  return sentence;
}

const std::vector<std::string>* TagMapping::tags_for(const EmojiId& emoji) const {
  for (const auto& e : entries)
    if (e.emoji == emoji) return &e.tags;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Tag mapping

TagMapping build_tag_mapping(const EmojiVocabulary& vocab, GeneratorAdapter& adapter,
                             const TagMappingOptions& options) {
  const std::size_t n = vocab.size();
  std::vector<std::optional<std::vector<std::string>>> results(n);
  const std::size_t threads = adapter.concurrent() ? options.max_in_flight : 1;
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      std::vector<std::string> tags;
      for (const auto& raw : adapter.generate_tags(vocab.emoji(i)))
        for (auto& t : parse_tag_reply(raw))
          if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(std::move(t));
      results[i] = std::move(tags);
    } catch (const Error&) {
      results[i] = std::nullopt;
    }
  });

  TagMapping mapping;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i] && !results[i]->empty()) {
      mapping.entries.push_back({vocab.emoji(i), std::move(*results[i])});
    } else {
      mapping.unmapped.push_back(vocab.emoji(i));
    }
  }
  if (options.review_path) save_tag_mapping(mapping, *options.review_path);
  return mapping;
}

void save_tag_mapping(const TagMapping& mapping, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : mapping.entries) {
    ordered_json record;
    record["emoji"] = e.emoji.str();
    record["tags"] = e.tags;
    out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

TagMapping load_tag_mapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  TagMapping mapping;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object() || !record.contains("emoji") || !record["emoji"].is_string())
      throw ParseError(line_no, "missing field 'emoji'");
    if (!record.contains("tags") || !record["tags"].is_array()) throw ParseError(line_no, "missing field 'tags'");
    TagMapping::Entry entry{EmojiId(record["emoji"].get<std::string>()), {}};
    for (const auto& t : record["tags"]) {
      if (!t.is_string()) throw ParseError(line_no, "tags must be strings");
      // Operator edits go through the same normalization as generator replies.
      for (auto& tag : parse_tag_reply(t.get<std::string>())) entry.tags.push_back(std::move(tag));
    }
    if (entry.tags.empty()) {
      mapping.unmapped.push_back(entry.emoji);
    } else {
      mapping.entries.push_back(std::move(entry));
    }
  }
  return mapping;
}

// ---------------------------------------------------------------------------
// Synthetic generation

std::uint64_t AugmentationPlan::target_for(const EmojiId& emoji) const {
  const auto it = per_class_target.find(emoji);
  return it == per_class_target.end() ? target_count : it->second;
}

namespace {

struct Job {
  std::size_t class_slot;
  std::uint64_t index;
  std::string tag;
};

// Generates one sentence containing `tag`, or nothing after max_attempts.
std::optional<std::string> generate_checked(GeneratorAdapter& adapter, const EmojiId& emoji, const std::string& tag,
                                            std::uint64_t index, std::uint64_t seed, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    try {
      std::string sentence = utf8::trim(adapter.generate_sentence(tag, style_seed(seed, emoji, index, attempt)));
      if (!sentence.empty() && contains_word(sentence, tag)) return sentence;
    } catch (const Error&) {
      // counts as a failed attempt
    }
  }
  return std::nullopt;
}

}  // namespace

AugmentationResult generate_synthetic(const TagMapping& mapping, const AugmentationPlan& plan, const Corpus& base,
                                      GeneratorAdapter& adapter, std::uint64_t seed) {
  if (plan.max_attempts < 1) throw InvalidConfigError("max_attempts must be >= 1");
  const EmojiVocabulary& vocab = base.vocabulary();

  std::vector<std::size_t> targeted;
  if (plan.rare_only_quartile) {
    targeted = tail_quartile_ids(vocab.size());
  } else {
    for (std::size_t i = 0; i < vocab.size(); ++i) targeted.push_back(i);
  }

  struct ClassPlan {
    EmojiId emoji;
    std::uint64_t quota = 0;
    const std::vector<std::string>* tags = nullptr;
  };
  std::vector<ClassPlan> classes;
  AugmentationResult result;
  std::vector<Job> jobs;
  for (std::size_t id : targeted) {
    const EmojiId& emoji = vocab.emoji(id);
    const std::uint64_t target = plan.target_for(emoji);
    const std::uint64_t existing = vocab.count(id);
    if (target <= existing) continue;
    const std::uint64_t quota = target - existing;
    const auto* tags = mapping.tags_for(emoji);
    if (tags == nullptr || tags->empty()) {
      result.shortfall.push_back({emoji, quota, 0, "no tags in mapping"});
      continue;
    }
    const std::size_t slot = classes.size();
    classes.push_back({emoji, quota, tags});
    for (std::uint64_t i = 0; i < quota; ++i) jobs.push_back({slot, i, (*tags)[i % tags->size()]});
  }

  std::vector<std::optional<std::string>> sentences(jobs.size());
  const std::size_t threads = adapter.concurrent() ? plan.max_in_flight : 1;
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    sentences[j] = generate_checked(adapter, classes[job.class_slot].emoji, job.tag, job.index, seed, plan.max_attempts);
  });

  // Assemble in (class, index) order; dedupe and top up sequentially so the
  // output does not depend on completion order.
  std::vector<LabeledExample> out;
  std::size_t j = 0;
  for (std::size_t slot = 0; slot < classes.size(); ++slot) {
    const ClassPlan& cp = classes[slot];
    std::unordered_set<std::string> seen;
    std::uint64_t produced = 0;
    std::uint64_t failed = 0;
    auto accept = [&](std::optional<std::string>& s) {
      if (!s) {
        ++failed;
        return;
      }
      if (plan.dedupe && !seen.insert(*s).second) return;
      out.push_back({std::move(*s), cp.emoji, Origin::kSynthetic});
      ++produced;
    };
    for (; j < jobs.size() && jobs[j].class_slot == slot; ++j) accept(sentences[j]);
    // Replace dropped duplicates with fresh indices, bounded by the retry budget.
    const std::uint64_t budget = cp.quota * static_cast<std::uint64_t>(plan.max_attempts);
    for (std::uint64_t extra = 0; produced < cp.quota && extra < budget; ++extra) {
      const std::uint64_t index = cp.quota + extra;
      const std::string& tag = (*cp.tags)[index % cp.tags->size()];
      auto s = generate_checked(adapter, cp.emoji, tag, index, seed, plan.max_attempts);
      accept(s);
    }
    if (produced < cp.quota)
      result.shortfall.push_back({cp.emoji, cp.quota, produced,
                                  failed > 0 ? "generator failures or tag missing from output" : "duplicates"});
  }
  result.synthetic = Corpus(std::move(out));
  return result;
}

Corpus merge(const Corpus& base, const Corpus& synthetic) {
  std::vector<LabeledExample> all = base.examples();
  all.reserve(base.size() + synthetic.size());
  for (const auto& ex : synthetic.examples()) {
    if (!base.vocabulary().contains(ex.label)) throw UnknownLabelError(ex.label.str());
    all.push_back(ex);
  }
  return Corpus(std::move(all));
}

}  // namespace emoji
