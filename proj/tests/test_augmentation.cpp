#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "emoji/augmentation.hpp"
#include "emoji/error.hpp"
#include "support.hpp"

using namespace emoji;
using emoji::testing::TempDir;

namespace {

Corpus corpus_with_counts(const std::vector<std::pair<const char*, int>>& counts) {
  std::vector<LabeledExample> ex;
  int n = 0;
  for (const auto& [emoji, count] : counts)
    for (int i = 0; i < count; ++i) ex.push_back({"human text " + std::to_string(n++), EmojiId(emoji), Origin::kHuman});
  return Corpus(std::move(ex));
}

// Scripted adapter for error paths.
class FakeAdapter : public GeneratorAdapter {
 public:
  std::map<std::string, std::vector<std::string>> tag_replies;
  std::set<std::string> failing_emojis;
  int bad_sentences_before_good = 0;  // per call sequence
  bool always_fail_sentences = false;
  std::atomic<int> sentence_calls{0};

  std::vector<std::string> generate_tags(const EmojiId& e) override {
    if (failing_emojis.count(e.str())) throw AdapterError("timeout");
    auto it = tag_replies.find(e.str());
    return it == tag_replies.end() ? std::vector<std::string>{} : it->second;
  }
  std::string generate_sentence(std::string_view tag, std::uint64_t style_seed) override {
    const int call = sentence_calls++;
    if (always_fail_sentences) throw AdapterError("down");
    if (call < bad_sentences_before_good) return "a sentence without the keyword";
    return "sentence " + std::to_string(style_seed) + " about " + std::string(tag);
  }
};

}  // namespace

TEST(Prompts, TagPromptIsVerbatim) {
  EXPECT_EQ(tag_prompt(EmojiId("🍕")),
            "Get me a textual description consisting of only one word for 🍕 separated by comma.");
  EXPECT_NE(sentence_prompt("pizza", 3).find("pizza"), std::string::npos);
}

TEST(TagReply, CommaSplit) {
  EXPECT_EQ(parse_tag_reply("joy, laughter"), (std::vector<std::string>{"joy", "laughter"}));
  EXPECT_EQ(parse_tag_reply(" Joy,LAUGHTER , joy."), (std::vector<std::string>{"joy", "laughter"}));
}

TEST(TagReply, MultiWordDropped) {
  EXPECT_TRUE(parse_tag_reply("very happy face").empty());
  EXPECT_EQ(parse_tag_reply("very happy face, smile,"), std::vector<std::string>{"smile"});
  EXPECT_TRUE(parse_tag_reply("").empty());
}

TEST(ContainsWord, WholeTokenCaseInsensitive) {
  EXPECT_TRUE(contains_word("I want PIZZA tonight!", "pizza"));
  EXPECT_FALSE(contains_word("pizzas everywhere", "pizza"));
  EXPECT_TRUE(contains_word("pizza, obviously", "pizza"));
}

TEST(TemplateAdapter, StaticDictionaryLookup) {
  TemplateAdapter adapter;
  const auto tags = parse_tag_reply(adapter.generate_tags(EmojiId("🍕")).at(0));
  ASSERT_FALSE(tags.empty());
  EXPECT_EQ(tags.front(), "pizza");
  EXPECT_GE(TemplateAdapter::template_count(), 20u);
  const std::string s = adapter.generate_sentence("pizza", 5);
  EXPECT_TRUE(contains_word(s, "pizza"));
  EXPECT_EQ(s, adapter.generate_sentence("pizza", 5));
}

TEST(TagMapping, FailuresAndMultiWordRepliesAreUnmapped) {
  FakeAdapter adapter;
  adapter.tag_replies["😂"] = {"joy, laughter"};
  adapter.tag_replies["🥲"] = {"very happy face"};
  adapter.failing_emojis = {"🙃"};
  const Corpus base = corpus_with_counts({{"😂", 3}, {"🥲", 2}, {"🙃", 1}});
  TempDir dir;
  TagMappingOptions opt;
  opt.review_path = dir / "tags.jsonl";
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter, opt);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].emoji, EmojiId("😂"));
  EXPECT_EQ(m.entries[0].tags, (std::vector<std::string>{"joy", "laughter"}));
  EXPECT_EQ(m.unmapped, (std::vector<EmojiId>{EmojiId("🥲"), EmojiId("🙃")}));

  ASSERT_TRUE(std::filesystem::exists(dir / "tags.jsonl"));
  const TagMapping reloaded = load_tag_mapping(dir / "tags.jsonl");
  ASSERT_EQ(reloaded.entries.size(), 1u);
  EXPECT_EQ(reloaded.entries[0].tags, m.entries[0].tags);
}

TEST(TagMapping, OperatorEditsAreNormalized) {
  TempDir dir;
  emoji::testing::write_file(dir / "t.jsonl",
                             "{\"emoji\": \"🍕\", \"tags\": [\"Pizza\", \"two words\"]}\n"
                             "{\"emoji\": \"🌧️\", \"tags\": []}\n");
  const TagMapping m = load_tag_mapping(dir / "t.jsonl");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].tags, std::vector<std::string>{"pizza"});
  EXPECT_EQ(m.unmapped, std::vector<EmojiId>{EmojiId("🌧️")});
  emoji::testing::write_file(dir / "bad.jsonl", "{\"emoji\": \"🍕\", \"tags\": [\"x\"]}\n{\"tags\": []}\n");
  try {
    load_tag_mapping(dir / "bad.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Synthetic, QuotaArithmetic) {
  TemplateAdapter adapter;
  const Corpus base = corpus_with_counts({{"😂", 150}, {"🍕", 10}});
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  AugmentationPlan plan;
  plan.target_count = 100;
  const auto result = generate_synthetic(m, plan, base, adapter, 1);
  EXPECT_TRUE(result.shortfall.empty());
  ASSERT_EQ(result.synthetic.size(), 90u);
  for (const auto& ex : result.synthetic.examples()) {
    EXPECT_EQ(ex.label, EmojiId("🍕"));
    EXPECT_EQ(ex.origin, Origin::kSynthetic);
  }
}

TEST(Synthetic, SentencesContainTagAndAreUnique) {
  TemplateAdapter adapter;
  const Corpus base = corpus_with_counts({{"🍕", 1}, {"☕", 2}});
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  AugmentationPlan plan;
  plan.target_count = 60;
  const auto result = generate_synthetic(m, plan, base, adapter, 3);
  ASSERT_EQ(result.synthetic.size(), 59u + 58u);
  std::map<std::string, std::set<std::string>> texts;
  for (const auto& ex : result.synthetic.examples()) {
    const auto* tags = m.tags_for(ex.label);
    ASSERT_NE(tags, nullptr);
    bool found = false;
    for (const auto& t : *tags) found = found || contains_word(ex.text, t);
    EXPECT_TRUE(found) << ex.text;
    EXPECT_TRUE(texts[ex.label.str()].insert(ex.text).second) << "duplicate: " << ex.text;
  }
  // round robin over tags: 🍕's first sentences use pizza, pepperoni, slice in turn
  std::vector<std::string> pizza_texts;
  for (const auto& ex : result.synthetic.examples())
    if (ex.label == EmojiId("🍕")) pizza_texts.push_back(ex.text);
  const auto& tags = *m.tags_for(EmojiId("🍕"));
  ASSERT_GE(tags.size(), 2u);
  EXPECT_TRUE(contains_word(pizza_texts[0], tags[0]));
  EXPECT_TRUE(contains_word(pizza_texts[1], tags[1]));
}

TEST(Synthetic, PizzaSentencesMentionPizza) {
  std::map<std::string, std::vector<std::string>> dict;
  dict["🍕"] = {std::string("pizza")};
  TemplateAdapter adapter(dict);
  const Corpus base = corpus_with_counts({{"🍕", 1}});
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  AugmentationPlan plan;
  plan.target_count = 40;
  const auto result = generate_synthetic(m, plan, base, adapter, 9);
  EXPECT_EQ(result.synthetic.size(), 39u);
  for (const auto& ex : result.synthetic.examples()) {
    EXPECT_TRUE(contains_word(ex.text, "pizza"));
    EXPECT_EQ(ex.label, EmojiId("🍕"));
  }
}

TEST(Synthetic, RareOnlyTargetsBottomQuartile) {
  ZipfCorpusOptions o;
  o.n_examples = 20000;
  o.seed = 2;
  const Corpus base = generate_zipf_corpus(o);
  TemplateAdapter adapter;
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  AugmentationPlan plan;
  plan.target_count = 60;
  plan.rare_only_quartile = true;
  const auto result = generate_synthetic(m, plan, base, adapter, 4);
  std::set<EmojiId> tail;
  for (std::size_t id : tail_quartile_ids(base.vocabulary().size())) tail.insert(base.vocabulary().emoji(id));
  EXPECT_EQ(tail.size(), (base.vocabulary().size() + 3) / 4);
  std::set<EmojiId> touched;
  for (const auto& ex : result.synthetic.examples()) {
    EXPECT_TRUE(tail.count(ex.label)) << ex.label.str();
    touched.insert(ex.label);
  }
  EXPECT_FALSE(touched.empty());
}

TEST(Synthetic, DeterministicForTemplateAdapter) {
  const Corpus base = corpus_with_counts({{"🍕", 3}, {"☕", 1}, {"😂", 5}});
  TemplateAdapter adapter;
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  AugmentationPlan plan;
  plan.target_count = 50;
  plan.max_in_flight = 4;
  const auto a = serialize_corpus(generate_synthetic(m, plan, base, adapter, 11).synthetic);
  plan.max_in_flight = 1;
  const auto b = serialize_corpus(generate_synthetic(m, plan, base, adapter, 11).synthetic);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, serialize_corpus(generate_synthetic(m, plan, base, adapter, 12).synthetic));
}

TEST(Synthetic, RetriesUntilTagAppears) {
  FakeAdapter adapter;
  adapter.bad_sentences_before_good = 2;
  TagMapping m;
  m.entries.push_back({EmojiId("🍕"), {"pizza"}});
  AugmentationPlan plan;
  plan.target_count = 2;
  plan.max_in_flight = 1;
  const auto result = generate_synthetic(m, plan, corpus_with_counts({{"🍕", 1}}), adapter, 1);
  ASSERT_EQ(result.synthetic.size(), 1u);
  EXPECT_TRUE(contains_word(result.synthetic.examples()[0].text, "pizza"));
  EXPECT_TRUE(result.shortfall.empty());
}

TEST(Synthetic, AdapterFailureBecomesShortfall) {
  FakeAdapter adapter;
  adapter.always_fail_sentences = true;
  TagMapping m;
  m.entries.push_back({EmojiId("🍕"), {"pizza"}});
  AugmentationPlan plan;
  plan.target_count = 5;
  const Corpus base = corpus_with_counts({{"🍕", 1}, {"☕", 1}});
  const auto result = generate_synthetic(m, plan, base, adapter, 1);
  EXPECT_TRUE(result.synthetic.empty());
  ASSERT_EQ(result.shortfall.size(), 2u);
  std::map<std::string, Shortfall> by;
  for (const auto& s : result.shortfall) by[s.emoji.str()] = s;
  EXPECT_EQ(by["🍕"].requested, 4u);
  EXPECT_EQ(by["🍕"].produced, 0u);
  EXPECT_EQ(by["☕"].reason, "no tags in mapping");
}

TEST(Synthetic, ZeroQuotaSkipped) {
  TemplateAdapter adapter;
  const Corpus base = corpus_with_counts({{"🍕", 10}});
  AugmentationPlan plan;
  plan.target_count = 5;
  const auto result = generate_synthetic(build_tag_mapping(base.vocabulary(), adapter), plan, base, adapter, 1);
  EXPECT_TRUE(result.synthetic.empty());
  EXPECT_TRUE(result.shortfall.empty());
}

TEST(Merge, IdentityAndCounts) {
  const Corpus base = corpus_with_counts({{"🍕", 3}, {"☕", 1}});
  EXPECT_EQ(merge(base, Corpus()), base);
  const Corpus synth({{"pizza again", EmojiId("☕"), Origin::kSynthetic}, {"more", EmojiId("☕"), Origin::kSynthetic}});
  const Corpus merged = merge(base, synth);
  EXPECT_EQ(merged.size(), 6u);
  const auto& v = merged.vocabulary();
  EXPECT_EQ(v.count(static_cast<std::size_t>(v.find(EmojiId("☕")))), 3u);
  EXPECT_EQ(v.count(static_cast<std::size_t>(v.find(EmojiId("🍕")))), 3u);
  EXPECT_EQ(merged.examples().back().origin, Origin::kSynthetic);
}

TEST(Merge, UnknownLabelNamed) {
  const Corpus base = corpus_with_counts({{"🍕", 3}});
  try {
    merge(base, Corpus({{"x", EmojiId("🐙"), Origin::kSynthetic}}));
    FAIL() << "expected UnknownLabelError";
  } catch (const UnknownLabelError& e) {
    EXPECT_EQ(e.label(), "🐙");
  }
}

TEST(Merge, TailMassRisesToPlannedShare) {
  ZipfCorpusOptions o;
  o.seed = 6;
  const Corpus base = generate_zipf_corpus(o);
  const auto tail_ids = tail_quartile_ids(base.vocabulary().size());
  std::uint64_t tail_before = 0;
  for (std::size_t id : tail_ids) tail_before += base.vocabulary().count(id);
  EXPECT_LT(static_cast<double>(tail_before) / static_cast<double>(base.size()), 0.05);

  TemplateAdapter adapter;
  AugmentationPlan plan;
  plan.target_count = 200;
  plan.rare_only_quartile = true;
  const auto result = generate_synthetic(build_tag_mapping(base.vocabulary(), adapter), plan, base, adapter, 6);
  ASSERT_TRUE(result.shortfall.empty());
  // every tail class ends at max(existing, 200)
  std::uint64_t planned_tail = 0;
  for (std::size_t id : tail_ids) planned_tail += std::max<std::uint64_t>(base.vocabulary().count(id), 200);
  const Corpus merged = merge(base, result.synthetic);
  std::uint64_t tail_after = 0;
  for (std::size_t id : tail_ids) {
    const auto& e = base.vocabulary().emoji(id);
    tail_after += merged.vocabulary().count(static_cast<std::size_t>(merged.vocabulary().find(e)));
  }
  EXPECT_EQ(tail_after, planned_tail);
  EXPECT_EQ(merged.size(), base.size() + (planned_tail - tail_before));
}

// ---------------------------------------------------------------------------

namespace {

class GeneratorServer {
 public:
  explicit GeneratorServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/gen", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~GeneratorServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/gen"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(RemoteAdapter, PostsPromptWithBearerToken) {
  std::string seen_auth, seen_prompt;
  GeneratorServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_prompt = nlohmann::json::parse(req.body).at("prompt").get<std::string>();
    res.set_content(R"({"text": "joy, laughter"})", "application/json");
  });
  RemoteAdapterConfig cfg;
  cfg.url = server.url();
  cfg.token = "secret";
  RemoteAdapter adapter(cfg);
  const auto replies = adapter.generate_tags(EmojiId("😂"));
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_prompt, tag_prompt(EmojiId("😂")));
  ASSERT_EQ(replies.size(), 1u);
  EXPECT_EQ(parse_tag_reply(replies[0]), (std::vector<std::string>{"joy", "laughter"}));
}

TEST(RemoteAdapter, RetriesThenSucceeds) {
  std::atomic<int> calls{0};
  GeneratorServer server([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"text": "I want pizza"})", "application/json");
  });
  RemoteAdapterConfig cfg;
  cfg.url = server.url();
  cfg.max_retries = 2;
  RemoteAdapter adapter(cfg);
  EXPECT_EQ(adapter.generate_sentence("pizza", 1), "I want pizza");
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteAdapter, GivesUpWithAdapterError) {
  std::atomic<int> calls{0};
  GeneratorServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content("not json", "text/plain");
  });
  RemoteAdapterConfig cfg;
  cfg.url = server.url();
  cfg.max_retries = 1;
  RemoteAdapter adapter(cfg);
  EXPECT_THROW(adapter.generate_sentence("pizza", 1), AdapterError);
  EXPECT_EQ(calls.load(), 2);
}

TEST(RemoteAdapter, UnreachableEndpointFailsWithinTimeout) {
  RemoteAdapterConfig cfg;
  cfg.url = "http://127.0.0.1:1/gen";
  cfg.timeout = std::chrono::milliseconds(500);
  cfg.max_retries = 0;
  RemoteAdapter adapter(cfg);
  EXPECT_THROW(adapter.complete("hello"), AdapterError);
}

TEST(RemoteAdapter, ConfigValidation) {
  RemoteAdapterConfig cfg;
  EXPECT_THROW(RemoteAdapter{cfg}, InvalidConfigError);
  cfg.url = "https://example.com/gen";
  EXPECT_THROW(RemoteAdapter{cfg}, InvalidConfigError);
  cfg.url = "ftp-ish";
  EXPECT_THROW(RemoteAdapter{cfg}, InvalidConfigError);
}

TEST(RemoteAdapter, FeedsTagMappingUnmappedOnFailure) {
  GeneratorServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto prompt = nlohmann::json::parse(req.body).at("prompt").get<std::string>();
    if (prompt.find("🍕") != std::string::npos) {
      res.set_content(R"({"text": "pizza, slice"})", "application/json");
    } else {
      res.status = 500;
    }
  });
  RemoteAdapterConfig cfg;
  cfg.url = server.url();
  cfg.max_retries = 0;
  RemoteAdapter adapter(cfg);
  const Corpus base = corpus_with_counts({{"🍕", 2}, {"☕", 1}});
  const TagMapping m = build_tag_mapping(base.vocabulary(), adapter);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].tags, (std::vector<std::string>{"pizza", "slice"}));
  EXPECT_EQ(m.unmapped, std::vector<EmojiId>{EmojiId("☕")});
}
