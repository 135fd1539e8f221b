#include "emoji/evaluation.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "emoji/error.hpp"

namespace emoji {
namespace {

struct Tally {
  std::size_t support = 0;
  std::map<std::size_t, std::size_t> hits;
};

Metrics summarize(const std::map<EmojiId, Tally>& tallies, const std::map<std::size_t, std::map<EmojiId, std::size_t>>& predicted,
                  const std::vector<std::size_t>& ks, const std::function<bool(const EmojiId&)>& include) {
  Metrics m;
  std::map<std::size_t, std::size_t> hits;
  std::map<std::size_t, double> f1_sum;
  std::size_t n_classes = 0;
  for (const auto& [emoji, t] : tallies) {
    if (!include(emoji) || t.support == 0) continue;
    ++n_classes;
    m.n_examples += t.support;
    for (std::size_t k : ks) {
      const std::size_t h = t.hits.count(k) ? t.hits.at(k) : 0;
      hits[k] += h;
      const auto& pk = predicted.at(k);
      const auto it = pk.find(emoji);
      const std::size_t shown = it == pk.end() ? 0 : it->second;
      const double recall = static_cast<double>(h) / static_cast<double>(t.support);
      const double precision = shown == 0 ? 0.0 : static_cast<double>(h) / static_cast<double>(shown);
      f1_sum[k] += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    }
  }
  for (std::size_t k : ks) {
    m.hit_at[k] = m.n_examples == 0 ? 0.0 : static_cast<double>(hits[k]) / static_cast<double>(m.n_examples);
    m.macro_f1_at[k] = n_classes == 0 ? 0.0 : f1_sum[k] / static_cast<double>(n_classes);
  }
  return m;
}

}  // namespace

std::vector<EmojiId> tail_classes(const EmojiVocabulary& training_vocab) {
  std::vector<EmojiId> out;
  for (std::size_t id : tail_quartile_ids(training_vocab.size())) out.push_back(training_vocab.emoji(id));
  return out;
}

EvalReport evaluate(const ClassifierModel& model, const Corpus& test, const EvalOptions& options) {
  if (options.ks.empty()) throw InvalidConfigError("at least one K is required");
  for (std::size_t k : options.ks)
    if (k == 0) throw InvalidConfigError("K must be positive");
  if (options.store && !options.rerank) throw InvalidConfigError("a favorites store needs a rerank config");
  if (options.rerank) options.rerank->validate();

  EvalReport report;
  report.ks = options.ks;
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());
  report.reranked = options.store != nullptr;
  const std::size_t max_k = report.ks.back();
  const std::size_t n = model.n_classes();

  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t c = 0; c < n; ++c) class_index.emplace(model.class_ids[c].str(), c);

  std::map<EmojiId, Tally> tallies;
  std::map<std::size_t, std::map<EmojiId, std::size_t>> predicted;
  for (std::size_t k : report.ks) predicted[k];

  std::vector<EmojiId> top;
  for (const auto& ex : test.examples()) {
    const auto probs = class_probabilities(model, ex.text);
    top.clear();
    bool gold_is_candidate = class_index.count(ex.label.str()) > 0;
    if (options.store) {
      const Prediction full = rank_distribution(model, probs, n);
      const auto rr = rerank(full, *options.store, *options.rerank);
      for (std::size_t i = 0; i < rr.ranked.size() && i < max_k; ++i) top.push_back(rr.ranked[i].emoji);
      gold_is_candidate = gold_is_candidate || options.store->count(ex.label) > 0;
    } else {
      const Prediction p = rank_distribution(model, probs, std::min(max_k, n));
      for (const auto& e : p.ranked) top.push_back(e.emoji);
    }
    if (!gold_is_candidate) ++report.unknown_gold;

    auto& t = tallies[ex.label];
    ++t.support;
    const auto pos = static_cast<std::size_t>(std::find(top.begin(), top.end(), ex.label) - top.begin());
    for (std::size_t k : report.ks) {
      if (pos < k) ++t.hits[k];
      for (std::size_t i = 0; i < top.size() && i < k; ++i) ++predicted[k][top[i]];
    }
  }

  std::set<EmojiId> tail;
  if (options.tail_classes) {
    tail.insert(options.tail_classes->begin(), options.tail_classes->end());
  } else {
    for (std::size_t id : tail_quartile_ids(n)) tail.insert(model.class_ids[id]);
  }

  report.overall = summarize(tallies, predicted, report.ks, [](const EmojiId&) { return true; });
  report.tail_quartile = summarize(tallies, predicted, report.ks, [&](const EmojiId& e) { return tail.count(e) > 0; });
  report.head = summarize(tallies, predicted, report.ks, [&](const EmojiId& e) { return tail.count(e) == 0; });

  for (const auto& [emoji, t] : tallies) {
    ClassReport cr;
    const auto it = class_index.find(emoji.str());
    cr.class_id = it == class_index.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    cr.support = t.support;
    for (std::size_t k : report.ks)
      cr.hit_at[k] = static_cast<double>(t.hits.count(k) ? t.hits.at(k) : 0) / static_cast<double>(t.support);
    report.per_class.emplace(emoji, std::move(cr));
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["n_examples"] = m.n_examples;
  nlohmann::ordered_json hit = nlohmann::ordered_json::object(), f1 = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.hit_at) hit[std::to_string(k)] = v;
  for (const auto& [k, v] : m.macro_f1_at) f1[std::to_string(k)] = v;
  j["hit_at"] = hit;
  j["macro_f1_at"] = f1;
  return j;
}

}  // namespace

void write_eval_report(std::ostream& out, const EvalReport& report) {
  for (const auto& [name, m] : {std::pair<const char*, const Metrics*>{"overall", &report.overall},
                                {"tail_quartile", &report.tail_quartile},
                                {"head", &report.head}}) {
    nlohmann::ordered_json j;
    j["record"] = name;
    j.update(metrics_json(*m));
    if (std::string_view(name) == "overall") {
      j["unknown_gold"] = report.unknown_gold;
      j["reranked"] = report.reranked;
    }
    out << j.dump() << '\n';
  }
  for (const auto& [emoji, cr] : report.per_class) {
    nlohmann::ordered_json j;
    j["record"] = "class";
    j["emoji"] = emoji.str();
    j["class_id"] = cr.class_id;
    j["support"] = cr.support;
    nlohmann::ordered_json hit = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cr.hit_at) hit[std::to_string(k)] = v;
    j["hit_at"] = hit;
    out << j.dump() << '\n';
  }
}

void print_eval_table(std::ostream& out, const EvalReport& report) {
  char buf[128];
  out << "subset          n";
  for (std::size_t k : report.ks) {
    std::snprintf(buf, sizeof buf, "   hit@%-3zu  f1@%-3zu", k, k);
    out << buf;
  }
  out << '\n';
  for (const auto& [name, m] : {std::pair<const char*, const Metrics*>{"overall", &report.overall},
                                {"head", &report.head},
                                {"tail quartile", &report.tail_quartile}}) {
    std::snprintf(buf, sizeof buf, "%-13s %5zu", name, m->n_examples);
    out << buf;
    for (std::size_t k : report.ks) {
      std::snprintf(buf, sizeof buf, "   %6.4f  %6.4f", m->hit_at.at(k), m->macro_f1_at.at(k));
      out << buf;
    }
    out << '\n';
  }
  if (report.unknown_gold > 0) out << "gold labels outside the candidate set: " << report.unknown_gold << '\n';
}

void write_coverage_csv(std::ostream& out, const std::vector<CoveragePoint>& curve) {
  out << "k,coverage\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g\n", p.k, p.coverage);
    out << buf;
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "alpha";
  if (!sweep.empty())
    for (const auto& [k, v] : sweep.front().hit_at) out << ",hit_at_" << k;
  out << ",panel_insertions_per_user,external_insertions_per_user\n";
  char buf[64];
  for (const auto& p : sweep) {
    std::snprintf(buf, sizeof buf, "%.10g", p.alpha);
    out << buf;
    for (const auto& [k, v] : p.hit_at) {
      std::snprintf(buf, sizeof buf, ",%.10g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.10g,%.10g\n", p.panel_insertions_per_user, p.external_insertions_per_user);
    out << buf;
  }
}

void write_sweep_report(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  for (const auto& p : sweep) {
    nlohmann::ordered_json j;
    j["alpha"] = p.alpha;
    nlohmann::ordered_json hit = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.hit_at) hit[std::to_string(k)] = v;
    j["hit_at"] = hit;
    j["panel_insertions_per_user"] = p.panel_insertions_per_user;
    j["external_insertions_per_user"] = p.external_insertions_per_user;
    out << j.dump() << '\n';
  }
}

void write_bench_report(std::ostream& out, const BenchReport& report) {
  nlohmann::ordered_json j;
  j["record"] = "summary";
  j["median_ms"] = report.median_ms;
  j["p95_ms"] = report.p95_ms;
  j["mean_ms"] = report.mean_ms;
  j["timed_calls"] = report.timed_calls;
  j["bytes_on_disk"] = report.size.bytes_on_disk;
  j["parameter_count"] = report.size.parameter_count;
  j["precision"] = std::string(to_string(report.size.precision));
  out << j.dump() << '\n';
  for (const auto& s : report.per_sentence) {
    nlohmann::ordered_json r;
    r["record"] = "sentence";
    r["sentence"] = s.sentence;
    r["median_ms"] = s.median_ms;
    r["mean_ms"] = s.mean_ms;
    r["min_ms"] = s.min_ms;
    r["max_ms"] = s.max_ms;
    out << r.dump() << '\n';
  }
}

}  // namespace emoji
