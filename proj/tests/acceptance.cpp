// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "emoji/augmentation.hpp"
#include "emoji/classifier.hpp"
#include "emoji/evaluation.hpp"
#include "emoji/network.hpp"
#include "emoji/personalization.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace emoji;
using emoji::testing::desk_train_config;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Seeded 200-class Zipf(1.2) desk corpus: 50k train, 12.5k held out.
struct Desk {
  Corpus train_set, test_set;
  ClassifierModel model;
};

Corpus zipf(std::uint64_t seed) {
  ZipfCorpusOptions o;
  o.n_examples = 62500;
  o.seed = seed;
  return generate_zipf_corpus(o);
}

const Desk& desk(std::uint64_t seed) {
  static std::map<std::uint64_t, Desk> cache;
  auto it = cache.find(seed);
  if (it != cache.end()) return it->second;
  auto [tr, te] = split_corpus(zipf(seed), 0.2, seed);
  ClassifierModel m = train(tr, ModelArchitecture{}, desk_train_config(seed));
  return cache.emplace(seed, Desk{std::move(tr), std::move(te), std::move(m)}).first->second;
}

Prediction fake_prediction(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0;
  for (double& x : w) sum += (x = std::uniform_real_distribution<double>(1e-3, 1.0)(rng));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] != w[b] ? w[a] > w[b] : a < b; });
  Prediction p;
  for (std::size_t i : order) p.ranked.push_back({EmojiId("e" + std::to_string(i)), w[i] / sum, i});
  return p;
}

Outcome eq1_suite() {
  RerankConfig cfg;
  cfg.alpha = 0.5;
  cfg.fav_smoothing = 0.0;
  auto score = [&](const RerankedPrediction& r, const char* e) {
    for (const auto& x : r.ranked)
      if (x.emoji == EmojiId(e)) return x.final_score;
    return -1.0;
  };
  Prediction p;
  p.ranked = {{EmojiId("a"), 0.2, 0}, {EmojiId("b"), 0.4, 1}, {EmojiId("c"), 0.2, 2}, {EmojiId("d"), 0.2, 3}};
  FavoritesStore four;
  for (auto [e, n] : std::vector<std::pair<const char*, int>>{{"a", 4}, {"b", 2}, {"c", 1}, {"d", 1}})
    for (int i = 0; i < n; ++i) four.record(EmojiId(e));
  const double s1 = score(rerank(p, four, cfg), "a");

  FavoritesStore two;
  two.record(EmojiId("a"));
  for (int i = 0; i < 3; ++i) two.record(EmojiId("b"));
  const double s2 = score(rerank(p, two, cfg), "a");

  // one more insertion of an existing favorite at alpha 0.5 raises its score
  RerankConfig smooth;
  smooth.alpha = 0.5;
  const double before = score(rerank(p, four, smooth), "a");
  const double after = score(rerank(p, record_insertion(four, EmojiId("a")), smooth), "a");

  const bool hand = std::fabs(s1 - 0.1) <= 1e-12 && std::fabs(s2 - 0.1) <= 1e-12 && after > before;

  std::mt19937_64 rng(2024);
  std::size_t order_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Prediction pred = fake_prediction(rng, 30);
    FavoritesStore store;
    for (int i = 0, n = static_cast<int>(rng() % 40); i < n; ++i)
      store.record(EmojiId("e" + std::to_string(rng() % 30)));
    const auto r = rerank(pred, store, RerankConfig{});
    bool same = r.ranked.size() == pred.ranked.size();
    for (std::size_t i = 0; same && i < r.ranked.size(); ++i)
      same = r.ranked[i].emoji == pred.ranked[i].emoji && r.ranked[i].final_score == pred.ranked[i].probability;
    order_ok += same ? 1 : 0;
  }
  return {hand && order_ok == 100,
          fmt("hand evals %.15g, %.15g; extra insertion %.6g -> %.6g; alpha=0 order equal on %zu/100", s1, s2, before,
              after, order_ok)};
}

Outcome metric_oracle() {
  ZipfCorpusOptions o;
  o.n_classes = 30;
  o.n_examples = 3000;
  o.seed = 7;
  const auto [tr, rest] = split_corpus(generate_zipf_corpus(o), 0.1, 7);
  ModelArchitecture arch;
  arch.embedding_dim = 16;
  FeaturizerConfig fc;
  fc.n_buckets = 4096;
  TrainConfig tc = desk_train_config(7);
  tc.epochs = 3;
  const auto model = train(tr, arch, tc, fc);
  const Corpus fixture(std::vector<LabeledExample>(rest.examples().begin(), rest.examples().begin() + 100));

  std::vector<std::vector<std::string>> rankings;
  std::vector<std::string> golds;
  for (const auto& ex : fixture.examples()) {
    rankings.push_back(emoji::testing::oracle_ranking(model, ex.text, nullptr, 0));
    golds.push_back(ex.label.str());
  }
  EvalOptions opt;
  opt.ks = {1, 3, 24};
  const auto r = evaluate(model, fixture, opt);
  bool exact = r.overall.n_examples == 100;
  std::string detail;
  for (std::size_t k : opt.ks) {
    const auto m = emoji::testing::oracle_metrics(rankings, golds, k);
    exact = exact && r.overall.hit_at.at(k) == m.hit && std::fabs(r.overall.macro_f1_at.at(k) - m.macro_f1) <= 1e-12;
    detail += fmt("K=%zu hit %.4f/%.4f f1 %.4f/%.4f; ", k, r.overall.hit_at.at(k), m.hit, r.overall.macro_f1_at.at(k),
                  m.macro_f1);
  }
  return {exact, detail + "(evaluate/oracle)"};
}

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelArchitecture a;
  a.embedding_dim = 8;
  a.hidden_dim = 8;
  a.hidden_layers = 1;
  FeaturizerConfig f;
  f.n_buckets = 1024;
  const auto m = init_model(a, f, {EmojiId("a"), EmojiId("b"), EmojiId("c")}, 17);
  auto p = net::params_from_model<double>(m);
  const std::vector<std::pair<FeatureVector, std::size_t>> batch{
      {featurize(f, "pizza time tonight"), 0}, {featurize(f, "rain again, so grey"), 1}, {featurize(f, "pizza in the rain"), 2}};
  auto loss = [&] {
    double l = 0;
    for (const auto& [fv, y] : batch) {
      net::Activations<double> act;
      net::forward(p, fv, act);
      l += net::cross_entropy(act, y);
    }
    return l;
  };
  std::vector<net::Dense<double>> hg;
  for (const auto& h : p.hidden) hg.emplace_back(h.rows, h.cols);
  net::Dense<double> og(p.output.rows, p.output.cols);
  std::vector<double> eg(p.embedding.size(), 0.0);
  for (const auto& [fv, y] : batch) {
    net::Activations<double> act;
    net::forward(p, fv, act);
    net::backward(p, fv, act, y, hg, og, [&](std::uint32_t row) { return eg.data() + std::size_t{row} * p.dim; });
  }
  double worst = 0;
  std::size_t checked = 0;
  auto check = [&](std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + 1e-4;
      const double up = loss();
      v[i] = saved - 1e-4;
      const double down = loss();
      v[i] = saved;
      const double num = (up - down) / 2e-4;
      worst = std::max(worst, std::fabs(g[i] - num) / std::max({std::fabs(g[i]), std::fabs(num), 1e-8}));
      ++checked;
    }
  };
  check(p.embedding, eg);
  check(p.hidden[0].w, hg[0].w);
  check(p.hidden[0].b, hg[0].b);
  check(p.output.w, og.w);
  check(p.output.b, og.b);
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && checked == m.parameter_count() && secs < 5.0,
          fmt("%zu parameters, worst relative error %.3g, %.2f s", checked, worst, secs)};
}

Outcome quantization() {
  const Desk& d = desk(1);
  const ClassifierModel q = quantize(d.model);
  double worst = 0;  // error / (scale / 2)
  auto scan = [&](const Matrix& fm, const Matrix& qm) {
    for (std::uint32_t r = 0; r < fm.rows; ++r)
      for (std::uint32_t c = 0; c < fm.cols; ++c)
        worst = std::max(worst, std::fabs(double(fm.row(r)[c]) - double(qm.q[std::size_t{r} * qm.cols + c]) * double(qm.scales[r])) / (double(qm.scales[r]) / 2.0));
  };
  scan(d.model.embedding, q.embedding);
  for (std::size_t l = 0; l < q.hidden.size(); ++l) scan(d.model.hidden[l].weights, q.hidden[l].weights);
  scan(d.model.output.weights, q.output.weights);

  std::size_t agree = 0, n = 0;
  for (const auto& ex : d.test_set.examples()) {
    if (n == 5000) break;
    ++n;
    agree += predict(d.model, ex.text, 1).ranked[0].emoji == predict(q, ex.text, 1).ranked[0].emoji ? 1 : 0;
  }
  const double agreement = static_cast<double>(agree) / static_cast<double>(n);
  const double ratio = static_cast<double>(serialize_model(q).size()) / static_cast<double>(serialize_model(d.model).size());
  return {worst <= 1.0 + 1e-6 && n >= 2000 && agreement >= 0.95 && ratio <= 0.35,
          fmt("max error %.9f x scale/2; top-1 agreement %.4f on %zu held-out; size ratio %.4f", worst, agreement, n,
              ratio)};
}

Outcome augmentation() {
  const auto t0 = std::chrono::steady_clock::now();
  double base_sum = 0, aug_sum = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const Desk& d = desk(seed);
    TemplateAdapter adapter;
    const TagMapping mapping = build_tag_mapping(d.train_set.vocabulary(), adapter);
    AugmentationPlan plan;
    plan.target_count = 200;
    plan.rare_only_quartile = true;
    const auto synth = generate_synthetic(mapping, plan, d.train_set, adapter, seed);
    const Corpus merged = merge(d.train_set, synth.synthetic);
    const auto aug_model = train(merged, d.train_set.vocabulary(), ModelArchitecture{}, desk_train_config(seed));
    EvalOptions opt;
    opt.ks = {24};
    opt.tail_classes = tail_classes(d.train_set.vocabulary());
    const double b = evaluate(d.model, d.test_set, opt).tail_quartile.hit_at.at(24);
    const double a = evaluate(aug_model, d.test_set, opt).tail_quartile.hit_at.at(24);
    base_sum += b;
    aug_sum += a;
    detail += fmt("seed %d %.4f -> %.4f; ", static_cast<int>(seed), b, a);
  }
  return {aug_sum / 3 > base_sum / 3, detail + fmt("mean tail Hit@24 %.4f -> %.4f (%.0f s)", base_sum / 3, aug_sum / 3,
                                                   seconds_since(t0))};
}

Outcome favorites_trend() {
  const Desk& d = desk(1);
  ProfileOptions po;
  po.n_users = 50;
  po.sessions = 200;
  const auto profiles = generate_profiles(d.model.class_ids, po, 1);
  const auto sweep = simulate_alpha_sweep(d.model, profiles, d.test_set, {0.0, 0.5}, 1);
  const auto& z = sweep[0];
  const auto& h = sweep[1];
  return {h.hit_at.at(1) > z.hit_at.at(1) && h.panel_insertions_per_user > z.panel_insertions_per_user,
          fmt("Hit@1 %.4f -> %.4f, panel insertions/user %.2f -> %.2f (alpha 0 -> 0.5)", z.hit_at.at(1), h.hit_at.at(1),
              z.panel_insertions_per_user, h.panel_insertions_per_user)};
}

Outcome coverage() {
  const Corpus c = zipf(1);
  const auto curve = coverage_curve(c.vocabulary());
  bool monotone = !curve.empty();
  for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].coverage >= curve[i - 1].coverage;
  const bool terminal = !curve.empty() && curve.back().coverage == 1.0;

  // closed form: sum_{r=151}^{200} r^-1.2 / sum_{r=1}^{200} r^-1.2
  double all = 0, tail = 0;
  for (int r = 1; r <= 200; ++r) {
    const double w = std::pow(r, -1.2);
    all += w;
    if (r > 150) tail += w;
  }
  const double closed = tail / all;
  const auto probs = zipf_probabilities(200, 1.2);
  double lib = 0;
  for (std::size_t r = 150; r < 200; ++r) lib += probs[r];
  std::uint64_t observed = 0;
  for (std::size_t id : tail_quartile_ids(c.vocabulary().size())) observed += c.vocabulary().count(id);
  const double share = static_cast<double>(observed) / static_cast<double>(c.size());
  const double sd = std::sqrt(closed * (1 - closed) / static_cast<double>(c.size()));
  const bool mass = std::fabs(lib - closed) <= 1e-12 && closed < 0.05 && std::fabs(share - closed) <= 4 * sd;
  return {monotone && terminal && mass,
          fmt("%zu-point curve, terminal %.17g; tail mass closed form %.7f, library %.7f, observed %.7f", curve.size(),
              curve.empty() ? 0.0 : curve.back().coverage, closed, lib, share)};
}

Outcome latency() {
  // default architecture at the largest class count
  std::vector<EmojiId> classes;
  for (int i = 0; i < 1090; ++i) classes.emplace_back("c" + std::to_string(i));
  ModelArchitecture arch;
  const auto q = quantize(init_model(arch, FeaturizerConfig{}, classes, 3));
  BenchConfig cfg;
  cfg.sentences = default_bench_sentences();
  const auto r = bench_latency(q, cfg);
  const auto r2 = bench_latency(q, cfg);
  const bool shape = r.timed_calls == cfg.measured_iters * cfg.sentences.size();
  return {shape && r.median_ms < 20.0,
          fmt("1090-class int8 model, 300 warmup / 50 passes x %zu sentences: median %.4f ms, p95 %.4f ms "
              "(repeat median %.4f ms), %zu bytes",
              cfg.sentences.size(), r.median_ms, r.p95_ms, r2.median_ms, r.size.bytes_on_disk)};
}

Outcome determinism() {
  ZipfCorpusOptions o;
  o.n_examples = 8000;
  o.seed = 5;
  const std::string c1 = serialize_corpus(generate_zipf_corpus(o));
  const std::string c2 = serialize_corpus(generate_zipf_corpus(o));
  const Corpus corpus = parse_corpus(c1);

  TrainConfig tc = desk_train_config(5);
  tc.epochs = 2;
  const auto m1 = serialize_model(train(corpus, ModelArchitecture{}, tc));
  const auto m2 = serialize_model(train(corpus, ModelArchitecture{}, tc));

  auto augment = [&] {
    TemplateAdapter adapter;
    AugmentationPlan plan;
    plan.target_count = 100;
    plan.max_in_flight = 4;
    const auto mapping = build_tag_mapping(corpus.vocabulary(), adapter);
    return serialize_corpus(generate_synthetic(mapping, plan, corpus, adapter, 5).synthetic);
  };
  const std::string a1 = augment(), a2 = augment();

  const auto model = deserialize_model(m1);
  ProfileOptions po;
  po.n_users = 10;
  po.sessions = 50;
  auto simulate = [&] {
    std::ostringstream out;
    write_sweep_report(out, simulate_alpha_sweep(model, generate_profiles(model.class_ids, po, 5), corpus,
                                                 {0.0, 0.3, 0.5}, 5));
    return out.str();
  };
  const std::string s1 = simulate(), s2 = simulate();
  return {c1 == c2 && m1 == m2 && a1 == a2 && s1 == s2 && !a1.empty(),
          fmt("gen-corpus %s, train %s, augment %s, simulate %s", c1 == c2 ? "identical" : "DIFFERENT",
              m1 == m2 ? "identical" : "DIFFERENT", a1 == a2 ? "identical" : "DIFFERENT",
              s1 == s2 ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"rerank unit suite", eq1_suite},
      {"metric oracle", metric_oracle},
      {"gradient check", gradient_check},
      {"quantization", quantization},
      {"imbalance augmentation", augmentation},
      {"favorites trend", favorites_trend},
      {"coverage", coverage},
      {"latency protocol", latency},
      {"determinism", determinism},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const auto& [name, run] : criteria) {
    if (std::string(name).find(only) == std::string::npos) continue;
    ++ran;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ran) - failed, ran);
  return failed == 0 ? 0 : 1;
}
