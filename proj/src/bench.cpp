#include <algorithm>
#include <cmath>
#include <numeric>

#include "emoji/error.hpp"
#include "emoji/evaluation.hpp"

namespace emoji {

BenchClock steady_bench_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch());
  };
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(p / 100.0 * static_cast<double>(values.size()));
  const std::size_t idx = rank < 1.0 ? 0 : std::min(values.size(), static_cast<std::size_t>(rank)) - 1;
  return values[idx];
}

std::vector<std::string> default_bench_sentences() {
  return {
      "I love this so much",
      "that was hilarious, I can't stop laughing",
      "happy birthday to my favourite person",
      "ugh, Monday again and it's raining",
      "pizza time with the whole team tonight",
      "congratulations on the new job!",
      "good night, sleep well",
      "we just landed in Lisbon, the sun is out",
      "my cat knocked the plant over again",
      "see you at the game on Saturday",
  };
}

BenchReport bench_latency(const ClassifierModel& model, const BenchConfig& cfg, const BenchClock& clock) {
  if (cfg.sentences.empty()) throw InvalidConfigError("bench needs at least one sentence");
  if (cfg.measured_iters == 0) throw InvalidConfigError("measured_iters must be positive");
  if (model.n_classes() == 0) throw InvalidConfigError("model has no classes");
  const std::size_t k = std::clamp<std::size_t>(cfg.k, 1, model.n_classes());

  std::size_t sink = 0;
  for (std::size_t i = 0; i < cfg.warmup_iters; ++i)
    sink += predict(model, cfg.sentences[i % cfg.sentences.size()], k).ranked.front().class_id;

  std::vector<std::vector<double>> per(cfg.sentences.size());
  std::vector<double> all;
  all.reserve(cfg.measured_iters * cfg.sentences.size());
  for (std::size_t it = 0; it < cfg.measured_iters; ++it) {
    for (std::size_t s = 0; s < cfg.sentences.size(); ++s) {
      const auto start = clock();
      sink += predict(model, cfg.sentences[s], k).ranked.front().class_id;
      const auto stop = clock();
      const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
      per[s].push_back(ms);
      all.push_back(ms);
    }
  }
  // keep the predictions observable
  volatile std::size_t keep = sink;
  (void)keep;

  BenchReport r;
  r.timed_calls = all.size();
  r.median_ms = median(all);
  r.p95_ms = percentile(all, 95.0);
  r.mean_ms = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  for (std::size_t s = 0; s < cfg.sentences.size(); ++s) {
    SentenceStats st;
    st.sentence = cfg.sentences[s];
    st.median_ms = median(per[s]);
    st.mean_ms = std::accumulate(per[s].begin(), per[s].end(), 0.0) / static_cast<double>(per[s].size());
    st.min_ms = *std::min_element(per[s].begin(), per[s].end());
    st.max_ms = *std::max_element(per[s].begin(), per[s].end());
    r.per_sentence.push_back(std::move(st));
  }
  r.size = model_size_report(model);
  return r;
}

}  // namespace emoji
