#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "emoji/classifier.hpp"
#include "emoji/corpus.hpp"
#include "emoji/personalization.hpp"

namespace emoji {

struct Metrics {
  std::size_t n_examples = 0;
  std::map<std::size_t, double> hit_at;       // K -> fraction
  std::map<std::size_t, double> macro_f1_at;  // K -> fraction
};

struct ClassReport {
  std::ptrdiff_t class_id = -1;  // -1 when the gold label is not a model class
  std::size_t support = 0;
  std::map<std::size_t, double> hit_at;
};

struct EvalReport {
  std::vector<std::size_t> ks;
  Metrics overall;
  Metrics tail_quartile;
  Metrics head;  // everything outside the tail quartile
  std::map<EmojiId, ClassReport> per_class;  // every gold label seen in the test set
  std::size_t unknown_gold = 0;  // examples whose gold is outside the candidate set
  bool reranked = false;
};

struct EvalOptions {
  std::vector<std::size_t> ks{1, 24};
  /// Reranks with the store when set; requires `rerank`.
  const FavoritesStore* store = nullptr;
  std::optional<RerankConfig> rerank;
  /// Tail classes; default is the bottom ceil(n/4) model classes by class id
  /// (class ids follow training frequency).
  std::optional<std::vector<EmojiId>> tail_classes;
};

/// Top-k macro F1 convention: for class c, hits(c) = examples with gold c and
/// c in the top k; recall = hits / support(c); precision = hits / #examples
/// whose top k contains c; F1 is their harmonic mean (0 when both are 0).
/// Averaged over classes with support >= 1.
EvalReport evaluate(const ClassifierModel& model, const Corpus& test, const EvalOptions& options = {});

/// Tail classes of a training vocabulary: its bottom ceil(n/4) entries.
std::vector<EmojiId> tail_classes(const EmojiVocabulary& training_vocab);

// ---------------------------------------------------------------------------
// Favorites simulation

struct SimUserProfile {
  std::vector<std::pair<EmojiId, double>> preference;  // sums to 1
  std::size_t sessions = 200;
};

struct ProfileOptions {
  std::size_t n_users = 50;
  std::size_t subset_size = 8;     // emojis each user cares about
  double concentration = 0.3;      // Dirichlet parameter; small is skewed
  std::size_t sessions = 200;
};

/// Each user draws a random subset of `classes` and Dirichlet weights over it.
std::vector<SimUserProfile> generate_profiles(const std::vector<EmojiId>& classes, const ProfileOptions& options,
                                              std::uint64_t seed);

struct SimOptions {
  double mix = 0.5;  // probability the intended emoji comes from the user's preference
  std::size_t panel_k = 24;
  std::vector<std::size_t> hit_ks{1, 24};
  RerankConfig rerank;  // alpha is overridden per sweep point
  bool count_external = true;
};

struct SweepPoint {
  double alpha = 0.0;
  std::map<std::size_t, double> hit_at;  // mean over users
  double panel_insertions_per_user = 0.0;
  double external_insertions_per_user = 0.0;
};

/// For each alpha, every user starts with an empty store and plays
/// `sessions` prompts. The intended emoji is drawn from the preference with
/// probability `mix`, else it is the prompt's gold label. If it is in the
/// reranked panel it is a panel insertion, otherwise an external one; both go
/// to the store. Users see the same prompt and intent draws at every alpha.
std::vector<SweepPoint> simulate_alpha_sweep(const ClassifierModel& model, const std::vector<SimUserProfile>& profiles,
                                             const Corpus& prompts, const std::vector<double>& alphas,
                                             std::uint64_t seed, const SimOptions& options = {});

// ---------------------------------------------------------------------------
// Latency

struct BenchConfig {
  std::size_t warmup_iters = 300;
  std::size_t measured_iters = 50;
  std::vector<std::string> sentences;
  std::size_t k = 24;  // clamped to the class count
};

struct SentenceStats {
  std::string sentence;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

struct BenchReport {
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
  std::size_t timed_calls = 0;
  std::vector<SentenceStats> per_sentence;
  ModelSizeReport size;
};

using BenchClock = std::function<std::chrono::nanoseconds()>;
BenchClock steady_bench_clock();

/// Warmup: warmup_iters untimed predict calls cycling over the sentences.
/// Then measured_iters passes over the sentence list, timing each call.
BenchReport bench_latency(const ClassifierModel& model, const BenchConfig& cfg,
                          const BenchClock& clock = steady_bench_clock());

/// Median (mean of the middle pair for even sizes) and nearest-rank
/// percentile. Empty input gives 0.
double median(std::vector<double> values);
double percentile(std::vector<double> values, double p);

/// Built-in benchmark sentences.
std::vector<std::string> default_bench_sentences();

// ---------------------------------------------------------------------------
// Reports

void write_eval_report(std::ostream& out, const EvalReport& report);   // JSON lines
void print_eval_table(std::ostream& out, const EvalReport& report);
void write_coverage_csv(std::ostream& out, const std::vector<CoveragePoint>& curve);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);
void write_sweep_report(std::ostream& out, const std::vector<SweepPoint>& sweep);  // JSON lines
void write_bench_report(std::ostream& out, const BenchReport& report);  // JSON lines

}  // namespace emoji
