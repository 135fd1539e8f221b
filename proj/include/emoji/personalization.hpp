#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "emoji/classifier.hpp"
#include "emoji/corpus.hpp"

namespace emoji {

/// Per-user emoji insertion counts.
class FavoritesStore {
 public:
  void record(const EmojiId& emoji);

  std::uint64_t count(const EmojiId& emoji) const;
  std::uint64_t total() const noexcept { return total_; }
  /// Number of distinct emojis ever inserted.
  std::size_t n_favorites() const noexcept { return counts_.size(); }
  /// Unsmoothed count / total; 0 for an empty store.
  double probability(const EmojiId& emoji) const;
  const std::map<EmojiId, std::uint64_t>& counts() const noexcept { return counts_; }
  bool empty() const noexcept { return total_ == 0; }

  friend bool operator==(const FavoritesStore&, const FavoritesStore&) = default;

 private:
  std::map<EmojiId, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

FavoritesStore record_insertion(FavoritesStore store, const EmojiId& emoji);

struct RerankConfig {
  double alpha = 0.0;      // [0, 1)
  std::uint32_t s = 4;     // damping horizon on distinct favorites
  double floor = 1e-4;     // model probability for emojis the model does not know
  double fav_smoothing = 1.0;  // additive smoothing on favorites probabilities, >= 0

  /// Throws InvalidConfigError.
  void validate() const;
};

/// alpha / (1 - alpha) * min(s, n_favorites) / s
double favorites_exponent(const RerankConfig& cfg, std::size_t n_favorites);

struct RerankedPrediction {
  struct Entry {
    EmojiId emoji;
    double final_score = 0.0;
    double model_prob = 0.0;
    double favorites_prob = 0.0;
    bool in_model = true;
  };
  std::vector<Entry> ranked;  // descending final_score, ties by code points
  double exponent = 0.0;
};

/// Blends a full model distribution with the user's favorites:
///   score = model_prob * favorites_prob ^ exponent
/// over the model classes plus every favorite. Unknown favorites get
/// cfg.floor as model probability. Scores are not renormalized.
RerankedPrediction rerank(const Prediction& model_pred, const FavoritesStore& store, const RerankConfig& cfg);

// ---------------------------------------------------------------------------
// Event log persistence

enum class EventSource { kPanel, kExternal };
std::string_view to_string(EventSource s) noexcept;
EventSource event_source_from_string(std::string_view s);  // throws emoji::Error

struct InsertionEvent {
  std::string ts;  // ISO-8601 UTC
  EmojiId emoji;
  EventSource source = EventSource::kPanel;

  friend bool operator==(const InsertionEvent&, const InsertionEvent&) = default;
};

std::string iso8601_now();

struct ReplayOptions {
  bool count_external = true;
};

struct ReplayResult {
  FavoritesStore store;
  std::vector<InsertionEvent> events;
  std::vector<std::string> warnings;
};

/// Folds the log into a store. A malformed final line without a newline is
/// treated as a torn append: skipped with a warning. Any other malformed
/// line throws ParseError. A missing file is an empty log.
ReplayResult replay_event_log(const std::filesystem::path& path, const ReplayOptions& options = {});
FavoritesStore fold_events(const std::vector<InsertionEvent>& events, const ReplayOptions& options = {});

/// Append-only log of one user's insertion events. Each append is a single
/// write followed by fsync.
class EventLog {
 public:
  /// Creates parent directories. A torn trailing line is cut off so later
  /// appends start on a fresh line.
  explicit EventLog(std::filesystem::path path);

  void append(const InsertionEvent& event);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes `store` as an event log (one event per insertion).
void save_store(const FavoritesStore& store, const std::filesystem::path& path);
FavoritesStore load_store(const std::filesystem::path& path, const ReplayOptions& options = {});

/// `<data_dir>/users/<user_id>/events.log`. Throws InvalidConfigError for
/// ids outside [A-Za-z0-9_.-]{1,64} or equal to "." / "..".
std::filesystem::path user_log_path(const std::filesystem::path& data_dir, std::string_view user_id);
bool valid_user_id(std::string_view user_id);

/// Store plus its event log; record() persists before updating memory.
class PersistentFavorites {
 public:
  PersistentFavorites(std::filesystem::path log_path, ReplayOptions options = {});

  void record(const EmojiId& emoji, EventSource source);
  const FavoritesStore& store() const noexcept { return store_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  PersistentFavorites(const std::filesystem::path& log_path, ReplayOptions options, ReplayResult replayed);

  ReplayOptions options_;
  FavoritesStore store_;
  std::vector<std::string> warnings_;
  EventLog log_;
};

}  // namespace emoji
