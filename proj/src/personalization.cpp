#include "emoji/personalization.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "emoji/error.hpp"

namespace emoji {

void FavoritesStore::record(const EmojiId& emoji) {
  if (emoji.empty()) throw Error("cannot record an empty emoji");
  ++counts_[emoji];
  ++total_;
}

std::uint64_t FavoritesStore::count(const EmojiId& emoji) const {
  auto it = counts_.find(emoji);
  return it == counts_.end() ? 0 : it->second;
}

double FavoritesStore::probability(const EmojiId& emoji) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(emoji)) / static_cast<double>(total_);
}

FavoritesStore record_insertion(FavoritesStore store, const EmojiId& emoji) {
  store.record(emoji);
  return store;
}

void RerankConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidConfigError("alpha must be in [0, 1), got " + std::to_string(alpha));
  if (s == 0) throw InvalidConfigError("s must be >= 1");
  if (!(floor > 0.0 && floor < 1.0)) throw InvalidConfigError("floor must be in (0, 1)");
  if (!(fav_smoothing >= 0.0) || !std::isfinite(fav_smoothing))
    throw InvalidConfigError("favorites smoothing must be >= 0");
}

double favorites_exponent(const RerankConfig& cfg, std::size_t n_favorites) {
  cfg.validate();
  const double damp = static_cast<double>(std::min<std::size_t>(cfg.s, n_favorites)) / cfg.s;
  return cfg.alpha / (1.0 - cfg.alpha) * damp;
}

RerankedPrediction rerank(const Prediction& model_pred, const FavoritesStore& store, const RerankConfig& cfg) {
  cfg.validate();
  RerankedPrediction out;
  out.exponent = store.empty() ? 0.0 : favorites_exponent(cfg, store.n_favorites());

  std::unordered_map<std::string, std::size_t> seen;
  out.ranked.reserve(model_pred.ranked.size() + store.n_favorites());
  for (const auto& e : model_pred.ranked) {
    if (!seen.emplace(e.emoji.str(), out.ranked.size()).second) continue;
    out.ranked.push_back({e.emoji, 0.0, e.probability, 0.0, true});
  }
  for (const auto& [emoji, count] : store.counts()) {
    if (seen.emplace(emoji.str(), out.ranked.size()).second)
      out.ranked.push_back({emoji, 0.0, cfg.floor, 0.0, false});
  }

  const double beta = cfg.fav_smoothing;
  const double denom = static_cast<double>(store.total()) + beta * static_cast<double>(out.ranked.size());
  for (auto& e : out.ranked) {
    if (store.empty()) {
      e.final_score = e.model_prob;
      continue;
    }
    e.favorites_prob = (static_cast<double>(store.count(e.emoji)) + beta) / denom;
    e.final_score = e.model_prob * std::pow(e.favorites_prob, out.exponent);
  }
  std::sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
    if (a.final_score != b.final_score) return a.final_score > b.final_score;
    return a.emoji < b.emoji;
  });
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EventSource s) noexcept { return s == EventSource::kPanel ? "panel" : "external"; }

EventSource event_source_from_string(std::string_view s) {
  if (s == "panel") return EventSource::kPanel;
  if (s == "external") return EventSource::kExternal;
  throw Error("unknown event source '" + std::string(s) + "'");
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

namespace {

std::string event_line(const InsertionEvent& ev) {
  nlohmann::ordered_json j;
  j["ts"] = ev.ts;
  j["emoji"] = ev.emoji.str();
  j["source"] = std::string(to_string(ev.source));
  return j.dump() + "\n";
}

InsertionEvent parse_event(const std::string& line, std::size_t line_no) {
  try {
    const auto j = nlohmann::json::parse(line);
    InsertionEvent ev;
    ev.ts = j.at("ts").get<std::string>();
    ev.emoji = EmojiId(j.at("emoji").get<std::string>());
    ev.source = event_source_from_string(j.at("source").get<std::string>());
    return ev;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

FavoritesStore fold_events(const std::vector<InsertionEvent>& events, const ReplayOptions& options) {
  FavoritesStore store;
  for (const auto& ev : events) {
    if (ev.source == EventSource::kExternal && !options.count_external) continue;
    store.record(ev.emoji);
  }
  return store;
}

ReplayResult replay_event_log(const std::filesystem::path& path, const ReplayOptions& options) {
  ReplayResult out;
  if (!std::filesystem::exists(path)) return out;
  const std::string data = read_all(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    ++line_no;
    const std::size_t nl = data.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = data.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : data.size();
    if (blank(line)) continue;
    try {
      out.events.push_back(parse_event(line, line_no));
    } catch (const ParseError&) {
      if (terminated) throw;
      out.warnings.push_back(path.string() + ": skipped torn trailing line " + std::to_string(line_no));
    }
  }
  out.store = fold_events(out.events, options);
  return out;
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (!std::filesystem::exists(path_)) return;
  const std::string data = read_all(path_);
  if (data.empty() || data.back() == '\n') return;
  const std::size_t keep = data.rfind('\n') == std::string::npos ? 0 : data.rfind('\n') + 1;
  bool complete = true;
  try {
    parse_event(data.substr(keep), 0);
  } catch (const ParseError&) {
    complete = false;
  }
  if (complete) {
    std::ofstream(path_, std::ios::binary | std::ios::app) << '\n';
    return;
  }
  std::error_code ec;
  std::filesystem::resize_file(path_, keep, ec);
  if (ec) throw IoError("cannot repair " + path_.string() + ": " + ec.message());
}

void EventLog::append(const InsertionEvent& event) {
  const std::string line = event_line(event);
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("write failed on " + path_.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  const int rc = ::fsync(fd);
  const int err = errno;
  ::close(fd);
  if (rc != 0) throw IoError("fsync failed on " + path_.string() + ": " + std::strerror(err));
}

void save_store(const FavoritesStore& store, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string ts = iso8601_now();
  for (const auto& [emoji, count] : store.counts())
    for (std::uint64_t i = 0; i < count; ++i) out << event_line({ts, emoji, EventSource::kPanel});
  if (!out) throw IoError("write failed on " + path.string());
}

FavoritesStore load_store(const std::filesystem::path& path, const ReplayOptions& options) {
  return replay_event_log(path, options).store;
}

bool valid_user_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

std::filesystem::path user_log_path(const std::filesystem::path& data_dir, std::string_view user_id) {
  if (!valid_user_id(user_id)) throw InvalidConfigError("invalid user id '" + std::string(user_id) + "'");
  return data_dir / "users" / std::string(user_id) / "events.log";
}

PersistentFavorites::PersistentFavorites(std::filesystem::path log_path, ReplayOptions options)
    : PersistentFavorites(log_path, options, replay_event_log(log_path, options)) {}

PersistentFavorites::PersistentFavorites(const std::filesystem::path& log_path, ReplayOptions options,
                                         ReplayResult replayed)
    : options_(options),
      store_(std::move(replayed.store)),
      warnings_(std::move(replayed.warnings)),
      log_(log_path) {}

void PersistentFavorites::record(const EmojiId& emoji, EventSource source) {
  log_.append({iso8601_now(), emoji, source});
  if (source == EventSource::kExternal && !options_.count_external) return;
  store_.record(emoji);
}

}  // namespace emoji
