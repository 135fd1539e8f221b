#include "emoji/service.hpp"

#include <fstream>
#include <iterator>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "emoji/error.hpp"
#include "emoji/utf8.hpp"

namespace emoji {

void ServiceConfig::validate() const {
  if (default_k == 0) throw InvalidConfigError("default_k must be >= 1");
  if (port < 0 || port > 65535) throw InvalidConfigError("port out of range");
  if (max_text_chars == 0) throw InvalidConfigError("max_text_chars must be positive");
  rerank.validate();
}

void parse_bind(const std::string& bind, std::string& host, int& port) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    if (!bind.empty()) host = bind;
    return;
  }
  if (colon > 0) host = bind.substr(0, colon);
  const std::string p = bind.substr(colon + 1);
  try {
    std::size_t used = 0;
    const int v = std::stoi(p, &used);
    if (used != p.size() || v < 0 || v > 65535) throw std::out_of_range(p);
    port = v;
  } catch (const std::exception&) {
    throw InvalidConfigError("bad port in bind address '" + bind + "'");
  }
}

namespace {

using json = nlohmann::json;

struct RequestError {
  int status;
  std::string field;
  std::string message;
};

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const RequestError& e) {
  nlohmann::ordered_json body;
  body["error"] = e.message;
  if (!e.field.empty()) body["field"] = e.field;
  send_json(res, e.status, body);
}

json parse_body(const httplib::Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception& e) {
    throw RequestError{400, "", std::string("body is not valid JSON: ") + e.what()};
  }
  if (!body.is_object()) throw RequestError{400, "", "body must be a JSON object"};
  return body;
}

std::string required_string(const json& body, const char* field) {
  const auto it = body.find(field);
  if (it == body.end()) throw RequestError{400, field, std::string("missing field '") + field + "'"};
  if (!it->is_string()) throw RequestError{400, field, std::string("field '") + field + "' must be a string"};
  return it->get<std::string>();
}

std::string user_id_field(const json& body) {
  std::string id = required_string(body, "user_id");
  if (!valid_user_id(id)) throw RequestError{400, "user_id", "user_id must match [A-Za-z0-9_.-]{1,64}"};
  return id;
}

struct UserState {
  std::mutex write_mu;  // serializes event appends for this user
  mutable std::mutex snap_mu;
  FavoritesStore store;
  std::unique_ptr<EventLog> log;

  FavoritesStore snapshot() const {
    std::lock_guard lock(snap_mu);
    return store;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

struct Service::Impl {
  ServiceConfig cfg;
  ClassifierModel model;
  std::string version;
  httplib::Server server;
  int bound_port = -1;

  std::shared_mutex users_mu;
  std::unordered_map<std::string, std::unique_ptr<UserState>> users;

  ReplayOptions replay_options() const { return {cfg.count_external}; }

  UserState& user(const std::string& id) {
    {
      std::shared_lock lock(users_mu);
      auto it = users.find(id);
      if (it != users.end()) return *it->second;
    }
    // Replay outside the map lock; a racing loader for the same id loses.
    auto state = std::make_unique<UserState>();
    const auto replayed = replay_event_log(user_log_path(cfg.data_dir, id), replay_options());
    state->store = replayed.store;
    std::unique_lock lock(users_mu);
    auto [it, inserted] = users.emplace(id, std::move(state));
    return *it->second;
  }

  void predict(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string uid = user_id_field(body);
    const std::string text = required_string(body, "text");
    if (utf8::length(text) > cfg.max_text_chars)
      throw RequestError{413, "text", "text longer than " + std::to_string(cfg.max_text_chars) + " characters"};

    std::size_t k = cfg.default_k;
    if (auto it = body.find("k"); it != body.end() && !it->is_null()) {
      if (!it->is_number_integer() || it->get<std::int64_t>() < 1)
        throw RequestError{400, "k", "k must be a positive integer"};
      k = static_cast<std::size_t>(it->get<std::int64_t>());
    }
    RerankConfig rc = cfg.rerank;
    if (auto it = body.find("alpha"); it != body.end() && !it->is_null()) {
      if (!it->is_number()) throw RequestError{400, "alpha", "alpha must be a number"};
      rc.alpha = it->get<double>();
      if (!(rc.alpha >= 0.0 && rc.alpha < 1.0)) throw RequestError{400, "alpha", "alpha must be in [0, 1)"};
    }

    const FavoritesStore store = user(uid).snapshot();
    const auto probs = class_probabilities(model, text);
    const auto rr = rerank(rank_distribution(model, probs, model.n_classes()), store, rc);

    nlohmann::ordered_json out;
    nlohmann::ordered_json ranked = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rr.ranked.size() && i < k; ++i) {
      const auto& e = rr.ranked[i];
      ranked.push_back({{"emoji", e.emoji.str()},
                        {"final_score", e.final_score},
                        {"model_prob", e.model_prob},
                        {"favorites_prob", e.favorites_prob}});
    }
    out["ranked"] = std::move(ranked);
    out["model_version"] = version;
    out["alpha"] = rc.alpha;
    send_json(res, 200, out);
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string uid = user_id_field(body);
    const std::string raw = required_string(body, "emoji");
    const auto split = utf8::split_emojis(raw);
    if (split.emojis.size() != 1 || !utf8::trim(split.remainder).empty())
      throw RequestError{400, "emoji", "emoji must be exactly one emoji sequence"};
    EventSource source = EventSource::kPanel;
    if (auto it = body.find("source"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) throw RequestError{400, "source", "source must be \"panel\" or \"external\""};
      try {
        source = event_source_from_string(it->get<std::string>());
      } catch (const Error&) {
        throw RequestError{400, "source", "source must be \"panel\" or \"external\""};
      }
    }

    const EmojiId emoji(split.emojis.front());
    UserState& st = user(uid);
    {
      std::lock_guard lock(st.write_mu);
      if (!st.log) st.log = std::make_unique<EventLog>(user_log_path(cfg.data_dir, uid));
      st.log->append({iso8601_now(), emoji, source});
      if (source == EventSource::kPanel || cfg.count_external) {
        std::lock_guard snap(st.snap_mu);
        st.store.record(emoji);
      }
    }
    res.status = 204;
  }

  void favorites(const httplib::Request& req, httplib::Response& res) {
    const std::string uid = req.matches[1];
    if (!valid_user_id(uid)) throw RequestError{400, "user_id", "user_id must match [A-Za-z0-9_.-]{1,64}"};
    const FavoritesStore store = user(uid).snapshot();
    std::vector<std::pair<EmojiId, std::uint64_t>> rows(store.counts().begin(), store.counts().end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    nlohmann::ordered_json out;
    out["user_id"] = uid;
    out["total"] = store.total();
    out["n_favorites"] = store.n_favorites();
    nlohmann::ordered_json counts = nlohmann::ordered_json::array();
    for (const auto& [e, c] : rows) counts.push_back({{"emoji", e.str()}, {"count", c}});
    out["counts"] = std::move(counts);
    send_json(res, 200, out);
  }

  template <typename F>
  httplib::Server::Handler wrap(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        (this->*f)(req, res);
      } catch (const RequestError& e) {
        send_error(res, e);
      } catch (const Error& e) {
        send_error(res, {500, "", e.what()});
      } catch (const std::exception& e) {
        send_error(res, {500, "", std::string("internal error: ") + e.what()});
      }
    };
  }

  void routes() {
    server.Post("/v1/predict", wrap(&Impl::predict));
    server.Post("/v1/events", wrap(&Impl::events));
    server.Get(R"(/v1/users/([^/]+)/favorites)", wrap(&Impl::favorites));
    server.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, nlohmann::ordered_json{{"status", "ok"}, {"model_version", version}});
    });
    if (cfg.ui_dir && !server.set_mount_point("/ui", cfg.ui_dir->string()))
      throw InvalidConfigError("ui directory not found: " + cfg.ui_dir->string());
  }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  const std::string raw = read_file(cfg.model_path);
  const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  impl_->model = deserialize_model(bytes);
  impl_->version = emoji::model_version(bytes);
  impl_->cfg = std::move(cfg);
  impl_->routes();
}

Service::Service(ServiceConfig cfg, ClassifierModel model, std::string version) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  model.validate();
  impl_->model = std::move(model);
  impl_->version = std::move(version);
  impl_->cfg = std::move(cfg);
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->bound_port >= 0) return impl_->bound_port;
  const auto& cfg = impl_->cfg;
  int port = cfg.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(cfg.host);
  } else if (!impl_->server.bind_to_port(cfg.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  impl_->bound_port = port;
  return port;
}

void Service::run() {
  bind();
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }
void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }
const std::string& Service::model_version() const { return impl_->version; }

}  // namespace emoji
