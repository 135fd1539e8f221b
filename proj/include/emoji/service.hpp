#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "emoji/classifier.hpp"
#include "emoji/personalization.hpp"

namespace emoji {

struct ServiceConfig {
  std::filesystem::path model_path;
  std::filesystem::path data_dir = "data";
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t default_k = 24;
  RerankConfig rerank;  // default alpha etc.
  bool count_external = true;
  std::size_t max_text_chars = 2000;
  std::optional<std::filesystem::path> ui_dir;  // served under /ui when set

  void validate() const;  // throws InvalidConfigError
};

/// "host:port", ":port" or "host". Throws InvalidConfigError.
void parse_bind(const std::string& bind, std::string& host, int& port);

/// HTTP/1.1 JSON service:
///   POST /v1/predict            {user_id, text, k?, alpha?}
///   POST /v1/events             {user_id, emoji, source?}  -> 204 after fsync
///   GET  /v1/users/{id}/favorites
///   GET  /v1/healthz
class Service {
 public:
  /// Loads the model from cfg.model_path.
  explicit Service(ServiceConfig cfg);
  /// Uses an in-memory model; `model_version` is reported by healthz.
  Service(ServiceConfig cfg, ClassifierModel model, std::string model_version);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and returns the bound port. Throws IoError.
  int bind();
  /// Serves until stop(). Binds first if needed.
  void run();
  void stop();
  bool running() const;
  void wait_until_ready() const;

  const std::string& model_version() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emoji
