#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "emoji/augmentation.hpp"

namespace emoji {

RemoteAdapterConfig RemoteAdapterConfig::from_env() {
  RemoteAdapterConfig cfg;
  if (const char* url = std::getenv("EMOJI_GEN_URL")) cfg.url = url;
  if (const char* token = std::getenv("EMOJI_GEN_TOKEN")) cfg.token = token;
  return cfg;
}

RemoteAdapter::RemoteAdapter(RemoteAdapterConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  const auto scheme_end = url.find("://");
  if (url.empty() || scheme_end == std::string::npos)
    throw InvalidConfigError("generator URL must look like http://host[:port]/path, got '" + url + "'");
  if (url.compare(0, scheme_end, "http") != 0)
    throw InvalidConfigError("only plain http generator endpoints are supported");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (config_.max_retries < 0) throw InvalidConfigError("max_retries must be >= 0");
}

RemoteAdapter::~RemoteAdapter() = default;

std::string RemoteAdapter::complete(const std::string& prompt) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  const std::string body = nlohmann::json{{"prompt", prompt}}.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("bad reply: ") + e.what();
    }
  }
  throw AdapterError("generator request failed: " + last_error);
}

std::vector<std::string> RemoteAdapter::generate_tags(const EmojiId& emoji) { return {complete(tag_prompt(emoji))}; }

std::string RemoteAdapter::generate_sentence(std::string_view tag, std::uint64_t style_seed) {
  return complete(sentence_prompt(tag, style_seed));
}

}  // namespace emoji
