#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emoji/corpus.hpp"
#include "emoji/error.hpp"
#include "emoji/utf8.hpp"

namespace emoji {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string required_string(const json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end()) throw ParseError(line, std::string("missing field '") + field + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::string_view content) {
  std::vector<LabeledExample> examples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (utf8::trim(line).empty()) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record must be a JSON object");
    LabeledExample ex;
    ex.text = required_string(record, "text", line_no);
    if (utf8::trim(ex.text).empty()) throw ParseError(line_no, "empty text");
    const std::string label = required_string(record, "emoji", line_no);
    if (utf8::trim(label).empty()) throw ParseError(line_no, "empty emoji");
    ex.label = EmojiId(label);
    if (const auto it = record.find("origin"); it != record.end()) {
      if (!it->is_string()) throw ParseError(line_no, "field 'origin' must be a string");
      try {
        ex.origin = origin_from_string(it->get<std::string>());
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw EmptyCorpusError("no records");
  return Corpus(std::move(examples));
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples()) {
    ordered_json record;
    record["text"] = ex.text;
    record["emoji"] = ex.label.str();
    record["origin"] = std::string(to_string(ex.origin));
    out += record.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(corpus));
}

EmojiVocabulary load_vocabulary(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("vocabulary " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw Error("vocabulary " + path.string() + ": expected a JSON array");
  std::vector<EmojiVocabulary::Entry> entries;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("emoji") || !item.contains("count"))
      throw Error("vocabulary " + path.string() + ": entries need emoji and count");
    entries.push_back({EmojiId(item.at("emoji").get<std::string>()), item.at("count").get<std::uint64_t>()});
  }
  return EmojiVocabulary(std::move(entries));
}

void save_vocabulary(const EmojiVocabulary& vocab, const std::filesystem::path& path) {
  ordered_json doc = ordered_json::array();
  for (const auto& e : vocab.entries()) {
    ordered_json item;
    item["emoji"] = e.emoji.str();
    item["count"] = e.count;
    doc.push_back(std::move(item));
  }
  write_file(path, doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

}  // namespace emoji
