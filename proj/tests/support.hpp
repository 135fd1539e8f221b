#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>

#include "emoji/classifier.hpp"
#include "emoji/corpus.hpp"

namespace emoji::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("emoji-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

// Optimizer settings that train the desk-scale corpora well.
inline TrainConfig desk_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.learning_rate = 0.5;
  c.weight_decay = 1e-4;
  c.batch_size = 32;
  c.epochs = 5;
  c.seed = seed;
  return c;
}

// Two classes whose texts share filler words but use disjoint keywords.
inline Corpus two_keyword_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const char* filler[] = {"we", "went", "out", "today", "and", "it", "was", "really", "so", "the"};
  const char* a_words[] = {"pizza", "pepperoni", "cheese"};
  const char* b_words[] = {"rain", "storm", "umbrella"};
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = rng() % 2 == 0;
    std::string text;
    for (int w = 0; w < 3; ++w) text += std::string(filler[rng() % 10]) + " ";
    text += a ? a_words[rng() % 3] : b_words[rng() % 3];
    ex.push_back({text, EmojiId(a ? "🍕" : "🌧️"), Origin::kHuman});
  }
  return Corpus(std::move(ex));
}

}  // namespace emoji::testing
