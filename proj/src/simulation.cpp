#include <algorithm>
#include <numeric>

#include "emoji/error.hpp"
#include "emoji/evaluation.hpp"
#include "emoji/random.hpp"

namespace emoji {

std::vector<SimUserProfile> generate_profiles(const std::vector<EmojiId>& classes, const ProfileOptions& options,
                                              std::uint64_t seed) {
  if (classes.empty()) throw InvalidConfigError("no classes to build profiles from");
  if (options.subset_size == 0) throw InvalidConfigError("subset_size must be positive");
  if (!(options.concentration > 0.0)) throw InvalidConfigError("concentration must be positive");
  const std::size_t m = std::min(options.subset_size, classes.size());

  std::vector<SimUserProfile> profiles;
  profiles.reserve(options.n_users);
  std::vector<std::size_t> order(classes.size());
  for (std::size_t u = 0; u < options.n_users; ++u) {
    Rng rng(derive_seed(seed, u));
    std::iota(order.begin(), order.end(), 0);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < m; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);

    SimUserProfile p;
    p.sessions = options.sessions;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double g = rng.gamma(options.concentration);
      p.preference.emplace_back(classes[order[i]], g);
      sum += g;
    }
    if (!(sum > 0.0)) {
      // every gamma draw underflowed; fall back to uniform
      for (auto& [e, w] : p.preference) w = 1.0;
      sum = static_cast<double>(m);
    }
    for (auto& [e, w] : p.preference) w /= sum;
    profiles.push_back(std::move(p));
  }
  return profiles;
}

namespace {

const EmojiId& sample_preference(const SimUserProfile& profile, Rng& rng) {
  double u = rng.uniform();
  for (const auto& [emoji, w] : profile.preference) {
    if (u < w) return emoji;
    u -= w;
  }
  return profile.preference.back().first;
}

}  // namespace

std::vector<SweepPoint> simulate_alpha_sweep(const ClassifierModel& model, const std::vector<SimUserProfile>& profiles,
                                             const Corpus& prompts, const std::vector<double>& alphas,
                                             std::uint64_t seed, const SimOptions& options) {
  if (prompts.empty()) throw EmptyCorpusError("no prompts to simulate");
  if (options.panel_k == 0) throw InvalidConfigError("panel_k must be positive");
  if (!(options.mix >= 0.0 && options.mix <= 1.0)) throw InvalidConfigError("mix must be in [0, 1]");
  for (const auto& p : profiles)
    if (p.preference.empty()) throw InvalidConfigError("profile with an empty preference");
  for (double a : alphas) {
    RerankConfig cfg = options.rerank;
    cfg.alpha = a;
    cfg.validate();
  }
  const std::size_t n = model.n_classes();
  std::vector<std::size_t> hit_ks = options.hit_ks;
  std::sort(hit_ks.begin(), hit_ks.end());
  hit_ks.erase(std::unique(hit_ks.begin(), hit_ks.end()), hit_ks.end());
  const std::size_t depth = std::max(options.panel_k, hit_ks.empty() ? std::size_t{0} : hit_ks.back());

  // Draw every user's (prompt, intended) sequence once so all alphas see the same draws.
  struct Step {
    std::size_t prompt;
    EmojiId intended;
  };
  std::vector<std::vector<Step>> scripts(profiles.size());
  std::vector<char> used(prompts.size(), 0);
  for (std::size_t u = 0; u < profiles.size(); ++u) {
    Rng rng(derive_seed(seed, u));
    for (std::size_t i = 0; i < profiles[u].sessions; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.index(prompts.size()));
      const bool from_pref = rng.bernoulli(options.mix);
      scripts[u].push_back({idx, from_pref ? sample_preference(profiles[u], rng) : prompts.examples()[idx].label});
      used[idx] = 1;
    }
  }

  std::vector<Prediction> cache(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i)
    if (used[i]) cache[i] = rank_distribution(model, class_probabilities(model, prompts.examples()[i].text), n);

  std::vector<SweepPoint> out;
  for (double alpha : alphas) {
    RerankConfig cfg = options.rerank;
    cfg.alpha = alpha;
    SweepPoint point;
    point.alpha = alpha;
    for (std::size_t k : hit_ks) point.hit_at[k] = 0.0;
    for (std::size_t u = 0; u < profiles.size(); ++u) {
      FavoritesStore store;
      std::map<std::size_t, std::size_t> hits;
      std::size_t panel = 0, external = 0;
      for (const auto& step : scripts[u]) {
        const auto rr = rerank(cache[step.prompt], store, cfg);
        std::size_t pos = depth;
        for (std::size_t i = 0; i < rr.ranked.size() && i < depth; ++i)
          if (rr.ranked[i].emoji == step.intended) {
            pos = i;
            break;
          }
        for (std::size_t k : hit_ks)
          if (pos < k) ++hits[k];
        if (pos < options.panel_k) {
          ++panel;
          store.record(step.intended);
        } else {
          ++external;
          if (options.count_external) store.record(step.intended);
        }
      }
      const double sessions = scripts[u].empty() ? 1.0 : static_cast<double>(scripts[u].size());
      for (std::size_t k : hit_ks) point.hit_at[k] += static_cast<double>(hits[k]) / sessions;
      point.panel_insertions_per_user += static_cast<double>(panel);
      point.external_insertions_per_user += static_cast<double>(external);
    }
    if (!profiles.empty()) {
      const double users = static_cast<double>(profiles.size());
      for (auto& [k, v] : point.hit_at) v /= users;
      point.panel_insertions_per_user /= users;
      point.external_insertions_per_user /= users;
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace emoji
