#include "emoji/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "emoji/augmentation.hpp"
#include "emoji/classifier.hpp"
#include "emoji/corpus.hpp"
#include "emoji/error.hpp"
#include "emoji/evaluation.hpp"
#include "emoji/personalization.hpp"
#include "emoji/service.hpp"

namespace emoji {
namespace {

std::string env_name(const std::string& flag) {
  std::string name = "EMOJI_";
  for (char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

// Adds --name with an EMOJI_NAME environment fallback.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option("--" + name, value, help)->envname(env_name(name))->capture_default_str();
}

CLI::Option* model_flag(CLI::App* app, std::string& value) {
  return app->add_option("--model", value, "model container")->envname("EMOJI_MODEL_PATH")->required();
}

std::vector<std::size_t> parse_ks(const std::string& spec) {
  std::vector<std::size_t> ks;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidConfigError("bad K value '" + item + "' (expected positive integers like 1,24)");
    }
  }
  if (ks.empty()) throw InvalidConfigError("no K values given");
  return ks;
}

std::vector<double> parse_doubles(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidConfigError("bad number '" + item + "'");
    }
  }
  if (values.empty()) throw InvalidConfigError("empty list");
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

std::unique_ptr<GeneratorAdapter> make_adapter(const std::string& kind) {
  if (kind == "template") return std::make_unique<TemplateAdapter>();
  if (kind == "remote") return std::make_unique<RemoteAdapter>(RemoteAdapterConfig::from_env());
  throw InvalidConfigError("unknown adapter '" + kind + "' (template or remote)");
}

std::atomic<Service*> g_service{nullptr};

extern "C" void on_signal(int) {
  if (Service* s = g_service.load()) s->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(argc, argv, out, err, std::cin);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Emoji prediction engine: corpus tools, training, evaluation and serving", "emoji"};
  app.require_subcommand(1);
  std::function<void()> action;

  // gen-corpus
  ZipfCorpusOptions zipf;
  std::string gen_out, gen_test_out;
  double gen_test_fraction = 0.2;
  {
    auto* c = app.add_subcommand("gen-corpus", "generate a seeded Zipf-imbalanced labeled corpus");
    flag(c, "out", gen_out, "output corpus (JSON lines)")->required();
    flag(c, "classes", zipf.n_classes, "number of emoji classes");
    flag(c, "examples", zipf.n_examples, "number of examples");
    flag(c, "exponent", zipf.zipf_exponent, "Zipf exponent");
    flag(c, "keyword-rate", zipf.keyword_rate, "share of texts mentioning a class keyword");
    flag(c, "seed", zipf.seed, "random seed");
    flag(c, "test-out", gen_test_out, "also write a held-out split here");
    flag(c, "test-fraction", gen_test_fraction, "held-out share when --test-out is given");
    c->callback([&] {
      action = [&] {
        const Corpus corpus = generate_zipf_corpus(zipf);
        if (gen_test_out.empty()) {
          save_corpus(corpus, gen_out);
          out << "wrote " << corpus.size() << " examples to " << gen_out << '\n';
          return;
        }
        const auto [train_part, test_part] = split_corpus(corpus, gen_test_fraction, zipf.seed);
        save_corpus(train_part, gen_out);
        save_corpus(test_part, gen_test_out);
        out << "wrote " << train_part.size() << " training examples to " << gen_out << " and " << test_part.size()
            << " held-out examples to " << gen_test_out << '\n';
      };
    });
  }

  // import
  std::string import_in, import_out;
  {
    auto* c = app.add_subcommand("import", "turn raw emoji-bearing text lines into a labeled corpus");
    flag(c, "in", import_in, "text file, one message per line")->required();
    flag(c, "out", import_out, "output corpus")->required();
    c->callback([&] {
      action = [&] {
        std::ifstream in(import_in);
        if (!in) throw IoError("cannot open " + import_in);
        std::vector<LabeledExample> examples;
        std::string line;
        while (std::getline(in, line)) {
          auto ex = examples_from_text(line);
          examples.insert(examples.end(), std::make_move_iterator(ex.begin()), std::make_move_iterator(ex.end()));
        }
        if (examples.empty()) throw EmptyCorpusError("no emoji-bearing lines in " + import_in);
        save_corpus(Corpus(std::move(examples)), import_out);
        out << "wrote corpus to " << import_out << '\n';
      };
    });
  }

  // tags
  std::string tags_corpus, tags_out, tags_adapter = "template";
  std::size_t tags_in_flight = 4;
  {
    auto* c = app.add_subcommand("tags", "build the emoji -> tags mapping for a corpus vocabulary");
    flag(c, "corpus", tags_corpus, "corpus whose classes get tags")->required();
    flag(c, "out", tags_out, "tag mapping (JSON lines), reviewable before augmentation")->required();
    flag(c, "adapter", tags_adapter, "template (offline) or remote (EMOJI_GEN_URL)");
    flag(c, "max-in-flight", tags_in_flight, "concurrent generator requests");
    c->callback([&] {
      action = [&] {
        const Corpus corpus = load_corpus(tags_corpus);
        auto adapter = make_adapter(tags_adapter);
        TagMappingOptions opt;
        opt.max_in_flight = tags_in_flight;
        opt.review_path = tags_out;
        const TagMapping mapping = build_tag_mapping(corpus.vocabulary(), *adapter, opt);
        out << "mapped " << mapping.entries.size() << " emojis, " << mapping.unmapped.size() << " unmapped; wrote "
            << tags_out << '\n';
        for (const auto& e : mapping.unmapped) err << "unmapped: " << e.str() << '\n';
      };
    });
  }

  // augment
  std::string aug_corpus, aug_tags, aug_out, aug_adapter = "template";
  AugmentationPlan plan;
  bool aug_no_dedupe = false, aug_confirm = false;
  std::uint64_t aug_seed = 0;
  {
    auto* c = app.add_subcommand("augment", "generate synthetic examples for under-represented classes");
    flag(c, "corpus", aug_corpus, "base training corpus")->required();
    flag(c, "tags", aug_tags, "tag mapping from `tags`")->required();
    flag(c, "out", aug_out, "synthetic corpus")->required();
    flag(c, "target", plan.target_count, "examples per targeted class after augmentation");
    c->add_flag("--rare-only", plan.rare_only_quartile, "only augment the tail quartile")->envname("EMOJI_RARE_ONLY");
    c->add_flag("--no-dedupe", aug_no_dedupe, "keep duplicate sentences")->envname("EMOJI_NO_DEDUPE");
    c->add_flag("--confirm-tags", aug_confirm, "ask for confirmation of the tag mapping before generating")
        ->envname("EMOJI_CONFIRM_TAGS");
    flag(c, "max-attempts", plan.max_attempts, "generation attempts per sentence");
    flag(c, "max-in-flight", plan.max_in_flight, "concurrent generator requests");
    flag(c, "adapter", aug_adapter, "template (offline) or remote (EMOJI_GEN_URL)");
    flag(c, "seed", aug_seed, "random seed");
    c->callback([&] {
      action = [&] {
        plan.dedupe = !aug_no_dedupe;
        const Corpus base = load_corpus(aug_corpus);
        const TagMapping mapping = load_tag_mapping(aug_tags);
        if (aug_confirm) {
          err << aug_tags << ": " << mapping.entries.size() << " tagged emojis, " << mapping.unmapped.size()
              << " unmapped. Generate with these tags? [y/N] ";
          std::string answer;
          std::getline(in, answer);
          if (answer != "y" && answer != "Y" && answer != "yes") throw Error("tag mapping not confirmed");
        }
        auto adapter = make_adapter(aug_adapter);
        const auto result = generate_synthetic(mapping, plan, base, *adapter, aug_seed);
        if (result.synthetic.empty()) {
          std::ofstream(aug_out, std::ios::trunc);
        } else {
          save_corpus(result.synthetic, aug_out);
        }
        out << "generated " << result.synthetic.size() << " synthetic examples to " << aug_out << '\n';
        for (const auto& s : result.shortfall)
          err << "shortfall " << s.emoji.str() << ": " << s.produced << "/" << s.requested << " (" << s.reason
              << ")\n";
      };
    });
  }

  // merge
  std::string merge_base, merge_synth, merge_out;
  {
    auto* c = app.add_subcommand("merge", "append a synthetic corpus to its base corpus");
    flag(c, "base", merge_base, "base corpus")->required();
    flag(c, "synthetic", merge_synth, "synthetic corpus")->required();
    flag(c, "out", merge_out, "merged corpus")->required();
    c->callback([&] {
      action = [&] {
        const Corpus base = load_corpus(merge_base);
        Corpus synth;
        if (std::filesystem::file_size(merge_synth) > 0) synth = load_corpus(merge_synth);
        const Corpus merged = merge(base, synth);
        save_corpus(merged, merge_out);
        out << "merged " << base.size() << " + " << synth.size() << " examples to " << merge_out << '\n';
      };
    });
  }

  // train
  std::string train_corpus, train_out, train_classes_from, train_preset = "paper";
  ModelArchitecture arch;
  TrainConfig tc;
  FeaturizerConfig fc;
  std::optional<double> lr, wd;
  std::optional<std::uint32_t> batch, epochs;
  {
    auto* c = app.add_subcommand("train", "train a classifier on a labeled corpus");
    flag(c, "corpus", train_corpus, "training corpus")->required();
    flag(c, "out", train_out, "model container")->required();
    flag(c, "classes-from", train_classes_from, "take the class list (and order) from this corpus");
    flag(c, "preset", train_preset, "optimizer preset: paper (lr 2e-4, wd 0.01, batch 256, 10 epochs) or desk "
                                    "(lr 0.5, wd 1e-4, batch 32, 5 epochs)");
    flag(c, "embedding-dim", arch.embedding_dim, "embedding width");
    flag(c, "hidden-layers", arch.hidden_layers, "tanh hidden layers (0-3)");
    flag(c, "hidden-dim", arch.hidden_dim, "hidden width");
    flag(c, "buckets", fc.n_buckets, "hash buckets (power of two)");
    flag(c, "lr", lr, "learning rate (overrides preset)");
    flag(c, "weight-decay", wd, "decoupled weight decay (overrides preset)");
    flag(c, "batch", batch, "minibatch size (overrides preset)");
    flag(c, "epochs", epochs, "epochs (overrides preset)");
    flag(c, "seed", tc.seed, "random seed");
    c->callback([&] {
      action = [&] {
        if (train_preset == "desk") {
          tc.learning_rate = 0.5;
          tc.weight_decay = 1e-4;
          tc.batch_size = 32;
          tc.epochs = 5;
        } else if (train_preset != "paper") {
          throw InvalidConfigError("unknown preset '" + train_preset + "' (paper or desk)");
        }
        if (lr) tc.learning_rate = *lr;
        if (wd) tc.weight_decay = *wd;
        if (batch) tc.batch_size = *batch;
        if (epochs) tc.epochs = *epochs;
        const Corpus corpus = load_corpus(train_corpus);
        TrainStats stats;
        const ClassifierModel model =
            train_classes_from.empty()
                ? train(corpus, arch, tc, fc, &stats)
                : train(corpus, load_corpus(train_classes_from).vocabulary(), arch, tc, fc, &stats);
        save_model(model, train_out);
        for (std::size_t e = 0; e < stats.epoch_loss.size(); ++e)
          err << "epoch " << e + 1 << " loss " << stats.epoch_loss[e] << '\n';
        out << "trained " << model.n_classes() << "-class model (" << model.parameter_count() << " parameters) to "
            << train_out << '\n';
      };
    });
  }

  // quantize
  std::string quant_model, quant_out;
  {
    auto* c = app.add_subcommand("quantize", "int8 weight-only copy of a float model");
    model_flag(c, quant_model);
    flag(c, "out", quant_out, "quantized model container")->required();
    c->callback([&] {
      action = [&] {
        const ClassifierModel model = load_model(quant_model);
        const ClassifierModel q = quantize(model);
        save_model(q, quant_out);
        const auto before = model_size_report(model);
        const auto after = model_size_report(q);
        out << "quantized " << before.bytes_on_disk << " -> " << after.bytes_on_disk << " bytes ("
            << static_cast<double>(after.bytes_on_disk) / static_cast<double>(before.bytes_on_disk) << ")\n";
      };
    });
  }

  // eval
  std::string eval_model, eval_test, eval_ks = "1,24", eval_tail_from, eval_report, eval_favorites;
  RerankConfig eval_rerank;
  {
    auto* c = app.add_subcommand("eval", "Hit@K and top-k macro F1 on a held-out corpus");
    model_flag(c, eval_model);
    flag(c, "test", eval_test, "held-out corpus")->required();
    flag(c, "k", eval_ks, "comma separated K values");
    flag(c, "tail-from", eval_tail_from, "training corpus defining the tail quartile (default: model class order)");
    flag(c, "favorites", eval_favorites, "event log to rerank with");
    flag(c, "alpha", eval_rerank.alpha, "rerank coefficient when --favorites is given");
    flag(c, "report", eval_report, "write the full report as JSON lines");
    c->callback([&] {
      action = [&] {
        const ClassifierModel model = load_model(eval_model);
        const Corpus test = load_corpus(eval_test);
        EvalOptions opt;
        opt.ks = parse_ks(eval_ks);
        FavoritesStore store;
        if (!eval_favorites.empty()) {
          store = load_store(eval_favorites);
          opt.store = &store;
          opt.rerank = eval_rerank;
        }
        if (!eval_tail_from.empty()) opt.tail_classes = tail_classes(load_corpus(eval_tail_from).vocabulary());
        const EvalReport report = evaluate(model, test, opt);
        print_eval_table(out, report);
        if (!eval_report.empty()) {
          auto f = open_out(eval_report);
          write_eval_report(f, report);
        }
      };
    });
  }

  // coverage
  std::string cov_corpus, cov_csv;
  {
    auto* c = app.add_subcommand("coverage", "share of examples explained by the top-K classes");
    flag(c, "corpus", cov_corpus, "labeled corpus")->required();
    flag(c, "emit-csv", cov_csv, "write the full curve as CSV");
    c->callback([&] {
      action = [&] {
        const Corpus corpus = load_corpus(cov_corpus);
        const auto curve = coverage_curve(corpus.vocabulary());
        char buf[64];
        for (const auto& p : curve) {
          if (p.k == 1 || p.k == curve.size() || p.k % 10 == 0 || p.k == 24) {
            std::snprintf(buf, sizeof buf, "top %4zu  %.4f\n", p.k, p.coverage);
            out << buf;
          }
        }
        if (!cov_csv.empty()) {
          auto f = open_out(cov_csv);
          write_coverage_csv(f, curve);
        }
      };
    });
  }

  // bench
  std::string bench_model, bench_sentences, bench_report;
  BenchConfig bc;
  {
    auto* c = app.add_subcommand("bench", "single-prediction latency with warmup");
    model_flag(c, bench_model);
    flag(c, "warmup", bc.warmup_iters, "untimed warmup predictions");
    flag(c, "iters", bc.measured_iters, "timed passes over the sentences");
    flag(c, "k", bc.k, "predictions per call");
    flag(c, "sentences", bench_sentences, "file with one sentence per line (default: built-in set)");
    flag(c, "report", bench_report, "write the report as JSON lines");
    c->callback([&] {
      action = [&] {
        const ClassifierModel model = load_model(bench_model);
        if (bench_sentences.empty()) {
          bc.sentences = default_bench_sentences();
        } else {
          std::ifstream in(bench_sentences);
          if (!in) throw IoError("cannot open " + bench_sentences);
          std::string line;
          while (std::getline(in, line))
            if (!line.empty()) bc.sentences.push_back(line);
        }
        const BenchReport r = bench_latency(model, bc);
        char buf[160];
        std::snprintf(buf, sizeof buf, "median %.4f ms  p95 %.4f ms  mean %.4f ms  over %zu calls\n", r.median_ms,
                      r.p95_ms, r.mean_ms, r.timed_calls);
        out << buf;
        out << "model " << r.size.bytes_on_disk << " bytes, " << r.size.parameter_count << " parameters, "
            << to_string(r.size.precision) << '\n';
        if (!bench_report.empty()) {
          auto f = open_out(bench_report);
          write_bench_report(f, r);
        }
      };
    });
  }

  // simulate
  std::string sim_model, sim_prompts, sim_alphas = "0,0.1,0.3,0.5,0.7,0.9", sim_csv, sim_report;
  ProfileOptions po;
  SimOptions so;
  std::uint64_t sim_seed = 0;
  {
    auto* c = app.add_subcommand("simulate", "favorites feedback-loop simulation over an alpha sweep");
    model_flag(c, sim_model);
    flag(c, "prompts", sim_prompts, "labeled prompts (e.g. the held-out corpus)")->required();
    flag(c, "alphas", sim_alphas, "comma separated alpha values in [0, 1)");
    flag(c, "users", po.n_users, "simulated users");
    flag(c, "sessions", po.sessions, "prompts per user");
    flag(c, "subset", po.subset_size, "emojis in each user's preference");
    flag(c, "concentration", po.concentration, "Dirichlet concentration of preferences");
    flag(c, "mix", so.mix, "chance the intended emoji comes from the user's preference");
    flag(c, "seed", sim_seed, "random seed");
    flag(c, "emit-csv", sim_csv, "write the sweep as CSV");
    flag(c, "report", sim_report, "write the sweep as JSON lines");
    c->callback([&] {
      action = [&] {
        const ClassifierModel model = load_model(sim_model);
        const Corpus prompts = load_corpus(sim_prompts);
        const auto profiles = generate_profiles(model.class_ids, po, sim_seed);
        const auto sweep = simulate_alpha_sweep(model, profiles, prompts, parse_doubles(sim_alphas), sim_seed, so);
        out << "alpha";
        for (const auto& [k, v] : sweep.front().hit_at) out << "  hit@" << k;
        out << "  panel/user  external/user\n";
        char buf[64];
        for (const auto& p : sweep) {
          std::snprintf(buf, sizeof buf, "%5.2f", p.alpha);
          out << buf;
          for (const auto& [k, v] : p.hit_at) {
            std::snprintf(buf, sizeof buf, "  %6.4f", v);
            out << buf;
          }
          std::snprintf(buf, sizeof buf, "  %10.2f  %13.2f\n", p.panel_insertions_per_user,
                        p.external_insertions_per_user);
          out << buf;
        }
        if (!sim_csv.empty()) {
          auto f = open_out(sim_csv);
          write_sweep_csv(f, sweep);
        }
        if (!sim_report.empty()) {
          auto f = open_out(sim_report);
          write_sweep_report(f, sweep);
        }
      };
    });
  }

  // serve
  ServiceConfig sc;
  std::string serve_model, serve_data_dir = "data", serve_bind = "127.0.0.1:8080", serve_ui;
  {
    auto* c = app.add_subcommand("serve", "HTTP prediction and event service");
    model_flag(c, serve_model);
    c->add_option("--data-dir", serve_data_dir, "per-user event logs")->envname("EMOJI_DATA_DIR")->capture_default_str();
    c->add_option("--bind", serve_bind, "host:port")->envname("EMOJI_BIND")->capture_default_str();
    flag(c, "default-k", sc.default_k, "panel size when a request omits k");
    flag(c, "alpha", sc.rerank.alpha, "default rerank coefficient");
    flag(c, "ui-dir", serve_ui, "static UI assets served under /ui");
    c->callback([&] {
      action = [&] {
        sc.model_path = serve_model;
        sc.data_dir = serve_data_dir;
        parse_bind(serve_bind, sc.host, sc.port);
        if (!serve_ui.empty()) sc.ui_dir = serve_ui;
        Service service(sc);
        const int port = service.bind();
        out << "serving model " << service.model_version() << " on http://" << sc.host << ":" << port << '\n';
        out.flush();
        g_service = &service;
        auto prev_int = std::signal(SIGINT, on_signal);
        auto prev_term = std::signal(SIGTERM, on_signal);
        service.run();
        std::signal(SIGINT, prev_int);
        std::signal(SIGTERM, prev_term);
        g_service = nullptr;
      };
    });
  }

  // predict
  std::string pred_model, pred_text, pred_data_dir, pred_user;
  std::size_t pred_k = 24;
  RerankConfig pred_rerank;
  {
    auto* c = app.add_subcommand("predict", "one-shot prediction for a text");
    model_flag(c, pred_model);
    flag(c, "text", pred_text, "input text")->required();
    flag(c, "k", pred_k, "how many emojis to show");
    c->add_option("--data-dir", pred_data_dir, "per-user event logs")->envname("EMOJI_DATA_DIR");
    flag(c, "user", pred_user, "rerank with this user's favorites (needs --data-dir)");
    flag(c, "alpha", pred_rerank.alpha, "rerank coefficient");
    c->callback([&] {
      action = [&] {
        if (pred_k == 0) throw InvalidConfigError("k must be positive");
        const ClassifierModel model = load_model(pred_model);
        FavoritesStore store;
        if (!pred_user.empty()) {
          if (pred_data_dir.empty()) throw InvalidConfigError("--user needs --data-dir");
          store = load_store(user_log_path(pred_data_dir, pred_user));
        }
        const auto probs = class_probabilities(model, pred_text);
        const auto rr = rerank(rank_distribution(model, probs, model.n_classes()), store, pred_rerank);
        char buf[128];
        for (std::size_t i = 0; i < rr.ranked.size() && i < pred_k; ++i) {
          const auto& e = rr.ranked[i];
          std::snprintf(buf, sizeof buf, "%3zu  %-12s  %.6g  (model %.6g, favorites %.6g)\n", i + 1,
                        e.emoji.str().c_str(), e.final_score, e.model_prob, e.favorites_prob);
          out << buf;
        }
      };
    });
  }

  if (argc > 1 && argv[1][0] != '-') {
    const auto subs = app.get_subcommands([&](CLI::App* sub) { return sub->get_name() == argv[1]; });
    if (subs.empty()) {
      err << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return 1;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    err << '\n' << app.help();
    return 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace emoji
