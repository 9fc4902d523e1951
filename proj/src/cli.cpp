#include "dwellrec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dwellrec/config.hpp"
#include "dwellrec/datagen.hpp"
#include "dwellrec/dwell.hpp"
#include "dwellrec/errors.hpp"
#include "dwellrec/evaluation.hpp"
#include "dwellrec/experiments.hpp"
#include "dwellrec/grad_suite.hpp"
#include "dwellrec/manifest.hpp"
#include "dwellrec/newsrep.hpp"
#include "dwellrec/nn/checkpoint.hpp"
#include "dwellrec/training.hpp"

namespace dwellrec::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Numeric failure that is not an exception: a gradient check over tolerance.
constexpr int kExitNumeric = 3;

struct Run {
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::ostream& out;
  std::ostream& err;

  // Writes the manifest into `dir`, or as one line on the error stream when
  // the command has no output directory.
  void finish(const fs::path& dir) {
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (dir.empty()) {
      err << to_json(manifest).dump() << '\n';
    } else {
      write_manifest(dir / "manifest.json", manifest);
    }
  }
};

void write_text(const fs::path& p, const std::string& text, Run& run) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidInputError("cannot write " + p.string());
  os << text;
  run.manifest.add_output(p);
}

void prepare_out_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInputError("cannot create " + dir.string() + ": " + ec.message());
}

fs::path absolute_from(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  fs::path q(p);
  if (q.is_relative()) q = base / q;
  return fs::absolute(q).lexically_normal();
}

// Relative data and embedding paths resolve against the config file's
// directory.
app::AppConfig read_config(const std::string& path, app::Profile profile, Run& run) {
  app::AppConfig cfg;
  fs::path base = fs::current_path();
  if (path.empty()) {
    cfg = app::defaults(profile);
    cfg.validate();
  } else {
    run.manifest.add_input(path);
    cfg = app::load_config(path, profile);
    base = fs::absolute(path).parent_path();
  }
  cfg.paths.data_dir = absolute_from(cfg.paths.data_dir, base).string();
  cfg.paths.embeddings = absolute_from(cfg.paths.embeddings, base).string();
  return cfg;
}

fs::path data_file(const std::string& dir, const char* name) {
  if (dir.empty()) throw ConfigError("no data directory: set paths.data_dir or pass --data");
  return fs::path(dir) / name;
}

std::vector<datagen::NewsItem> read_news(const app::AppConfig& cfg, Run& run) {
  const fs::path p = data_file(cfg.paths.data_dir, "news.jsonl");
  run.manifest.add_input(p);
  return datagen::read_news_jsonl(p);
}

std::vector<datagen::Impression> read_log(const app::AppConfig& cfg, const char* name, Run& run) {
  const fs::path p = data_file(cfg.paths.data_dir, name);
  run.manifest.add_input(p);
  return datagen::read_impressions_jsonl(p);
}

newsrep::EmbeddingStore build_store(const app::AppConfig& cfg,
                                    const std::vector<datagen::NewsItem>& news, Run& run) {
  newsrep::EmbeddingStore store;
  if (!cfg.paths.embeddings.empty()) {
    run.manifest.add_input(cfg.paths.embeddings);
    store = newsrep::load_store(cfg.paths.embeddings);
  } else {
    store = newsrep::synth_store(news, cfg.synth_embed());
  }
  if (store.dim() != cfg.encoder.d) {
    throw ConfigError("embedding dimension " + std::to_string(store.dim()) +
                      " does not match encoder.d = " + std::to_string(cfg.encoder.d));
  }
  return store;
}

// A trained model directory: config.json, encoder.json and checkpoints.
struct LoadedModel {
  fs::path dir;
  app::AppConfig cfg;
  enc::Model model;
};

LoadedModel load_model(const fs::path& ckpt, Run& run) {
  const fs::path dir = fs::absolute(ckpt).parent_path();
  const fs::path cfg_path = dir / "config.json";
  if (!fs::exists(cfg_path)) throw ConfigError("missing " + cfg_path.string() + " next to checkpoint");
  run.manifest.add_input(cfg_path);
  app::AppConfig cfg = app::load_config(cfg_path);

  const fs::path enc_path = dir / "encoder.json";
  if (fs::exists(enc_path)) {
    run.manifest.add_input(enc_path);
    std::ifstream is(enc_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(enc_path.string() + ": " + e.what());
    }
    cfg.encoder = app::parse_config(nlohmann::json{{"encoder", doc}}).encoder;
  }
  run.manifest.add_input(ckpt);
  enc::Model model(cfg.encoder, 0);
  nn::load_checkpoint(ckpt, model.params());
  return {dir, std::move(cfg), std::move(model)};
}

std::string number_or_null(double v, bool defined) {
  return defined ? ojson(v).dump() : "null";
}

// ---- subcommands ---------------------------------------------------------------

struct GenArgs {
  std::string config, out, profile = "desk";
  std::uint64_t seed = 0;
};

int run_gen(const GenArgs& a, Run& run) {
  const app::AppConfig cfg = read_config(a.config, app::parse_profile(a.profile), run);
  run.manifest.config = app::to_json(cfg);
  run.manifest.seed = a.seed;
  const fs::path out(a.out);
  prepare_out_dir(out);

  const datagen::Corpus corpus = datagen::generate_corpus(cfg.generator, a.seed);
  std::ostringstream news, train, test;
  datagen::write_news_jsonl(news, corpus.news);
  datagen::write_impressions_jsonl(train, corpus.train);
  datagen::write_impressions_jsonl(test, corpus.test);
  write_text(out / "news.jsonl", news.str(), run);
  write_text(out / "train.jsonl", train.str(), run);
  write_text(out / "test.jsonl", test.str(), run);
  run.out << "wrote " << corpus.news.size() << " news, " << corpus.train.size() << " train and "
          << corpus.test.size() << " test impressions to " << out.string() << '\n';
  run.finish(out);
  return 0;
}

struct StatsArgs {
  std::vector<std::string> logs;
  std::string scheme = "literal", out;
};

int run_stats(const StatsArgs& a, Run& run) {
  const auto scheme = dwell::parse_scheme(a.scheme);
  std::vector<datagen::Impression> all;
  for (const auto& log : a.logs) {
    run.manifest.add_input(log);
    auto imps = datagen::read_impressions_jsonl(log);
    all.insert(all.end(), std::make_move_iterator(imps.begin()), std::make_move_iterator(imps.end()));
  }
  const auto records = datagen::collect_history_dwell(all);
  const dwell::DwellDistribution dist = dwell::dwell_stats(records, scheme);

  const std::string csv = dwell::to_csv(dist);
  const std::string summary = "{\"total\":" + std::to_string(dist.total) +
                              ",\"unknown_fraction\":" + ojson(dist.unknown_fraction).dump() +
                              ",\"over_5s_fraction\":" +
                              number_or_null(dist.over_5s_fraction, dist.over_5s_defined) + "}\n";
  run.out << csv << '\n' << summary;
  const fs::path out(a.out);
  prepare_out_dir(out);
  if (!out.empty()) {
    write_text(out / "dwell_stats.csv", csv, run);
    write_text(out / "dwell_summary.json", summary, run);
  }
  run.finish(out);
  return 0;
}

struct TrainArgs {
  std::string config, out, data, variant, profile = "desk";
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
};

int run_train(const TrainArgs& a, Run& run) {
  app::AppConfig cfg = read_config(a.config, app::parse_profile(a.profile), run);
  if (!a.data.empty()) cfg.paths.data_dir = fs::absolute(a.data).lexically_normal().string();
  if (!a.variant.empty()) cfg.encoder.variant = enc::parse_variant(a.variant);
  if (a.epochs > 0) cfg.training.epochs = a.epochs;
  cfg.validate();
  run.manifest.config = app::to_json(cfg);
  run.manifest.seed = a.seed;

  const auto news = read_news(cfg, run);
  const auto train_log = read_log(cfg, "train.jsonl", run);
  const auto store = build_store(cfg, news, run);
  const auto samples = datagen::build_train_samples(train_log, cfg.encoder.k_negatives, a.seed);
  if (samples.samples.empty()) throw EmptyInputError("no training samples in train.jsonl");

  const fs::path out(a.out);
  prepare_out_dir(out);
  app::save_config(out / "config.json", cfg);
  run.manifest.add_output(out / "config.json");
  write_text(out / "encoder.json", app::to_json(cfg.encoder).dump(2) + "\n", run);

  enc::Model model(cfg.encoder, a.seed);
  train::TrainOptions opts;
  opts.checkpoint_dir = out;
  opts.threads = eval::threads_from_env();
  const train::TrainRun result =
      train::run_training(model, samples.samples, store, cfg.training, a.seed, opts);
  for (const auto& c : result.checkpoints) run.manifest.add_output(c);
  run.manifest.add_output(result.final_checkpoint);

  ojson summary;
  summary["variant"] = enc::to_string(cfg.encoder.variant);
  summary["seed"] = a.seed;
  summary["samples"] = samples.samples.size();
  summary["skipped_positives"] = samples.skipped;
  summary["steps"] = result.steps;
  summary["epoch_losses"] = result.epoch_losses;
  summary["final_checkpoint"] = result.final_checkpoint.filename().string();
  write_text(out / "train_run.json", summary.dump(2) + "\n", run);

  run.out << enc::to_string(cfg.encoder.variant) << ": " << samples.samples.size() << " samples, "
          << result.steps << " steps, epoch losses";
  for (double l : result.epoch_losses) run.out << ' ' << l;
  run.out << '\n';
  run.finish(out);
  return 0;
}

struct EvalArgs {
  std::string ckpt, set, data, out;
  double theta = -1.0;
  bool mask_dwell = false, gtb = false;
};

int run_eval(const EvalArgs& a, Run& run) {
  LoadedModel lm = load_model(a.ckpt, run);
  app::AppConfig& cfg = lm.cfg;
  if (!a.data.empty()) cfg.paths.data_dir = fs::absolute(a.data).lexically_normal().string();
  if (!a.set.empty()) cfg.evaluation.set = a.set;
  if (a.theta >= 0.0) cfg.evaluation.theta = a.theta;
  cfg.validate();
  run.manifest.config = app::to_json(cfg);

  const auto news = read_news(cfg, run);
  const auto test = read_log(cfg, "test.jsonl", run);
  const auto store = build_store(cfg, news, run);
  datagen::EvalSet set =
      datagen::build_eval_set(test, datagen::parse_eval_mode(cfg.evaluation.set), cfg.evaluation.theta);
  eval::EvalOptions opts{eval::threads_from_env(), cfg.evaluation.max_skip_fraction};

  std::string report;
  if (a.gtb) {
    report = eval::to_json(eval::run_masked_eval(lm.model, store, set, opts));
  } else {
    if (a.mask_dwell) set = datagen::mask_eval_dwell(set);
    report = eval::to_json(eval::evaluate(lm.model, store, set, opts));
  }
  run.out << report << '\n';
  const fs::path out(a.out);
  prepare_out_dir(out);
  if (!out.empty()) write_text(out / "report.json", report + "\n", run);
  run.finish(out);
  return 0;
}

struct SweepArgs {
  std::string ckpt_dir, data, out;
  double min = 5.0, max = 40.0, step = 5.0;
};

std::vector<fs::path> find_checkpoints(const fs::path& root) {
  std::vector<fs::path> found;
  if (fs::exists(root / "final.nrck")) found.push_back(root / "final.nrck");
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "final.nrck")) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) found.push_back(d / "final.nrck");
  return found;
}

int run_sweep(const SweepArgs& a, Run& run) {
  if (!fs::is_directory(a.ckpt_dir)) throw ConfigError("not a directory: " + a.ckpt_dir);
  const auto ckpts = find_checkpoints(a.ckpt_dir);
  if (ckpts.empty()) throw EmptyInputError("no final.nrck under " + a.ckpt_dir);

  std::vector<LoadedModel> models;
  for (const auto& c : ckpts) models.push_back(load_model(c, run));
  app::AppConfig cfg = models.front().cfg;
  if (!a.data.empty()) {
    cfg.paths.data_dir = fs::absolute(a.data).lexically_normal().string();
  } else {
    for (const auto& m : models) {
      if (m.cfg.paths.data_dir != cfg.paths.data_dir) {
        throw ConfigError("checkpoints were trained on different data directories; pass --data");
      }
    }
  }
  for (const auto& m : models) {
    if (m.cfg.paths.embeddings != cfg.paths.embeddings || m.cfg.encoder.d != cfg.encoder.d ||
        m.cfg.embedding.seed != cfg.embedding.seed ||
        m.cfg.embedding.noise_scale != cfg.embedding.noise_scale) {
      throw ConfigError("checkpoints use different news embeddings");
    }
  }
  ojson snapshot = ojson::array();
  for (const auto& m : models) snapshot.push_back(app::to_json(m.cfg));
  run.manifest.config = snapshot;

  const auto news = read_news(cfg, run);
  const auto test = read_log(cfg, "test.jsonl", run);
  const auto store = build_store(cfg, news, run);

  std::vector<eval::NamedModel> named;
  for (const auto& m : models) named.push_back({enc::to_string(m.cfg.encoder.variant), &m.model});
  const auto grid = eval::threshold_grid(a.min, a.max, a.step);
  eval::EvalOptions opts{eval::threads_from_env(), cfg.evaluation.max_skip_fraction};
  const auto rows = eval::run_sweep(named, store, test, grid, opts);
  for (const auto& r : rows) {
    if (!r.report) run.err << "warning: " << r.variant << " theta " << r.theta << ": Real set is empty\n";
  }
  const std::string csv = eval::sweep_csv(rows);
  run.out << csv;
  const fs::path out(a.out);
  prepare_out_dir(out);
  if (!out.empty()) write_text(out / "sweep.csv", csv, run);
  run.finish(out);
  return 0;
}

struct GradArgs {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> cases;
  std::string out;
};

int run_grad_check(const GradArgs& a, Run& run) {
  run.manifest.seed = a.seed;
  const auto results = check::run_grad_suite(a.trials, a.seed, a.cases);
  bool ok = true;
  std::ostringstream table;
  table << "case,trials,failed_trials,max_rel_error,worst_param\n";
  for (const auto& r : results) {
    ok = ok && r.max_rel_error < check::kGradTolerance;
    table << r.name << ',' << r.trials << ',' << r.failed_trials << ',' << r.max_rel_error << ','
          << r.worst_param << '\n';
  }
  run.out << table.str() << (ok ? "PASS" : "FAIL") << " (tolerance " << check::kGradTolerance
          << ")\n";
  const fs::path out(a.out);
  prepare_out_dir(out);
  if (!out.empty()) write_text(out / "grad_check.csv", table.str(), run);
  run.finish(out);
  return ok ? 0 : kExitNumeric;
}

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::kNumeric ? kExitNumeric : 2;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dwellrec: dwell-time aware news recommendation experiments", "dwellrec"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic news catalog and impression logs");
  gen_cmd->add_option("--config", gen.config, "JSON config file");
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--profile", gen.profile, "Default group: paper or desk")->capture_default_str();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Dwell-time distribution of history clicks");
  stats_cmd->add_option("--log", stats.logs, "Impression log(s), JSONL")->required();
  stats_cmd->add_option("--scheme", stats.scheme, "literal or monotonic")->capture_default_str();
  stats_cmd->add_option("--out", stats.out, "Also write CSV and summary here");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a user encoder");
  train_cmd->add_option("--config", tr.config, "JSON config file")->required();
  train_cmd->add_option("--seed", tr.seed, "Random seed")->required();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--data", tr.data, "Data directory (overrides paths.data_dir)");
  train_cmd->add_option("--variant", tr.variant, "BaseAttPool, BaseMHA, DweW or DweA");
  train_cmd->add_option("--epochs", tr.epochs, "Override training.epochs");
  train_cmd->add_option("--profile", tr.profile, "Default group: paper or desk")->capture_default_str();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint file (.nrck)")->required();
  eval_cmd->add_option("--set", ev.set, "normal, real or robust (default from config)");
  eval_cmd->add_option("--theta", ev.theta, "Effective-click threshold in seconds");
  eval_cmd->add_flag("--mask-dwell", ev.mask_dwell, "Replace history dwell with Unknown");
  eval_cmd->add_flag("--gtb", ev.gtb, "Report masked, unmasked and their difference");
  eval_cmd->add_option("--data", ev.data, "Data directory (overrides the training config)");
  eval_cmd->add_option("--out", ev.out, "Also write report.json here");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate checkpoints over a threshold grid");
  sweep_cmd->add_option("--ckpt-dir", sw.ckpt_dir, "Directory of trained model directories")->required();
  sweep_cmd->add_option("--min", sw.min, "First threshold")->capture_default_str();
  sweep_cmd->add_option("--max", sw.max, "Last threshold")->capture_default_str();
  sweep_cmd->add_option("--step", sw.step, "Threshold step")->capture_default_str();
  sweep_cmd->add_option("--data", sw.data, "Data directory (overrides the training configs)");
  sweep_cmd->add_option("--out", sw.out, "Also write sweep.csv here");

  GradArgs gc;
  auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference gradient checks");
  grad_cmd->add_option("--trials", gc.trials, "Random instances per case")->capture_default_str();
  grad_cmd->add_option("--seed", gc.seed, "Random seed")->capture_default_str();
  grad_cmd->add_option("--case", gc.cases, "Restrict to these cases");
  grad_cmd->add_option("--out", gc.out, "Also write grad_check.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (const auto* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return 1;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Run run{{}, std::chrono::steady_clock::now(), out, err};
  run.manifest.command = cmd->get_name();
  run.manifest.argv.assign(argv, argv + argc);
  run.manifest.started_at = utc_now_iso8601();
  try {
    if (cmd == gen_cmd) return run_gen(gen, run);
    if (cmd == stats_cmd) return run_stats(stats, run);
    if (cmd == train_cmd) return run_train(tr, run);
    if (cmd == eval_cmd) return run_eval(ev, run);
    if (cmd == sweep_cmd) return run_sweep(sw, run);
    return run_grad_check(gc, run);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int dispatch(int argc, const char* const* argv) { return dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace dwellrec::cli
