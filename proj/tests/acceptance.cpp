// End-to-end acceptance run. Prints one "criterion N: PASS|FAIL ..." line per
// criterion; indented lines are supporting logs. Exit status is non-zero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwellrec/cli.hpp"
#include "dwellrec/datagen.hpp"
#include "dwellrec/dwell.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/evaluation.hpp"
#include "dwellrec/grad_suite.hpp"
#include "dwellrec/metrics.hpp"
#include "dwellrec/nn/graph.hpp"
#include "dwellrec/nn/layers.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dwellrec;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << ' ' << detail << std::endl;
}

void log(const std::string& line) { std::cout << "  " << line << std::endl; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dwellrec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs a CLI command and throws with its stderr when it fails.
CliRun must(const std::vector<std::string>& args) {
  auto r = cli(args);
  if (r.code != 0) {
    std::string joined;
    for (const auto& a : args) joined += a + ' ';
    throw std::runtime_error("command failed (" + std::to_string(r.code) + "): " + joined + "\n" + r.err);
  }
  return r;
}

// ---- 1 ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = Clock::now();
  using dwell::RawDwell;
  const std::vector<std::pair<RawDwell, int>> probe = {
      {RawDwell::unknown(), 1},      {RawDwell::seconds(0), 2},    {RawDwell::seconds(3), 3},
      {RawDwell::seconds(5), 4},     {RawDwell::seconds(7), 4},    {RawDwell::seconds(59), 14},
      {RawDwell::seconds(60), 6},    {RawDwell::seconds(120), 7},  {RawDwell::seconds(599), 14},
      {RawDwell::seconds(600), 9},   {RawDwell::seconds(10000), 9}};
  int wrong = 0;
  for (const auto& [raw, want] : probe) {
    if (dwell::discretize(raw, dwell::DwellScheme::kLiteral).id != want) ++wrong;
  }
  const double t = seconds_since(t0);
  report(1, wrong == 0 && t < 1.0,
         std::to_string(probe.size() - wrong) + "/" + std::to_string(probe.size()) +
             " probe values match, " + fmt(t, 3) + "s");
}

// ---- 2 ---------------------------------------------------------------------------

void criterion_2() {
  const auto t0 = Clock::now();
  const auto results = check::run_grad_suite(100, 1);
  const double t = seconds_since(t0);
  double worst = 0.0;
  std::string worst_case;
  std::size_t failed = 0;
  for (const auto& r : results) {
    log(r.name + ": max rel error " + sci(r.max_rel_error) + ", failed trials " +
        std::to_string(r.failed_trials) + "/" + std::to_string(r.trials) +
        (r.failed_trials ? ", worst at " + r.worst_param : ""));
    failed += r.failed_trials;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_case = r.name;
    }
  }
  report(2, worst < check::kGradTolerance && t < 120.0,
         std::to_string(results.size()) + " cases x 100 trials, max rel error " +
             sci(worst) + " (" + worst_case + "), " + std::to_string(failed) +
             " failed trials, tolerance 1e-4, " + fmt(t, 1) + "s");
}

// ---- 3 ---------------------------------------------------------------------------

void criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto ls = testsupport::random_labeled_scores(rng, 10);
    worst = std::max(worst, std::abs(eval::auc(ls.labels, ls.scores) -
                                     testsupport::oracle_auc(ls.labels, ls.scores)));
    worst = std::max(worst, std::abs(eval::mrr(ls.labels, ls.scores) -
                                     testsupport::oracle_mrr(ls.labels, ls.scores)));
    for (int k : {5, 10}) {
      worst = std::max(worst, std::abs(eval::ndcg_at_k(ls.labels, ls.scores, k) -
                                       testsupport::oracle_ndcg(ls.labels, ls.scores, k)));
    }
  }
  const double t = seconds_since(t0);
  report(3, worst <= 1e-9 && t < 10.0,
         "1000 impressions, max |metric - oracle| " + sci(worst) + ", " + fmt(t, 3) + "s");
}

// ---- 4 ---------------------------------------------------------------------------

void criterion_4() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::size_t k : {1, 2, 4, 8}) {
    const double s = 0.731;
    const double scalar = enc::sample_loss(s, std::vector<double>(k, s));
    nn::Graph g;
    const double graph = g.value(nn::softmax_xent(g, g.constant(nn::Tensor(1, k + 1, s)), 0))[0];
    const double want = std::log(static_cast<double>(k + 1));
    worst = std::max({worst, std::abs(scalar - want), std::abs(graph - want)});
  }
  const double t = seconds_since(t0);
  report(4, worst <= 1e-9 && t < 1.0,
         "K in {1,2,4,8}, max |loss - ln(K+1)| " + sci(worst) + ", " + fmt(t, 3) + "s");
}

// ---- 5 ---------------------------------------------------------------------------

void criterion_5() {
  const auto t0 = Clock::now();
  const auto corpus = datagen::generate_corpus(datagen::GeneratorConfig{}, 42);
  const auto dist = dwell::dwell_stats(datagen::collect_history_dwell(corpus.train));
  const double t = seconds_since(t0);
  const double over5 = dist.over_5s_defined ? dist.over_5s_fraction : -1.0;
  const bool ok = dist.unknown_fraction >= 0.04 && dist.unknown_fraction <= 0.06 && over5 >= 0.87 &&
                  over5 <= 0.91 && t < 30.0;
  report(5, ok,
         "unknown_fraction " + fmt(dist.unknown_fraction) + " in [0.04, 0.06], over_5s_fraction " +
             fmt(over5) + " in [0.87, 0.91], " + fmt(t, 2) + "s");
}

// ---- 6, 7, 9, 10: CLI pipeline ------------------------------------------------------

const std::vector<std::string> kVariants = {"BaseMHA", "DweW", "DweA"};
const std::vector<std::uint64_t> kSeeds = {42, 43, 44, 45, 46};

struct SeedResult {
  std::map<std::string, json> reports;  // eval --gtb output per variant
  double random_auc = 0.0;
  double seconds = 0.0;
};

fs::path seed_dir(const fs::path& root, std::uint64_t seed) {
  return root / ("seed" + std::to_string(seed));
}

void train(const fs::path& dir, std::uint64_t seed, const std::string& variant) {
  must({"train", "--config", (dir / "config.json").string(), "--seed", std::to_string(seed),
        "--variant", variant, "--out", (dir / "runs" / variant).string()});
}

json eval_gtb(const fs::path& dir, const std::string& variant) {
  must({"eval", "--ckpt", (dir / "runs" / variant / "final.nrck").string(), "--set", "real",
        "--theta", "5", "--gtb", "--out", (dir / "eval" / variant).string()});
  return json::parse(testsupport::slurp(dir / "eval" / variant / "report.json"));
}

// AUC of uniformly random scores on the same Real(5) set.
double random_auc(const fs::path& data_dir, std::uint64_t seed) {
  const auto test = datagen::read_impressions_jsonl(data_dir / "test.jsonl");
  const auto set = datagen::build_eval_set(test, datagen::EvalMode::kReal, 5.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const eval::Scorer scorer = [&](const datagen::Impression& imp) {
    std::vector<double> s(imp.candidates.size());
    for (auto& x : s) x = u(rng);
    return s;
  };
  return eval::evaluate_scores(set.impressions, scorer).auc;
}

SeedResult run_seed(const fs::path& root, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const fs::path dir = seed_dir(root, seed);
  fs::create_directories(dir);
  testsupport::spit(dir / "config.json", R"({"paths": {"data_dir": "data"}})");
  must({"gen", "--seed", std::to_string(seed), "--out", (dir / "data").string()});
  SeedResult r;
  for (const auto& v : kVariants) {
    train(dir, seed, v);
    r.reports[v] = eval_gtb(dir, v);
  }
  r.seconds = seconds_since(t0);
  r.random_auc = random_auc(dir / "data", seed);
  return r;
}

void criterion_6_7(const std::vector<SeedResult>& results, bool attpool_zero) {
  std::map<std::string, double> mean;
  double slowest = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::string line = "seed " + std::to_string(kSeeds[i]) + " Real(5) AUC:";
    for (const auto& v : kVariants) {
      const double a = results[i].reports.at(v)["unmasked"]["auc"].get<double>();
      mean[v] += a / static_cast<double>(results.size());
      line += " " + v + " " + fmt(a);
    }
    log(line + " (train+eval " + fmt(results[i].seconds, 1) + "s)");
    slowest = std::max(slowest, results[i].seconds);
  }
  const double m_dwea = mean["DweA"] - mean["BaseMHA"];
  const double m_dwew = mean["DweW"] - mean["BaseMHA"];
  report(6, m_dwea >= 0.0 && m_dwew >= 0.0 && slowest < 600.0,
         "mean AUC BaseMHA " + fmt(mean["BaseMHA"]) + ", DweW " + fmt(mean["DweW"]) + " (margin " +
             fmt(m_dwew) + "), DweA " + fmt(mean["DweA"]) + " (margin " + fmt(m_dwea) +
             "), slowest seed " + fmt(slowest, 1) + "s");

  // Masking robustness over every seed's trained models.
  double worst_delta = 0.0, worst_lift = 1.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const std::string v : {"DweW", "DweA"}) {
      const auto& rep = results[i].reports.at(v);
      const double delta = rep["gtb"]["auc"].get<double>();
      const double lift = rep["masked"]["auc"].get<double>() - results[i].random_auc;
      log("seed " + std::to_string(kSeeds[i]) + " " + v + ": masked - unmasked AUC " + fmt(delta) +
          ", masked - random AUC " + fmt(lift));
      worst_delta = std::max(worst_delta, std::abs(delta));
      worst_lift = std::min(worst_lift, lift);
    }
  }
  // Dwell-blind models: delta must be exactly zero.
  bool blind_zero = true;
  for (const auto& r : results) {
    const auto& g = r.reports.at("BaseMHA")["gtb"];
    for (const char* k : {"auc", "mrr", "ndcg5", "ndcg10"}) blind_zero = blind_zero && g[k].get<double>() == 0.0;
  }
  blind_zero = blind_zero && attpool_zero;
  report(7, worst_delta <= 0.03 && worst_lift >= 0.05 && blind_zero,
         "max |masked - unmasked AUC| " + fmt(worst_delta) + " <= 0.03, min masked - random AUC " +
             fmt(worst_lift) + " >= 0.05, dwell-blind deltas " + (blind_zero ? "exactly 0" : "NONZERO"));
}

// BaseAttPool's masking delta, checked on the first seed's data.
bool base_attpool_blind(const fs::path& root) {
  const fs::path dir = seed_dir(root, kSeeds.front());
  must({"train", "--config", (dir / "config.json").string(), "--seed", "42", "--variant",
        "BaseAttPool", "--epochs", "1", "--out", (dir / "extra" / "BaseAttPool").string()});
  must({"eval", "--ckpt", (dir / "extra" / "BaseAttPool" / "final.nrck").string(), "--set", "real",
        "--theta", "5", "--gtb", "--out", (dir / "extra" / "eval").string()});
  const auto rep = json::parse(testsupport::slurp(dir / "extra" / "eval" / "report.json"));
  bool zero = true;
  for (const char* k : {"auc", "mrr", "ndcg5", "ndcg10"}) zero = zero && rep["gtb"][k].get<double>() == 0.0;
  log(std::string("BaseAttPool masked - unmasked deltas ") + (zero ? "exactly 0" : "NONZERO"));
  return zero;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void criterion_9(const fs::path& root) {
  const fs::path dir = seed_dir(root, kSeeds.front());
  const auto r = cli({"sweep", "--ckpt-dir", (dir / "runs").string(), "--min", "5", "--max", "40",
                      "--step", "5", "--out", (dir / "sweep").string()});
  if (r.code != 0) {
    report(9, false, "sweep exited " + std::to_string(r.code) + ": " + r.err);
    return;
  }
  const std::string csv = testsupport::slurp(dir / "sweep" / "sweep.csv");
  std::vector<std::string> lines = split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  bool valid = !lines.empty() && lines[0] == "variant,theta,auc,mrr,ndcg5,ndcg10";
  std::map<std::string, std::vector<std::string>> trend;
  std::map<std::string, std::size_t> per_variant;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 6) {
      valid = false;
      continue;
    }
    ++per_variant[f[0]];
    const double theta = std::stod(f[1]);
    valid = valid && std::abs(theta - 5.0 * static_cast<double>(per_variant[f[0]])) < 1e-9;
    const bool blank = f[2].empty() && f[3].empty() && f[4].empty() && f[5].empty();
    if (!blank) {
      for (std::size_t k = 2; k < 6; ++k) {
        const double v = std::stod(f[k]);
        valid = valid && std::isfinite(v) && v >= 0.0 && v <= 1.0;
      }
    }
    trend[f[0]].push_back(blank ? "-" : fmt(std::stod(f[2]), 3));
  }
  for (const auto& [v, aucs] : trend) {
    std::string line = v + " AUC by theta 5..40:";
    for (const auto& a : aucs) line += " " + a;
    log(line);
  }
  const std::size_t rows = lines.empty() ? 0 : lines.size() - 1;
  bool eight_each = per_variant.size() == kVariants.size();
  for (const auto& [v, n] : per_variant) eight_each = eight_each && n == 8;
  report(9, valid && eight_each && rows == 8 * kVariants.size(),
         std::to_string(rows) + " rows for " + std::to_string(per_variant.size()) +
             " variants (expected " + std::to_string(8 * kVariants.size()) + "), CSV " +
             (valid ? "valid" : "INVALID"));
}

// Every regular file under `dir` except run manifests, which carry wall-clock time.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    files[fs::relative(e.path(), dir).string()] = testsupport::slurp(e.path());
  }
  return files;
}

void criterion_10(const fs::path& root) {
  const auto t0 = Clock::now();
  const fs::path dir = root / "determinism";
  fs::create_directories(dir);
  testsupport::spit(dir / "config.json", R"({"paths": {"data_dir": "data"}, "training": {"epochs": 2}})");

  std::vector<std::string> stdouts;
  auto pipeline = [&] {
    std::vector<std::string> outs;
    outs.push_back(must({"gen", "--seed", "7", "--out", (dir / "data").string()}).out);
    outs.push_back(must({"stats", "--log", (dir / "data" / "train.jsonl").string(), "--out",
                         (dir / "stats").string()}).out);
    for (const std::string v : {"BaseAttPool", "DweW", "DweA"}) {
      outs.push_back(must({"train", "--config", (dir / "config.json").string(), "--seed", "7",
                           "--variant", v, "--out", (dir / "runs" / v).string()}).out);
      outs.push_back(must({"eval", "--ckpt", (dir / "runs" / v / "final.nrck").string(), "--set",
                           "robust", "--theta", "5", "--gtb", "--out", (dir / "eval" / v).string()})
                         .out);
    }
    outs.push_back(must({"sweep", "--ckpt-dir", (dir / "runs").string(), "--out",
                         (dir / "sweep").string()}).out);
    outs.push_back(cli({"grad-check", "--trials", "5", "--seed", "3", "--case", "mha", "--case",
                        "DweA", "--out", (dir / "grad").string()}).out);
    return outs;
  };

  const auto first_out = pipeline();
  const auto first_files = snapshot(dir);
  fs::remove_all(dir / "data");
  fs::remove_all(dir / "runs");
  fs::remove_all(dir / "eval");
  fs::remove_all(dir / "sweep");
  fs::remove_all(dir / "stats");
  fs::remove_all(dir / "grad");
  const auto second_out = pipeline();
  const auto second_files = snapshot(dir);

  std::size_t checkpoints = 0;
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : first_files) {
    if (name.ends_with(".nrck")) ++checkpoints;
    const auto it = second_files.find(name);
    if (it == second_files.end() || it->second != bytes) differing.push_back(name);
  }
  if (second_files.size() != first_files.size()) differing.push_back("(file set)");
  for (std::size_t i = 0; i < first_out.size(); ++i) {
    if (first_out[i] != second_out[i]) differing.push_back("stdout of step " + std::to_string(i));
  }
  for (const auto& d : differing) log("differs: " + d);
  report(10, differing.empty() && checkpoints > 0,
         std::to_string(first_files.size()) + " files (" + std::to_string(checkpoints) +
             " checkpoints) and " + std::to_string(first_out.size()) +
             " command outputs compared across two runs, " + std::to_string(differing.size()) +
             " differ, " + fmt(seconds_since(t0), 1) + "s");
}

// ---- 8: invariance properties ------------------------------------------------------

double max_abs_diff(const nn::Tensor& a, const nn::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

nn::Tensor user_vector(const enc::Model& m, const enc::EncodedHistory& eh,
                       enc::EncodeDiagnostics* diag = nullptr) {
  nn::Graph g;
  return g.value(m.encode_user(g, eh, diag));
}

void criterion_8() {
  const auto t0 = Clock::now();
  constexpr int kCases = 100;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto store = testsupport::random_store(60, 6, rng);
  std::map<std::string, int> passed;

  for (int i = 0; i < kCases; ++i) {
    bool perm_ok = true, pad_ok = true;
    for (auto v : testsupport::all_variants()) {
      const auto cfg = testsupport::tiny_config(v);
      enc::Model m(cfg, 1000 + i);
      std::uniform_int_distribution<std::size_t> len(1, cfg.max_history - 1);
      auto h = testsupport::random_history(len(rng), 60, rng);

      const auto eh = enc::encode_history(h, store, cfg);
      const nn::Tensor u = user_vector(m, eh);
      auto shuffled = h;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      perm_ok = perm_ok && max_abs_diff(u, user_vector(m, enc::encode_history(shuffled, store, cfg))) < 1e-10;

      auto dirty = eh;
      for (std::size_t r = 0; r < dirty.capacity(); ++r) {
        if (dirty.valid[r]) continue;
        for (std::size_t k = 0; k < cfg.d; ++k) dirty.embeddings(r, k) = 100.0 * z(rng);
        dirty.buckets[r].id = 9;
        dirty.dwell[r] = dwell::RawDwell::seconds(250.0);
      }
      auto wide_cfg = cfg;
      wide_cfg.max_history = cfg.max_history * 2;
      enc::Model wide(wide_cfg, 1000 + i);
      pad_ok = pad_ok && max_abs_diff(u, user_vector(m, dirty)) < 1e-12 &&
               max_abs_diff(u, user_vector(wide, enc::encode_history(h, store, wide_cfg))) < 1e-10;
    }
    passed["permutation invariance"] += perm_ok;
    passed["padding non-influence"] += pad_ok;

    // Gate normalization on histories that always contain an effective click.
    {
      const auto cfg = testsupport::tiny_config(enc::Variant::kDweW);
      enc::Model m(cfg, 2000 + i);
      auto h = testsupport::random_history(5, 60, rng);
      h[i % 5].dwell = dwell::RawDwell::seconds(6.0 + i);
      enc::EncodeDiagnostics diag;
      user_vector(m, enc::encode_history(h, store, cfg), &diag);
      passed["gate normalization"] += diag.gate_used && diag.gate[0] >= 0.0 && diag.gate[1] >= 0.0 &&
                                      std::abs(diag.gate[0] + diag.gate[1] - 1.0) < 1e-12;
    }

    // Masked softmax rows.
    {
      std::uniform_int_distribution<std::size_t> dim(1, 9);
      const std::size_t rows = dim(rng), cols = dim(rng);
      nn::Tensor x(rows, cols);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = 10.0 * z(rng);
      nn::Mask mask(cols, 1);
      std::bernoulli_distribution drop(0.3);
      for (auto& b : mask) b = drop(rng) ? 0 : 1;
      mask[i % cols] = 1;
      nn::Graph g;
      const nn::Tensor& p = g.value(nn::softmax_rows(g, g.constant(x), mask));
      bool ok = true;
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          ok = ok && p(r, c) >= 0.0 && (mask[c] || p(r, c) == 0.0);
          s += p(r, c);
        }
        ok = ok && std::abs(s - 1.0) < 1e-12;
      }
      passed["softmax row sums"] += ok;
    }

    // Attention pooling stays within the per-dimension range of valid rows.
    {
      nn::ParamStore s;
      const auto pool = nn::make_att_pool(s, "pool", 5, 3);
      for (std::size_t k = 0; k < s.size(); ++k) nn::ParamStore::normal(s[k], 2.0, rng);
      nn::Tensor x(7, 5);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = z(rng);
      nn::Mask mask(7, 1);
      mask[i % 7] = 0;
      nn::Graph g;
      const nn::Tensor& u = g.value(nn::att_pool(g, g.constant(x), pool, mask));
      bool ok = true;
      for (std::size_t c = 0; c < 5; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t r = 0; r < 7; ++r) {
          if (!mask[r]) continue;
          lo = std::min(lo, x(r, c));
          hi = std::max(hi, x(r, c));
        }
        ok = ok && u(0, c) >= lo - 1e-12 && u(0, c) <= hi + 1e-12;
      }
      passed["att_pool envelope"] += ok;
    }
  }

  bool all = true;
  std::string detail;
  for (const auto& [name, n] : passed) {
    all = all && n == kCases;
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(n) + "/" + std::to_string(kCases);
  }
  const double t = seconds_since(t0);
  report(8, all && t < 60.0, detail + ", " + fmt(t, 2) + "s");
}

}  // namespace

int main() {
  ::setenv("DWELLREC_THREADS", "1", 1);
  testsupport::TempDir work;
  log("work dir " + work.path().string());

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();

  std::vector<SeedResult> seeds;
  bool pipeline_ok = true;
  try {
    for (auto s : kSeeds) seeds.push_back(run_seed(work.path(), s));
  } catch (const std::exception& e) {
    pipeline_ok = false;
    log(e.what());
  }
  if (pipeline_ok) {
    bool attpool_zero = false;
    try {
      attpool_zero = base_attpool_blind(work.path());
    } catch (const std::exception& e) {
      log(e.what());
    }
    criterion_6_7(seeds, attpool_zero);
  } else {
    report(6, false, "training pipeline failed");
    report(7, false, "training pipeline failed");
  }

  criterion_8();

  if (pipeline_ok) {
    criterion_9(work.path());
  } else {
    report(9, false, "no trained models");
  }

  try {
    criterion_10(work.path());
  } catch (const std::exception& e) {
    log(e.what());
    report(10, false, "pipeline failed");
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
