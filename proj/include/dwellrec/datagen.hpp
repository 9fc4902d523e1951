// Synthetic impression logs and the datasets derived from them.
//
// Each user gets a small set of interest topics and a personal share of
// interest-driven clicks. Interest clicks land on news whose topic mix is
// aligned with the user's interests and carry a long dwell (log-normal,
// truncated to (5, 600] s); noise clicks land on non-aligned news and carry a
// short dwell in [0, 5). A fixed share of dwells is recorded as Unknown. The
// defaults reproduce roughly 5% Unknown dwell and 89% of known clicks above
// five seconds.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dwellrec/dwell.hpp"

namespace dwellrec::datagen {

using dwell::RawDwell;

struct NewsItem {
  std::string news_id;
  std::vector<double> topic_mix;  // non-negative, sums to 1
};

struct ClickRecord {
  std::string news_id;
  RawDwell dwell;
};

struct Candidate {
  std::string news_id;
  int label = 0;  // 0 or 1
  // Dwell of the click for label == 1; Unknown for unclicked candidates.
  RawDwell dwell;
};

struct Impression {
  std::string impression_id;
  std::string user_id;
  std::vector<ClickRecord> history;  // most recent last
  std::vector<Candidate> candidates;

  std::size_t num_positive() const;
};

struct GeneratorConfig {
  std::size_t n_topics = 16;
  std::size_t n_news = 1000;
  std::size_t n_users = 2000;
  std::size_t history_min = 5;
  std::size_t history_max = 60;
  std::size_t candidates = 5;
  std::size_t train_impressions_per_user = 2;
  std::size_t test_impressions_per_user = 1;
  std::size_t user_topics = 2;
  // Weight of a news item's dominant topic; the rest is spread Dirichlet(1).
  double news_topic_peak = 0.7;
  // Mean per-user probability that a click is interest-driven.
  double interest_prob = 0.89;
  // Beta concentration (a + b) of the per-user interest probability;
  // 0 gives every user exactly interest_prob.
  double interest_concentration = 5.0;
  // Cosine between user preference and topic mix at or above which a news
  // item counts as aligned.
  double alignment_threshold = 0.5;
  double extra_positive_prob = 0.3;
  double unknown_rate = 0.05;
  double long_median_s = 60.0;
  double long_sigma = 1.0;
  double long_min_s = 5.0;
  double long_max_s = 600.0;
  double short_max_s = 5.0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct Corpus {
  std::vector<NewsItem> news;
  std::vector<Impression> train;
  std::vector<Impression> test;
};

// Deterministic in (cfg, seed).
Corpus generate_corpus(const GeneratorConfig& cfg, std::uint64_t seed);

// History dwell of every distinct user (first impression seen per user).
std::vector<RawDwell> collect_history_dwell(const std::vector<Impression>& impressions);

struct TrainSample {
  std::vector<ClickRecord> history;
  std::string positive;
  std::vector<std::string> negatives;  // exactly K
  // Position of the positive among the K + 1 shuffled candidate slots;
  // negatives fill the other slots in order.
  std::size_t positive_slot = 0;
};

struct TrainSampleSet {
  std::vector<TrainSample> samples;
  std::size_t skipped = 0;  // positives dropped for lack of any unclicked candidate
};

// One sample per positive candidate. Negatives come from the same
// impression's unclicked candidates: without replacement when at least K
// exist, otherwise with replacement.
TrainSampleSet build_train_samples(const std::vector<Impression>& impressions, std::size_t k,
                                   std::uint64_t seed);

enum class EvalMode { kNormal, kReal, kRobust };

std::string to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& name);

struct EvalSet {
  EvalMode mode = EvalMode::kNormal;
  double theta = 0.0;
  std::vector<Impression> impressions;
  // Robust mode: 1 where the impression keeps a positive whose dwell is Unknown.
  std::vector<std::uint8_t> unknown_flags;
};

// Normal keeps everything. Real(theta) relabels positives whose dwell is
// <= theta or Unknown as 0 and drops impressions left without a positive.
// Robust(theta) is Real(theta) that also keeps Unknown-dwell positives,
// flagging their impressions. theta must be positive for Real and Robust.
EvalSet build_eval_set(const std::vector<Impression>& impressions, EvalMode mode, double theta);

// Replaces every history dwell with Unknown; candidates stay untouched.
EvalSet mask_eval_dwell(const EvalSet& set);

// ---- JSONL logs ------------------------------------------------------------
// Impression: {"iid":..,"uid":..,"history":[{"nid":..,"dwell":float|null}],
//              "cands":[{"nid":..,"y":0|1[,"dwell":float|null]}]}
// News:       {"nid":..,"topics":[float,...]}

void write_news_jsonl(std::ostream& os, const std::vector<NewsItem>& news);
void write_impressions_jsonl(std::ostream& os, const std::vector<Impression>& impressions);
std::vector<NewsItem> read_news_jsonl(const std::filesystem::path& path);
std::vector<Impression> read_impressions_jsonl(const std::filesystem::path& path);

}  // namespace dwellrec::datagen
