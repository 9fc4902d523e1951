// Application configuration: one JSON document with sections for the
// generator, embedding, encoder, training, evaluation and paths. Missing keys
// take profile defaults; unknown keys and type mismatches are errors naming
// the key.
//
// The paper profile carries the full-size hyperparameters (lr 1e-3, batch 32,
// dropout 0.2, K = 4, H = 50, 10 heads of width 20, 1536-d news vectors).
// The desk profile shrinks the model to d = 64, 2 heads of width 8, which
// keeps training and finite-difference checks fast on one core.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dwellrec/datagen.hpp"
#include "dwellrec/encoders.hpp"
#include "dwellrec/newsrep.hpp"
#include "dwellrec/training.hpp"

namespace dwellrec::app {

enum class Profile { kPaper, kDesk };

Profile parse_profile(const std::string& name);
std::string to_string(Profile p);

struct EvaluationConfig {
  std::string set = "real";  // normal | real | robust
  double theta = 5.0;
  double max_skip_fraction = 0.5;
};

struct PathsConfig {
  std::string data_dir;    // holds news.jsonl, train.jsonl, test.jsonl
  std::string embeddings;  // optional store file; synthetic embeddings when empty
};

struct EmbeddingConfig {
  std::uint64_t seed = 7;
  double noise_scale = 0.1;
};

struct AppConfig {
  datagen::GeneratorConfig generator;
  EmbeddingConfig embedding;
  enc::EncoderConfig encoder;
  train::TrainingConfig training;
  EvaluationConfig evaluation;
  PathsConfig paths;

  newsrep::SynthEmbedConfig synth_embed() const {
    return {encoder.d, embedding.seed, embedding.noise_scale};
  }
  void validate() const;
};

AppConfig defaults(Profile profile);

// Throws ConfigError on unknown keys, type mismatches or constraint
// violations; FormatError when the file is not JSON.
AppConfig parse_config(const nlohmann::json& doc, Profile profile = Profile::kPaper);
AppConfig load_config(const std::filesystem::path& path, Profile profile = Profile::kPaper);

// Canonical form: every key present, fixed order.
nlohmann::ordered_json to_json(const AppConfig& cfg);
nlohmann::ordered_json to_json(const enc::EncoderConfig& cfg);
void save_config(const std::filesystem::path& path, const AppConfig& cfg);

}  // namespace dwellrec::app
