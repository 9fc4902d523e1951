// User encoders, click scoring and the sampled softmax loss.
//
// Four encoder variants share the same scaffolding: a clicked-news matrix
// E_u (H x d) built from the embedding store, and a news-side projection
// d -> h*a used for candidates (and for history rows in BaseAttPool).
//
//   BaseAttPool  u = AttPool(E_u W_n + b_n)
//   BaseMHA      u = AttPool(MHA(E_u, E_u, E_u))
//   DweW         U^o, U^e = AttPool(MHA(.)) over all clicks / effective clicks
//                with shared weights; a dwell-driven gate blends them:
//                G = softmax(W_g tanh(W_d AttPool(D_u) + b_d) + b_g),
//                u = G_e U^e + G_o U^o   (u = U^o when no click is effective)
//   DweA         u = AttPool(MHA([E_u, D_u], [E_u, D_u], E_u))
//
// D_u holds dwell-bucket embeddings; row 0 of the table (padding) is pinned
// to zero. Scores are dot products of u with projected candidates.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dwellrec/datagen.hpp"
#include "dwellrec/dwell.hpp"
#include "dwellrec/newsrep.hpp"
#include "dwellrec/nn/graph.hpp"
#include "dwellrec/nn/layers.hpp"
#include "dwellrec/nn/param.hpp"

namespace dwellrec::enc {

enum class Variant { kBaseAttPool, kBaseMha, kDweW, kDweA };

std::string to_string(Variant v);
// Accepts "BaseAttPool", "BaseMHA", "DweW", "DweA".
Variant parse_variant(const std::string& name);
bool uses_dwell(Variant v);

struct EncoderConfig {
  Variant variant = Variant::kDweA;
  std::size_t d = 64;
  std::size_t d_dw = 20;
  std::size_t heads = 2;
  std::size_t head_dim = 8;
  std::size_t pool_dim = 16;  // attention-pool query dimension
  std::size_t max_history = 50;
  double theta = 5.0;
  std::size_t k_negatives = 4;
  dwell::DwellScheme dwell_scheme = dwell::DwellScheme::kLiteral;
  double dropout = 0.2;

  std::size_t width() const { return heads * head_dim; }
  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct EncodedHistory {
  nn::Tensor embeddings;                  // H x d, zero rows for padding
  std::vector<dwell::DwellBucket> buckets;  // bucket 0 for padding
  std::vector<dwell::RawDwell> dwell;       // raw dwell, Unknown for padding
  nn::Mask valid;
  bool empty = false;  // no valid row

  std::size_t capacity() const { return valid.size(); }
  std::size_t num_valid() const;
};

// Keeps the most recent cfg.max_history clicks. Unknown news ids throw
// LookupError naming the id; an empty history yields an all-padding result
// with `empty` set.
EncodedHistory encode_history(const std::vector<datagen::ClickRecord>& history,
                              const newsrep::EmbeddingStore& store, const EncoderConfig& cfg);

// (original, effective): original keeps every valid row; effective keeps rows
// whose known dwell exceeds theta. Both are compacted and re-padded to the
// same capacity.
std::pair<EncodedHistory, EncodedHistory> split_effective(const EncodedHistory& eh, double theta);

struct EncodeDiagnostics {
  bool empty_history = false;
  bool empty_effective = false;
  bool gate_used = false;
  std::array<double, 2> gate{0.0, 0.0};  // (effective, original)
};

class Model {
 public:
  // Creates the variant's parameters and initializes them from `seed`.
  Model(const EncoderConfig& cfg, std::uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;

  const EncoderConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // 1 x width user vector.
  nn::Var encode_user(nn::Graph& g, const EncodedHistory& eh,
                      EncodeDiagnostics* diag = nullptr) const;
  // rows x d  ->  rows x width
  nn::Var project_news(nn::Graph& g, nn::Var news) const;

  // Scores each candidate id against the encoded history (inference mode).
  std::vector<double> score_candidates(const EncodedHistory& eh,
                                       const std::vector<std::string>& candidate_ids,
                                       const newsrep::EmbeddingStore& store) const;

  // Sampled softmax loss for one training sample: candidates are the K + 1
  // slots with the positive at sample.positive_slot.
  nn::Var sample_loss(nn::Graph& g, const datagen::TrainSample& sample,
                      const newsrep::EmbeddingStore& store) const;

  // Parameter groups, exposed for the encoder functions below.
  struct Params {
    nn::Param* news_w = nullptr;
    nn::Param* news_b = nullptr;  // BaseAttPool only
    nn::AttPoolParams pool;
    nn::MhaParams mha;
    nn::Param* dwell_table = nullptr;
    nn::AttPoolParams gate_pool;
    nn::Param* gate_hidden_w = nullptr;
    nn::Param* gate_hidden_b = nullptr;
    nn::Param* gate_out_w = nullptr;
    nn::Param* gate_out_b = nullptr;
  };
  const Params& parts() const { return parts_; }

 private:
  EncoderConfig cfg_;
  nn::ParamStore params_;
  Params parts_;
};

nn::Var encode_base_attpool(nn::Graph& g, const EncodedHistory& eh, const Model& m,
                            EncodeDiagnostics* diag = nullptr);
nn::Var encode_base_mha(nn::Graph& g, const EncodedHistory& eh, const Model& m,
                        EncodeDiagnostics* diag = nullptr);
nn::Var encode_dwew(nn::Graph& g, const EncodedHistory& eh, const Model& m,
                    EncodeDiagnostics* diag = nullptr);
nn::Var encode_dwea(nn::Graph& g, const EncodedHistory& eh, const Model& m,
                    EncodeDiagnostics* diag = nullptr);

// dot(u, W_n n_c + b_n). Throws ShapeError on a dimension mismatch.
double predict(std::span<const double> u, std::span<const float> news, const Model& m);

// -log(exp(s+) / (exp(s+) + sum_j exp(s-_j))), max-subtracted. Needs at
// least one negative; non-finite scores throw NumericError.
double sample_loss(double pos_score, std::span<const double> neg_scores);

}  // namespace dwellrec::enc
