#include "dwellrec/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dwellrec/errors.hpp"

namespace dwellrec::enc {

using nn::Graph;
using nn::Tensor;
using nn::Var;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBaseAttPool: return "BaseAttPool";
    case Variant::kBaseMha: return "BaseMHA";
    case Variant::kDweW: return "DweW";
    case Variant::kDweA: return "DweA";
  }
  return "DweA";
}

Variant parse_variant(const std::string& name) {
  if (name == "BaseAttPool") return Variant::kBaseAttPool;
  if (name == "BaseMHA") return Variant::kBaseMha;
  if (name == "DweW") return Variant::kDweW;
  if (name == "DweA") return Variant::kDweA;
  throw ConfigError("unknown encoder variant '" + name + "' (BaseAttPool|BaseMHA|DweW|DweA)");
}

bool uses_dwell(Variant v) { return v == Variant::kDweW || v == Variant::kDweA; }

void EncoderConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("encoder.") + name + " must be positive");
  };
  positive(d, "d");
  positive(d_dw, "d_dw");
  positive(heads, "heads");
  positive(head_dim, "head_dim");
  positive(pool_dim, "pool_dim");
  positive(max_history, "max_history");
  if (k_negatives < 1) throw ConfigError("encoder.k_negatives must be at least 1");
  if (!(theta > 0.0)) throw ConfigError("encoder.theta must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("encoder.dropout must lie in [0, 1)");
}

std::size_t EncodedHistory::num_valid() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

EncodedHistory encode_history(const std::vector<datagen::ClickRecord>& history,
                              const newsrep::EmbeddingStore& store, const EncoderConfig& cfg) {
  const std::size_t cap = cfg.max_history;
  const std::size_t n = std::min(cap, history.size());
  const std::size_t first = history.size() - n;

  EncodedHistory eh;
  eh.embeddings = Tensor(cap, cfg.d);
  eh.buckets.assign(cap, dwell::DwellBucket{});
  eh.dwell.assign(cap, dwell::RawDwell::unknown());
  eh.valid.assign(cap, 0);
  eh.empty = n == 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = history[first + i];
    const auto v = store.lookup(rec.news_id);
    if (v.size() != cfg.d) {
      throw ShapeError("embedding of '" + rec.news_id + "' has dimension " +
                       std::to_string(v.size()) + ", encoder expects " + std::to_string(cfg.d));
    }
    std::copy(v.begin(), v.end(), eh.embeddings.row(i).begin());
    eh.buckets[i] = dwell::discretize(rec.dwell, cfg.dwell_scheme);
    eh.dwell[i] = rec.dwell;
    eh.valid[i] = 1;
  }
  return eh;
}

namespace {

EncodedHistory compact(const EncodedHistory& eh, const std::vector<std::size_t>& rows) {
  EncodedHistory out;
  const std::size_t cap = eh.capacity();
  out.embeddings = Tensor(cap, eh.embeddings.cols());
  out.buckets.assign(cap, dwell::DwellBucket{});
  out.dwell.assign(cap, dwell::RawDwell::unknown());
  out.valid.assign(cap, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    std::copy(eh.embeddings.row(r).begin(), eh.embeddings.row(r).end(),
              out.embeddings.row(i).begin());
    out.buckets[i] = eh.buckets[r];
    out.dwell[i] = eh.dwell[r];
    out.valid[i] = 1;
  }
  out.empty = rows.empty();
  return out;
}

}  // namespace

std::pair<EncodedHistory, EncodedHistory> split_effective(const EncodedHistory& eh, double theta) {
  std::vector<std::size_t> all, effective;
  for (std::size_t i = 0; i < eh.capacity(); ++i) {
    if (!eh.valid[i]) continue;
    all.push_back(i);
    if (eh.dwell[i].known() && eh.dwell[i].value() > theta) effective.push_back(i);
  }
  return {compact(eh, all), compact(eh, effective)};
}

// ---- model -------------------------------------------------------------------

Model::Model(const EncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t w = cfg_.width();
  parts_.news_w = &params_.add("news.w", cfg_.d, w);
  // A candidate-side bias only shifts every score by u . b, which the
  // softmax ignores, unless history rows share the projection.
  if (cfg_.variant == Variant::kBaseAttPool) parts_.news_b = &params_.add("news.b", 1, w);

  const bool dwell = uses_dwell(cfg_.variant);
  if (dwell) {
    parts_.dwell_table =
        &params_.add("dwell.table", dwell::vocab_size(cfg_.dwell_scheme), cfg_.d_dw);
    parts_.dwell_table->frozen_rows = 1;
  }
  if (cfg_.variant != Variant::kBaseAttPool) {
    const std::size_t qk = cfg_.variant == Variant::kDweA ? cfg_.d + cfg_.d_dw : cfg_.d;
    parts_.mha = nn::make_mha(params_, "mha", qk, cfg_.d, cfg_.heads, cfg_.head_dim);
  }
  parts_.pool = nn::make_att_pool(params_, "pool", w, cfg_.pool_dim);
  if (cfg_.variant == Variant::kDweW) {
    parts_.gate_pool = nn::make_att_pool(params_, "gate.pool", cfg_.d_dw, cfg_.d_dw);
    parts_.gate_hidden_w = &params_.add("gate.hidden.w", cfg_.d_dw, cfg_.d_dw);
    parts_.gate_hidden_b = &params_.add("gate.hidden.b", 1, cfg_.d_dw);
    parts_.gate_out_w = &params_.add("gate.out.w", cfg_.d_dw, 2);
    parts_.gate_out_b = &params_.add("gate.out.b", 1, 2);
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Param& p = params_[i];
    if (&p == parts_.dwell_table) {
      nn::ParamStore::normal(p, 0.1, rng);
    } else if (p.name.ends_with(".b") || p.name.ends_with(".bias")) {
      p.value.fill(0.0);
    } else {
      nn::ParamStore::xavier_uniform(p, rng);
    }
  }
}

Var Model::encode_user(Graph& g, const EncodedHistory& eh, EncodeDiagnostics* diag) const {
  if (eh.embeddings.cols() != cfg_.d) {
    throw ShapeError("encoded history has width " + std::to_string(eh.embeddings.cols()) +
                     ", model expects " + std::to_string(cfg_.d));
  }
  switch (cfg_.variant) {
    case Variant::kBaseAttPool: return encode_base_attpool(g, eh, *this, diag);
    case Variant::kBaseMha: return encode_base_mha(g, eh, *this, diag);
    case Variant::kDweW: return encode_dwew(g, eh, *this, diag);
    case Variant::kDweA: return encode_dwea(g, eh, *this, diag);
  }
  throw ConfigError("unhandled variant");
}

Var Model::project_news(Graph& g, Var news) const {
  if (!parts_.news_b) return nn::linear(g, news, g.param(*parts_.news_w));
  return nn::linear(g, news, g.param(*parts_.news_w), g.param(*parts_.news_b));
}

namespace {

Tensor candidate_matrix(const std::vector<std::string>& ids, const newsrep::EmbeddingStore& store,
                        std::size_t d) {
  Tensor m(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto v = store.lookup(ids[i]);
    if (v.size() != d) {
      throw ShapeError("embedding of '" + ids[i] + "' has dimension " + std::to_string(v.size()) +
                       ", model expects " + std::to_string(d));
    }
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace

std::vector<double> Model::score_candidates(const EncodedHistory& eh,
                                            const std::vector<std::string>& candidate_ids,
                                            const newsrep::EmbeddingStore& store) const {
  Graph g;
  const Var u = encode_user(g, eh);
  const Var cands = project_news(g, g.constant(candidate_matrix(candidate_ids, store, cfg_.d)));
  const Tensor& s = g.value(nn::matmul_nt(g, u, cands));
  return {s.data().begin(), s.data().end()};
}

Var Model::sample_loss(Graph& g, const datagen::TrainSample& sample,
                       const newsrep::EmbeddingStore& store) const {
  const std::size_t k = sample.negatives.size();
  if (sample.positive_slot > k) throw InvalidInputError("positive slot outside candidate list");
  std::vector<std::string> slots;
  slots.reserve(k + 1);
  for (std::size_t i = 0, n = 0; i <= k; ++i) {
    slots.push_back(i == sample.positive_slot ? sample.positive : sample.negatives[n++]);
  }
  const EncodedHistory eh = encode_history(sample.history, store, cfg_);
  const Var u = encode_user(g, eh);
  const Var cands = project_news(g, g.constant(candidate_matrix(slots, store, cfg_.d)));
  return nn::softmax_xent(g, nn::matmul_nt(g, u, cands), sample.positive_slot);
}

// ---- encoders ------------------------------------------------------------------

namespace {

Var history_rows(Graph& g, const EncodedHistory& eh, const Model& m) {
  return nn::dropout(g, g.constant(eh.embeddings), m.config().dropout);
}

Var dwell_rows(Graph& g, const EncodedHistory& eh, const Model& m) {
  std::vector<std::size_t> ids(eh.buckets.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = eh.buckets[i].id;
  return nn::embed_lookup(g, g.param(*m.parts().dwell_table), ids);
}

// AttPool(MHA(E, E, E)); used by BaseMHA and both DweW branches.
Var self_attend_pool(Graph& g, const EncodedHistory& eh, const Model& m, bool* empty) {
  const Var x = history_rows(g, eh, m);
  const Var ctx = nn::multi_head_attention(g, x, x, x, m.parts().mha, eh.valid);
  return nn::att_pool(g, nn::dropout(g, ctx, m.config().dropout), m.parts().pool, eh.valid, empty);
}

}  // namespace

Var encode_base_attpool(Graph& g, const EncodedHistory& eh, const Model& m,
                        EncodeDiagnostics* diag) {
  const Var rows = m.project_news(g, history_rows(g, eh, m));
  bool empty = false;
  const Var u = nn::att_pool(g, rows, m.parts().pool, eh.valid, &empty);
  if (diag) diag->empty_history = empty;
  return u;
}

Var encode_base_mha(Graph& g, const EncodedHistory& eh, const Model& m, EncodeDiagnostics* diag) {
  bool empty = false;
  const Var u = self_attend_pool(g, eh, m, &empty);
  if (diag) diag->empty_history = empty;
  return u;
}

Var encode_dwew(Graph& g, const EncodedHistory& eh, const Model& m, EncodeDiagnostics* diag) {
  if (!m.parts().dwell_table || !m.parts().gate_out_w) {
    throw ConfigError("encode_dwew needs a model built for the DweW variant");
  }
  const auto [orig, eff] = split_effective(eh, m.config().theta);
  bool empty = false;
  const Var u_orig = self_attend_pool(g, orig, m, &empty);
  if (diag) {
    diag->empty_history = empty;
    diag->empty_effective = eff.empty;
  }
  if (eff.empty) return u_orig;

  const Var u_eff = self_attend_pool(g, eff, m, nullptr);

  const auto& p = m.parts();
  const Var pooled = nn::att_pool(g, dwell_rows(g, orig, m), p.gate_pool, orig.valid);
  const Var hidden =
      nn::tanh(g, nn::linear(g, pooled, g.param(*p.gate_hidden_w), g.param(*p.gate_hidden_b)));
  const Var gate = nn::softmax_rows(
      g, nn::linear(g, hidden, g.param(*p.gate_out_w), g.param(*p.gate_out_b)));
  if (diag) {
    diag->gate_used = true;
    diag->gate = {g.value(gate)[0], g.value(gate)[1]};
  }
  return nn::add(g, nn::scale_by(g, u_eff, nn::pick(g, gate, 0, 0)),
                 nn::scale_by(g, u_orig, nn::pick(g, gate, 0, 1)));
}

Var encode_dwea(Graph& g, const EncodedHistory& eh, const Model& m, EncodeDiagnostics* diag) {
  if (!m.parts().dwell_table) throw ConfigError("encode_dwea needs a model built for the DweA variant");
  const Var x = history_rows(g, eh, m);
  const Var qk = nn::concat_cols(g, {x, dwell_rows(g, eh, m)});
  const Var ctx = nn::multi_head_attention(g, qk, qk, x, m.parts().mha, eh.valid);
  bool empty = false;
  const Var u =
      nn::att_pool(g, nn::dropout(g, ctx, m.config().dropout), m.parts().pool, eh.valid, &empty);
  if (diag) diag->empty_history = empty;
  return u;
}

double predict(std::span<const double> u, std::span<const float> news, const Model& m) {
  const auto& w = m.parts().news_w->value;
  const nn::Param* b = m.parts().news_b;
  if (news.size() != w.rows() || u.size() != w.cols()) {
    throw ShapeError("predict: user vector of " + std::to_string(u.size()) + " and news of " +
                     std::to_string(news.size()) + " against projection " + w.shape_str());
  }
  double score = 0.0;
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double proj = b ? b->value[j] : 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) proj += static_cast<double>(news[i]) * w(i, j);
    score += u[j] * proj;
  }
  return score;
}

double sample_loss(double pos_score, std::span<const double> neg_scores) {
  if (neg_scores.empty()) throw InvalidInputError("sample_loss needs at least one negative");
  double mx = pos_score;
  if (!std::isfinite(pos_score)) throw NumericError("sample_loss: non-finite positive score");
  for (double s : neg_scores) {
    if (!std::isfinite(s)) throw NumericError("sample_loss: non-finite negative score");
    mx = std::max(mx, s);
  }
  double z = std::exp(pos_score - mx);
  for (double s : neg_scores) z += std::exp(s - mx);
  return -(pos_score - mx - std::log(z));
}

}  // namespace dwellrec::enc
