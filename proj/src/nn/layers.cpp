#include "dwellrec/nn/layers.hpp"

#include <cmath>
#include <vector>

#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericError(std::string(where) + ": non-finite input");
}

Var linear(Graph& g, Var x, Var w) {
  require_finite(g.value(x), "linear");
  return matmul(g, x, w);
}

Var linear(Graph& g, Var x, Var w, Var b) { return add_row(g, linear(g, x, w), b); }

AttPoolParams make_att_pool(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                            std::size_t att_dim) {
  AttPoolParams p;
  p.proj = &store.add(prefix + ".proj", in_dim, att_dim);
  p.bias = &store.add(prefix + ".bias", 1, att_dim);
  p.query = &store.add(prefix + ".query", 1, att_dim);
  return p;
}

Var att_pool(Graph& g, Var x, const AttPoolParams& p, const Mask& mask, bool* empty) {
  require_finite(g.value(x), "att_pool");
  const Var hidden = tanh(g, linear(g, x, g.param(*p.proj), g.param(*p.bias)));  // H x A
  const Var scores = transpose(g, matmul_nt(g, hidden, g.param(*p.query)));      // 1 x H
  const Var alpha = softmax_rows(g, scores, mask, empty);
  return matmul(g, alpha, x);  // 1 x D
}

MhaParams make_mha(ParamStore& store, const std::string& prefix, std::size_t qk_in_dim,
                   std::size_t v_in_dim, std::size_t heads, std::size_t head_dim) {
  if (heads * head_dim == 0) throw ConfigError("multi-head attention needs heads * head_dim > 0");
  const std::size_t width = heads * head_dim;
  MhaParams p;
  p.wq = &store.add(prefix + ".wq", qk_in_dim, width);
  p.wk = &store.add(prefix + ".wk", qk_in_dim, width);
  p.wv = &store.add(prefix + ".wv", v_in_dim, width);
  p.wo = &store.add(prefix + ".wo", width, width);
  p.heads = heads;
  p.head_dim = head_dim;
  return p;
}

Var multi_head_attention(Graph& g, Var q_in, Var k_in, Var v_in, const MhaParams& p,
                         const Mask& mask) {
  if (p.heads * p.head_dim == 0) throw ConfigError("multi-head attention needs heads * head_dim > 0");
  const Tensor& Q = g.value(q_in);
  const Tensor& K = g.value(k_in);
  const Tensor& V = g.value(v_in);
  if (Q.cols() != K.cols() || K.rows() != V.rows()) {
    throw ShapeError("multi_head_attention: Q " + Q.shape_str() + ", K " + K.shape_str() +
                     ", V " + V.shape_str());
  }
  require_finite(Q, "multi_head_attention");
  require_finite(K, "multi_head_attention");
  require_finite(V, "multi_head_attention");

  const Var q = matmul(g, q_in, g.param(*p.wq));
  const Var k = matmul(g, k_in, g.param(*p.wk));
  const Var v = matmul(g, v_in, g.param(*p.wv));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(p.head_dim));

  std::vector<Var> heads;
  heads.reserve(p.heads);
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t off = h * p.head_dim;
    const Var qh = slice_cols(g, q, off, p.head_dim);
    const Var kh = slice_cols(g, k, off, p.head_dim);
    const Var vh = slice_cols(g, v, off, p.head_dim);
    const Var logits = scale(g, matmul_nt(g, qh, kh), inv_sqrt);
    const Var weights = softmax_rows(g, logits, mask);
    heads.push_back(matmul(g, weights, vh));
  }
  const Var joined = p.heads == 1 ? heads.front() : concat_cols(g, heads);
  return matmul(g, joined, g.param(*p.wo));
}

}  // namespace dwellrec::nn
