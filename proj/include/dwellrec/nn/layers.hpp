// Composite layers built on the tape ops: dense projection, additive
// attention pooling, and multi-head scaled dot-product attention.

#pragma once

#include <cstddef>
#include <string>

#include "dwellrec/nn/graph.hpp"
#include "dwellrec/nn/param.hpp"

namespace dwellrec::nn {

// y = x W + b with W stored as (in x out). `b` may be omitted.
Var linear(Graph& g, Var x, Var w);
Var linear(Graph& g, Var x, Var w, Var b);

// Additive attention pooling over the rows of X (H x D):
//   s_i = v . tanh(W x_i + b),  alpha = softmax over valid rows,  u = sum alpha_i x_i
struct AttPoolParams {
  Param* proj = nullptr;   // D x A
  Param* bias = nullptr;   // 1 x A
  Param* query = nullptr;  // 1 x A
};

AttPoolParams make_att_pool(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                            std::size_t att_dim);

// Returns a 1 x D row. With no valid row the result is zero and `empty`
// (if given) is set.
Var att_pool(Graph& g, Var x, const AttPoolParams& p, const Mask& mask, bool* empty = nullptr);

// Per head i: softmax((Q W_q^i)(K W_k^i)^T / sqrt(a), mask) (V W_v^i); heads
// are concatenated and projected by W_o to heads * head_dim. Q/K inputs may
// have a different feature width than V. Projections carry no bias.
struct MhaParams {
  Param* wq = nullptr;  // dq x (h a)
  Param* wk = nullptr;  // dq x (h a)
  Param* wv = nullptr;  // dv x (h a)
  Param* wo = nullptr;  // (h a) x (h a)
  std::size_t heads = 0;
  std::size_t head_dim = 0;

  std::size_t out_dim() const { return heads * head_dim; }
};

MhaParams make_mha(ParamStore& store, const std::string& prefix, std::size_t qk_in_dim,
                   std::size_t v_in_dim, std::size_t heads, std::size_t head_dim);

// `mask` marks valid key rows (empty = all valid).
Var multi_head_attention(Graph& g, Var q_in, Var k_in, Var v_in, const MhaParams& p,
                         const Mask& mask);

// Throws NumericError naming `where` if the tensor holds NaN or Inf.
void require_finite(const Tensor& t, const char* where);

}  // namespace dwellrec::nn
