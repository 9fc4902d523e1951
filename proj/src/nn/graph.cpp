#include "dwellrec/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dwellrec/errors.hpp"

namespace dwellrec::nn {

namespace {

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

// out += a * b
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* br = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// out += a * b^T
void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out(i, j) += s;
    }
  }
}

// out += a^T * b
void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* br = b.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      double* o = out.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, nullptr});
  return Var{nodes_.size() - 1};
}

Var Graph::param(Param& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{it->second};
  nodes_.push_back(Node{p.value, Tensor{}, nullptr, &p});
  param_nodes_[&p] = nodes_.size() - 1;
  return Var{nodes_.size() - 1};
}

Var Graph::push(Tensor value, Backward backward) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backward), nullptr});
  return Var{nodes_.size() - 1};
}

void Graph::backward(Var root) {
  const Tensor& rv = nodes_.at(root.id).value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ShapeError("backward() needs a 1x1 root, got " + rv.shape_str());
  }
  for (auto& n : nodes_) n.grad = Tensor(n.value.rows(), n.value.cols());
  nodes_[root.id].grad[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    if (!nodes_[i].backward) continue;
    // Closures only write into gradients of earlier nodes.
    const Tensor& og = nodes_[i].grad;
    nodes_[i].backward(*this, og);
  }
}

std::vector<std::pair<Param*, const Tensor*>> Graph::param_grads() const {
  std::vector<std::pair<Param*, const Tensor*>> out;
  for (const auto& n : nodes_) {
    if (n.param) out.emplace_back(n.param, &n.grad);
  }
  return out;
}

void Graph::accumulate_param_grads() const {
  for (const auto& n : nodes_) {
    if (!n.param || n.grad.size() == 0) continue;
    Param& p = *n.param;
    for (std::size_t r = p.frozen_rows; r < p.grad.rows(); ++r) {
      auto dst = p.grad.row(r);
      auto src = n.grad.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
}

Var matmul(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  Tensor out(A.rows(), B.cols());
  gemm_acc(A, B, out);
  return g.push(std::move(out), [a, b](Graph& gr, const Tensor& go) {
    // dA = go * B^T ; dB = A^T * go
    gemm_nt_acc(go, gr.value(b), gr.grad_mut(a));
    gemm_tn_acc(gr.value(a), go, gr.grad_mut(b));
  });
}

Var matmul_nt(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.cols() != B.cols()) shape_fail("matmul_nt", A, B);
  Tensor out(A.rows(), B.rows());
  gemm_nt_acc(A, B, out);
  return g.push(std::move(out), [a, b](Graph& gr, const Tensor& go) {
    // out = A B^T ; dA = go * B ; dB = go^T * A
    gemm_acc(go, gr.value(b), gr.grad_mut(a));
    gemm_tn_acc(go, gr.value(a), gr.grad_mut(b));
  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (!A.same_shape(B)) shape_fail("add", A, B);
  Tensor out = A;
  add_into(out, B);
  return g.push(std::move(out), [a, b](Graph& gr, const Tensor& go) {
    add_into(gr.grad_mut(a), go);
    add_into(gr.grad_mut(b), go);
  });
}

Var add_row(Graph& g, Var a, Var bias) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(bias);
  if (B.rows() != 1 || B.cols() != A.cols()) shape_fail("add_row", A, B);
  Tensor out = A;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += B[c];
  }
  return g.push(std::move(out), [a, bias](Graph& gr, const Tensor& go) {
    add_into(gr.grad_mut(a), go);
    Tensor& gb = gr.grad_mut(bias);
    for (std::size_t r = 0; r < go.rows(); ++r) {
      auto row = go.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
    }
  });
}

Var scale(Graph& g, Var a, double s) {
  Tensor out = g.value(a);
  for (auto& v : out.data()) v *= s;
  return g.push(std::move(out), [a, s](Graph& gr, const Tensor& go) {
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += s * go[i];
  });
}

Var scale_by(Graph& g, Var a, Var s) {
  const Tensor& S = g.value(s);
  if (S.size() != 1) shape_fail("scale_by", g.value(a), S);
  const double sv = S[0];
  Tensor out = g.value(a);
  for (auto& v : out.data()) v *= sv;
  return g.push(std::move(out), [a, s](Graph& gr, const Tensor& go) {
    const Tensor& A = gr.value(a);
    const double sv = gr.value(s)[0];
    Tensor& ga = gr.grad_mut(a);
    double ds = 0.0;
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga[i] += sv * go[i];
      ds += A[i] * go[i];
    }
    gr.grad_mut(s)[0] += ds;
  });
}

Var tanh(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (auto& v : out.data()) v = std::tanh(v);
  const Var res{g.size()};
  return g.push(std::move(out), [a, res](Graph& gr, const Tensor& go) {
    const Tensor& y = gr.value(res);
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * (1.0 - y[i] * y[i]);
  });
}

Var transpose(Graph& g, Var a) {
  const Tensor& A = g.value(a);
  Tensor out(A.cols(), A.rows());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out(c, r) = A(r, c);
  return g.push(std::move(out), [a](Graph& gr, const Tensor& go) {
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += go(c, r);
  });
}

Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = g.value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (g.value(p).rows() != rows) shape_fail("concat_cols", g.value(parts[0]), g.value(p));
    cols += g.value(p).cols();
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& P = g.value(p);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(P.row(r).begin(), P.row(r).end(), out.row(r).begin() + off);
    off += P.cols();
  }
  return g.push(std::move(out), [parts](Graph& gr, const Tensor& go) {
    std::size_t off = 0;
    for (Var p : parts) {
      Tensor& gp = gr.grad_mut(p);
      for (std::size_t r = 0; r < gp.rows(); ++r) {
        auto dst = gp.row(r);
        auto src = go.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[off + c];
      }
      off += gp.cols();
    }
  });
}

Var slice_cols(Graph& g, Var a, std::size_t begin, std::size_t count) {
  const Tensor& A = g.value(a);
  if (begin + count > A.cols()) {
    throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " + A.shape_str());
  }
  Tensor out(A.rows(), count);
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = A(r, begin + c);
  return g.push(std::move(out), [a, begin, count](Graph& gr, const Tensor& go) {
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t r = 0; r < go.rows(); ++r)
      for (std::size_t c = 0; c < count; ++c) ga(r, begin + c) += go(r, c);
  });
}

Var pick(Graph& g, Var a, std::size_t r, std::size_t c) {
  const Tensor& A = g.value(a);
  if (r >= A.rows() || c >= A.cols()) {
    throw ShapeError("pick: index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") out of range for " + A.shape_str());
  }
  Tensor out(1, 1, A(r, c));
  return g.push(std::move(out), [a, r, c](Graph& gr, const Tensor& go) {
    gr.grad_mut(a)(r, c) += go[0];
  });
}

Var sum_all(Graph& g, Var a) {
  double s = 0.0;
  for (double v : g.value(a).data()) s += v;
  return g.push(Tensor(1, 1, s), [a](Graph& gr, const Tensor& go) {
    for (auto& v : gr.grad_mut(a).data()) v += go[0];
  });
}

Var dot(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (!A.same_shape(B)) shape_fail("dot", A, B);
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
  return g.push(Tensor(1, 1, s), [a, b](Graph& gr, const Tensor& go) {
    const Tensor& A = gr.value(a);
    const Tensor& B = gr.value(b);
    Tensor& ga = gr.grad_mut(a);
    Tensor& gb = gr.grad_mut(b);
    for (std::size_t i = 0; i < A.size(); ++i) {
      ga[i] += go[0] * B[i];
      gb[i] += go[0] * A[i];
    }
  });
}

Var softmax_rows(Graph& g, Var a, const Mask& mask, bool* degenerate) {
  const Tensor& A = g.value(a);
  if (!mask.empty() && mask.size() != A.cols()) {
    throw ShapeError("softmax_rows: mask of length " + std::to_string(mask.size()) +
                     " for input " + A.shape_str());
  }
  auto valid = [&mask](std::size_t c) { return mask.empty() || mask[c] != 0; };
  Tensor out(A.rows(), A.cols());
  bool any_degenerate = false;
  for (std::size_t r = 0; r < A.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < A.cols(); ++c)
      if (valid(c)) mx = std::max(mx, A(r, c));
    if (!std::isfinite(mx)) {
      any_degenerate = true;
      continue;
    }
    double z = 0.0;
    for (std::size_t c = 0; c < A.cols(); ++c) {
      if (!valid(c)) continue;
      out(r, c) = std::exp(A(r, c) - mx);
      z += out(r, c);
    }
    for (std::size_t c = 0; c < A.cols(); ++c) out(r, c) /= z;
  }
  if (degenerate) *degenerate = any_degenerate;
  const Var y{g.size()};
  return g.push(std::move(out), [a, y](Graph& gr, const Tensor& go) {
    const Tensor& Y = gr.value(y);
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t r = 0; r < Y.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < Y.cols(); ++c) s += go(r, c) * Y(r, c);
      for (std::size_t c = 0; c < Y.cols(); ++c) ga(r, c) += Y(r, c) * (go(r, c) - s);
    }
  });
}

Var dropout(Graph& g, Var a, double p) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  if (!g.training() || p == 0.0) return a;
  const Tensor& A = g.value(a);
  Tensor keep(A.rows(), A.cols());
  std::bernoulli_distribution coin(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  for (auto& k : keep.data()) k = coin(g.rng()) ? s : 0.0;
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= keep[i];
  return g.push(std::move(out), [a, keep = std::move(keep)](Graph& gr, const Tensor& go) {
    Tensor& ga = gr.grad_mut(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * keep[i];
  });
}

Var embed_lookup(Graph& g, Var table, const std::vector<std::size_t>& ids) {
  const Tensor& T = g.value(table);
  Tensor out(ids.size(), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= T.rows()) {
      throw ShapeError("embed_lookup: id " + std::to_string(ids[i]) + " outside table " +
                       T.shape_str());
    }
    std::copy(T.row(ids[i]).begin(), T.row(ids[i]).end(), out.row(i).begin());
  }
  return g.push(std::move(out), [table, ids](Graph& gr, const Tensor& go) {
    Tensor& gt = gr.grad_mut(table);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto dst = gt.row(ids[i]);
      auto src = go.row(i);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  });
}

Var softmax_xent(Graph& g, Var logits, std::size_t target) {
  const Tensor& L = g.value(logits);
  if (L.rows() != 1 || target >= L.cols()) {
    throw ShapeError("softmax_xent: target " + std::to_string(target) + " for logits " +
                     L.shape_str());
  }
  if (!L.all_finite()) throw NumericError("softmax_xent: non-finite score");
  double mx = L[0];
  for (double v : L.data()) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : L.data()) z += std::exp(v - mx);
  const double loss = -(L[target] - mx - std::log(z));
  return g.push(Tensor(1, 1, loss), [logits, target, mx, z](Graph& gr, const Tensor& go) {
    const Tensor& L = gr.value(logits);
    Tensor& gl = gr.grad_mut(logits);
    for (std::size_t c = 0; c < L.cols(); ++c) {
      const double p = std::exp(L[c] - mx) / z;
      gl[c] += go[0] * (p - (c == target ? 1.0 : 0.0));
    }
  });
}

}  // namespace dwellrec::nn
