// Reverse-mode tape over 2-D tensors.
//
// A Graph records each operation's output together with a closure that
// pushes the output gradient back onto its inputs. Nodes are appended in
// evaluation order, so a single reverse sweep visits them in a valid
// topological order. Graphs are built per sample and thrown away.
//
//   Graph g(/*training=*/true, seed);
//   Var x = g.constant(input);
//   Var y = tanh(g, linear(g, x, g.param(W), g.param(b)));
//   g.backward(sum_all(g, y));
//   g.accumulate_param_grads();

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwellrec/nn/param.hpp"
#include "dwellrec/nn/tensor.hpp"

namespace dwellrec::nn {

struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

// 1 marks a valid position, 0 a padded one.
using Mask = std::vector<std::uint8_t>;

class Graph {
 public:
  using Backward = std::function<void(Graph&, const Tensor& out_grad)>;

  Graph() = default;
  Graph(bool training, std::uint64_t dropout_seed)
      : training_(training), rng_(dropout_seed) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter. Repeated calls for the same parameter return
  // the same node, so shared weights accumulate a single gradient.
  Var param(Param& p);

  Var push(Tensor value, Backward backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  // Valid after backward().
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  Tensor& grad_mut(Var v) { return nodes_[v.id].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and sweeps the tape backwards.
  void backward(Var root);

  // Parameter gradients from the last backward(), in first-use order.
  std::vector<std::pair<Param*, const Tensor*>> param_grads() const;
  // Adds the last backward()'s gradients into Param::grad, skipping frozen rows.
  void accumulate_param_grads() const;

  bool training() const { return training_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    Param* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Param*, std::size_t> param_nodes_;
  bool training_ = false;
  std::mt19937_64 rng_{0};
};

// ---- primitive ops -------------------------------------------------------
// Shape mismatches throw ShapeError naming both shapes.

Var matmul(Graph& g, Var a, Var b);     // (n x k)(k x m)
Var matmul_nt(Graph& g, Var a, Var b);  // a * b^T
Var add(Graph& g, Var a, Var b);
Var add_row(Graph& g, Var a, Var bias);  // bias is 1 x m, broadcast over rows
Var scale(Graph& g, Var a, double s);
Var scale_by(Graph& g, Var a, Var s);  // s is 1 x 1
Var tanh(Graph& g, Var a);
Var transpose(Graph& g, Var a);
Var concat_cols(Graph& g, const std::vector<Var>& parts);
Var slice_cols(Graph& g, Var a, std::size_t begin, std::size_t count);
Var pick(Graph& g, Var a, std::size_t r, std::size_t c);  // -> 1 x 1
Var sum_all(Graph& g, Var a);                              // -> 1 x 1
Var dot(Graph& g, Var a, Var b);                           // same shape -> 1 x 1

// Row-wise softmax. When `mask` is non-empty it has one entry per column;
// masked columns get exactly zero weight. A row with no valid column is
// returned as zeros and `degenerate` (if given) is set.
Var softmax_rows(Graph& g, Var a, const Mask& mask = {}, bool* degenerate = nullptr);

// Inverted dropout: zeroes entries with probability p and scales survivors
// by 1/(1-p). Identity when !g.training() or p == 0.
Var dropout(Graph& g, Var a, double p);

// Gathers rows of `table` by index.
Var embed_lookup(Graph& g, Var table, const std::vector<std::size_t>& ids);

// -log softmax(logits)[target] for a 1 x n row, max-subtracted.
Var softmax_xent(Graph& g, Var logits, std::size_t target);

}  // namespace dwellrec::nn
