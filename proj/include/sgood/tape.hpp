#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sgood/tensor.hpp"

namespace sgood {

using NodeId = int;

// Reverse-mode tape over dense Tensors. Ops append nodes, so creation order
// is a topological order; backward() walks it once in reverse. Every op
// checks shapes and rejects non-finite outputs. A tape is single-threaded;
// independent tapes may run on separate threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeId input(Tensor value);

  // Same shape, or b a 1 x C row added to every row of a.
  NodeId add(NodeId a, NodeId b);
  NodeId matmul(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise, same shape
  NodeId relu(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId scale(NodeId a, double s);
  // Multiplies a by the value of s (a 1x1 node); gradients flow into both.
  NodeId scale_by(NodeId a, NodeId s);
  NodeId transpose(NodeId a);
  NodeId sum_rows(NodeId a);  // R x C -> 1 x C
  NodeId sum_cols(NodeId a);  // R x C -> R x 1
  NodeId sum_all(NodeId a);   // R x C -> 1 x 1
  NodeId concat_cols(std::span<const NodeId> parts);
  NodeId concat_rows(std::span<const NodeId> parts);
  // Rows rescaled to unit Euclidean norm; zero rows are an error.
  NodeId l2_normalize_rows(NodeId a);
  // out[s] = sum of rows v with owner[v] == s; owners in [0, segments).
  NodeId segment_sum(NodeId a, std::vector<int> owner, int segments);
  // out[dst] += a[src] over the given directed edges.
  NodeId neighbor_sum(NodeId a, std::vector<std::pair<int, int>> directed_edges);
  // Mean over rows of -log softmax(logits)[label]; returns a scalar.
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

  // root must be a 1x1 node. Clears previous gradients.
  void backward(NodeId root);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back;  // null for inputs
  };

  NodeId emplace(Tensor value, std::function<void(Tape&)> back);
  Tensor& grad_ref(NodeId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

// Max relative error between tape gradients and central finite differences
// of build(...) over every parameter element. build must be deterministic
// and return a scalar node. Relative error uses max(|a|, |b|, 1e-8).
double grad_check(const std::function<NodeId(Tape&, std::span<const NodeId>)>& build,
                  const std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace sgood
