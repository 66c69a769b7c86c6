#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pptgnn/tensor.hpp"

namespace pptgnn {

/// Incoming-neighbor lists per destination row (CSR).
struct Adjacency {
  std::vector<uint32_t> offsets{0};  // size num_dst + 1
  std::vector<uint32_t> sources;

  size_t num_dst() const { return offsets.size() - 1; }
  uint32_t degree(size_t dst) const { return offsets[dst + 1] - offsets[dst]; }

  // Edges given as (src, dst); neighbors keep the input order per destination.
  static Adjacency from_edges(std::span<const std::pair<uint32_t, uint32_t>> edges, size_t num_dst);
};

enum class Aggregation : uint8_t { Sum, Mean, Max };

struct Var {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode tape over the handful of operations the model needs. Each op
/// records its output value and, when any input needs a gradient, a closure
/// that pushes the output gradient back to its inputs.
class Tape {
 public:
  explicit Tape(bool track_branches = false) : track_branches_(track_branches) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient after backward(); a zero tensor for nodes that received none.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  void backward(Var root);  // root must be 1 x 1
  uint64_t branch_signature() const { return signature_; }
  size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);  // broadcast a 1 x n row over every row of a
  Var scale(Var a, double factor);
  Var scale_rows(Var a, std::vector<double> factors);
  Var leaky_relu(Var a, double slope = kLeakySlope);
  Var gather_rows(Var a, std::vector<uint32_t> rows);
  // Row v of the result aggregates rows adj.sources[offsets[v]..offsets[v+1])
  // of src; rows without neighbors are zero.
  Var aggregate(Var src, std::shared_ptr<const Adjacency> adj, Aggregation mode);
  // Row i comes from a when take_a[i], else from b.
  Var select_rows(std::vector<uint8_t> take_a, Var a, Var b);
  Var concat_cols(Var a, Var b);
  Var cross_entropy(Var logits, std::vector<int32_t> targets, std::vector<double> class_weights = {});
  Var binary_cross_entropy(Var logits, std::vector<int32_t> targets);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  Var push(Tensor value, bool requires_grad);
  Tensor& grad_ref(uint32_t id);
  void mix(uint64_t bits);

  std::vector<Node> nodes_;
  bool track_branches_;
  uint64_t signature_ = 0xcbf29ce484222325ULL;
};

}  // namespace pptgnn
