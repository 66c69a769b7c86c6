#include "pptgnn/autodiff.hpp"

#include <stdexcept>
#include <string>

namespace pptgnn {

Adjacency Adjacency::from_edges(std::span<const std::pair<uint32_t, uint32_t>> edges, size_t num_dst) {
  Adjacency adj;
  adj.offsets.assign(num_dst + 1, 0);
  for (const auto& [src, dst] : edges) {
    if (dst >= num_dst) throw std::out_of_range("Adjacency: destination out of range");
    ++adj.offsets[dst + 1];
  }
  for (size_t i = 0; i < num_dst; ++i) adj.offsets[i + 1] += adj.offsets[i];
  adj.sources.resize(edges.size());
  std::vector<uint32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& [src, dst] : edges) adj.sources[cursor[dst]++] = src;
  return adj;
}

namespace {

void require_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

Var Tape::push(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor(), requires_grad, {}});
  return Var{static_cast<uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) { return push(std::move(value), false); }

Var Tape::parameter(Tensor value) { return push(std::move(value), true); }

Tensor& Tape::grad_ref(uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
    n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.rows() == n.value.rows() && n.grad.cols() == n.value.cols()) return n.grad;
  return Tensor::Zero(n.value.rows(), n.value.cols());
}

void Tape::mix(uint64_t bits) {
  signature_ ^= bits;
  signature_ *= 0x100000001b3ULL;
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  grad_ref(root.id)(0, 0) = 1.0;
  for (uint32_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backward && n.grad.size() != 0) n.backward();
  }
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) {
    throw std::invalid_argument("matmul: inner dims " + std::to_string(A.cols()) + " vs " + std::to_string(B.rows()));
  }
  Tensor out = A * B;
  const bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, b, v] {
      const Tensor& G = nodes_[v.id].grad;
      if (requires_grad(a)) grad_ref(a.id).noalias() += G * value(b).transpose();
      if (requires_grad(b)) grad_ref(b.id).noalias() += value(a).transpose() * G;
    };
  }
  return v;
}

Var Tape::add(Var a, Var b) {
  require_shape(value(a), value(b), "add");
  Tensor out = value(a) + value(b);
  const bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, b, v] {
      const Tensor& G = nodes_[v.id].grad;
      if (requires_grad(a)) grad_ref(a.id) += G;
      if (requires_grad(b)) grad_ref(b.id) += G;
    };
  }
  return v;
}

Var Tape::add_row(Var a, Var row) {
  const Tensor& A = value(a);
  const Tensor& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) throw std::invalid_argument("add_row: bias must be 1 x cols");
  Tensor out = A.rowwise() + R.row(0);
  const bool rg = requires_grad(a) || requires_grad(row);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, row, v] {
      const Tensor& G = nodes_[v.id].grad;
      if (requires_grad(a)) grad_ref(a.id) += G;
      if (requires_grad(row)) grad_ref(row.id) += G.colwise().sum();
    };
  }
  return v;
}

Var Tape::scale(Var a, double factor) {
  Tensor out = value(a) * factor;
  const bool rg = requires_grad(a);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, v, factor] { grad_ref(a.id) += nodes_[v.id].grad * factor; };
  }
  return v;
}

Var Tape::scale_rows(Var a, std::vector<double> factors) {
  const Tensor& A = value(a);
  if (factors.size() != static_cast<size_t>(A.rows())) throw std::invalid_argument("scale_rows: factor count");
  Eigen::Map<const Eigen::VectorXd> f(factors.data(), static_cast<Eigen::Index>(factors.size()));
  Tensor out = f.asDiagonal() * A;
  const bool rg = requires_grad(a);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, v, factors = std::move(factors)] {
      Eigen::Map<const Eigen::VectorXd> f(factors.data(), static_cast<Eigen::Index>(factors.size()));
      grad_ref(a.id) += f.asDiagonal() * nodes_[v.id].grad;
    };
  }
  return v;
}

Var Tape::leaky_relu(Var a, double slope) {
  const Tensor& A = value(a);
  if (track_branches_) {
    for (Eigen::Index i = 0; i < A.size(); ++i) mix(A.data()[i] > 0.0 ? 0x9e37u : 0x7f4au);
  }
  Tensor out = pptgnn::leaky_relu(A, slope);
  const bool rg = requires_grad(a);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, v, slope] {
      grad_ref(a.id).array() += nodes_[v.id].grad.array() * leaky_relu_grad(value(a), slope).array();
    };
  }
  return v;
}

Var Tape::gather_rows(Var a, std::vector<uint32_t> rows) {
  const Tensor& A = value(a);
  Tensor out(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= A.rows()) throw std::out_of_range("gather_rows: row out of range");
    out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
  }
  const bool rg = requires_grad(a);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, v, rows = std::move(rows)] {
      Tensor& GA = grad_ref(a.id);
      const Tensor& G = nodes_[v.id].grad;
      for (size_t i = 0; i < rows.size(); ++i) GA.row(rows[i]) += G.row(static_cast<Eigen::Index>(i));
    };
  }
  return v;
}

Var Tape::aggregate(Var src, std::shared_ptr<const Adjacency> adj, Aggregation mode) {
  const Tensor& S = value(src);
  const auto n_dst = static_cast<Eigen::Index>(adj->num_dst());
  const auto d = S.cols();
  Tensor out = Tensor::Zero(n_dst, d);
  std::vector<uint32_t> argmax;
  if (mode == Aggregation::Max) argmax.assign(static_cast<size_t>(n_dst * d), 0);
  for (Eigen::Index v = 0; v < n_dst; ++v) {
    const uint32_t begin = adj->offsets[static_cast<size_t>(v)];
    const uint32_t end = adj->offsets[static_cast<size_t>(v) + 1];
    if (begin == end) continue;
    if (mode == Aggregation::Max) {
      out.row(v) = S.row(adj->sources[begin]);
      for (Eigen::Index j = 0; j < d; ++j) argmax[static_cast<size_t>(v * d + j)] = adj->sources[begin];
      for (uint32_t k = begin + 1; k < end; ++k) {
        const uint32_t u = adj->sources[k];
        for (Eigen::Index j = 0; j < d; ++j) {
          if (S(u, j) > out(v, j)) {
            out(v, j) = S(u, j);
            argmax[static_cast<size_t>(v * d + j)] = u;
          }
        }
      }
      if (track_branches_) {
        for (Eigen::Index j = 0; j < d; ++j) mix(argmax[static_cast<size_t>(v * d + j)]);
      }
    } else {
      for (uint32_t k = begin; k < end; ++k) out.row(v) += S.row(adj->sources[k]);
      if (mode == Aggregation::Mean) out.row(v) /= static_cast<double>(end - begin);
    }
  }
  const bool rg = requires_grad(src);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, src, v, adj, mode, argmax = std::move(argmax)] {
      Tensor& GS = grad_ref(src.id);
      const Tensor& G = nodes_[v.id].grad;
      const auto d = G.cols();
      for (Eigen::Index row = 0; row < G.rows(); ++row) {
        const uint32_t begin = adj->offsets[static_cast<size_t>(row)];
        const uint32_t end = adj->offsets[static_cast<size_t>(row) + 1];
        if (begin == end) continue;
        if (mode == Aggregation::Max) {
          for (Eigen::Index j = 0; j < d; ++j) GS(argmax[static_cast<size_t>(row * d + j)], j) += G(row, j);
        } else {
          const double w = mode == Aggregation::Mean ? 1.0 / static_cast<double>(end - begin) : 1.0;
          for (uint32_t k = begin; k < end; ++k) GS.row(adj->sources[k]) += w * G.row(row);
        }
      }
    };
  }
  return v;
}

Var Tape::select_rows(std::vector<uint8_t> take_a, Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_shape(A, B, "select_rows");
  if (take_a.size() != static_cast<size_t>(A.rows())) throw std::invalid_argument("select_rows: mask size");
  Tensor out = B;
  for (size_t i = 0; i < take_a.size(); ++i) {
    if (take_a[i]) out.row(static_cast<Eigen::Index>(i)) = A.row(static_cast<Eigen::Index>(i));
  }
  const bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, b, v, take_a = std::move(take_a)] {
      const Tensor& G = nodes_[v.id].grad;
      for (size_t i = 0; i < take_a.size(); ++i) {
        const Var target = take_a[i] ? a : b;
        if (requires_grad(target)) grad_ref(target.id).row(static_cast<Eigen::Index>(i)) += G.row(static_cast<Eigen::Index>(i));
      }
    };
  }
  return v;
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rows() != B.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  Tensor out(A.rows(), A.cols() + B.cols());
  out.leftCols(A.cols()) = A;
  out.rightCols(B.cols()) = B;
  const bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, a, b, v] {
      const Tensor& G = nodes_[v.id].grad;
      const auto ca = value(a).cols();
      if (requires_grad(a)) grad_ref(a.id) += G.leftCols(ca);
      if (requires_grad(b)) grad_ref(b.id) += G.rightCols(G.cols() - ca);
    };
  }
  return v;
}

Var Tape::cross_entropy(Var logits, std::vector<int32_t> targets, std::vector<double> class_weights) {
  LossAndGrad lg = pptgnn::cross_entropy(value(logits), targets, class_weights);
  Tensor out(1, 1);
  out(0, 0) = lg.loss;
  const bool rg = requires_grad(logits);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, logits, v, g = std::move(lg.grad)] {
      grad_ref(logits.id) += nodes_[v.id].grad(0, 0) * g;
    };
  }
  return v;
}

Var Tape::binary_cross_entropy(Var logits, std::vector<int32_t> targets) {
  LossAndGrad lg = pptgnn::binary_cross_entropy(value(logits), targets);
  Tensor out(1, 1);
  out(0, 0) = lg.loss;
  const bool rg = requires_grad(logits);
  Var v = push(std::move(out), rg);
  if (rg) {
    nodes_[v.id].backward = [this, logits, v, g = std::move(lg.grad)] {
      grad_ref(logits.id) += nodes_[v.id].grad(0, 0) * g;
    };
  }
  return v;
}

}  // namespace pptgnn
