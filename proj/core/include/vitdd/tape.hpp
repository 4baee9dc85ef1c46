#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "vitdd/tensor.hpp"

namespace vitdd {

/// Records every operation in construction order and replays gradient rules
/// in exact reverse order on backward(). Construction order is topological
/// by definition, since an op's inputs must already exist.
///
/// A non-recording tape evaluates forward math only; intermediate results are
/// freed as their handles go out of scope. Tapes and the tensors they touch
/// are single-writer; frozen values may be read concurrently.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  // ---- differentiable operations -------------------------------------
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double factor);
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);
  Tensor reshape(const Tensor& a, Shape shape);
  Tensor concat(std::span<const Tensor> parts, std::size_t axis);
  Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
  Tensor softmax(const Tensor& a, std::size_t axis);
  Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-6);
  Tensor gelu(const Tensor& a);
  Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
  Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);
  Tensor sum(const Tensor& a);
  /// Attention-weighted value aggregation: out[q][d] = sum_k attn[q][k] * v[k][d],
  /// accumulated with ExactSum so the result is independent of key order.
  Tensor attention_values(const Tensor& attn, const Tensor& v);

  // ---- gradient propagation ------------------------------------------
  /// Seeds d(loss)/d(loss) = 1 and walks the tape backwards. Gradients of
  /// node outputs are reset per call; leaf gradients accumulate across calls
  /// until zeroed. The loss must be a scalar produced on this tape.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  std::string_view op_name(std::size_t i) const { return nodes_[i].op; }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    const char* op;
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void()> backprop;  // reads output grad, accumulates into inputs
  };

  void record(const char* op, std::vector<Tensor> inputs, Tensor output,
              std::function<void()> backprop);

  std::vector<Node> nodes_;
  bool recording_;
};

}  // namespace vitdd
