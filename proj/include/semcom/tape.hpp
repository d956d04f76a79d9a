#pragma once

#include <functional>
#include <unordered_set>

#include "semcom/tensor.hpp"

namespace semcom {

// Reverse-mode tape. Ops append nodes in execution order, which is a
// topological order of the data flow; backward() walks it once in reverse.
class Tape {
 public:
  struct Node {
    const char* op;
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> backward;
  };

  std::size_t record(const char* op, std::vector<std::shared_ptr<TensorData>> inputs,
                     const Tensor& output, std::function<void()> backward) {
    auto out = output.data();
    out->tape = this;
    out->node = nodes_.size();
    out->requires_grad = true;
    nodes_.push_back(Node{op, std::move(inputs), out, std::move(backward)});
    return out->node;
  }

  // Populates grads of every requires_grad tensor reachable from `loss`.
  // Leaf gradients accumulate across calls until cleared by the caller;
  // adjoints of tape-produced intermediates are scratch, reset per call.
  void backward(const Tensor& loss) {
    if (nodes_.empty()) throw std::runtime_error("backward: tape is empty");
    if (loss.numel() != 1)
      throw std::invalid_argument("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    auto ld = loss.data();
    if (ld->tape != this || ld->node == kNoNode)
      throw std::invalid_argument("backward: loss was not produced on this tape");

    std::unordered_set<const TensorData*> needed;
    needed.insert(ld.get());
    for (std::size_t i = ld->node + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!needed.count(n.output.get())) continue;
      n.output->ensure_grad();
      std::fill(n.output->grad.begin(), n.output->grad.end(), 0.0);
      for (auto& in : n.inputs) {
        if (!in->requires_grad) continue;
        needed.insert(in.get());
        if (in->node == kNoNode) in->ensure_grad();  // leaf: allocate, keep accumulating
      }
    }

    ld->grad[0] = 1.0;
    for (std::size_t i = ld->node + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!needed.count(n.output.get())) continue;
      n.backward();
    }
  }

  void clear() {
    for (Node& n : nodes_) {
      n.output->tape = nullptr;
      n.output->node = kNoNode;
    }
    nodes_.clear();
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

// RAII scope making a tape the recording target for ops on this thread.
// No active scope means ops run forward-only.
class TapeScope {
 public:
  explicit TapeScope(Tape& t) : prev_(active_) { active_ = &t; }
  ~TapeScope() { active_ = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

  static Tape* active() { return active_; }

 private:
  Tape* prev_;
  static thread_local Tape* active_;
};

inline thread_local Tape* TapeScope::active_ = nullptr;

}  // namespace semcom
