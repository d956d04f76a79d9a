#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "semcom/tensor.hpp"

namespace semcom {

// Ordered, uniquely named table of trainable tensors.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw std::invalid_argument("parameter set: duplicate name " + name);
    t.set_requires_grad(true);
    index_[name] = items_.size();
    items_.emplace_back(name, std::move(t));
    return items_.back().second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("parameter set: unknown name " + name);
    return items_[it->second].second;
  }
  const Tensor& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("parameter set: unknown name " + name);
    return items_[it->second].second;
  }

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::vector<std::pair<std::string, Tensor>>& items() { return items_; }

  std::size_t size() const { return items_.size(); }

  std::size_t total_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : items_) t.zero_grad();
  }

  // Deep copy with fresh storage (e.g. for target networks).
  ParameterSet clone() const {
    ParameterSet c;
    for (const auto& [name, t] : items_) {
      Tensor copy = Tensor::from(t.shape(), t.values());
      copy.set_requires_grad(t.requires_grad());
      c.index_[name] = c.items_.size();
      c.items_.emplace_back(name, std::move(copy));
    }
    return c;
  }

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {
inline void check_finite_grad(const std::string& name, const std::vector<double>& g) {
  for (double v : g)
    if (!std::isfinite(v))
      throw std::runtime_error("optimizer: non-finite gradient in parameter " + name);
}
}  // namespace detail

// Plain gradient descent; updates in place, clears gradients.
class SgdOptimizer {
 public:
  void step(ParameterSet& params, double learning_rate) {
    for (auto& [name, t] : params.items()) {
      if (!t.requires_grad() || !t.has_grad()) continue;
      detail::check_finite_grad(name, t.grad());
      auto& v = t.values();
      auto& g = t.grad();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
      t.zero_grad();
    }
  }
};

// Adam with bias-corrected moment estimates.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(ParameterSet& params, double learning_rate) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& [name, t] : params.items()) {
      if (!t.requires_grad() || !t.has_grad()) continue;
      detail::check_finite_grad(name, t.grad());
      auto& m = m_[name];
      auto& v = v_[name];
      if (m.size() != t.numel()) m.assign(t.numel(), 0.0);
      if (v.size() != t.numel()) v.assign(t.numel(), 0.0);
      auto& val = t.values();
      auto& g = t.grad();
      for (std::size_t i = 0; i < val.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        val[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps_);
      }
      t.zero_grad();
    }
  }

  void reset() {
    m_.clear();
    v_.clear();
    t_ = 0;
  }

 private:
  double beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace semcom
