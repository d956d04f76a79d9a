#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcom {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

class Tape;

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first needed; same length as value afterwards
  bool requires_grad = false;
  Tape* tape = nullptr;      // tape that produced this tensor, if any
  std::size_t node = kNoNode;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Cheap shared handle to a dense real tensor. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) { return filled(std::move(shape), 0.0); }

  static Tensor filled(Shape shape, double v) {
    Tensor t;
    t.d_ = std::make_shared<TensorData>();
    t.d_->value.assign(shape_numel(shape), v);
    t.d_->shape = std::move(shape);
    return t;
  }

  static Tensor from(Shape shape, std::vector<double> values) {
    if (shape_numel(shape) != values.size())
      throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match " +
                                  std::to_string(values.size()) + " values");
    Tensor t;
    t.d_ = std::make_shared<TensorData>();
    t.d_->shape = std::move(shape);
    t.d_->value = std::move(values);
    return t;
  }

  static Tensor scalar(double v) { return from({1}, {v}); }

  bool defined() const { return static_cast<bool>(d_); }
  const Shape& shape() const { return d_->shape; }
  std::size_t numel() const { return d_->value.size(); }
  // 1-D tensors are treated as row vectors where a 2-D view is needed.
  std::size_t rows() const { return d_->shape.size() >= 2 ? d_->shape[0] : 1; }
  std::size_t cols() const { return d_->shape.size() >= 2 ? d_->shape[1] : d_->shape[0]; }

  std::vector<double>& values() { return d_->value; }
  const std::vector<double>& values() const { return d_->value; }
  double item() const {
    if (numel() != 1) throw std::invalid_argument("item: tensor is not scalar, shape " + shape_str(shape()));
    return d_->value[0];
  }

  Tensor& set_requires_grad(bool b = true) {
    d_->requires_grad = b;
    return *this;
  }
  bool requires_grad() const { return d_->requires_grad; }

  std::vector<double>& grad() {
    d_->ensure_grad();
    return d_->grad;
  }
  const std::vector<double>& grad() const { return d_->grad; }
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad() {
    if (!d_->grad.empty()) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
  }

  std::shared_ptr<TensorData> data() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

}  // namespace semcom
