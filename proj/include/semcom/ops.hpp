#pragma once

#include <algorithm>
#include <cmath>

#include "semcom/tape.hpp"

namespace semcom {

// Elementwise binaries broadcast a scalar, a row vector [n] / [1,n], or a
// column [m,1] against a full-shape operand. Anything else is a shape error.
namespace detail {

enum class Bc { Full, Scalar, Row, Col };

struct BinaryPlan {
  Shape out_shape;
  std::size_t rows = 1, cols = 1;
  Bc a, b;
};

inline bool classify(const Shape& s, std::size_t r, std::size_t c, Bc& out) {
  const std::size_t n = shape_numel(s);
  if (n == 1) {
    out = Bc::Scalar;
    return true;
  }
  if (s.size() == 1) {
    if (s[0] == c && r == 1) { out = Bc::Full; return true; }
    if (s[0] == c) { out = Bc::Row; return true; }
    return false;
  }
  if (s.size() == 2) {
    if (s[0] == r && s[1] == c) { out = Bc::Full; return true; }
    if (s[0] == 1 && s[1] == c) { out = Bc::Row; return true; }
    if (s[0] == r && s[1] == 1) { out = Bc::Col; return true; }
  }
  return false;
}

inline BinaryPlan plan_binary(const char* op, const Tensor& a, const Tensor& b) {
  BinaryPlan p;
  const Tensor& big = a.numel() >= b.numel() ? a : b;
  p.out_shape = big.shape();
  p.rows = big.rows();
  p.cols = big.cols();
  if (!classify(a.shape(), p.rows, p.cols, p.a) || !classify(b.shape(), p.rows, p.cols, p.b))
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  return p;
}

inline std::size_t map_index(Bc k, std::size_t i, std::size_t cols) {
  switch (k) {
    case Bc::Full: return i;
    case Bc::Scalar: return 0;
    case Bc::Row: return i % cols;
    case Bc::Col: return i / cols;
  }
  return 0;
}

template <class F, class DA, class DB>
Tensor binary_op(const char* op, const Tensor& a, const Tensor& b, F f, DA dfda, DB dfdb) {
  BinaryPlan p = plan_binary(op, a, b);
  Tensor out = Tensor::zeros(p.out_shape);
  auto& ov = out.values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i)
    ov[i] = f(av[map_index(p.a, i, p.cols)], bv[map_index(p.b, i, p.cols)]);

  Tape* t = TapeScope::active();
  if (t && (a.requires_grad() || b.requires_grad())) {
    auto ad = a.data(), bd = b.data(), od = out.data();
    t->record(op, {ad, bd}, out, [=]() {
      const std::size_t cols = p.cols;
      for (std::size_t i = 0; i < od->value.size(); ++i) {
        const std::size_t ia = map_index(p.a, i, cols), ib = map_index(p.b, i, cols);
        const double g = od->grad[i];
        if (ad->requires_grad) ad->grad[ia] += dfda(ad->value[ia], bd->value[ib]) * g;
        if (bd->requires_grad) bd->grad[ib] += dfdb(ad->value[ia], bd->value[ib]) * g;
      }
    });
  }
  return out;
}

template <class F, class DF>
Tensor unary_op(const char* op, const Tensor& a, F f, DF dfdx) {
  Tensor out = Tensor::zeros(a.shape());
  auto& ov = out.values();
  const auto& av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(av[i]);

  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record(op, {ad}, out, [=]() {
      for (std::size_t i = 0; i < od->value.size(); ++i)
        ad->grad[i] += dfdx(ad->value[i], od->value[i]) * od->grad[i];
    });
  }
  return out;
}

inline void require_2d(const char* op, const Tensor& t) {
  if (t.shape().size() != 2)
    throw std::invalid_argument(std::string(op) + ": expected 2-D tensor, got " + shape_str(t.shape()));
}

// C (+)= A(m,k) * B(k,n)
inline void mm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const double av = a[i * k + l];
      if (av == 0.0) continue;
      const double* brow = b + l * n;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

inline Tensor tanh(const Tensor& a) {
  return detail::unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

inline Tensor relu(const Tensor& a) {
  return detail::unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sin(const Tensor& a) {
  return detail::unary_op(
      "sin", a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

inline Tensor cos(const Tensor& a) {
  return detail::unary_op(
      "cos", a, [](double x) { return std::cos(x); },
      [](double x, double) { return -std::sin(x); });
}

inline Tensor square(const Tensor& a) {
  return detail::unary_op(
      "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

inline Tensor sqrt(const Tensor& a) {
  for (double v : a.values())
    if (v < 0.0) throw std::invalid_argument("sqrt: negative input " + std::to_string(v));
  return detail::unary_op(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

inline Tensor reciprocal(const Tensor& a) {
  for (double v : a.values())
    if (v == 0.0) throw std::invalid_argument("reciprocal: division by zero");
  return detail::unary_op(
      "reciprocal", a, [](double x) { return 1.0 / x; },
      [](double, double y) { return -y * y; });
}

// out = c * a, constant c
inline Tensor scale(const Tensor& a, double c) {
  return detail::unary_op(
      "scale", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

inline Tensor add_const(const Tensor& a, double c) {
  return detail::unary_op(
      "add_const", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_2d("matmul", a);
  detail::require_2d("matmul", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  Tensor out = Tensor::zeros({m, n});
  detail::mm_nn(a.values().data(), b.values().data(), out.values().data(), m, k, n);

  Tape* t = TapeScope::active();
  if (t && (a.requires_grad() || b.requires_grad())) {
    auto ad = a.data(), bd = b.data(), od = out.data();
    t->record("matmul", {ad, bd}, out, [=]() {
      const double* gc = od->grad.data();
      if (ad->requires_grad) {  // dA += dC * B^T
        double* ga = ad->grad.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            double acc = 0.0;
            const double* gcr = gc + i * n;
            const double* br = bd->value.data() + l * n;
            for (std::size_t j = 0; j < n; ++j) acc += gcr[j] * br[j];
            ga[i * k + l] += acc;
          }
      }
      if (bd->requires_grad) {  // dB += A^T * dC
        double* gb = bd->grad.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            const double av = ad->value[i * k + l];
            if (av == 0.0) continue;
            const double* gcr = gc + i * n;
            double* gbr = gb + l * n;
            for (std::size_t j = 0; j < n; ++j) gbr[j] += av * gcr[j];
          }
      }
    });
  }
  return out;
}

// y = x*W + b with x (m,in), W (in,out), b [out]
inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  detail::require_2d("affine", x);
  detail::require_2d("affine", w);
  const std::size_t m = x.shape()[0], in = x.shape()[1], out_dim = w.shape()[1];
  if (w.shape()[0] != in || b.numel() != out_dim)
    throw std::invalid_argument("affine: incompatible shapes x" + shape_str(x.shape()) + " W" +
                                shape_str(w.shape()) + " b" + shape_str(b.shape()));
  Tensor out = Tensor::zeros({m, out_dim});
  auto& ov = out.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < out_dim; ++j) ov[i * out_dim + j] = b.values()[j];
  detail::mm_nn(x.values().data(), w.values().data(), ov.data(), m, in, out_dim);

  Tape* t = TapeScope::active();
  if (t && (x.requires_grad() || w.requires_grad() || b.requires_grad())) {
    auto xd = x.data(), wd = w.data(), bd = b.data(), od = out.data();
    t->record("affine", {xd, wd, bd}, out, [=]() {
      const double* gy = od->grad.data();
      if (xd->requires_grad) {
        double* gx = xd->grad.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < in; ++l) {
            double acc = 0.0;
            const double* gyr = gy + i * out_dim;
            const double* wr = wd->value.data() + l * out_dim;
            for (std::size_t j = 0; j < out_dim; ++j) acc += gyr[j] * wr[j];
            gx[i * in + l] += acc;
          }
      }
      if (wd->requires_grad) {
        double* gw = wd->grad.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < in; ++l) {
            const double xv = xd->value[i * in + l];
            if (xv == 0.0) continue;
            const double* gyr = gy + i * out_dim;
            double* gwr = gw + l * out_dim;
            for (std::size_t j = 0; j < out_dim; ++j) gwr[j] += xv * gyr[j];
          }
      }
      if (bd->requires_grad) {
        double* gb = bd->grad.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < out_dim; ++j) gb[j] += gy[i * out_dim + j];
      }
    });
  }
  return out;
}

inline Tensor sum(const Tensor& a) {
  Tensor out = Tensor::scalar(0.0);
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  out.values()[0] = acc;

  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record("sum", {ad}, out, [=]() {
      const double g = od->grad[0];
      for (auto& gi : ad->grad) gi += g;
    });
  }
  return out;
}

inline Tensor mean(const Tensor& a) {
  Tensor s = sum(a);
  return scale(s, 1.0 / static_cast<double>(a.numel()));
}

// (m,n) -> (m,1) mean over the last axis; 1-D -> [1]
inline Tensor mean_lastaxis(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros(a.shape().size() == 2 ? Shape{m, 1} : Shape{1});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a.values()[i * n + j];
    out.values()[i] = acc / static_cast<double>(n);
  }

  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record("mean_lastaxis", {ad}, out, [=]() {
      for (std::size_t i = 0; i < m; ++i) {
        const double g = od->grad[i] / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) ad->grad[i * n + j] += g;
      }
    });
  }
  return out;
}

// Row-wise softmax over the last axis.
inline Tensor softmax(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a.values().data() + i * n;
    double* y = out.values().data() + i * n;
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }

  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record("softmax", {ad}, out, [=]() {
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = od->value.data() + i * n;
        const double* gy = od->grad.data() + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += y[j] * gy[j];
        for (std::size_t j = 0; j < n; ++j) ad->grad[i * n + j] += y[j] * (gy[j] - dot);
      }
    });
  }
  return out;
}

// Concatenate along the last axis; both operands need equal row counts.
inline Tensor concat(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), na = a.cols(), nb = b.cols();
  if (b.rows() != m)
    throw std::invalid_argument("concat: incompatible shapes " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  Shape os = a.shape().size() == 2 || b.shape().size() == 2 ? Shape{m, na + nb} : Shape{na + nb};
  Tensor out = Tensor::zeros(os);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(a.values().data() + i * na, na, out.values().data() + i * (na + nb));
    std::copy_n(b.values().data() + i * nb, nb, out.values().data() + i * (na + nb) + na);
  }

  Tape* t = TapeScope::active();
  if (t && (a.requires_grad() || b.requires_grad())) {
    auto ad = a.data(), bd = b.data(), od = out.data();
    t->record("concat", {ad, bd}, out, [=]() {
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = od->grad.data() + i * (na + nb);
        if (ad->requires_grad)
          for (std::size_t j = 0; j < na; ++j) ad->grad[i * na + j] += g[j];
        if (bd->requires_grad)
          for (std::size_t j = 0; j < nb; ++j) bd->grad[i * nb + j] += g[na + j];
      }
    });
  }
  return out;
}

// Slice [start, start+len) of the last axis.
inline Tensor slice(const Tensor& a, std::size_t start, std::size_t len) {
  const std::size_t m = a.rows(), n = a.cols();
  if (start + len > n)
    throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                std::to_string(start + len) + ") exceeds " + shape_str(a.shape()));
  Tensor out = Tensor::zeros(a.shape().size() == 2 ? Shape{m, len} : Shape{len});
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(a.values().data() + i * n + start, len, out.values().data() + i * len);

  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record("slice", {ad}, out, [=]() {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < len; ++j) ad->grad[i * n + start + j] += od->grad[i * len + j];
    });
  }
  return out;
}

// [a0,b0,a1,b1,...] along the last axis; operands must have equal shapes.
inline Tensor interleave2(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("interleave2: incompatible shapes " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros(a.shape().size() == 2 ? Shape{m, 2 * n} : Shape{2 * n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out.values()[i * 2 * n + 2 * j] = a.values()[i * n + j];
      out.values()[i * 2 * n + 2 * j + 1] = b.values()[i * n + j];
    }

  Tape* t = TapeScope::active();
  if (t && (a.requires_grad() || b.requires_grad())) {
    auto ad = a.data(), bd = b.data(), od = out.data();
    t->record("interleave2", {ad, bd}, out, [=]() {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (ad->requires_grad) ad->grad[i * n + j] += od->grad[i * 2 * n + 2 * j];
          if (bd->requires_grad) bd->grad[i * n + j] += od->grad[i * 2 * n + 2 * j + 1];
        }
    });
  }
  return out;
}

// Same data, new shape.
inline Tensor reshape(const Tensor& a, Shape s) {
  if (shape_numel(s) != a.numel())
    throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                shape_str(s));
  Tensor out = Tensor::from(std::move(s), a.values());
  Tape* t = TapeScope::active();
  if (t && a.requires_grad()) {
    auto ad = a.data(), od = out.data();
    t->record("reshape", {ad}, out, [=]() {
      for (std::size_t i = 0; i < ad->grad.size(); ++i) ad->grad[i] += od->grad[i];
    });
  }
  return out;
}

}  // namespace semcom
