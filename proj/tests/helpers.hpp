#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "semcom/ops.hpp"
#include "semcom/rng.hpp"

namespace testutil {

inline double rel_err(double ad, double fd) {
  const double denom = std::max(std::fabs(ad), std::fabs(fd));
  if (denom < 1e-8) return 0.0;  // absolute floor
  return std::fabs(ad - fd) / denom;
}

// Central finite-difference check of reverse-mode gradients. `build_loss`
// must rebuild the graph from the given leaves on every call. Returns the
// worst relative error over all checked coordinates.
inline double fd_max_rel_err(const std::function<semcom::Tensor()>& build_loss,
                             const std::vector<semcom::Tensor>& leaves, double h = 1e-5,
                             int max_coords_per_leaf = -1, semcom::Rng* pick_rng = nullptr) {
  using namespace semcom;
  for (const Tensor& leaf : leaves) const_cast<Tensor&>(leaf).zero_grad();

  std::vector<std::vector<double>> ad_grads;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = build_loss();
    tape.backward(loss);
    for (const Tensor& leaf : leaves) ad_grads.push_back(leaf.grad());
  }

  double worst = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor leaf = leaves[li];
    std::vector<std::size_t> coords;
    const std::size_t n = leaf.numel();
    if (max_coords_per_leaf < 0 || n <= static_cast<std::size_t>(max_coords_per_leaf)) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < max_coords_per_leaf; ++i)
        coords.push_back(pick_rng ? pick_rng->integer(n) : static_cast<std::size_t>(i) * n / max_coords_per_leaf);
    }
    for (std::size_t i : coords) {
      const double saved = leaf.values()[i];
      leaf.values()[i] = saved + h;
      const double fp = build_loss().item();
      leaf.values()[i] = saved - h;
      const double fm = build_loss().item();
      leaf.values()[i] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, rel_err(ad_grads[li][i], fd));
    }
  }
  return worst;
}

inline semcom::Tensor random_tensor(semcom::Shape shape, semcom::Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
  semcom::Tensor t = semcom::Tensor::zeros(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace testutil
