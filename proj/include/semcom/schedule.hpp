#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semcom {

// K x K binary adjacency matrix for one slot. Construction enforces a zero
// diagonal and half-duplex: a user with any outgoing link receives nothing.
class ScheduleMatrix {
 public:
  static ScheduleMatrix empty(int users) { return ScheduleMatrix(users); }

  static ScheduleMatrix from_matrix(int users, std::vector<std::uint8_t> b) {
    if (static_cast<int>(b.size()) != users * users)
      throw std::invalid_argument("schedule: matrix size does not match " +
                                  std::to_string(users) + " users");
    ScheduleMatrix s(users);
    s.b_ = std::move(b);
    s.validate();
    return s;
  }

  static ScheduleMatrix from_links(int users, const std::vector<std::pair<int, int>>& links) {
    ScheduleMatrix s(users);
    for (auto [r, k] : links) {
      if (r < 0 || r >= users || k < 0 || k >= users)
        throw std::invalid_argument("schedule: link (" + std::to_string(r) + "," +
                                    std::to_string(k) + ") out of range");
      s.b_[r * users + k] = 1;
    }
    s.validate();
    return s;
  }

  bool at(int r, int k) const { return b_[r * k_ + k] != 0; }
  int users() const { return k_; }

  int out_degree(int r) const {
    int n = 0;
    for (int k = 0; k < k_; ++k) n += b_[r * k_ + k];
    return n;
  }
  int in_degree(int k) const {
    int n = 0;
    for (int r = 0; r < k_; ++r) n += b_[r * k_ + k];
    return n;
  }

  std::vector<std::pair<int, int>> links() const {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < k_; ++r)
      for (int k = 0; k < k_; ++k)
        if (b_[r * k_ + k]) out.emplace_back(r, k);
    return out;
  }

  // Transmitter set K_T: rows with at least one outgoing link.
  std::vector<int> transmitters() const {
    std::vector<int> out;
    for (int r = 0; r < k_; ++r)
      if (out_degree(r) > 0) out.push_back(r);
    return out;
  }

  const std::vector<std::uint8_t>& raw() const { return b_; }

  bool operator==(const ScheduleMatrix& o) const { return k_ == o.k_ && b_ == o.b_; }

 private:
  explicit ScheduleMatrix(int users) : k_(users), b_(static_cast<std::size_t>(users) * users, 0) {
    if (users < 1) throw std::invalid_argument("schedule: need at least one user");
  }

  void validate() const {
    for (int r = 0; r < k_; ++r) {
      if (b_[r * k_ + r])
        throw std::invalid_argument("schedule: self-link on user " + std::to_string(r));
      if (out_degree(r) > 0 && in_degree(r) > 0)
        throw std::invalid_argument("schedule: user " + std::to_string(r) +
                                    " both transmits and receives (half-duplex violation)");
    }
  }

  int k_;
  std::vector<std::uint8_t> b_;
};

// Greedy repair of a continuous K x K score matrix into a feasible schedule:
// zero diagonal, threshold 0.5, then accept links in descending score order
// while they keep half-duplex intact. Ties break by (row, column) order.
inline ScheduleMatrix project_to_schedule(const std::vector<double>& scores, int users) {
  if (static_cast<int>(scores.size()) != users * users)
    throw std::invalid_argument("project_to_schedule: score size does not match " +
                                std::to_string(users) + " users");
  struct Cand {
    double score;
    int r, k;
  };
  std::vector<Cand> cands;
  for (int r = 0; r < users; ++r)
    for (int k = 0; k < users; ++k) {
      const double v = scores[r * users + k];
      if (r != k && v > 0.5) cands.push_back({v, r, k});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.r != b.r) return a.r < b.r;
    return a.k < b.k;
  });

  std::vector<std::uint8_t> tx(users, 0), rx(users, 0), b(static_cast<std::size_t>(users) * users, 0);
  for (const Cand& c : cands) {
    if (rx[c.r] || tx[c.k]) continue;  // r may not already receive, k may not already transmit
    b[c.r * users + c.k] = 1;
    tx[c.r] = 1;
    rx[c.k] = 1;
  }
  return ScheduleMatrix::from_matrix(users, std::move(b));
}

// Schedule-history state update: user j's count grows by its outgoing plus
// incoming links of the previous slot.
inline std::vector<int> state_update(const std::vector<int>& o_prev, const ScheduleMatrix& b) {
  const int users = b.users();
  if (static_cast<int>(o_prev.size()) != users)
    throw std::invalid_argument("state_update: state length does not match user count");
  std::vector<int> o = o_prev;
  for (int j = 0; j < users; ++j) {
    int delta = 0;
    for (int i = 0; i < users; ++i) {
      if (i == j) continue;
      delta += b.at(j, i) ? 1 : 0;
      delta += b.at(i, j) ? 1 : 0;
    }
    o[j] += delta;
  }
  return o;
}

}  // namespace semcom
