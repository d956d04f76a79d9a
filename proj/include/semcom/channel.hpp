#pragma once

#include <complex>
#include <map>

#include "semcom/geometry.hpp"
#include "semcom/rng.hpp"
#include "semcom/schedule.hpp"

namespace semcom {

using cdouble = std::complex<double>;
using ComplexVec = std::vector<cdouble>;

// UPA response for grid index (m, n), flattened row-major over n_h x n_v:
// exp(j*pi*(m*sin(az)*cos(el) + n*sin(el)))
inline ComplexVec array_response(double azimuth, double elevation, const UpaGeometry& geom) {
  geom.validate();
  ComplexVec a(static_cast<std::size_t>(geom.elements()));
  const double u = std::sin(azimuth) * std::cos(elevation);
  const double v = std::sin(elevation);
  for (int m = 0; m < geom.n_h; ++m)
    for (int n = 0; n < geom.n_v; ++n)
      a[static_cast<std::size_t>(m) * geom.n_v + n] = std::polar(1.0, M_PI * (m * u + n * v));
  return a;
}

// LoS channel to the IRS: propagation phase exp(-j*k0*d) times the array response.
inline ComplexVec los_component(double dist, double azimuth, double elevation,
                                const UpaGeometry& geom) {
  if (!(dist > 0.0))
    throw std::invalid_argument("los_component: distance must be positive, got " +
                                std::to_string(dist));
  ComplexVec a = array_response(azimuth, elevation, geom);
  const cdouble prop = std::polar(1.0, -geom.wavenumber() * dist);
  for (auto& e : a) e *= prop;
  return a;
}

// Rician mix of a LoS vector with unit-variance circularly-symmetric NLoS fading.
inline ComplexVec rician_sample(const ComplexVec& los, double kappa, Rng& rng) {
  if (kappa < 0.0 || !std::isfinite(kappa))
    throw std::invalid_argument("rician_sample: kappa must be finite and nonnegative");
  const double w_los = std::sqrt(kappa / (kappa + 1.0));
  const double w_nlos = std::sqrt(1.0 / (kappa + 1.0));
  ComplexVec g(los.size());
  for (std::size_t i = 0; i < los.size(); ++i) g[i] = w_los * los[i] + w_nlos * rng.cnormal(1.0);
  return g;
}

// N reflection phases in [0, 2*pi). The quantized flag asserts 1-bit states.
struct IrsPhaseVector {
  std::vector<double> phase;
  bool quantized = false;

  std::size_t size() const { return phase.size(); }

  void validate() const {
    if (!quantized) return;
    for (double p : phase)
      if (p != 0.0 && p != M_PI)
        throw std::invalid_argument("irs phases: quantized vector contains " + std::to_string(p));
  }

  static IrsPhaseVector random_binary(std::size_t n, Rng& rng) {
    IrsPhaseVector v;
    v.phase.resize(n);
    for (auto& p : v.phase) p = rng.uniform() < 0.5 ? 0.0 : M_PI;
    v.quantized = true;
    return v;
  }
};

// Snap each phase to the angular-nearest of {0, pi}, with 2*pi wraparound.
// Exact ties (pi/2, 3*pi/2) resolve to 0.
inline IrsPhaseVector quantize_phases(const IrsPhaseVector& in) {
  IrsPhaseVector out;
  out.phase.reserve(in.phase.size());
  for (double p : in.phase) {
    double w = std::fmod(p, 2.0 * M_PI);
    if (w < 0.0) w += 2.0 * M_PI;
    const double d0 = std::min(w, 2.0 * M_PI - w);
    const double dpi = std::fabs(w - M_PI);
    out.phase.push_back(dpi < d0 ? M_PI : 0.0);
  }
  out.quantized = true;
  return out;
}

// Composite link: g_k * diag(e^{j*phi}) * g_r^H + h_direct, row-vector convention.
inline cdouble composite_channel(const ComplexVec& g_r, const ComplexVec& g_k,
                                 const IrsPhaseVector& phases, cdouble h_direct) {
  if (g_r.size() != g_k.size() || g_r.size() != phases.size())
    throw std::invalid_argument("composite_channel: length mismatch g_r=" +
                                std::to_string(g_r.size()) + " g_k=" + std::to_string(g_k.size()) +
                                " phases=" + std::to_string(phases.size()));
  cdouble acc = h_direct;
  for (std::size_t n = 0; n < g_r.size(); ++n)
    acc += g_k[n] * std::polar(1.0, phases.phase[n]) * std::conj(g_r[n]);
  return acc;
}

// Generation inputs for one coherence interval.
struct ChannelParams {
  std::vector<Position> users;
  Position irs{0.0, 0.0};
  UpaGeometry geom;
  double kappa = 10.0;
  double noise_power = 0.1;     // sigma^2
  double transmit_power = 1.0;  // P_t
  double pathloss_alpha = 2.0;  // direct-channel exponent
};

// All direct channels, IRS-side vectors and per-user geometry for one
// coherence interval. Direct channels are reciprocal by construction.
struct ChannelRealization {
  ChannelParams cfg;
  std::vector<double> dist_irs, azimuth, elevation;
  std::vector<ComplexVec> g;       // per-user IRS-side row vector, length N
  std::vector<cdouble> h_direct_;  // K x K, symmetric, diagonal unused

  int users() const { return static_cast<int>(cfg.users.size()); }

  cdouble h_direct(int r, int k) const {
    if (r == k) throw std::invalid_argument("h_direct: no self-link");
    return h_direct_[static_cast<std::size_t>(r) * cfg.users.size() + k];
  }

  cdouble composite(int r, int k, const IrsPhaseVector& phases) const {
    return composite_channel(g[r], g[k], phases, h_direct(r, k));
  }

  static ChannelRealization generate(const ChannelParams& p, Rng& rng) {
    const std::size_t k = p.users.size();
    if (k < 2) throw std::invalid_argument("channel: need at least two users");
    p.geom.validate();
    ChannelRealization c;
    c.cfg = p;
    c.dist_irs.resize(k);
    c.azimuth.resize(k);
    c.elevation.assign(k, 0.0);  // 2-D scenario
    c.g.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      c.dist_irs[i] = distance(p.users[i], p.irs);
      if (!(c.dist_irs[i] > 0.0))
        throw std::invalid_argument("channel: user " + std::to_string(i) + " coincides with IRS");
      c.azimuth[i] = std::atan2(p.users[i].y - p.irs.y, p.users[i].x - p.irs.x);
      c.g[i] = rician_sample(los_component(c.dist_irs[i], c.azimuth[i], 0.0, p.geom), p.kappa, rng);
    }
    c.h_direct_.assign(k * k, cdouble{0.0, 0.0});
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t j = r + 1; j < k; ++j) {
        const double d = distance(p.users[r], p.users[j]);
        if (!(d > 0.0))
          throw std::invalid_argument("channel: users " + std::to_string(r) + " and " +
                                      std::to_string(j) + " coincide");
        const cdouble h = std::sqrt(std::pow(d, -p.pathloss_alpha)) *
                          std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
        c.h_direct_[r * k + j] = h;
        c.h_direct_[j * k + r] = h;  // reciprocity
      }
    return c;
  }
};

// Per-pair SINR table; querying an unscheduled pair is an error.
struct SinrTable {
  std::map<std::pair<int, int>, double> gamma;

  double at(int r, int k) const {
    auto it = gamma.find({r, k});
    if (it == gamma.end())
      throw std::invalid_argument("sinr: pair (" + std::to_string(r) + "," + std::to_string(k) +
                                  ") is not scheduled");
    return it->second;
  }
};

// Attention-weighted per-pair frames of one slot, keyed (transmitter, receiver).
using PairFrameTable = std::map<std::pair<int, int>, ComplexVec>;

namespace detail {
inline double mean_power(const ComplexVec& v) {
  double acc = 0.0;
  for (const auto& s : v) acc += std::norm(s);
  return acc / static_cast<double>(v.size());
}
}  // namespace detail

// Empirical SINR: gamma = P_t |h|^2 / (sigma^2 + I_enc + I_tx), with both
// interference expectations taken over the L symbols of the actual frames.
// I_enc covers the same transmitter's other-destination components, I_tx the
// other transmitters scheduled towards the receiver.
inline SinrTable sinr(const ScheduleMatrix& schedule, const ChannelRealization& chan,
                      const IrsPhaseVector& phases, const PairFrameTable& frames) {
  const int k_users = chan.users();
  if (schedule.users() != k_users)
    throw std::invalid_argument("sinr: schedule/channel user count mismatch");

  std::size_t len = 0;
  for (const auto& [key, f] : frames) len = std::max(len, f.size());
  if (len == 0) throw std::invalid_argument("sinr: frames are empty (L = 0)");

  // Per-transmitter normalization constant c_r so the radiated frame has
  // unit mean symbol power.
  std::vector<double> norm_c(k_users, 0.0);
  std::vector<ComplexVec> radiated(k_users);
  for (int r = 0; r < k_users; ++r) {
    if (schedule.out_degree(r) == 0) continue;
    ComplexVec sum(len, cdouble{0.0, 0.0});
    for (int j = 0; j < k_users; ++j) {
      if (!schedule.at(r, j)) continue;
      auto it = frames.find({r, j});
      if (it == frames.end() || it->second.size() != len)
        throw std::invalid_argument("sinr: missing or mismatched frame for pair (" +
                                    std::to_string(r) + "," + std::to_string(j) + ")");
      for (std::size_t i = 0; i < len; ++i) sum[i] += it->second[i];
    }
    const double p = detail::mean_power(sum);
    if (p <= 0.0)
      throw std::invalid_argument("sinr: transmitter " + std::to_string(r) +
                                  " has an all-zero superposition");
    norm_c[r] = 1.0 / std::sqrt(p);
    for (auto& s : sum) s *= norm_c[r];
    radiated[r] = std::move(sum);
  }

  SinrTable out;
  for (auto [r, k] : schedule.links()) {
    const cdouble h_rk = chan.composite(r, k, phases);
    const double sig = chan.cfg.transmit_power * std::norm(h_rk);

    double i_enc = 0.0;
    {
      ComplexVec other(len, cdouble{0.0, 0.0});
      for (int j = 0; j < k_users; ++j) {
        if (j == k || !schedule.at(r, j)) continue;
        const auto& f = frames.at({r, j});
        for (std::size_t i = 0; i < len; ++i) other[i] += norm_c[r] * f[i];
      }
      for (std::size_t i = 0; i < len; ++i) i_enc += std::norm(h_rk * other[i]);
      i_enc /= static_cast<double>(len);
    }

    double i_tx = 0.0;
    for (int j = 0; j < k_users; ++j) {
      if (j == r || !schedule.at(j, k)) continue;
      const cdouble h_jk = chan.composite(j, k, phases);
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) acc += std::norm(h_jk * radiated[j][i]);
      i_tx += acc / static_cast<double>(len);
    }

    out.gamma[{r, k}] = sig / (chan.cfg.noise_power + i_enc + i_tx);
  }
  return out;
}

// Frame-free SINR approximation used by the scheduling surrogate: radiated
// frames are unit power and the m destination components of one transmitter
// split it evenly, so I_enc = |h|^2 (m-1)/m and I_tx sums |h_jk|^2 over the
// other transmitters scheduled towards k.
inline SinrTable analytic_sinr(const ScheduleMatrix& schedule, const ChannelRealization& chan,
                               const IrsPhaseVector& phases) {
  SinrTable out;
  for (auto [r, k] : schedule.links()) {
    const cdouble h_rk = chan.composite(r, k, phases);
    const double m = static_cast<double>(schedule.out_degree(r));
    const double i_enc = std::norm(h_rk) * (m - 1.0) / m;
    double i_tx = 0.0;
    for (int j = 0; j < chan.users(); ++j)
      if (j != r && schedule.at(j, k)) i_tx += std::norm(chan.composite(j, k, phases));
    out.gamma[{r, k}] =
        chan.cfg.transmit_power * std::norm(h_rk) / (chan.cfg.noise_power + i_enc + i_tx);
  }
  return out;
}

}  // namespace semcom
