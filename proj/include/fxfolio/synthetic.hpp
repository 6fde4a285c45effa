#pragma once

// Seeded generators for quote sequences and for order processes with
// prescribed cross-rate transition masses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fxfolio/cross_rate_predictor.hpp"
#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"

namespace fxfolio {

struct SyntheticMarketSpec {
  std::size_t m = 3;
  std::size_t N = 250;
  std::uint64_t seed = 1;
  double spread_epsilon = 1e-3;
  // Per-day log drift and volatility of every pair's mid rate. Empty vectors
  // mean the scalar defaults apply; otherwise one value per unordered pair,
  // in row-major order of (i,j), i<j.
  double drift = 0.0;
  double volatility = 5e-3;
  std::vector<double> pair_drift;
  std::vector<double> pair_volatility;
  double r_floor = 0.5;
  bool normalize = false;

  std::size_t pair_count() const { return m * (m - 1) / 2; }

  void validate() const {
    if (m < 2) throw Error(ErrorCode::InvalidSpec, "m must be > 1");
    if (N < 2) throw Error(ErrorCode::InvalidSpec, "N must be >= 2");
    if (!(spread_epsilon > 0.0)) throw Error(ErrorCode::InvalidSpec, "spread epsilon must be > 0");
    if (!(volatility >= 0.0)) throw Error(ErrorCode::InvalidSpec, "volatility must be >= 0");
    if (!pair_drift.empty() && pair_drift.size() != pair_count()) {
      throw Error(ErrorCode::InvalidSpec, "pair_drift needs one value per pair");
    }
    if (!pair_volatility.empty() && pair_volatility.size() != pair_count()) {
      throw Error(ErrorCode::InvalidSpec, "pair_volatility needs one value per pair");
    }
    for (double v : pair_volatility)
      if (!(v >= 0.0)) throw Error(ErrorCode::InvalidSpec, "volatility must be >= 0");
    if (normalize && !(r_floor > 0.0 && r_floor < 1.0)) {
      throw Error(ErrorCode::InvalidSpec, "r_floor must lie in (0,1)");
    }
  }
};

/// R / max R, so the day's largest return is 1. The zero matrix is returned as is.
inline ReturnMatrix normalize_returns(const ReturnMatrix& r) {
  const double mx = r.max_entry();
  if (!(mx > 0.0)) return r;
  SquareGrid g = r.grid();
  for (double& v : g.values()) v /= mx;
  return ReturnMatrix::validate(std::move(g), r.day());
}

namespace detail {

inline RateMatrix quote_matrix(const std::vector<double>& mids, std::size_t m, double eps, Day day) {
  SquareGrid g(m, 1.0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j, ++p) {
      g(i, j) = mids[p] + eps;
      g(j, i) = mids[p] - eps;
    }
  return RateMatrix::validate(std::move(g), day);
}

// Opening mid a and closing mid b trade only through the upper entry when
// b − a < 2ε and through neither when b − a >= 2ε; both fire when b < a − 2ε.
inline bool both_fire(double open_mid, double close_mid, double eps) {
  return open_mid - eps > close_mid + eps;
}

inline bool upper_fires(double open_mid, double close_mid, double eps) {
  return open_mid + eps > close_mid - eps;
}

}  // namespace detail

inline std::vector<DailyQuotes> generate_market(const SyntheticMarketSpec& spec) {
  spec.validate();
  const std::size_t m = spec.m;
  const std::size_t P = spec.pair_count();
  const double eps = spec.spread_epsilon;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto drift = [&](std::size_t p) { return spec.pair_drift.empty() ? spec.drift : spec.pair_drift[p]; };
  auto vol = [&](std::size_t p) { return spec.pair_volatility.empty() ? spec.volatility : spec.pair_volatility[p]; };

  std::vector<double> mids(P);
  for (double& v : mids) v = std::exp(0.3 * gauss(rng)) + 4.0 * eps;

  constexpr int kMaxTries = 10000;
  auto draw_close = [&](std::size_t p, double open) {
    for (int t = 0; t < kMaxTries; ++t) {
      const double close = open * std::exp(drift(p) + vol(p) * gauss(rng));
      if (!(close - eps > 0.0) || detail::both_fire(open, close, eps)) continue;
      if (spec.normalize && !(std::abs(close - open) < 2.0 * eps && detail::upper_fires(open, close, eps))) continue;
      return close;
    }
    // Volatility too large for the acceptance window: draw inside it directly.
    const double lo = spec.normalize ? open - 2.0 * eps : std::max(open - 2.0 * eps, eps);
    const double hi = spec.normalize ? open + 2.0 * eps : open * std::exp(std::abs(drift(p)) + 3.0 * vol(p));
    double close = lo + (hi - lo) * unit(rng);
    if (spec.normalize) close = std::clamp(close, open - 1.999 * eps, open + 1.999 * eps);
    return std::max(close, eps * 1.5);
  };

  std::vector<DailyQuotes> out;
  out.reserve(spec.N);
  for (std::size_t k = 1; k <= spec.N; ++k) {
    const Day day = static_cast<Day>(k);
    const RateMatrix open = detail::quote_matrix(mids, m, eps, day);
    std::vector<double> closes(P);
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxTries && !accepted; ++attempt) {
      for (std::size_t p = 0; p < P; ++p) closes[p] = draw_close(p, mids[p]);
      if (!spec.normalize) {
        accepted = true;
        break;
      }
      const RateMatrix close = detail::quote_matrix(closes, m, eps, day);
      const ReturnMatrix r = compute_return_matrix(DailyQuotes(open, close));
      double lo = 1e300;
      double hi = 0.0;
      for (double v : r.grid().values())
        if (v > 0.0) lo = std::min(lo, v), hi = std::max(hi, v);
      accepted = hi > 0.0 && lo / hi >= spec.r_floor;
    }
    if (!accepted) throw Error(ErrorCode::InvalidSpec, "r_floor is unattainable with these parameters");
    out.emplace_back(open, detail::quote_matrix(closes, m, eps, day));
    mids = closes;
  }
  return out;
}

struct SyntheticOrderSpec {
  std::size_t segment_count = 1000;
  std::size_t L = 5;
  double p_aa = 0.25;
  double p_ab = 0.25;
  double p_ba = 0.25;
  double p_bb = 0.25;
  std::size_t K = 10;
  std::uint64_t seed = 1;
  std::size_t m = 3;

  void validate() const {
    if (segment_count < 1) throw Error(ErrorCode::InvalidSpec, "segment_count must be >= 1");
    if (L < 1) throw Error(ErrorCode::InvalidSpec, "L must be >= 1");
    if (K < 1) throw Error(ErrorCode::InvalidSpec, "K must be >= 1");
    if (m < 2) throw Error(ErrorCode::InvalidSpec, "m must be > 1");
    for (double p : {p_aa, p_ab, p_ba, p_bb})
      if (!(p >= 0.0)) throw Error(ErrorCode::InvalidSpec, "transition masses must be >= 0");
    if (std::abs(p_aa + p_ab + p_ba + p_bb - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidSpec, "transition masses must sum to 1");
    }
  }
};

struct OrderProcess {
  std::vector<ReturnMatrix> returns;
  std::vector<Order> orders;
  std::vector<Interval> classes;  // target half-interval per segment
};

namespace detail {

/// A return matrix whose unique maximum (value 1) sits in the requested
/// triangle; every other pair carries one entry in [0.5, 0.95).
inline ReturnMatrix realize_order(Order label, std::size_t m, Day day, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.5, 0.95);
  std::bernoulli_distribution coin(0.5);
  SquareGrid g(m, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  for (auto [i, j] : pairs) {
    const double v = value(rng);
    if (coin(rng)) g(i, j) = v; else g(j, i) = v;
  }
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  auto [i, j] = pairs[pick(rng)];
  g(i, j) = 0.0;
  g(j, i) = 0.0;
  if (label == Order::upper) g(i, j) = 1.0;
  else g(j, i) = 1.0;
  return ReturnMatrix::validate(std::move(g), day);
}

}  // namespace detail

/// Segment classes follow a Markov chain that restarts from its stationary
/// law every K segments (random phase), so classes K or more apart are
/// independent. The within-block kernel Q = (K·P − ππᵀ)/(K−1) makes the
/// long-run pair frequencies equal the targets P.
inline OrderProcess generate_order_process(const SyntheticOrderSpec& spec) {
  spec.validate();
  if (std::abs(spec.p_ab - spec.p_ba) > 1e-12) {
    throw Error(ErrorCode::InfeasibleTargets, "a stationary chain needs P_AB = P_BA");
  }
  const double pi_a = spec.p_aa + spec.p_ab;
  const double pi_b = 1.0 - pi_a;
  double q_aa = spec.p_aa;
  double q_ab = spec.p_ab;
  double q_bb = spec.p_bb;
  if (spec.K > 1) {
    const double k = static_cast<double>(spec.K);
    q_aa = (k * spec.p_aa - pi_a * pi_a) / (k - 1.0);
    q_ab = (k * spec.p_ab - pi_a * pi_b) / (k - 1.0);
    q_bb = (k * spec.p_bb - pi_b * pi_b) / (k - 1.0);
  } else if (std::abs(spec.p_aa - pi_a * pi_a) > 1e-12 || std::abs(spec.p_ab - pi_a * pi_b) > 1e-12) {
    throw Error(ErrorCode::InfeasibleTargets, "K = 1 forces independent classes, P must equal ππ");
  }
  if (q_aa < -1e-12 || q_ab < -1e-12 || q_bb < -1e-12) {
    throw Error(ErrorCode::InfeasibleTargets, "targets need a larger dependence gap K");
  }
  const double stay_a = pi_a > 0.0 ? std::max(q_aa, 0.0) / pi_a : 1.0;
  const double stay_b = pi_b > 0.0 ? std::max(q_bb, 0.0) / pi_b : 1.0;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> phase_dist(0, spec.K - 1);
  const std::size_t phase = phase_dist(rng);
  const std::size_t L = spec.L;

  OrderProcess out;
  out.classes.reserve(spec.segment_count);
  for (std::size_t n = 0; n < spec.segment_count; ++n) {
    Interval c;
    if (n == 0 || (n + phase) % spec.K == 0) {
      c = unit(rng) < pi_a ? Interval::A : Interval::B;
    } else {
      const Interval prev = out.classes.back();
      const double stay = prev == Interval::A ? stay_a : stay_b;
      c = unit(rng) < stay ? prev : (prev == Interval::A ? Interval::B : Interval::A);
    }
    out.classes.push_back(c);
  }

  std::bernoulli_distribution coin(0.5);
  Order current = coin(rng) ? Order::upper : Order::lower;
  out.orders.reserve(spec.segment_count * L);
  for (std::size_t n = 0; n < spec.segment_count; ++n) {
    // Segment 0 has no predecessor, so its first day cannot cross.
    const std::size_t slots = n == 0 ? L - 1 : L;
    std::vector<std::size_t> admissible;
    for (std::size_t c = 0; c <= slots; ++c) {
      const double w = static_cast<double>(c) / static_cast<double>(L);
      if (interval_of(w) == out.classes[n]) admissible.push_back(c);
    }
    if (admissible.empty()) admissible.push_back(slots);
    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    const std::size_t crosses = admissible[pick(rng)];

    std::vector<std::size_t> positions(slots);
    std::iota(positions.begin(), positions.end(), n == 0 ? std::size_t{1} : std::size_t{0});
    std::shuffle(positions.begin(), positions.end(), rng);
    std::vector<bool> cross_at(L, false);
    for (std::size_t c = 0; c < crosses; ++c) cross_at[positions[c]] = true;
    for (std::size_t d = 0; d < L; ++d) {
      if (cross_at[d]) current = flip(current);
      out.orders.push_back(current);
    }
  }

  out.returns.reserve(out.orders.size());
  for (std::size_t k = 0; k < out.orders.size(); ++k) {
    out.returns.push_back(detail::realize_order(out.orders[k], spec.m, static_cast<Day>(k + 1), rng));
  }
  return out;
}

}  // namespace fxfolio
