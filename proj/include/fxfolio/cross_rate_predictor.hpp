#pragma once

// Order labels, cross rates over segments and the MPCR/MPO prediction
// pipeline. Day and segment indices are 0-based throughout.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"

namespace fxfolio {

enum class Order : int { tie = 0, upper = 1, lower = 2 };

inline int to_int(Order o) { return static_cast<int>(o); }

inline Order order_from_int(int v) {
  if (v < 0 || v > 2) throw Error(ErrorCode::ParseError, "order label must be 0, 1 or 2");
  return static_cast<Order>(v);
}

inline Order flip(Order o) {
  switch (o) {
    case Order::upper: return Order::lower;
    case Order::lower: return Order::upper;
    case Order::tie: return Order::tie;
  }
  return Order::tie;
}

/// 1 (2) when a unique maximum sits in the upper (lower) triangle, 0 on ties
/// and on the zero matrix.
inline Order order_of(const ReturnMatrix& r) {
  const double alpha = r.max_entry();
  if (!(alpha > 0.0)) return Order::tie;
  const std::size_t m = r.size();
  int hits = 0;
  Order label = Order::tie;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (r(i, j) == alpha) {
        ++hits;
        label = i < j ? Order::upper : Order::lower;
      }
  return hits == 1 ? label : Order::tie;
}

inline ReturnMatrix rev(const ReturnMatrix& r) { return ReturnMatrix::validate(r.grid().transposed(), r.day()); }

inline std::vector<Order> orders_of(std::span<const ReturnMatrix> returns) {
  std::vector<Order> out;
  out.reserve(returns.size());
  for (const auto& r : returns) out.push_back(order_of(r));
  return out;
}

enum class Interval { A, B };

/// A = [0, 1/2), B = [1/2, 1].
inline Interval interval_of(double w) { return w < 0.5 ? Interval::A : Interval::B; }

/// Fraction of days in orders whose label differs from the day before. The
/// first day is compared with prev when given and skipped otherwise.
inline double cross_rate(std::span<const Order> orders, std::optional<Order> prev = std::nullopt) {
  if (orders.empty()) throw Error(ErrorCode::EmptyRange, "cross rate over an empty range");
  std::size_t crosses = 0;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    if (k == 0) {
      if (prev && *prev != orders[0]) ++crosses;
    } else if (orders[k] != orders[k - 1]) {
      ++crosses;
    }
  }
  return static_cast<double>(crosses) / static_cast<double>(orders.size());
}

inline std::optional<std::size_t> find_nonzero_before(std::span<const Order> orders, std::size_t k) {
  for (std::size_t l = std::min(k, orders.size()); l-- > 0;)
    if (orders[l] != Order::tie) return l;
  return std::nullopt;
}

/// l(k): the last day before k whose order is nonzero.
inline std::size_t nearest_nonzero_index(std::span<const Order> orders, std::size_t k) {
  auto l = find_nonzero_before(orders, k);
  if (!l) throw Error(ErrorCode::NoPredecessor, "no nonzero order before day " + std::to_string(k));
  return *l;
}

/// W' over days first..last (inclusive); days before first act as history
/// for l(·). Zero when the range holds no nonzero order.
inline double adjusted_cross_rate(std::span<const Order> orders, std::size_t first, std::size_t last) {
  if (last < first || last >= orders.size()) throw Error(ErrorCode::EmptyRange, "bad day range");
  std::size_t crosses = 0;
  std::size_t live = 0;
  for (std::size_t k = first; k <= last; ++k) {
    if (orders[k] == Order::tie) continue;
    ++live;
    auto l = find_nonzero_before(orders, k);
    if (l && orders[*l] != orders[k]) ++crosses;
  }
  return live == 0 ? 0.0 : static_cast<double>(crosses) / static_cast<double>(live);
}

struct TransitionMasses {
  double aa = 0.0;
  double ab = 0.0;
  double ba = 0.0;
  double bb = 0.0;
};

inline TransitionMasses transition_probabilities(std::span<const double> series) {
  if (series.size() < 2) throw Error(ErrorCode::TooShort, "need at least two cross rates");
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t n = 0; n + 1 < series.size(); ++n) {
    const int from = interval_of(series[n]) == Interval::A ? 0 : 1;
    const int to = interval_of(series[n + 1]) == Interval::A ? 0 : 1;
    counts[from][to] += 1.0;
  }
  const double pairs = static_cast<double>(series.size() - 1);
  return {counts[0][0] / pairs, counts[0][1] / pairs, counts[1][0] / pairs, counts[1][1] / pairs};
}

struct SegmentConfig {
  std::size_t L = 5;
  double c_A = 0.25;
  double c_B = 0.75;

  void validate() const {
    if (L < 1) throw Error(ErrorCode::InvalidParams, "segment length L must be >= 1");
    if (!(c_A >= 0.0 && c_A < 0.5)) throw Error(ErrorCode::InvalidParams, "c_A must lie in [0, 1/2)");
    if (!(c_B >= 0.5 && c_B <= 1.0)) throw Error(ErrorCode::InvalidParams, "c_B must lie in [1/2, 1]");
  }
};

enum class Mpcr { MPCR1 = 1, MPCR2 = 2 };
enum class Mpo { MPO1 = 1, MPO2 = 2 };

struct PredictorConfig {
  Mpcr mpcr = Mpcr::MPCR1;
  Mpo mpo = Mpo::MPO1;
  bool adjusted = false;
  SegmentConfig segment;
};

/// Forecast of the next segment's cross rate from the completed ones.
inline double mpcr_predict(Mpcr method, std::span<const double> history, const SegmentConfig& cfg) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "no completed segment to predict from");
  const double last = history.back();
  if (method == Mpcr::MPCR1) return last;
  return interval_of(last) == Interval::B ? cfg.c_A : cfg.c_B;
}

/// Which past return matrix the next-day prediction copies, and whether it
/// is transposed.
struct PredictionSource {
  std::size_t index = 0;
  bool transpose = false;
};

/// orders holds days 0..k; the prediction targets day k+1.
inline PredictionSource prediction_source(Mpo method, bool adjusted, double w_pred, std::span<const Order> orders) {
  if (orders.empty()) throw Error(ErrorCode::InsufficientHistory, "no observed day");
  const std::size_t k = orders.size() - 1;
  const bool in_b = interval_of(w_pred) == Interval::B;

  if (!adjusted) {
    if (method == Mpo::MPO1) return {k, in_b};
    if (!in_b) return {k, false};
    if (k == 0) throw Error(ErrorCode::InsufficientHistory, "MPO2 needs two observed days");
    return {k - 1, false};
  }

  auto l1 = find_nonzero_before(orders, k + 1);
  if (!l1) throw Error(ErrorCode::InsufficientHistory, "no nonzero order observed yet");
  if (method == Mpo::MPO1) return {*l1, in_b};
  if (!in_b) return {*l1, false};
  auto l2 = find_nonzero_before(orders, *l1);
  if (!l2) throw Error(ErrorCode::InsufficientHistory, "adjusted MPO2 needs two nonzero orders");
  return {*l2, false};
}

inline Order mpo_predict(Mpo method, bool adjusted, double w_pred, std::span<const Order> orders) {
  const PredictionSource src = prediction_source(method, adjusted, w_pred, orders);
  const Order o = orders[src.index];
  return src.transpose ? flip(o) : o;
}

/// history holds R(0..k); returns R'(k+1).
inline ReturnMatrix predict_return(Mpo method, bool adjusted, double w_pred, std::span<const ReturnMatrix> history) {
  const std::vector<Order> orders = orders_of(history);
  const PredictionSource src = prediction_source(method, adjusted, w_pred, orders);
  const ReturnMatrix& base = history[src.index];
  return src.transpose ? rev(base) : base;
}

/// Fraction of days predicted correctly. With ties_are_misses a day whose
/// actual order is 0 never counts as a hit; otherwise such days are dropped.
inline double success_rate(std::span<const Order> predicted, std::span<const Order> actual, bool ties_are_misses = true) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::LengthMismatch, "sequences differ in length");
  if (actual.empty()) throw Error(ErrorCode::LengthMismatch, "empty sequences");
  std::size_t hits = 0;
  std::size_t counted = 0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    if (actual[k] == Order::tie) {
      if (ties_are_misses) ++counted;
      continue;
    }
    ++counted;
    if (predicted[k] == actual[k]) ++hits;
  }
  return counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
}

inline bool is_effective(double theta) { return theta >= 0.5; }

inline double effectiveness_ratio(const std::vector<bool>& flags) {
  if (flags.empty()) throw Error(ErrorCode::EmptySequence, "no segments");
  std::size_t on = 0;
  for (bool f : flags) on += f ? 1 : 0;
  return static_cast<double>(on) / static_cast<double>(flags.size());
}

/// Observed cross rate of segment n (complete segments only). Plain: the first
/// day compares with the previous segment's last day when one exists.
inline double segment_cross_rate(std::span<const Order> orders, std::size_t n, std::size_t L, bool adjusted) {
  const std::size_t first = n * L;
  const std::size_t last = first + L - 1;
  if (last >= orders.size()) throw Error(ErrorCode::EmptyRange, "segment is incomplete");
  if (adjusted) return adjusted_cross_rate(orders, first, last);
  std::optional<Order> prev;
  if (first > 0) prev = orders[first - 1];
  return cross_rate(orders.subspan(first, L), prev);
}

/// One next-day prediction made at the close of day k.
struct DayForecast {
  double w_pred = 0.0;
  PredictionSource source;
  Order order = Order::tie;
  bool fallback = false;          // history too short, persistence used
  bool crosses_boundary = false;  // source day lies in an earlier segment
};

/// Prediction for day k+1 given orders of days 0..k and the cross rates of
/// the segments completed by day k. Segment 0 has no completed predecessor
/// and is forecast by persistence.
inline DayForecast forecast_next(const PredictorConfig& cfg, std::span<const Order> orders,
                                 std::span<const double> completed_w) {
  DayForecast f;
  const std::size_t k = orders.size() - 1;
  const std::size_t target_segment = (k + 1) / cfg.segment.L;
  const std::size_t segment_start = target_segment * cfg.segment.L;
  const std::size_t usable = std::min(target_segment, completed_w.size());
  if (usable == 0) {
    f.w_pred = 0.0;
    f.fallback = true;
    f.source = {k, false};
  } else {
    f.w_pred = mpcr_predict(cfg.mpcr, completed_w.first(usable), cfg.segment);
    try {
      f.source = prediction_source(cfg.mpo, cfg.adjusted, f.w_pred, orders);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientHistory) throw;
      f.source = {k, false};
      f.fallback = true;
    }
  }
  const Order o = orders[f.source.index];
  f.order = f.source.transpose ? flip(o) : o;
  f.crosses_boundary = f.source.index < segment_start;
  return f;
}

struct SegmentReport {
  std::vector<double> w;              // observed cross rate per complete segment
  std::vector<double> w_pred;         // forecast used for that segment (NaN for segment 0)
  std::vector<double> theta;          // success rate per complete segment
  std::vector<bool> effective;
  std::vector<DayForecast> forecasts;  // forecasts[k] predicts day k (day 0 has none)
  double eta = 0.0;                    // over segments 1..n-1
};

/// Runs the order-prediction pipeline over a realized order sequence.
inline SegmentReport evaluate_orders(const PredictorConfig& cfg, std::span<const Order> orders,
                                     bool ties_are_misses = true) {
  cfg.segment.validate();
  const std::size_t L = cfg.segment.L;
  const std::size_t segments = orders.size() / L;
  if (segments < 2) throw Error(ErrorCode::TooShort, "need at least two complete segments");
  SegmentReport rep;
  rep.forecasts.resize(orders.size());
  for (std::size_t n = 0; n < segments; ++n) rep.w.push_back(segment_cross_rate(orders, n, L, cfg.adjusted));

  std::vector<Order> predicted(orders.size(), Order::tie);
  for (std::size_t k = 0; k + 1 < orders.size(); ++k) {
    const std::size_t done = (k + 1) / L;
    const std::size_t available = std::min(done, segments);
    DayForecast f = forecast_next(cfg, orders.first(k + 1), std::span<const double>(rep.w).first(available));
    predicted[k + 1] = f.order;
    rep.forecasts[k + 1] = f;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0; n < segments; ++n) {
    rep.w_pred.push_back(n == 0 ? nan : mpcr_predict(cfg.mpcr, std::span<const double>(rep.w).first(n), cfg.segment));
    const std::size_t first = n * L;
    // Day 0 has no forecast; segment 0 is scored from day 1.
    const std::size_t from = n == 0 ? 1 : first;
    const std::size_t count = first + L - from;
    double theta = 0.0;
    if (count > 0) {
      theta = success_rate(std::span<const Order>(predicted).subspan(from, count), orders.subspan(from, count),
                           ties_are_misses);
    }
    rep.theta.push_back(theta);
    rep.effective.push_back(is_effective(theta));
  }
  rep.eta = effectiveness_ratio(std::vector<bool>(rep.effective.begin() + 1, rep.effective.end()));
  return rep;
}

inline std::string_view to_string(Mpcr m) { return m == Mpcr::MPCR1 ? "mpcr1" : "mpcr2"; }
inline std::string_view to_string(Mpo m) { return m == Mpo::MPO1 ? "mpo1" : "mpo2"; }

}  // namespace fxfolio
