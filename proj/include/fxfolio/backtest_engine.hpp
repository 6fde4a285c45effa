#pragma once

// The on-line loop. Day k (1-based) opens with ψ(k) and the capital left
// after paying T(k), the cost of the rebalancing decided at the close of day
// k−1. At the close of day k the engine observes R(k), predicts R'(k+1),
// updates to ψ(k+1) and solves for T(k+1).

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fxfolio/cost_model.hpp"
#include "fxfolio/cross_rate_predictor.hpp"
#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"
#include "fxfolio/portfolio_algebra.hpp"
#include "fxfolio/update_rules.hpp"

namespace fxfolio {

enum class GammaMode { constant, block_decaying };

/// Index blocks Γ_1..Γ_{n_l} of {1..N}; block i < n_l has length i·l.
/// Returned as 1-based inclusive (first, last) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> gamma_partition(std::size_t N, std::size_t l) {
  if (!(l > 1 && l < N)) {
    throw Error(ErrorCode::InvalidBlockUnit, "block unit must satisfy 1 < l < N");
  }
  // n_l is the smallest n with n(n+1)l/2 >= N.
  std::size_t n_l = 1;
  while (n_l * (n_l + 1) * l / 2 < N) ++n_l;
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t i = 1; i <= n_l; ++i) {
    const std::size_t first = i * (i - 1) * l / 2 + 1;
    const std::size_t last = i < n_l ? i * (i + 1) * l / 2 : N;
    blocks.emplace_back(first, last);
  }
  return blocks;
}

struct GammaSchedule {
  GammaMode mode = GammaMode::constant;
  double gamma0 = 0.1;
  std::size_t l = 1;

  void validate() const {
    if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) throw Error(ErrorCode::InvalidParams, "gamma0 must be >= 0");
    if (mode == GammaMode::block_decaying && l < 1) {
      throw Error(ErrorCode::InvalidBlockUnit, "block unit l must be >= 1");
    }
  }

  /// γ for the update made at the close of day k (1-based): γ0, or γ0/i for k in Γ_i.
  double at(std::size_t k) const {
    if (mode == GammaMode::constant) return gamma0;
    std::size_t i = 1;
    while (i * (i + 1) * l / 2 < k) ++i;
    return gamma0 / static_cast<double>(i);
  }
};

enum class PredictionMode { cross_rate, linear };

struct BacktestConfig {
  PredictorConfig predictor;
  PredictionMode prediction = PredictionMode::cross_rate;
  // a_1..a_q for R'(k+1) = Σ a_l R(k−l+1); nonnegative, summing to 1.
  std::vector<double> lag_weights{1.0};
  Rule rule = Rule::IITC;
  GammaSchedule gamma;
  double support_floor = 0.0;
  CostParams costs;
  double f0 = 1.0;

  void validate() const {
    predictor.segment.validate();
    gamma.validate();
    costs.validate();
    UpdateConfig{rule, gamma.gamma0, support_floor}.validate();
    if (!(f0 > 0.0)) throw Error(ErrorCode::NonPositiveCapital, "f0 must be positive");
    if (prediction == PredictionMode::linear) {
      if (lag_weights.empty()) throw Error(ErrorCode::InvalidParams, "lag weights are empty");
      double s = 0.0;
      for (double a : lag_weights) {
        if (!(a >= 0.0)) throw Error(ErrorCode::InvalidParams, "lag weights must be nonnegative");
        s += a;
      }
      if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorCode::InvalidParams, "lag weights must sum to 1");
    }
  }
};

struct DayRecord {
  Day day = 0;
  double F = 0.0;
  double Fp = 0.0;
  double T = 0.0;
  double c = 0.0;
  double diamond = 0.0;
  double gamma = 0.0;  // used for the update at this day's close
  bool parked = false;
  bool has_prediction = false;   // R'(k) exists (false on day 1)
  bool fallback = false;         // R'(k) came from persistence for lack of history
  bool crosses_boundary = false; // R'(k) copied a day from an earlier segment
  bool update_skipped = false;   // ψ' ⋄ R'(k+1) = 0 under EIITC, ψ(k+1) = ψ'(k)
  Order order_actual = Order::tie;
  Order order_pred = Order::tie;
  SquareGrid psi;
  SquareGrid psi_realized;
  SquareGrid r;
  SquareGrid r_pred;

  friend bool operator==(const DayRecord&, const DayRecord&) = default;
};

struct BacktestLedger {
  std::size_t m = 0;
  double f0 = 1.0;
  std::vector<DayRecord> days;
  SquareGrid final_psi;  // ψ(N+1)
  BacktestConfig config;
};

namespace detail {

inline ReturnMatrix linear_prediction(std::span<const ReturnMatrix> history, const std::vector<double>& weights,
                                      bool& fallback) {
  const std::size_t k = history.size();
  if (weights.size() > k) {
    fallback = true;
    return history.back();
  }
  const std::size_t m = history.back().size();
  SquareGrid acc(m, 0.0);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const SquareGrid& g = history[k - 1 - l].grid();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) acc(i, j) += weights[l] * g(i, j);
  }
  return ReturnMatrix::validate(std::move(acc), history.back().day() + 1);
}

}  // namespace detail

/// Backtest over a sequence of daily return matrices R(1..N).
inline BacktestLedger run_backtest_returns(std::span<const ReturnMatrix> returns, const BacktestConfig& cfg) {
  cfg.validate();
  if (returns.size() < 2) throw Error(ErrorCode::TooFewDays, "a backtest needs at least 2 days");
  const std::size_t m = returns.front().size();
  const std::size_t N = returns.size();
  const std::size_t L = cfg.predictor.segment.L;

  BacktestLedger ledger;
  ledger.m = m;
  ledger.f0 = cfg.f0;
  ledger.config = cfg;
  ledger.days.reserve(N);

  PortfolioMatrix psi = uniform_portfolio(m, 1);
  double f_prev = cfg.f0;
  double pending_t = 0.0;
  std::optional<ReturnMatrix> pending_pred;
  DayForecast pending_forecast;
  std::vector<Order> orders;
  std::vector<double> completed_w;

  for (std::size_t idx = 0; idx < N; ++idx) {
    const std::size_t k = idx + 1;
    const ReturnMatrix& r = returns[idx];
    try {
      require_same_size(psi.grid(), r.grid());
      DayRecord rec;
      rec.day = static_cast<Day>(k);
      rec.T = pending_t;
      rec.c = k == 1 ? 0.0 : cost_ratio(pending_t, f_prev);
      rec.Fp = f_prev - pending_t;
      rec.psi = psi.grid();
      rec.r = r.grid();
      rec.diamond = diamond(psi, r);

      PortfolioMatrix realized = psi;
      if (rec.diamond > 0.0) {
        rec.F = rec.Fp * rec.diamond;
        realized = realized_portfolio(psi, r);
      } else {
        rec.parked = true;
        rec.F = rec.Fp;
      }
      rec.psi_realized = realized.grid();

      if (pending_pred) {
        rec.has_prediction = true;
        rec.r_pred = pending_pred->grid();
        rec.order_pred = pending_forecast.order;
        rec.fallback = pending_forecast.fallback;
        rec.crosses_boundary = pending_forecast.crosses_boundary;
      } else {
        rec.r_pred = SquareGrid(m, 0.0);
      }

      rec.order_actual = order_of(r);
      orders.push_back(rec.order_actual);
      if (k % L == 0) completed_w.push_back(segment_cross_rate(orders, k / L - 1, L, cfg.predictor.adjusted));

      // Prediction of R(k+1) from days 1..k.
      DayForecast forecast;
      std::optional<ReturnMatrix> pred;
      if (cfg.prediction == PredictionMode::cross_rate) {
        forecast = forecast_next(cfg.predictor, orders, completed_w);
        const ReturnMatrix& base = returns[forecast.source.index];
        pred = forecast.source.transpose ? rev(base) : base;
      } else {
        bool fb = false;
        pred = detail::linear_prediction(returns.first(k), cfg.lag_weights, fb);
        forecast.fallback = fb;
        forecast.order = order_of(*pred);
        forecast.source = {idx, false};
        const std::size_t oldest = idx + 1 >= cfg.lag_weights.size() ? idx + 1 - cfg.lag_weights.size() : 0;
        forecast.crosses_boundary = oldest < (k / L) * L;
      }

      rec.gamma = cfg.gamma.at(k);
      const UpdateConfig ucfg{cfg.rule, rec.gamma, cfg.support_floor};
      PortfolioMatrix next = realized;
      if (cfg.rule == Rule::EIITC && !(fxfolio::diamond(realized, *pred) > 0.0)) {
        rec.update_skipped = true;
        next = apply_support_floor(realized.with_day(static_cast<Day>(k + 1)), cfg.support_floor);
      } else {
        next = update_portfolio(ucfg, realized, *pred);
      }
      next = next.with_day(static_cast<Day>(k + 1));

      double t_next = 0.0;
      if (k < N && !rec.parked) {
        t_next = solve_transaction_cost(rec.F, rec.Fp, psi, next, r, cfg.costs);
      }

      ledger.days.push_back(std::move(rec));
      f_prev = ledger.days.back().F;
      pending_t = t_next;
      pending_pred = std::move(pred);
      pending_forecast = forecast;
      psi = next;
    } catch (const Error& e) {
      if (e.day()) throw;
      throw e.with_day(static_cast<long>(k));
    }
  }
  ledger.final_psi = psi.grid();
  return ledger;
}

/// Same-day return matrices R(k) for each day's quotes.
inline std::vector<ReturnMatrix> returns_from_quotes(std::span<const DailyQuotes> quotes) {
  std::vector<ReturnMatrix> out;
  out.reserve(quotes.size());
  for (const auto& q : quotes) out.push_back(compute_return_matrix(q));
  return out;
}

inline BacktestLedger run_backtest(std::span<const DailyQuotes> quotes, const BacktestConfig& cfg) {
  if (quotes.size() < 2) throw Error(ErrorCode::TooFewDays, "a backtest needs at least 2 days");
  const std::vector<ReturnMatrix> returns = returns_from_quotes(quotes);
  return run_backtest_returns(returns, cfg);
}

inline void require_days(const BacktestLedger& ledger) {
  if (ledger.days.empty()) throw Error(ErrorCode::EmptyLedger, "ledger has no days");
}

inline double final_return_no_cost(const BacktestLedger& ledger) {
  require_days(ledger);
  double p = 1.0;
  for (const auto& d : ledger.days)
    if (!d.parked) p *= d.diamond;
  return p;
}

inline double growth_rate_no_cost(const BacktestLedger& ledger) {
  require_days(ledger);
  double s = 0.0;
  for (const auto& d : ledger.days) {
    if (d.parked) continue;
    if (!(d.diamond > 0.0)) throw Error(ErrorCode::NonPositiveDiamond, "psi ⋄ R <= 0", std::nullopt, d.day);
    s += std::log(d.diamond);
  }
  return s / static_cast<double>(ledger.days.size());
}

inline double log_cost_sum(const BacktestLedger& ledger) {
  require_days(ledger);
  double s = 0.0;
  for (const auto& d : ledger.days) {
    if (!(d.c < 1.0)) throw Error(ErrorCode::CostRatioAtLeastOne, "c_k >= 1", std::nullopt, d.day);
    s += std::log1p(-d.c);
  }
  return s;
}

inline double final_return_with_cost(const BacktestLedger& ledger) {
  require_days(ledger);
  double p = 1.0;
  for (const auto& d : ledger.days) {
    if (!(d.c < 1.0)) throw Error(ErrorCode::CostRatioAtLeastOne, "c_k >= 1", std::nullopt, d.day);
    p *= (d.parked ? 1.0 : d.diamond) * (1.0 - d.c);
  }
  return p;
}

inline double growth_rate_with_cost(const BacktestLedger& ledger) {
  const double costs = log_cost_sum(ledger);
  return growth_rate_no_cost(ledger) + costs / static_cast<double>(ledger.days.size());
}

/// Growth rate of holding the single position (i,j) with no rebalancing.
inline double single_pair_benchmark(std::span<const ReturnMatrix> returns, std::size_t i, std::size_t j) {
  if (returns.empty()) throw Error(ErrorCode::EmptyLedger, "no return matrices");
  double s = 0.0;
  for (const auto& r : returns) {
    if (i >= r.size() || j >= r.size() || i == j) throw Error(ErrorCode::DimensionMismatch, "bad pair index");
    const double v = r(i, j);
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositivePairReturn, "pair return is 0", Position{i, j}, r.day());
    s += std::log(v);
  }
  return s / static_cast<double>(returns.size());
}

inline std::vector<ReturnMatrix> ledger_returns(const BacktestLedger& ledger) {
  std::vector<ReturnMatrix> out;
  out.reserve(ledger.days.size());
  for (const auto& d : ledger.days) out.push_back(ReturnMatrix::validate(d.r, d.day));
  return out;
}

struct UniversalityGap {
  double lhs = 0.0;  // R_N − LI*_N
  double rhs = 0.0;  // the theorem's lower bound
  bool holds = false;
};

/// Checks R_N − LI*_N >= (1/N)log(ψ(1)_ij/ψ(N+1)_ij) + (1/N)Σlog(1−c_k) + γr − γ
/// (IITC) or + γr − γ/r (EIITC). Refuses ledgers outside the hypotheses: a
/// non-linear predictor (unless force), returns outside [r_floor, 1] or with a
/// daily maximum other than 1, a zero benchmark return, parked days, a
/// support floor, or a γ different from the one given.
inline UniversalityGap universality_gap(const BacktestLedger& ledger, std::pair<std::size_t, std::size_t> pair,
                                        Rule rule, double gamma, double r_floor, bool force = false) {
  require_days(ledger);
  const auto [i, j] = pair;
  auto violated = [](const std::string& why, std::optional<Day> day = std::nullopt) {
    return Error(ErrorCode::NormalizationViolated, why, std::nullopt, day);
  };
  if (!(r_floor > 0.0 && r_floor <= 1.0)) throw violated("r_floor must lie in (0,1]");
  if (ledger.config.prediction != PredictionMode::linear && !force) {
    throw violated("the bound covers linear predictions only");
  }
  if (ledger.config.support_floor != 0.0) throw violated("support floor breaks the multiplicative update");
  if (ledger.config.rule != rule) throw violated("ledger was produced by the other rule");
  if (i >= ledger.m || j >= ledger.m || i == j) throw Error(ErrorCode::DimensionMismatch, "bad pair index");

  for (const auto& d : ledger.days) {
    if (d.parked) throw violated("parked day", d.day);
    if (d.gamma != gamma) throw violated("gamma differs from the ledger's", d.day);
    double mx = 0.0;
    for (double v : d.r.values()) {
      if (v == 0.0) continue;
      if (v < r_floor - 1e-12 || v > 1.0 + 1e-12) throw violated("return outside [r_floor, 1]", d.day);
      mx = std::max(mx, v);
    }
    if (std::abs(mx - 1.0) > 1e-12) throw violated("daily maximum return is not 1", d.day);
    if (!(d.r(i, j) > 0.0)) throw violated("benchmark pair return is 0", d.day);
  }

  const double N = static_cast<double>(ledger.days.size());
  const double benchmark = single_pair_benchmark(ledger_returns(ledger), i, j);
  const double psi_first = ledger.days.front().psi(i, j);
  const double psi_last = ledger.final_psi(i, j);
  if (!(psi_last > 0.0)) throw violated("final weight on the benchmark pair is 0");

  UniversalityGap g;
  g.lhs = growth_rate_with_cost(ledger) - benchmark;
  const double tail = rule == Rule::IITC ? gamma * r_floor - gamma : gamma * r_floor - gamma / r_floor;
  g.rhs = std::log(psi_first / psi_last) / N + log_cost_sum(ledger) / N + tail;
  g.holds = g.lhs >= g.rhs - 1e-9;
  return g;
}

struct BacktestSummary {
  double I_N = 0.0;
  double LI_N = 0.0;
  double F_N = 0.0;  // final capital over f0, costs included
  double R_N = 0.0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> theta;
  std::size_t parked_days = 0;
  std::size_t fallback_days = 0;
};

inline BacktestSummary summarize(const BacktestLedger& ledger) {
  BacktestSummary s;
  s.I_N = final_return_no_cost(ledger);
  s.LI_N = growth_rate_no_cost(ledger);
  s.F_N = final_return_with_cost(ledger);
  s.R_N = growth_rate_with_cost(ledger);
  for (const auto& d : ledger.days) {
    s.parked_days += d.parked ? 1 : 0;
    s.fallback_days += d.fallback ? 1 : 0;
  }
  // Success rate per complete segment from the recorded predictions; η skips
  // segment 0, which has no completed predecessor.
  const std::size_t L = ledger.config.predictor.segment.L;
  const std::size_t segments = ledger.days.size() / L;
  std::vector<bool> effective;
  for (std::size_t n = 0; n < segments; ++n) {
    std::vector<Order> pred;
    std::vector<Order> actual;
    for (std::size_t k = n * L; k < (n + 1) * L; ++k) {
      if (!ledger.days[k].has_prediction) continue;
      pred.push_back(ledger.days[k].order_pred);
      actual.push_back(ledger.days[k].order_actual);
    }
    const double theta = actual.empty() ? 0.0 : success_rate(pred, actual);
    s.theta.push_back(theta);
    if (n > 0) effective.push_back(is_effective(theta));
  }
  if (!effective.empty()) s.eta = effectiveness_ratio(effective);
  return s;
}

}  // namespace fxfolio
