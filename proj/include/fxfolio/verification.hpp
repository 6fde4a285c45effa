#pragma once

// Randomized sweeps behind `fxfolio verify`. Replicate r draws from seed + r,
// replicates run on up to `jobs` threads and results keep replicate order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fxfolio/backtest_engine.hpp"
#include "fxfolio/cost_model.hpp"
#include "fxfolio/synthetic.hpp"

namespace fxfolio {

/// Runs body(r) for r in [0, count) on up to jobs threads.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < count; r = next++) {
        try {
          body(r);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct ReplicateOutcome {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool pass = true;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<ReplicateOutcome> replicates;
  std::vector<std::string> lines;  // criterion-level PASS/FAIL lines
  bool pass = true;
};

/// Capital identities of one ledger: F'_k = F_{k−1} − T_k, F_k = F'_k(ψ⋄R) on
/// trading days, c_1 = 0, and R_N = LI_N + (1/N)Σlog(1−c_k). Returns the first
/// failure, if any.
inline std::optional<std::string> check_ledger_identities(const BacktestLedger& ledger, double tol = 1e-9) {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); };
  double f_prev = ledger.f0;
  for (const auto& d : ledger.days) {
    if (rel(d.Fp, f_prev - d.T) > tol) return "F' identity fails on day " + std::to_string(d.day);
    const double expect = d.parked ? d.Fp : d.Fp * d.diamond;
    if (rel(d.F, expect) > tol) return "F identity fails on day " + std::to_string(d.day);
    f_prev = d.F;
  }
  if (ledger.days.front().c != 0.0) return std::string("c_1 is not 0");
  const double N = static_cast<double>(ledger.days.size());
  if (rel(growth_rate_with_cost(ledger), growth_rate_no_cost(ledger) + log_cost_sum(ledger) / N) > tol) {
    return std::string("R_N decomposition fails");
  }
  return std::nullopt;
}

struct UniversalityCase {
  std::size_t m = 3;
  double c = 0.0;
  double gamma = 0.0;
};

inline UniversalityCase universality_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t ms[] = {2, 3, 4};
  const double cs[] = {0.0, 0.005};
  const double gs[] = {0.0, 0.1, 0.5};
  return {ms[rng() % 3], cs[rng() % 2], gs[rng() % 3]};
}

/// Normalized synthetic market, lag-1 linear prediction, both rules: the gap
/// inequality on every active pair, the per-day cost-ratio ceiling and the
/// ledger identities.
inline ReplicateOutcome universality_replicate(std::size_t replicate, std::uint64_t seed, std::size_t N = 250,
                                               double r_floor = 0.5) {
  ReplicateOutcome out{replicate, seed, true, ""};
  const UniversalityCase uc = universality_case(seed);
  SyntheticMarketSpec spec;
  spec.m = uc.m;
  spec.N = N;
  spec.seed = seed;
  spec.normalize = true;
  spec.r_floor = r_floor;
  spec.spread_epsilon = 0.02;
  spec.volatility = 0.01;
  const auto quotes = generate_market(spec);
  std::vector<ReturnMatrix> returns;
  for (const auto& q : quotes) returns.push_back(normalize_returns(compute_return_matrix(q)));

  std::ostringstream why;
  for (Rule rule : {Rule::IITC, Rule::EIITC}) {
    BacktestConfig cfg;
    cfg.prediction = PredictionMode::linear;
    cfg.lag_weights = {1.0};
    cfg.rule = rule;
    cfg.gamma.gamma0 = uc.gamma;
    cfg.costs.c = uc.c;
    const BacktestLedger ledger = run_backtest_returns(returns, cfg);

    if (auto bad = check_ledger_identities(ledger)) {
      out.pass = false;
      why << to_string(rule) << ": " << *bad << "; ";
    }
    const double ceiling = theoretical_cost_ratio_bound(rule, uc.gamma, r_floor, uc.c);
    for (const auto& d : ledger.days)
      if (d.c > ceiling + 1e-9) {
        out.pass = false;
        why << to_string(rule) << ": c_k=" << d.c << " exceeds " << ceiling << " on day " << d.day << "; ";
        break;
      }
    for_each_off_diagonal(uc.m, [&](std::size_t i, std::size_t j) {
      if (ledger.days.front().r(i, j) == 0.0) return;  // inactive orientation
      try {
        const UniversalityGap g = universality_gap(ledger, {i, j}, rule, uc.gamma, r_floor);
        if (!g.holds) {
          out.pass = false;
          why << to_string(rule) << " pair (" << i + 1 << "," << j + 1 << "): lhs " << g.lhs << " < rhs " << g.rhs
              << "; ";
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NormalizationViolated) throw;
      }
    });
  }
  out.detail = why.str();
  return out;
}

inline SuiteReport universality_suite(std::size_t replicates, std::uint64_t seed, std::size_t jobs) {
  SuiteReport rep;
  rep.suite = "universality";
  rep.replicates.resize(replicates);
  parallel_for(replicates, jobs, [&](std::size_t r) { rep.replicates[r] = universality_replicate(r, seed + r); });
  std::size_t failures = 0;
  for (const auto& o : rep.replicates) failures += o.pass ? 0 : 1;
  rep.pass = failures == 0;
  rep.lines.push_back(std::string(rep.pass ? "PASS" : "FAIL") + " universality: " + std::to_string(replicates) +
                      " markets, " + std::to_string(failures) + " failing");
  return rep;
}

struct ProfitabilityResult {
  double eta = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// η of the cross-rate pipeline on a finitely dependent order process.
inline double order_process_eta(const SyntheticOrderSpec& spec, const PredictorConfig& cfg) {
  const OrderProcess proc = generate_order_process(spec);
  return evaluate_orders(cfg, proc.orders).eta;
}

/// MPCR1 on targets with P_AA + P_BB = persistence, MPCR2 on targets with
/// P_AB + P_BA = switching; thresholds persistence − 0.05 and 0.5 − 0.05.
inline SuiteReport profitability_suite(double persistence, double switching, std::size_t segments,
                                       std::uint64_t seed, std::size_t L = 5, std::size_t K = 10) {
  SuiteReport rep;
  rep.suite = "profitability";
  struct Case {
    Mpcr mpcr;
    double diag;
    double threshold;
  };
  const Case cases[] = {{Mpcr::MPCR1, persistence, persistence - 0.05}, {Mpcr::MPCR2, 1.0 - switching, 0.5 - 0.05}};
  std::size_t idx = 0;
  for (const auto& c : cases) {
    SyntheticOrderSpec spec;
    spec.segment_count = segments;
    spec.L = L;
    spec.K = K;
    spec.seed = seed + idx;
    spec.p_aa = spec.p_bb = c.diag / 2.0;
    spec.p_ab = spec.p_ba = (1.0 - c.diag) / 2.0;
    PredictorConfig pc;
    pc.mpcr = c.mpcr;
    pc.mpo = Mpo::MPO1;
    pc.segment.L = L;
    const double eta = order_process_eta(spec, pc);
    const bool ok = eta >= c.threshold;
    rep.pass = rep.pass && ok;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << " profitability " << to_string(c.mpcr) << "+mpo1: eta=" << eta
         << " threshold=" << c.threshold << " seed=" << spec.seed;
    rep.lines.push_back(line.str());
    rep.replicates.push_back({idx, spec.seed, ok, line.str()});
    ++idx;
  }
  return rep;
}

/// Randomized fixed-point solves; every T must lie in the sandwich.
inline ReplicateOutcome cost_replicate(std::size_t replicate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t m = 2 + rng() % 4;
  auto random_portfolio = [&](double zero_prob) {
    SquareGrid g(m, 0.0);
    for_each_off_diagonal(m, [&](std::size_t i, std::size_t j) { g(i, j) = unit(rng) < zero_prob ? 0.0 : unit(rng); });
    if (g.sum() == 0.0) g(0, 1) = 1.0;
    return PortfolioMatrix::normalized(std::move(g));
  };
  SquareGrid rg(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = 0.5 + unit(rng);
      if (unit(rng) < 0.5) rg(i, j) = v; else rg(j, i) = v;
    }
  const ReturnMatrix r = ReturnMatrix::validate(std::move(rg));
  PortfolioMatrix psi = random_portfolio(0.0);
  const PortfolioMatrix next = random_portfolio(0.3);
  const double fp = 0.5 + unit(rng);
  const double d = diamond(psi, r);
  CostParams params;
  params.c = 0.05 * unit(rng);
  const double f = fp * d;
  const double t = solve_transaction_cost(f, fp, psi, next, r, params);
  const auto [lo, hi] = cost_bounds(delta(next, realized_portfolio(psi, r), f), params.c);
  ReplicateOutcome out{replicate, seed, t >= lo - 1e-9 && t <= hi + 1e-9, ""};
  if (!out.pass) out.detail = "T=" + std::to_string(t) + " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]";
  return out;
}

inline SuiteReport cost_suite(std::size_t replicates, std::uint64_t seed, std::size_t jobs) {
  SuiteReport rep;
  rep.suite = "cost";
  rep.replicates.resize(replicates);
  parallel_for(replicates, jobs, [&](std::size_t r) { rep.replicates[r] = cost_replicate(r, seed + r); });
  std::size_t failures = 0;
  for (const auto& o : rep.replicates) failures += o.pass ? 0 : 1;
  rep.pass = failures == 0;
  rep.lines.push_back(std::string(rep.pass ? "PASS" : "FAIL") + " cost sandwich: " + std::to_string(replicates) +
                      " solves, " + std::to_string(failures) + " failing");
  return rep;
}

}  // namespace fxfolio
