#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"
#include "fxfolio/portfolio_algebra.hpp"

namespace fxfolio {

struct CostParams {
  double c = 0.0;
  double fp_tol = 1e-10;
  int fp_max_iter = 10000;

  void validate() const {
    if (!(c >= 0.0 && c < 1.0)) {
      throw Error(ErrorCode::InvalidC, "cost rate must satisfy 0 <= c < 1, got " + std::to_string(c));
    }
    if (!(fp_tol > 0.0)) throw Error(ErrorCode::InvalidParams, "fp_tol must be positive");
    if (fp_max_iter < 1) throw Error(ErrorCode::InvalidParams, "fp_max_iter must be >= 1");
  }
};

/// Rebalancing volume F_k · d(next, realized).
inline double delta(const PortfolioMatrix& next, const PortfolioMatrix& realized, double capital_f_k) {
  if (!(capital_f_k > 0.0)) {
    throw Error(ErrorCode::NonPositiveCapital, "F_k must be positive, got " + std::to_string(capital_f_k));
  }
  return capital_f_k * l1_distance(next, realized);
}

/// One application of T -> c·Σ|F_k ψ⁺ − F'_k ψ r − T ψ⁺|.
inline double transaction_cost_map(double t, double f_k, double f_prime_k, const PortfolioMatrix& psi_k,
                                   const PortfolioMatrix& psi_next, const ReturnMatrix& r_k, double c) {
  const std::size_t m = psi_k.size();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      s += std::abs(f_k * psi_next(i, j) - f_prime_k * psi_k(i, j) * r_k(i, j) - t * psi_next(i, j));
  return c * s;
}

struct CostSolution {
  double cost = 0.0;
  int iterations = 0;
};

inline CostSolution solve_transaction_cost_detailed(double f_k, double f_prime_k, const PortfolioMatrix& psi_k,
                                                    const PortfolioMatrix& psi_next, const ReturnMatrix& r_k,
                                                    const CostParams& params) {
  params.validate();
  require_same_size(psi_k.grid(), psi_next.grid());
  require_same_size(psi_k.grid(), r_k.grid());
  if (!(f_k > 0.0)) throw Error(ErrorCode::NonPositiveCapital, "F_k must be positive");
  if (!(f_prime_k > 0.0)) throw Error(ErrorCode::NonPositiveCapital, "F'_k must be positive");
  const double expected = f_prime_k * diamond(psi_k, r_k);
  if (std::abs(f_k - expected) > 1e-9 * std::max(std::abs(f_k), std::abs(expected))) {
    throw Error(ErrorCode::PreconditionViolation,
                "F_k = " + std::to_string(f_k) + " but F'_k·(psi ⋄ R) = " + std::to_string(expected));
  }

  const PortfolioMatrix next = PortfolioMatrix::normalized(psi_next.grid(), psi_next.day());
  if (params.c == 0.0) return {0.0, 0};

  // Steps below a few ulps of F_k are rounding noise at large capital.
  const double tol = std::max(params.fp_tol, 16.0 * std::numeric_limits<double>::epsilon() * f_k);
  double t = 0.0;
  for (int n = 1; n <= params.fp_max_iter; ++n) {
    const double t_next = transaction_cost_map(t, f_k, f_prime_k, psi_k, next, r_k, params.c);
    if (std::abs(t_next - t) < tol) return {t_next, n};
    t = t_next;
  }
  throw Error(ErrorCode::NoConvergence,
              "no fixed point within " + std::to_string(params.fp_max_iter) + " iterations");
}

inline double solve_transaction_cost(double f_k, double f_prime_k, const PortfolioMatrix& psi_k,
                                     const PortfolioMatrix& psi_next, const ReturnMatrix& r_k,
                                     const CostParams& params) {
  return solve_transaction_cost_detailed(f_k, f_prime_k, psi_k, psi_next, r_k, params).cost;
}

inline std::pair<double, double> cost_bounds(double delta_val, double c) {
  if (!(c >= 0.0 && c < 1.0)) throw Error(ErrorCode::InvalidC, "cost rate must satisfy 0 <= c < 1");
  return {c / (1.0 + c) * delta_val, c / (1.0 - c) * delta_val};
}

inline double cost_ratio(double t_k, double f_prev) {
  if (!(f_prev > 0.0)) throw Error(ErrorCode::NonPositiveCapital, "F_{k-1} must be positive");
  if (!(t_k < f_prev)) {
    throw Error(ErrorCode::CostExceedsCapital,
                "cost " + std::to_string(t_k) + " is not below capital " + std::to_string(f_prev));
  }
  return t_k / f_prev;
}

enum class Rule { IITC, EIITC };

inline std::string_view to_string(Rule rule) { return rule == Rule::IITC ? "iitc" : "eiitc"; }

/// Per-day cost-ratio ceiling when every nonzero return lies in [r_floor, 1]:
/// (c/(1−c))·e^{g(1−r)}·(1−e^{−g(1−r)}) with g = γ (IITC) or γ/r (EIITC).
inline double theoretical_cost_ratio_bound(Rule rule, double gamma, double r_floor, double c) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidParams, "gamma must be >= 0");
  if (!(r_floor > 0.0 && r_floor < 1.0)) throw Error(ErrorCode::InvalidParams, "r_floor must lie in (0,1)");
  if (!(c >= 0.0 && c < 1.0)) throw Error(ErrorCode::InvalidParams, "c must lie in [0,1)");
  const double g = rule == Rule::IITC ? gamma : gamma / r_floor;
  const double x = g * (1.0 - r_floor);
  return c / (1.0 - c) * std::exp(x) * (-std::expm1(-x));
}

}  // namespace fxfolio
