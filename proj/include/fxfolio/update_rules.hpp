#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "fxfolio/cost_model.hpp"
#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"
#include "fxfolio/portfolio_algebra.hpp"

namespace fxfolio {

struct UpdateConfig {
  Rule rule = Rule::IITC;
  double gamma = 0.1;
  // Weight of the uniform portfolio mixed into every update; 0 keeps dead
  // positions dead.
  double support_floor = 0.0;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw Error(ErrorCode::InvalidParams, "gamma must be finite and >= 0");
    }
    if (!(support_floor >= 0.0 && support_floor < 1.0)) {
      throw Error(ErrorCode::InvalidParams, "support_floor must lie in [0,1)");
    }
  }
};

namespace detail {

// ψ'_ij·exp(scale·R'_ij) normalized, with the largest live exponent shifted
// to zero.
inline PortfolioMatrix exponential_tilt(const PortfolioMatrix& realized, const ReturnMatrix& r_pred, double scale) {
  require_same_size(realized.grid(), r_pred.grid());
  const std::size_t m = realized.size();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (realized(i, j) > 0.0) shift = std::max(shift, scale * r_pred(i, j));

  SquareGrid w(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (realized(i, j) == 0.0) continue;
      w(i, j) = realized(i, j) * std::exp(scale * r_pred(i, j) - shift);
      total += w(i, j);
    }
  for (double& v : w.values()) v /= total;
  return PortfolioMatrix::validate(std::move(w), realized.day() + 1);
}

}  // namespace detail

inline PortfolioMatrix iitc_update(const PortfolioMatrix& realized, const ReturnMatrix& r_pred, double gamma) {
  if (gamma == 0.0) return realized.with_day(realized.day() + 1);
  return detail::exponential_tilt(realized, r_pred, gamma);
}

inline PortfolioMatrix eiitc_update(const PortfolioMatrix& realized, const ReturnMatrix& r_pred, double gamma) {
  const double d = diamond(realized, r_pred);
  if (!(d > 0.0)) {
    throw Error(ErrorCode::ZeroDiamond, "psi' ⋄ R' = 0, the exponent is undefined", std::nullopt,
                realized.day());
  }
  if (gamma == 0.0) return realized.with_day(realized.day() + 1);
  return detail::exponential_tilt(realized, r_pred, gamma / d);
}

inline PortfolioMatrix apply_support_floor(const PortfolioMatrix& psi, double floor) {
  if (floor == 0.0) return psi;
  const PortfolioMatrix u = uniform_portfolio(psi.size());
  SquareGrid w(psi.size());
  auto out = w.values();
  auto pv = psi.grid().values();
  auto uv = u.grid().values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - floor) * pv[k] + floor * uv[k];
  return PortfolioMatrix::normalized(std::move(w), psi.day());
}

inline PortfolioMatrix update_portfolio(const UpdateConfig& cfg, const PortfolioMatrix& realized,
                                        const ReturnMatrix& r_pred) {
  cfg.validate();
  PortfolioMatrix next = cfg.rule == Rule::IITC ? iitc_update(realized, r_pred, cfg.gamma)
                                                : eiitc_update(realized, r_pred, cfg.gamma);
  return apply_support_floor(next, cfg.support_floor);
}

/// Concave objective the closed-form update maximizes.
/// IITC:  γ·(ψ⁺ ⋄ R') − d_re(ψ⁺, ψ')
/// EIITC: γ·[log D + Σ R'_ij(ψ⁺_ij − ψ'_ij) / D] − d_re(ψ⁺, ψ'), D = ψ' ⋄ R'
inline double objective_value(Rule rule, const PortfolioMatrix& psi_next, const PortfolioMatrix& realized,
                              const ReturnMatrix& r_pred, double gamma) {
  require_same_size(psi_next.grid(), realized.grid());
  require_same_size(psi_next.grid(), r_pred.grid());
  const double entropy = relative_entropy(psi_next, realized);
  if (rule == Rule::IITC) return gamma * diamond(psi_next, r_pred) - entropy;

  const double d = diamond(realized, r_pred);
  if (!(d > 0.0)) throw Error(ErrorCode::ZeroDiamond, "psi' ⋄ R' = 0");
  if (!(diamond(psi_next, r_pred) > 0.0)) throw Error(ErrorCode::ZeroDiamond, "psi ⋄ R' = 0");
  double linear = 0.0;
  const std::size_t m = psi_next.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) linear += r_pred(i, j) * (psi_next(i, j) - realized(i, j));
  return gamma * (std::log(d) + linear / d) - entropy;
}

}  // namespace fxfolio
