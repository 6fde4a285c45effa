#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "fxfolio/error.hpp"
#include "fxfolio/grid.hpp"
#include "fxfolio/market_model.hpp"

namespace fxfolio {

inline constexpr double kSimplexTolerance = 1e-9;

/// Capital fractions over ordered currency pairs: zero diagonal, nonnegative,
/// summing to one.
class PortfolioMatrix {
 public:
  static PortfolioMatrix validate(SquareGrid weights, Day day = 0) {
    const std::size_t m = weights.size();
    if (m < 2) throw Error(ErrorCode::InvalidM, "portfolio needs m > 1", std::nullopt, day);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double w = weights(i, j);
        if (i == j && w != 0.0) {
          throw Error(ErrorCode::InvalidPortfolio, "diagonal weight must be 0",
                      Position{i, j}, day);
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw Error(ErrorCode::InvalidPortfolio, "weights must be nonnegative",
                      Position{i, j}, day);
        }
        total += w;
      }
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
      throw Error(ErrorCode::InvalidPortfolio,
                  "weights sum to " + std::to_string(total) + ", not 1", std::nullopt, day);
    }
    return PortfolioMatrix(std::move(weights), day);
  }

  /// Rescales nonnegative weights to sum to one, then validates.
  static PortfolioMatrix normalized(SquareGrid weights, Day day = 0) {
    const double total = weights.sum();
    if (!(total > 0.0)) {
      throw Error(ErrorCode::InvalidPortfolio, "cannot normalize zero weights", std::nullopt, day);
    }
    for (double& w : weights.values()) w /= total;
    return validate(std::move(weights), day);
  }

  Day day() const noexcept { return day_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return weights_(i, j); }
  const SquareGrid& grid() const noexcept { return weights_; }

  PortfolioMatrix with_day(Day day) const { return PortfolioMatrix(weights_, day); }

  friend bool operator==(const PortfolioMatrix&, const PortfolioMatrix&) = default;

 private:
  PortfolioMatrix(SquareGrid g, Day day) : weights_(std::move(g)), day_(day) {}
  SquareGrid weights_;
  Day day_ = 0;
};

/// Entrywise product.
inline SquareGrid boxtimes(const SquareGrid& a, const SquareGrid& b) {
  require_same_size(a, b);
  SquareGrid c(a.size());
  auto out = c.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = av[k] * bv[k];
  return c;
}

/// Grand sum of psi ⊠ r: the day's gross portfolio return.
inline double diamond(const PortfolioMatrix& psi, const ReturnMatrix& r) {
  require_same_size(psi.grid(), r.grid());
  double s = 0.0;
  auto pv = psi.grid().values();
  auto rv = r.grid().values();
  for (std::size_t k = 0; k < pv.size(); ++k) s += pv[k] * rv[k];
  return s;
}

/// Weight distribution reached by market drift at the end of the day.
inline PortfolioMatrix realized_portfolio(const PortfolioMatrix& psi, const ReturnMatrix& r) {
  const double gross = diamond(psi, r);
  if (!(gross > 0.0)) {
    throw Error(ErrorCode::ZeroReturn, "psi ⋄ R = 0, no realized portfolio exists",
                std::nullopt, r.day());
  }
  SquareGrid w = boxtimes(psi.grid(), r.grid());
  for (double& v : w.values()) v /= gross;
  return PortfolioMatrix::validate(std::move(w), psi.day());
}

inline double l1_distance(const PortfolioMatrix& a, const PortfolioMatrix& b) {
  require_same_size(a.grid(), b.grid());
  double d = 0.0;
  auto av = a.grid().values();
  auto bv = b.grid().values();
  for (std::size_t k = 0; k < av.size(); ++k) d += std::abs(av[k] - bv[k]);
  return d;
}

/// Kullback-Leibler divergence of `next` from `base`, natural log, 0·log 0 = 0.
inline double relative_entropy(const PortfolioMatrix& next, const PortfolioMatrix& base) {
  require_same_size(next.grid(), base.grid());
  const std::size_t m = next.size();
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = next(i, j);
      if (p == 0.0) continue;
      const double q = base(i, j);
      if (q == 0.0) {
        throw Error(ErrorCode::SupportViolation, "next puts weight where base has none",
                    Position{i, j});
      }
      d += p * std::log(p / q);
    }
  }
  // Rounding can push an exact zero slightly negative.
  return d < 0.0 ? 0.0 : d;
}

inline PortfolioMatrix uniform_portfolio(std::size_t m, Day day = 0) {
  if (m < 2) throw Error(ErrorCode::InvalidM, "uniform portfolio needs m > 1");
  const double w = 1.0 / static_cast<double>(m * (m - 1));
  SquareGrid g(m, w);
  for (std::size_t i = 0; i < m; ++i) g(i, i) = 0.0;
  return PortfolioMatrix::validate(std::move(g), day);
}

}  // namespace fxfolio
