#pragma once

// Exchange-rate matrices, trading matrices, exchange options and return
// matrices.
//
// Layout convention: entry (i,j) with i<j is the bank's sell quote for the
// pair {i,j} (investor buys j with i), entry (j,i) is the bank's buy quote for
// the same pair. Both quotes are in the same units, so a valid matrix has
// entry(i,j) > entry(j,i) > 0 for every i<j. Wherever a formula needs "the
// other quote" of a pair at position (a,b), it is read at the mirror (b,a).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "fxfolio/error.hpp"
#include "fxfolio/grid.hpp"

namespace fxfolio {

using Day = long;

class RateMatrix {
 public:
  /// Validates the grid: m > 1, unit diagonal, strictly positive entries and
  /// entry(i,j) > entry(j,i) for i<j.
  static RateMatrix validate(SquareGrid candidate, Day day) {
    const std::size_t m = candidate.size();
    if (m < 2) throw Error(ErrorCode::InvalidM, "rate matrix needs m > 1", std::nullopt, day);
    for (std::size_t i = 0; i < m; ++i) {
      if (candidate(i, i) != 1.0) {
        throw Error(ErrorCode::NonUnitDiagonal, "diagonal entry must be 1",
                    Position{i, i}, day);
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (!(candidate(i, j) > 0.0) || !std::isfinite(candidate(i, j))) {
          throw Error(ErrorCode::NonPositiveEntry,
                      "rate " + std::to_string(candidate(i, j)) + " is not positive",
                      Position{i, j}, day);
        }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (!(candidate(i, j) > candidate(j, i))) {
          throw Error(ErrorCode::SpreadViolation,
                      "sell quote must exceed the mirrored buy quote",
                      Position{i, j}, day);
        }
    return RateMatrix(std::move(candidate), day);
  }

  Day day() const noexcept { return day_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return grid_(i, j); }
  const SquareGrid& grid() const noexcept { return grid_; }

  /// Upper (sell) quote of the pair that position (a,b) belongs to.
  double sell_quote(std::size_t a, std::size_t b) const noexcept {
    return a < b ? grid_(a, b) : grid_(b, a);
  }
  /// Lower (buy) quote of the pair that position (a,b) belongs to.
  double buy_quote(std::size_t a, std::size_t b) const noexcept {
    return a < b ? grid_(b, a) : grid_(a, b);
  }

  friend bool operator==(const RateMatrix&, const RateMatrix&) = default;

 private:
  RateMatrix(SquareGrid g, Day day) : grid_(std::move(g)), day_(day) {}
  SquareGrid grid_;
  Day day_ = 0;
};

inline RateMatrix validate_rate_matrix(SquareGrid candidate, Day day) {
  return RateMatrix::validate(std::move(candidate), day);
}

/// Opening and closing quotes of one trading day.
class DailyQuotes {
 public:
  DailyQuotes(RateMatrix open, RateMatrix close)
      : open_(std::move(open)), close_(std::move(close)) {
    if (open_.day() != close_.day()) {
      throw Error(ErrorCode::DayMismatch, "opening and closing quotes carry different days",
                  std::nullopt, open_.day());
    }
    if (open_.size() != close_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "opening and closing quotes differ in size",
                  std::nullopt, open_.day());
    }
  }

  const RateMatrix& open() const noexcept { return open_; }
  const RateMatrix& close() const noexcept { return close_; }
  Day day() const noexcept { return open_.day(); }
  std::size_t size() const noexcept { return open_.size(); }

  friend bool operator==(const DailyQuotes&, const DailyQuotes&) = default;

 private:
  RateMatrix open_;
  RateMatrix close_;
};

/// Gross-return ("price relative") matrix: zero diagonal, nonnegative, and at
/// most one nonzero entry per mirrored pair.
class ReturnMatrix {
 public:
  static ReturnMatrix validate(SquareGrid candidate, Day day = 0) {
    const std::size_t m = candidate.size();
    if (m < 2) throw Error(ErrorCode::InvalidM, "return matrix needs m > 1", std::nullopt, day);
    for (std::size_t i = 0; i < m; ++i) {
      if (candidate(i, i) != 0.0) {
        throw Error(ErrorCode::NonZeroDiagonal, "diagonal return must be 0",
                    Position{i, i}, day);
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (!(candidate(i, j) >= 0.0) || !std::isfinite(candidate(i, j))) {
          throw Error(ErrorCode::NegativeEntry, "returns must be finite and nonnegative",
                      Position{i, j}, day);
        }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (candidate(i, j) != 0.0 && candidate(j, i) != 0.0) {
          throw Error(ErrorCode::ComplementarityViolation,
                      "both mirrored returns are nonzero", Position{i, j}, day);
        }
    return ReturnMatrix(std::move(candidate), day);
  }

  static ReturnMatrix zero(std::size_t m, Day day = 0) {
    return validate(SquareGrid(m, 0.0), day);
  }

  Day day() const noexcept { return day_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return grid_(i, j); }
  const SquareGrid& grid() const noexcept { return grid_; }

  double max_entry() const noexcept {
    double best = 0.0;
    for (double v : grid_.values()) best = v > best ? v : best;
    return best;
  }

  friend bool operator==(const ReturnMatrix&, const ReturnMatrix&) = default;

 private:
  ReturnMatrix(SquareGrid g, Day day) : grid_(std::move(g)), day_(day) {}
  SquareGrid grid_;
  Day day_ = 0;
};

enum class Anchor { day_k, day_k_plus_1 };

inline void require_consecutive(const RateMatrix& s_k, const RateMatrix& s_k1) {
  if (s_k1.day() != s_k.day() + 1) {
    throw Error(ErrorCode::DayMismatch,
                "expected day " + std::to_string(s_k.day() + 1) + ", got " +
                    std::to_string(s_k1.day()),
                std::nullopt, s_k1.day());
  }
  if (s_k.size() != s_k1.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rate matrices differ in size");
  }
}

/// Splices two consecutive days. Anchor day_k: diagonal and upper triangle
/// from day k, lower triangle from day k+1. Anchor day_k_plus_1: diagonal and
/// upper from k+1, lower from k.
inline SquareGrid trading_matrix(const RateMatrix& s_k, const RateMatrix& s_k1, Anchor anchor) {
  require_consecutive(s_k, s_k1);
  const RateMatrix& upper = anchor == Anchor::day_k ? s_k : s_k1;
  const RateMatrix& lower = anchor == Anchor::day_k ? s_k1 : s_k;
  const std::size_t m = s_k.size();
  SquareGrid out(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = i > j ? lower(i, j) : upper(i, j);
  return out;
}

struct ExchangeOptions {
  SquareGrid sell;  // ŝ̄: next-day buy quote when it beats today's sell quote
  SquareGrid buy;   // ŝ̲: next-day buy quote when the next-day sell quote beats today's buy quote
};

/// Foreign exchange options for day k+1. Every off-diagonal entry is either 0
/// (no profitable trade) or the day-(k+1) buy quote of the pair.
inline ExchangeOptions exchange_options(const RateMatrix& s_k, const RateMatrix& s_k1) {
  require_consecutive(s_k, s_k1);
  const std::size_t m = s_k.size();
  ExchangeOptions out{SquareGrid(m), SquareGrid(m)};
  for_each_off_diagonal(m, [&](std::size_t a, std::size_t b) {
    const double next_buy = s_k1.buy_quote(a, b);
    out.sell(a, b) = next_buy > s_k.sell_quote(a, b) ? next_buy : 0.0;
    out.buy(a, b) = s_k1.sell_quote(a, b) > s_k.buy_quote(a, b) ? next_buy : 0.0;
  });
  return out;
}

enum class ReturnHorizon { same_day, next_day };

/// Builds R(k) (same-day) or R(k+1) (day-k opening over day-(k+1) closing).
/// Entry (a,b) = open(a,b) / close(b,a) when open(a,b) > close(b,a), else 0.
inline ReturnMatrix compute_return_matrix(const DailyQuotes& quotes_k,
                                          const DailyQuotes* quotes_k1,
                                          ReturnHorizon which) {
  const RateMatrix* closing = &quotes_k.close();
  Day day = quotes_k.day();
  if (which == ReturnHorizon::next_day) {
    if (quotes_k1 == nullptr) {
      throw Error(ErrorCode::MissingNextDay, "next-day return needs day k+1 quotes",
                  std::nullopt, quotes_k.day());
    }
    require_consecutive(quotes_k.open(), quotes_k1->open());
    closing = &quotes_k1->close();
    day = quotes_k1->day();
  }
  const RateMatrix& opening = quotes_k.open();
  const std::size_t m = opening.size();
  SquareGrid r(m, 0.0);
  for_each_off_diagonal(m, [&](std::size_t a, std::size_t b) {
    const double num = opening(a, b);
    const double den = (*closing)(b, a);
    r(a, b) = num > den ? num / den : 0.0;
  });
  return ReturnMatrix::validate(std::move(r), day);
}

inline ReturnMatrix compute_return_matrix(const DailyQuotes& quotes_k) {
  return compute_return_matrix(quotes_k, nullptr, ReturnHorizon::same_day);
}

inline double reciprocal_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::NonPositiveRate, "rate must be positive, got " + std::to_string(rate));
  }
  return 1.0 / rate;
}

}  // namespace fxfolio
