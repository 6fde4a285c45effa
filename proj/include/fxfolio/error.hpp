#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fxfolio {

enum class ErrorCode {
  // market_model
  InvalidM,
  NonUnitDiagonal,
  NonPositiveEntry,
  SpreadViolation,
  DayMismatch,
  MissingNextDay,
  ComplementarityViolation,
  NonZeroDiagonal,
  NegativeEntry,
  NonPositiveRate,
  // portfolio_algebra
  DimensionMismatch,
  InvalidPortfolio,
  ZeroReturn,
  SupportViolation,
  // cost_model
  NonPositiveCapital,
  NoConvergence,
  PreconditionViolation,
  InvalidC,
  CostExceedsCapital,
  InvalidParams,
  // update_rules
  ZeroDiamond,
  // cross_rate_predictor
  EmptyRange,
  NoPredecessor,
  TooShort,
  EmptyHistory,
  InsufficientHistory,
  LengthMismatch,
  EmptySequence,
  // backtest_engine
  TooFewDays,
  EmptyLedger,
  NonPositiveDiamond,
  CostRatioAtLeastOne,
  NonPositivePairReturn,
  NormalizationViolated,
  InvalidBlockUnit,
  // data_io
  ParseError,
  InvariantError,
  NonMonotoneDays,
  InvalidSpec,
  InfeasibleTargets,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidM: return "InvalidM";
    case ErrorCode::NonUnitDiagonal: return "NonUnitDiagonal";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::SpreadViolation: return "SpreadViolation";
    case ErrorCode::DayMismatch: return "DayMismatch";
    case ErrorCode::MissingNextDay: return "MissingNextDay";
    case ErrorCode::ComplementarityViolation: return "ComplementarityViolation";
    case ErrorCode::NonZeroDiagonal: return "NonZeroDiagonal";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidPortfolio: return "InvalidPortfolio";
    case ErrorCode::ZeroReturn: return "ZeroReturn";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::NonPositiveCapital: return "NonPositiveCapital";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::InvalidC: return "InvalidC";
    case ErrorCode::CostExceedsCapital: return "CostExceedsCapital";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ZeroDiamond: return "ZeroDiamond";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::NoPredecessor: return "NoPredecessor";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::TooFewDays: return "TooFewDays";
    case ErrorCode::EmptyLedger: return "EmptyLedger";
    case ErrorCode::NonPositiveDiamond: return "NonPositiveDiamond";
    case ErrorCode::CostRatioAtLeastOne: return "CostRatioAtLeastOne";
    case ErrorCode::NonPositivePairReturn: return "NonPositivePairReturn";
    case ErrorCode::NormalizationViolated: return "NormalizationViolated";
    case ErrorCode::InvalidBlockUnit: return "InvalidBlockUnit";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantError: return "InvariantError";
    case ErrorCode::NonMonotoneDays: return "NonMonotoneDays";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InfeasibleTargets: return "InfeasibleTargets";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Zero-based matrix position. Messages print it one-based, (1,2) style.
struct Position {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

/// The single exception type thrown by the library. Carries a stable code
/// plus optional location context (matrix position, day index).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<Position> where = std::nullopt,
        std::optional<long> day = std::nullopt)
      : std::runtime_error(format(code, message, where, day)),
        code_(code),
        where_(where),
        day_(day) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<Position>& where() const noexcept { return where_; }
  const std::optional<long>& day() const noexcept { return day_; }

  /// Same error, with a day index attached (used when a backtest propagates
  /// a numeric failure).
  Error with_day(long day) const {
    return Error(code_, bare_message(), where_, day);
  }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            const std::optional<Position>& where,
                            const std::optional<long>& day) {
    std::string out(to_string(code));
    if (day) out += " on day " + std::to_string(*day);
    if (where) {
      out += " at (" + std::to_string(where->row + 1) + "," +
             std::to_string(where->col + 1) + ")";
    }
    out += ": ";
    out += message;
    return out;
  }

  std::string bare_message() const {
    const std::string full = what();
    const auto pos = full.find(": ");
    return pos == std::string::npos ? full : full.substr(pos + 2);
  }

  ErrorCode code_;
  std::optional<Position> where_;
  std::optional<long> day_;
};

}  // namespace fxfolio
