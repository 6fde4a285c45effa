#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "fxfolio/error.hpp"

namespace fxfolio {

/// Dense m-by-m grid of doubles, row-major. Plain storage with no invariants;
/// the domain types (RateMatrix, ReturnMatrix, PortfolioMatrix) wrap it and
/// validate on construction.
class SquareGrid {
 public:
  SquareGrid() = default;

  explicit SquareGrid(std::size_t m, double fill = 0.0)
      : m_(m), values_(m * m, fill) {}

  SquareGrid(std::initializer_list<std::initializer_list<double>> rows)
      : m_(rows.size()), values_() {
    values_.reserve(m_ * m_);
    for (const auto& row : rows) {
      if (row.size() != m_) {
        throw Error(ErrorCode::DimensionMismatch, "grid rows must be square");
      }
      values_.insert(values_.end(), row.begin(), row.end());
    }
  }

  static SquareGrid from_rows(const std::vector<std::vector<double>>& rows) {
    SquareGrid g(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw Error(ErrorCode::DimensionMismatch, "grid rows must be square");
      }
      for (std::size_t j = 0; j < rows.size(); ++j) g(i, j) = rows[i][j];
    }
    return g;
  }

  /// Builds a grid from a flat row-major vector of length m*m.
  static SquareGrid from_flat(std::size_t m, std::vector<double> flat) {
    if (flat.size() != m * m) {
      throw Error(ErrorCode::DimensionMismatch,
                  "flat data length does not match m*m");
    }
    SquareGrid g;
    g.m_ = m;
    g.values_ = std::move(flat);
    return g;
  }

  std::size_t size() const noexcept { return m_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    assert(i < m_ && j < m_);
    return values_[i * m_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) noexcept {
    assert(i < m_ && j < m_);
    return values_[i * m_ + j];
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  SquareGrid transposed() const {
    SquareGrid t(m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double sum() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  friend bool operator==(const SquareGrid&, const SquareGrid&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> values_;
};

inline void require_same_size(const SquareGrid& a, const SquareGrid& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "grids are " + std::to_string(a.size()) + "x" +
                    std::to_string(a.size()) + " and " +
                    std::to_string(b.size()) + "x" + std::to_string(b.size()));
  }
}

/// Visits every off-diagonal position (i, j).
template <class F>
void for_each_off_diagonal(std::size_t m, F&& f) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) f(i, j);
}

}  // namespace fxfolio
