#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fxfolio/backtest_engine.hpp"
#include "fxfolio/error.hpp"
#include "fxfolio/market_model.hpp"

namespace fxfolio {

inline constexpr std::string_view kRatesHeader = "day,i,j,open_rate,close_rate";

/// %.17g: enough digits to round-trip any double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline Error parse_error(std::size_t line, std::size_t column, const std::string& msg) {
  return Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

template <class T>
T parse_field(std::string_view field, std::size_t line, std::size_t column, const char* what) {
  const std::string_view f = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
    throw parse_error(line, column, std::string("cannot parse ") + what + " '" + std::string(f) + "'");
  }
  return value;
}

struct DayRows {
  long day = 0;
  std::size_t first_line = 0;
  std::map<std::pair<long, long>, std::pair<double, double>> quotes;
};

inline DailyQuotes assemble_day(const DayRows& rows) {
  long m = 0;
  for (const auto& [key, _] : rows.quotes) m = std::max({m, key.first, key.second});
  const auto need = static_cast<std::size_t>(m * (m - 1));
  if (m < 2 || rows.quotes.size() != need) {
    throw Error(ErrorCode::InvariantError,
                "expected one row per ordered pair, found " + std::to_string(rows.quotes.size()) + " rows",
                std::nullopt, rows.day);
  }
  const auto um = static_cast<std::size_t>(m);
  SquareGrid open(um, 1.0);
  SquareGrid close(um, 1.0);
  for (const auto& [key, q] : rows.quotes) {
    open(static_cast<std::size_t>(key.first - 1), static_cast<std::size_t>(key.second - 1)) = q.first;
    close(static_cast<std::size_t>(key.first - 1), static_cast<std::size_t>(key.second - 1)) = q.second;
  }
  try {
    return DailyQuotes(RateMatrix::validate(std::move(open), rows.day), RateMatrix::validate(std::move(close), rows.day));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantError, e.what(), e.where(), rows.day);
  }
}

}  // namespace detail

/// Reads a rates-csv stream: header `day,i,j,open_rate,close_rate`, one row
/// per ordered pair (1-based i != j), days contiguous and strictly increasing.
inline std::vector<DailyQuotes> parse_rates(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line) != kRatesHeader) {
    throw detail::parse_error(lineno, 1, "expected header '" + std::string(kRatesHeader) + "'");
  }

  std::vector<DailyQuotes> out;
  std::optional<detail::DayRows> current;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::vector<std::size_t> columns;
    std::size_t start = 0;
    for (std::size_t p = 0; p <= row.size(); ++p) {
      if (p == row.size() || row[p] == ',') {
        fields.push_back(row.substr(start, p - start));
        columns.push_back(start + 1);
        start = p + 1;
      }
    }
    if (fields.size() != 5) {
      throw detail::parse_error(lineno, 1, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    const long day = detail::parse_field<long>(fields[0], lineno, columns[0], "day");
    const long i = detail::parse_field<long>(fields[1], lineno, columns[1], "i");
    const long j = detail::parse_field<long>(fields[2], lineno, columns[2], "j");
    const double open = detail::parse_field<double>(fields[3], lineno, columns[3], "open_rate");
    const double close = detail::parse_field<double>(fields[4], lineno, columns[4], "close_rate");
    if (i < 1) throw detail::parse_error(lineno, columns[1], "currency index must be >= 1");
    if (j < 1) throw detail::parse_error(lineno, columns[2], "currency index must be >= 1");
    if (i == j) throw detail::parse_error(lineno, columns[2], "diagonal rows are implied, i must differ from j");

    if (!current || current->day != day) {
      if (current) {
        if (day < current->day) {
          throw Error(ErrorCode::NonMonotoneDays,
                      "line " + std::to_string(lineno) + ": day " + std::to_string(day) + " follows day " +
                          std::to_string(current->day));
        }
        out.push_back(detail::assemble_day(*current));
      }
      current = detail::DayRows{day, lineno, {}};
    }
    if (!out.empty() && day <= out.back().day()) {
      throw Error(ErrorCode::NonMonotoneDays, "line " + std::to_string(lineno) + ": day " + std::to_string(day) +
                                                  " repeats or precedes an earlier day");
    }
    if (!current->quotes.emplace(std::pair{i, j}, std::pair{open, close}).second) {
      throw detail::parse_error(lineno, 1, "duplicate row for pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  if (current) out.push_back(detail::assemble_day(*current));
  if (!out.empty()) {
    const std::size_t m = out.front().size();
    for (const auto& q : out)
      if (q.size() != m) {
        throw Error(ErrorCode::InvariantError, "currency count changes between days", std::nullopt, q.day());
      }
  }
  return out;
}

inline std::vector<DailyQuotes> load_rates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_rates(in);
}

inline void format_rates(std::ostream& out, const std::vector<DailyQuotes>& quotes) {
  out << kRatesHeader << '\n';
  for (const auto& q : quotes) {
    for_each_off_diagonal(q.size(), [&](std::size_t i, std::size_t j) {
      out << q.day() << ',' << i + 1 << ',' << j + 1 << ',' << format_double(q.open()(i, j)) << ','
          << format_double(q.close()(i, j)) << '\n';
    });
  }
}

inline void write_rates(const std::string& path, const std::vector<DailyQuotes>& quotes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  format_rates(out, quotes);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

// Ledger JSON lines. Written by hand so every number carries 17 significant
// digits; read back with nlohmann::json.

namespace detail {

class JsonLine {
 public:
  JsonLine& key(std::string_view k) {
    out_ += first_ ? "{" : ",";
    first_ = false;
    out_ += '"';
    out_ += k;
    out_ += "\":";
    return *this;
  }
  JsonLine& num(std::string_view k, double v) {
    key(k);
    out_ += std::isfinite(v) ? format_double(v) : "null";
    return *this;
  }
  JsonLine& integer(std::string_view k, long long v) {
    key(k);
    out_ += std::to_string(v);
    return *this;
  }
  JsonLine& boolean(std::string_view k, bool v) {
    key(k);
    out_ += v ? "true" : "false";
    return *this;
  }
  JsonLine& str(std::string_view k, std::string_view v) {
    key(k);
    out_ += '"';
    out_ += v;
    out_ += '"';
    return *this;
  }
  JsonLine& array(std::string_view k, std::span<const double> values) {
    key(k);
    out_ += '[';
    for (std::size_t n = 0; n < values.size(); ++n) {
      if (n) out_ += ',';
      out_ += format_double(values[n]);
    }
    out_ += ']';
    return *this;
  }
  JsonLine& raw(std::string_view k, const std::string& json) {
    key(k);
    out_ += json;
    return *this;
  }
  std::string done() const { return out_ + "}"; }

 private:
  std::string out_;
  bool first_ = true;
};

inline std::string config_json(const BacktestConfig& c) {
  JsonLine j;
  j.str("rule", to_string(c.rule))
      .str("gamma_mode", c.gamma.mode == GammaMode::constant ? "constant" : "block")
      .num("gamma0", c.gamma.gamma0)
      .integer("block_l", static_cast<long long>(c.gamma.l))
      .str("prediction", c.prediction == PredictionMode::cross_rate ? "cross_rate" : "linear")
      .array("lag_weights", c.lag_weights)
      .str("mpcr", to_string(c.predictor.mpcr))
      .str("mpo", to_string(c.predictor.mpo))
      .boolean("adjusted", c.predictor.adjusted)
      .integer("L", static_cast<long long>(c.predictor.segment.L))
      .num("c_A", c.predictor.segment.c_A)
      .num("c_B", c.predictor.segment.c_B)
      .num("support_floor", c.support_floor)
      .num("cost", c.costs.c)
      .num("fp_tol", c.costs.fp_tol)
      .integer("fp_max_iter", c.costs.fp_max_iter)
      .num("f0", c.f0);
  return j.done();
}

inline BacktestConfig config_from_json(const nlohmann::json& j) {
  BacktestConfig c;
  c.rule = j.at("rule").get<std::string>() == "iitc" ? Rule::IITC : Rule::EIITC;
  c.gamma.mode = j.at("gamma_mode").get<std::string>() == "constant" ? GammaMode::constant : GammaMode::block_decaying;
  c.gamma.gamma0 = j.at("gamma0").get<double>();
  c.gamma.l = j.at("block_l").get<std::size_t>();
  c.prediction = j.at("prediction").get<std::string>() == "cross_rate" ? PredictionMode::cross_rate : PredictionMode::linear;
  c.lag_weights = j.at("lag_weights").get<std::vector<double>>();
  c.predictor.mpcr = j.at("mpcr").get<std::string>() == "mpcr1" ? Mpcr::MPCR1 : Mpcr::MPCR2;
  c.predictor.mpo = j.at("mpo").get<std::string>() == "mpo1" ? Mpo::MPO1 : Mpo::MPO2;
  c.predictor.adjusted = j.at("adjusted").get<bool>();
  c.predictor.segment.L = j.at("L").get<std::size_t>();
  c.predictor.segment.c_A = j.at("c_A").get<double>();
  c.predictor.segment.c_B = j.at("c_B").get<double>();
  c.support_floor = j.at("support_floor").get<double>();
  c.costs.c = j.at("cost").get<double>();
  c.costs.fp_tol = j.at("fp_tol").get<double>();
  c.costs.fp_max_iter = j.at("fp_max_iter").get<int>();
  c.f0 = j.at("f0").get<double>();
  return c;
}

inline SquareGrid grid_from_json(const nlohmann::json& j, std::size_t m) {
  return SquareGrid::from_flat(m, j.get<std::vector<double>>());
}

}  // namespace detail

inline void format_ledger(std::ostream& out, const BacktestLedger& ledger) {
  require_days(ledger);
  detail::JsonLine head;
  head.str("type", "header")
      .integer("m", static_cast<long long>(ledger.m))
      .integer("N", static_cast<long long>(ledger.days.size()))
      .num("f0", ledger.f0)
      .array("final_psi", ledger.final_psi.values())
      .raw("config", detail::config_json(ledger.config));
  out << head.done() << '\n';
  for (const auto& d : ledger.days) {
    detail::JsonLine j;
    j.str("type", "day")
        .integer("day", d.day)
        .num("F", d.F)
        .num("Fp", d.Fp)
        .num("T", d.T)
        .num("c", d.c)
        .num("diamond", d.diamond)
        .num("gamma", d.gamma)
        .integer("order_actual", to_int(d.order_actual))
        .integer("order_pred", to_int(d.order_pred))
        .boolean("parked", d.parked)
        .boolean("has_prediction", d.has_prediction)
        .boolean("fallback", d.fallback)
        .boolean("crosses_boundary", d.crosses_boundary)
        .boolean("update_skipped", d.update_skipped)
        .array("psi", d.psi.values())
        .array("psi_realized", d.psi_realized.values())
        .array("r", d.r.values())
        .array("r_pred", d.r_pred.values());
    out << j.done() << '\n';
  }
}

inline void write_ledger(const std::string& path, const BacktestLedger& ledger) {
  require_days(ledger);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  format_ledger(out, ledger);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

inline BacktestLedger parse_ledger(std::istream& in) {
  BacktestLedger ledger;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        ledger.m = j.at("m").get<std::size_t>();
        expected = j.at("N").get<std::size_t>();
        ledger.f0 = j.at("f0").get<double>();
        ledger.final_psi = detail::grid_from_json(j.at("final_psi"), ledger.m);
        ledger.config = detail::config_from_json(j.at("config"));
        have_header = true;
        continue;
      }
      if (!have_header) throw detail::parse_error(lineno, 1, "day record before header");
      DayRecord d;
      d.day = j.at("day").get<Day>();
      d.F = j.at("F").get<double>();
      d.Fp = j.at("Fp").get<double>();
      d.T = j.at("T").get<double>();
      d.c = j.at("c").get<double>();
      d.diamond = j.at("diamond").get<double>();
      d.gamma = j.at("gamma").get<double>();
      d.order_actual = order_from_int(j.at("order_actual").get<int>());
      d.order_pred = order_from_int(j.at("order_pred").get<int>());
      d.parked = j.at("parked").get<bool>();
      d.has_prediction = j.at("has_prediction").get<bool>();
      d.fallback = j.at("fallback").get<bool>();
      d.crosses_boundary = j.at("crosses_boundary").get<bool>();
      d.update_skipped = j.at("update_skipped").get<bool>();
      d.psi = detail::grid_from_json(j.at("psi"), ledger.m);
      d.psi_realized = detail::grid_from_json(j.at("psi_realized"), ledger.m);
      d.r = detail::grid_from_json(j.at("r"), ledger.m);
      d.r_pred = detail::grid_from_json(j.at("r_pred"), ledger.m);
      ledger.days.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw detail::parse_error(lineno, 1, e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::EmptyLedger, "ledger has no header line");
  if (ledger.days.size() != expected) {
    throw Error(ErrorCode::ParseError, "header announces " + std::to_string(expected) + " days, found " +
                                           std::to_string(ledger.days.size()));
  }
  return ledger;
}

inline BacktestLedger read_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_ledger(in);
}

struct SummaryRow {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t N = 0;
  BacktestConfig config;
  BacktestSummary summary;
};

inline SummaryRow summary_row(const BacktestLedger& ledger, std::size_t replicate = 0, std::uint64_t seed = 0) {
  return {replicate, seed, ledger.m, ledger.days.size(), ledger.config, summarize(ledger)};
}

inline constexpr std::string_view kSummaryHeader =
    "replicate,seed,m,N,rule,gamma0,mpcr,mpo,adjusted,L,cost,I_N,LI_N,F_N,R_N,eta,parked_days,fallback_days";

inline void format_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    const auto& c = r.config;
    const auto& s = r.summary;
    out << r.replicate << ',' << r.seed << ',' << r.m << ',' << r.N << ',' << to_string(c.rule) << ','
        << format_double(c.gamma.gamma0) << ',' << to_string(c.predictor.mpcr) << ',' << to_string(c.predictor.mpo)
        << ',' << (c.predictor.adjusted ? 1 : 0) << ',' << c.predictor.segment.L << ',' << format_double(c.costs.c)
        << ',' << format_double(s.I_N) << ',' << format_double(s.LI_N) << ',' << format_double(s.F_N) << ','
        << format_double(s.R_N) << ',' << format_double(s.eta) << ',' << s.parked_days << ',' << s.fallback_days
        << '\n';
  }
}

inline void write_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  format_summary(out, rows);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

/// Writes an order process as CSV: `day,segment,order` plus the flattened
/// return matrix.
inline void format_order_process(std::ostream& out, const std::vector<Order>& orders,
                                 const std::vector<ReturnMatrix>& returns, std::size_t L) {
  const std::size_t m = returns.empty() ? 0 : returns.front().size();
  out << "day,segment,order";
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out << ",r_" << i + 1 << '_' << j + 1;
  out << '\n';
  for (std::size_t k = 0; k < orders.size(); ++k) {
    out << k + 1 << ',' << k / L + 1 << ',' << to_int(orders[k]);
    for (double v : returns[k].grid().values()) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace fxfolio
