// fxfolio: generate synthetic data, run backtests, run verification sweeps.
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 configuration error,
// 3 verification failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fxfolio/fxfolio.hpp"

namespace {

using namespace fxfolio;

constexpr int kOk = 0;
constexpr int kIo = 1;
constexpr int kConfig = 2;
constexpr int kVerify = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& flag, const std::string& msg) {
  if (!ok) throw ConfigError(flag + ": " + msg);
}

bool is_config_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidM:
    case ErrorCode::InvalidC:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidBlockUnit:
    case ErrorCode::InfeasibleTargets:
      return true;
    default:
      return false;
  }
}

struct GenerateOpts {
  bool market = false;
  bool orders = false;
  std::size_t m = 3;
  std::size_t days = 250;
  std::uint64_t seed = 1;
  double epsilon = 1e-3;
  double drift = 0.0;
  double volatility = 5e-3;
  bool normalize = false;
  double r_floor = 0.5;
  std::size_t segments = 1000;
  std::size_t L = 5;
  double paa = 0.25, pab = 0.25, pba = 0.25, pbb = 0.25;
  std::size_t K = 10;
  std::string out;
};

struct BacktestOpts {
  std::string in;
  std::string ledger = "ledger.jsonl";
  std::string summary = "summary.csv";
  std::string rule = "iitc";
  double gamma = 0.1;
  std::string gamma_mode = "constant";
  std::size_t block_l = 1;
  int mpcr = 1;
  int mpo = 1;
  bool adjusted = false;
  std::size_t L = 5;
  double c_a = 0.25;
  double c_b = 0.75;
  double cost = 0.0;
  double support_floor = 0.0;
  std::string predictor = "cross-rate";
  std::vector<double> lags{1.0};
  double f0 = 1.0;
  bool normalize_returns = false;
};

struct VerifyOpts {
  std::string suite = "all";
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  double paa_pbb = 0.78;
  double pab_pba = 0.6;
  std::size_t segments = 20000;
  std::size_t L = 5;
  std::size_t K = 10;
};

std::size_t resolve_jobs(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("FXFOLIO_JOBS")) {
    try {
      const long v = std::stol(env);
      require(v > 0, "FXFOLIO_JOBS", "must be a positive integer");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw ConfigError("FXFOLIO_JOBS: must be a positive integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_generate(const GenerateOpts& o) {
  require(o.market != o.orders, "--market/--orders", "choose exactly one");
  require(!o.out.empty(), "--out", "output path is required");
  if (o.market) {
    require(o.m > 1, "--m", "m > 1 required");
    require(o.days >= 2, "--days", "at least 2 days required");
    require(o.epsilon > 0.0, "--epsilon", "must be > 0");
    require(o.volatility >= 0.0, "--volatility", "must be >= 0");
    require(!o.normalize || (o.r_floor > 0.0 && o.r_floor < 1.0), "--r-floor", "must lie in (0,1)");
    std::cout << "config: subcommand=generate kind=market m=" << o.m << " days=" << o.days << " seed=" << o.seed
              << " epsilon=" << format_double(o.epsilon) << " drift=" << format_double(o.drift)
              << " volatility=" << format_double(o.volatility) << " normalize=" << o.normalize
              << " r_floor=" << format_double(o.r_floor) << " out=" << o.out << '\n';
    SyntheticMarketSpec spec;
    spec.m = o.m;
    spec.N = o.days;
    spec.seed = o.seed;
    spec.spread_epsilon = o.epsilon;
    spec.drift = o.drift;
    spec.volatility = o.volatility;
    spec.normalize = o.normalize;
    spec.r_floor = o.r_floor;
    write_rates(o.out, generate_market(spec));
    std::cout << "wrote " << o.days << " days to " << o.out << '\n';
    return kOk;
  }
  require(o.m > 1, "--m", "m > 1 required");
  require(o.L >= 1, "--L", "must be >= 1");
  require(o.K >= 1, "--K", "must be >= 1");
  require(o.segments >= 1, "--segments", "must be >= 1");
  std::cout << "config: subcommand=generate kind=orders segments=" << o.segments << " L=" << o.L
            << " paa=" << format_double(o.paa) << " pab=" << format_double(o.pab) << " pba=" << format_double(o.pba)
            << " pbb=" << format_double(o.pbb) << " K=" << o.K << " m=" << o.m << " seed=" << o.seed
            << " out=" << o.out << '\n';
  SyntheticOrderSpec spec;
  spec.segment_count = o.segments;
  spec.L = o.L;
  spec.p_aa = o.paa;
  spec.p_ab = o.pab;
  spec.p_ba = o.pba;
  spec.p_bb = o.pbb;
  spec.K = o.K;
  spec.seed = o.seed;
  spec.m = o.m;
  const OrderProcess proc = generate_order_process(spec);
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + o.out + "'");
  format_order_process(out, proc.orders, proc.returns, o.L);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + o.out + "' failed");
  std::cout << "wrote " << proc.orders.size() << " days to " << o.out << '\n';
  return kOk;
}

BacktestConfig backtest_config(const BacktestOpts& o) {
  require(o.rule == "iitc" || o.rule == "eiitc", "--rule", "must be iitc or eiitc");
  require(o.gamma >= 0.0, "--gamma", "must be >= 0");
  require(o.gamma_mode == "constant" || o.gamma_mode == "block", "--gamma-mode", "must be constant or block");
  require(o.block_l >= 1, "--block-l", "must be >= 1");
  require(o.mpcr == 1 || o.mpcr == 2, "--mpcr", "must be 1 or 2");
  require(o.mpo == 1 || o.mpo == 2, "--mpo", "must be 1 or 2");
  require(o.L >= 1, "--L", "must be >= 1");
  require(o.c_a >= 0.0 && o.c_a < 0.5, "--c-a", "must lie in [0, 1/2)");
  require(o.c_b >= 0.5 && o.c_b <= 1.0, "--c-b", "must lie in [1/2, 1]");
  require(o.cost >= 0.0 && o.cost < 1.0, "--cost", "must satisfy 0 <= c < 1");
  require(o.support_floor >= 0.0 && o.support_floor < 1.0, "--support-floor", "must lie in [0,1)");
  require(o.predictor == "cross-rate" || o.predictor == "linear", "--predictor", "must be cross-rate or linear");
  require(o.f0 > 0.0, "--f0", "must be > 0");
  BacktestConfig c;
  c.rule = o.rule == "iitc" ? Rule::IITC : Rule::EIITC;
  c.gamma.mode = o.gamma_mode == "constant" ? GammaMode::constant : GammaMode::block_decaying;
  c.gamma.gamma0 = o.gamma;
  c.gamma.l = o.block_l;
  c.predictor.mpcr = o.mpcr == 1 ? Mpcr::MPCR1 : Mpcr::MPCR2;
  c.predictor.mpo = o.mpo == 1 ? Mpo::MPO1 : Mpo::MPO2;
  c.predictor.adjusted = o.adjusted;
  c.predictor.segment = {o.L, o.c_a, o.c_b};
  c.prediction = o.predictor == "cross-rate" ? PredictionMode::cross_rate : PredictionMode::linear;
  c.lag_weights = o.lags;
  c.support_floor = o.support_floor;
  c.costs.c = o.cost;
  c.f0 = o.f0;
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidParams && o.predictor == "linear") throw ConfigError(std::string("--lags: ") + e.what());
    throw;
  }
  return c;
}

int cmd_backtest(const BacktestOpts& o) {
  require(!o.in.empty(), "--in", "input rates file is required");
  const BacktestConfig cfg = backtest_config(o);
  std::cout << "config: subcommand=backtest in=" << o.in << " ledger=" << o.ledger << " summary=" << o.summary
            << " rule=" << o.rule << " gamma=" << format_double(o.gamma) << " gamma_mode=" << o.gamma_mode
            << " block_l=" << o.block_l << " predictor=" << o.predictor << " mpcr=" << o.mpcr << " mpo=" << o.mpo
            << " adjusted=" << o.adjusted << " L=" << o.L << " c_A=" << format_double(o.c_a)
            << " c_B=" << format_double(o.c_b) << " cost=" << format_double(o.cost)
            << " support_floor=" << format_double(o.support_floor) << " f0=" << format_double(o.f0)
            << " normalize_returns=" << o.normalize_returns << '\n';

  const std::vector<DailyQuotes> quotes = load_rates(o.in);
  std::vector<ReturnMatrix> returns = returns_from_quotes(quotes);
  if (o.normalize_returns)
    for (auto& r : returns) r = normalize_returns(r);
  const BacktestLedger ledger = run_backtest_returns(returns, cfg);
  write_ledger(o.ledger, ledger);
  const SummaryRow row = summary_row(ledger);
  write_summary(o.summary, {row});

  const auto& s = row.summary;
  std::cout << "I_N=" << format_double(s.I_N) << '\n'
            << "LI_N=" << format_double(s.LI_N) << '\n'
            << "F_N=" << format_double(s.F_N) << '\n'
            << "R_N=" << format_double(s.R_N) << '\n'
            << "eta=" << format_double(s.eta) << '\n'
            << "parked_days=" << s.parked_days << " fallback_days=" << s.fallback_days << '\n';
  return kOk;
}

int cmd_verify(const VerifyOpts& o, std::size_t jobs_flag) {
  require(o.suite == "universality" || o.suite == "profitability" || o.suite == "cost" || o.suite == "all", "--suite",
          "unknown suite '" + o.suite + "' (universality, profitability, cost, all)");
  require(o.replicates >= 1, "--replicates", "must be >= 1");
  require(o.paa_pbb >= 0.0 && o.paa_pbb <= 1.0, "--paa-pbb", "must lie in [0,1]");
  require(o.pab_pba >= 0.0 && o.pab_pba <= 1.0, "--pab-pba", "must lie in [0,1]");
  require(o.segments >= 2, "--segments", "must be >= 2");
  const std::size_t jobs = resolve_jobs(jobs_flag);
  std::cout << "config: subcommand=verify suite=" << o.suite << " replicates=" << o.replicates << " seed=" << o.seed
            << " paa_pbb=" << format_double(o.paa_pbb) << " pab_pba=" << format_double(o.pab_pba)
            << " segments=" << o.segments << " L=" << o.L << " K=" << o.K << " jobs=" << jobs << '\n';

  std::vector<SuiteReport> reports;
  if (o.suite == "universality" || o.suite == "all") reports.push_back(universality_suite(o.replicates, o.seed, jobs));
  if (o.suite == "profitability" || o.suite == "all") {
    reports.push_back(profitability_suite(o.paa_pbb, o.pab_pba, o.segments, o.seed, o.L, o.K));
  }
  if (o.suite == "cost" || o.suite == "all") reports.push_back(cost_suite(o.replicates, o.seed, jobs));

  bool pass = true;
  for (const auto& rep : reports) {
    for (const auto& r : rep.replicates)
      if (!r.pass) std::cout << "  failing " << rep.suite << " replicate " << r.replicate << " seed=" << r.seed << ": " << r.detail << '\n';
    for (const auto& line : rep.lines) std::cout << line << '\n';
    pass = pass && rep.pass;
  }
  return pass ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FX on-line portfolio selection: synthetic data, backtests, verification"};
  app.require_subcommand(1);
  std::size_t jobs = 0;

  GenerateOpts g;
  auto* gen = app.add_subcommand("generate", "Write a synthetic rates-csv market or an order process");
  gen->add_flag("--market", g.market, "Generate quotes");
  gen->add_flag("--orders", g.orders, "Generate an order process");
  gen->add_option("--m", g.m, "Currency count");
  gen->add_option("--days", g.days, "Trading days");
  gen->add_option("--seed", g.seed, "Random seed");
  gen->add_option("--epsilon", g.epsilon, "Half spread");
  gen->add_option("--drift", g.drift, "Per-day log drift of mid rates");
  gen->add_option("--volatility", g.volatility, "Per-day log volatility of mid rates");
  gen->add_flag("--normalize", g.normalize, "Keep every day's returns within the r-floor band");
  gen->add_option("--r-floor", g.r_floor, "Lowest return relative to the day's maximum");
  gen->add_option("--segments", g.segments, "Segments in the order process");
  gen->add_option("--L", g.L, "Segment length");
  gen->add_option("--paa", g.paa, "Target P_AA");
  gen->add_option("--pab", g.pab, "Target P_AB");
  gen->add_option("--pba", g.pba, "Target P_BA");
  gen->add_option("--pbb", g.pbb, "Target P_BB");
  gen->add_option("--K", g.K, "Dependence gap");
  gen->add_option("--out", g.out, "Output path");

  BacktestOpts b;
  auto* bt = app.add_subcommand("backtest", "Run the on-line strategy over a rates-csv file");
  bt->add_option("--in", b.in, "Input rates-csv");
  bt->add_option("--ledger", b.ledger, "Ledger output (JSON lines)");
  bt->add_option("--summary", b.summary, "Summary output (CSV)");
  bt->add_option("--rule", b.rule, "iitc or eiitc");
  bt->add_option("--gamma", b.gamma, "Update parameter gamma (gamma0 in block mode)");
  bt->add_option("--gamma-mode", b.gamma_mode, "constant or block");
  bt->add_option("--block-l", b.block_l, "Block unit l for the block-decaying schedule");
  bt->add_option("--mpcr", b.mpcr, "Cross-rate forecast method, 1 or 2");
  bt->add_option("--mpo", b.mpo, "Order forecast method, 1 or 2");
  bt->add_flag("--adjusted", b.adjusted, "Use the adjusted (tie-skipping) methods");
  bt->add_option("--L", b.L, "Segment length");
  bt->add_option("--c-a", b.c_a, "MPCR2 constant in A");
  bt->add_option("--c-b", b.c_b, "MPCR2 constant in B");
  bt->add_option("--cost", b.cost, "Proportional transaction cost c");
  bt->add_option("--support-floor", b.support_floor, "Uniform weight mixed into each update");
  bt->add_option("--predictor", b.predictor, "cross-rate or linear");
  bt->add_option("--lags", b.lags, "Linear predictor weights a_1..a_q")->delimiter(',');
  bt->add_option("--f0", b.f0, "Initial capital");
  bt->add_flag("--normalize-returns", b.normalize_returns, "Divide each day's returns by its maximum");

  VerifyOpts v;
  auto* vf = app.add_subcommand("verify", "Run a verification sweep");
  vf->add_option("--suite", v.suite, "universality, profitability, cost or all");
  vf->add_option("--replicates", v.replicates, "Replicates for universality and cost");
  vf->add_option("--seed", v.seed, "Base seed; replicate r uses seed + r");
  vf->add_option("--paa-pbb", v.paa_pbb, "P_AA + P_BB target for the MPCR1 case");
  vf->add_option("--pab-pba", v.pab_pba, "P_AB + P_BA target for the MPCR2 case");
  vf->add_option("--segments", v.segments, "Segments per order process");
  vf->add_option("--L", v.L, "Segment length");
  vf->add_option("--K", v.K, "Dependence gap");
  vf->add_option("--jobs", jobs, "Worker threads for replicates (falls back to FXFOLIO_JOBS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(g);
    if (bt->parsed()) return cmd_backtest(b);
    return cmd_verify(v, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_code(e.code()) ? kConfig : kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}
