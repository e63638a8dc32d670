#include "corrdetect/detectors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "corrdetect/errors.hpp"
#include "corrdetect/exponents.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect {

namespace {

struct TailCounts {
  std::size_t hits = 0;
  std::size_t total = 0;
};

// Fraction of draws with sum_l L_I >= d tau, the pairs drawn from P
// (correlated) or Q (independent).
TailCounts tail_mc(double rho, std::size_t d, double tau, bool correlated, std::size_t trials, std::uint64_t seed) {
  const LlrKernel llr(rho);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double cut = static_cast<double>(d) * tau;
  const std::uint64_t stream = correlated ? 0 : 1;
  auto parts = run_chunks<TailCounts>(trials, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(derive_seed(seed, SeedTag::calibration, stream), SeedTag::chunk, c));
    TailCounts t;
    for (std::size_t i = b; i < e; ++i) {
      double sum = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        const double x = rng.normal();
        const double z = rng.normal();
        const double y = correlated ? rho * x + s * z : z;
        sum += llr(x, y);
      }
      t.hits += sum >= cut ? 1 : 0;
      ++t.total;
    }
    return t;
  });
  TailCounts all;
  for (const auto& p : parts) {
    all.hits += p.hits;
    all.total += p.total;
  }
  return all;
}

double binomial_stderr(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

using CalibrationKey = std::tuple<double, std::size_t, double, std::size_t, std::uint64_t>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CalibrationKey, CountTestConfig>& cache() {
  static std::map<CalibrationKey, CountTestConfig> c;
  return c;
}

}  // namespace

CountTestConfig calibrate_count(const ModelParams& params, double tau, std::size_t trials, std::uint64_t seed) {
  params.require_density();
  if (params.rho == 0.0) throw DegenerateError("count test calibration needs rho != 0");
  const KlPair kl = kl_divergences(params.rho);
  if (!(tau > -kl.q_p && tau < kl.p_q)) {
    throw DomainError("tau outside (-d_KL(Q||P), d_KL(P||Q))");
  }
  if (trials == 0) throw DomainError("calibration needs trials >= 1");

  const CalibrationKey key{params.rho, params.d, tau, trials, seed};
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  CountTestConfig cfg;
  cfg.rho = params.rho;
  cfg.d = params.d;
  cfg.tau = tau;
  cfg.calibration_trials = trials;
  cfg.calibration_seed = seed;
  const TailCounts p = tail_mc(params.rho, params.d, tau, true, trials, seed);
  const TailCounts q = tail_mc(params.rho, params.d, tau, false, trials, seed);
  cfg.p_rho_d = static_cast<double>(p.hits) / static_cast<double>(p.total);
  cfg.q_rho_d = static_cast<double>(q.hits) / static_cast<double>(q.total);
  cfg.p_stderr = binomial_stderr(cfg.p_rho_d, trials);
  cfg.q_stderr = binomial_stderr(cfg.q_rho_d, trials);
  std::lock_guard<std::mutex> lock(cache_mutex());
  cache().emplace(key, cfg);
  return cfg;
}

std::size_t count_statistic(const DatabasePair& pair, const ModelParams& params, double tau) {
  check_dimensions(pair, params);
  params.require_density();
  const LlrKernel llr(params.rho);
  const double cut = static_cast<double>(params.d) * tau;
  const std::size_t n = params.n, d = params.d;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = pair.X.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* y = pair.Y.row(j);
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) s += llr(x[l], y[l]);
      count += s >= cut ? 1 : 0;
    }
  }
  return count;
}

int count_test(const DatabasePair& pair, const ModelParams& params, const CountTestConfig& cfg) {
  const double stat = static_cast<double>(count_statistic(pair, params, cfg.tau));
  return stat >= cfg.acceptance_threshold(params.k) ? 1 : 0;
}

double tv_centered_gaussians(double v1, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) throw DomainError("variances must be positive");
  if (v1 == v2) return 0.0;
  const double vs = std::min(v1, v2), vb = std::max(v1, v2);
  // The densities cross at +-t with t^2 = v1 v2 log(vb/vs) / (vb - vs); the
  // narrower law carries the extra mass on (-t, t).
  const double t = std::sqrt(vs * vb * std::log1p((vb - vs) / vs) / (vb - vs));
  return std::erf(t / std::sqrt(2.0 * vs)) - std::erf(t / std::sqrt(2.0 * vb));
}

ComparisonTestConfig comparison_threshold(const ModelParams& params) {
  params.validate();
  if (params.rho == 0.0) throw DegenerateError("comparison threshold undefined at rho = 0 (TV distance is zero)");
  const double kappa = static_cast<double>(params.k) / static_cast<double>(params.n) * std::abs(params.rho);
  ComparisonTestConfig cfg;
  cfg.accept_small = params.rho > 0.0;
  cfg.variance_ratio = cfg.accept_small ? 1.0 - kappa : 1.0 + kappa;
  const double v = cfg.variance_ratio;
  if (v <= 0.0) {
    cfg.crossing_point = 0.0;
    cfg.tv = 1.0;
  } else {
    const double lo = std::min(1.0, v), hi = std::max(1.0, v);
    cfg.crossing_point = std::sqrt(lo * hi * std::log1p((hi - lo) / lo) / (hi - lo));
    cfg.tv = tv_centered_gaussians(1.0, v);
  }
  cfg.theta = std::sqrt(2.0 * static_cast<double>(params.n * params.d)) * cfg.crossing_point;
  return cfg;
}

double comparison_statistic(const DatabasePair& pair) {
  double s = 0.0;
  for (std::size_t i = 0; i < pair.X.data.size(); ++i) s += pair.X.data[i] - pair.Y.data[i];
  return s;
}

int comparison_test(const DatabasePair& pair, const ModelParams& params, const ComparisonTestConfig& cfg) {
  check_dimensions(pair, params);
  const double a = std::abs(comparison_statistic(pair));
  return cfg.accept_small ? (a <= cfg.theta ? 1 : 0) : (a >= cfg.theta ? 1 : 0);
}

SumTestConfig sum_threshold(const ModelParams& params) {
  params.validate();
  if (params.rho == 0.0) throw DegenerateError("sum test needs rho != 0");
  return {0.5 * static_cast<double>(params.k * params.d) * std::abs(params.rho), params.rho > 0.0 ? 1 : -1};
}

double sum_statistic(const DatabasePair& pair) {
  const std::size_t n = pair.X.rows, d = pair.X.cols;
  double t = 0.0;
  for (std::size_t l = 0; l < d; ++l) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += pair.X(i, l);
      sy += pair.Y(i, l);
    }
    t += sx * sy;
  }
  return t;
}

int sum_test(const DatabasePair& pair, const ModelParams& params) {
  check_dimensions(pair, params);
  const SumTestConfig cfg = sum_threshold(params);
  return cfg.sign * sum_statistic(pair) > cfg.threshold ? 1 : 0;
}

int CoinDetector::decide(const DatabasePair&, std::uint64_t aux_seed) const {
  Rng rng(aux_seed);
  return rng.uniform() < 0.5 ? 1 : 0;
}

std::unique_ptr<Detector> make_detector(const std::string& name, const ModelParams& params,
                                        const DetectorOptions& options) {
  if (name == "count") {
    return std::make_unique<CountDetector>(
        params, calibrate_count(params, options.tau, options.calibration_trials, options.calibration_seed));
  }
  if (name == "comparison") return std::make_unique<ComparisonDetector>(params);
  if (name == "sum") return std::make_unique<SumDetector>(params);
  if (name == "coin") return std::make_unique<CoinDetector>();
  if (name == "always0") return std::make_unique<ConstantDetector>(0);
  if (name == "always1") return std::make_unique<ConstantDetector>(1);
  throw std::invalid_argument("unknown detector '" + name + "'");
}

}  // namespace corrdetect
