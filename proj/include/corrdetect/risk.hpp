#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "corrdetect/detectors.hpp"
#include "corrdetect/model.hpp"

namespace corrdetect {

struct RiskEstimate {
  double type1 = 0.0;  // P_H0[phi = 1]
  double type2 = 0.0;  // P_H1[phi = 0]
  double risk = 0.0;
  std::size_t trials_per_hypothesis = 0;
  double ci1 = 0.0;  // 95% half-widths
  double ci2 = 0.0;
  std::uint64_t seed = 0;
};

// 95% half-width for a binomial proportion: normal approximation, or the
// Wilson interval when fewer than 5 successes or failures were seen.
double proportion_halfwidth(std::size_t successes, std::size_t trials);

// `trials` draws under each hypothesis; trial t uses seeds derived from (seed, t).
RiskEstimate estimate_risk(const Detector& detector, const ModelParams& params, std::size_t trials,
                           std::uint64_t seed);

enum class BoundMethod { partition, closed, cycle };

struct LowerBound {
  double value = 0.0;          // clamped to [0, 1]
  double raw = 0.0;            // 1 - sqrt(M - 1)/2 before clamping
  double second_moment = 1.0;  // the M used
  std::string method;          // route actually taken
};

// R* >= 1 - sqrt(M - 1)/2 with M an upper bound on (or the exact value of) E_H0[L^2].
LowerBound risk_lower_bound(const ModelParams& params, BoundMethod method);

struct BayesRiskEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

// R* = 1 - E_H0|L - 1| / 2, L evaluated exactly.
BayesRiskEstimate exact_bayes_risk(const ModelParams& params, std::size_t trials, std::uint64_t seed);

// Thresholds used for regime labels.
inline constexpr double kWeakImpossibleLevel = 0.01;  // product term below: R* lower bound >= 0.95
inline constexpr double kStrongImpossibleLevel = 4.0;  // product term below: R* lower bound > 0
inline constexpr double kCountRegimeLevel = 0.01;      // (1-rho^2)(n^2/k)^{4/d} below
inline constexpr double kSumRegimeLevel = 10.0;        // rho^2 d k^2 / n^2 above

struct ConditionReport {
  double cond_strong = 0.0;     // (k/n)^2 (prod_{i<=k} (1-(d rho^2)^i)^{-1} - 1); +inf if d rho^2 >= 1
  double count_rate_gap = 0.0;  // (1 - rho^2)(n^2/k)^{4/d}
  double cond_sum = 0.0;        // rho^2 d k^2 / n^2
  std::vector<std::string> regimes;
};

ConditionReport regime_conditions(const ModelParams& params);

struct SweepSpec {
  std::vector<std::size_t> n{100};
  std::vector<std::size_t> d{1};
  std::vector<std::size_t> k{0};  // 0 stands for k = n
  std::vector<double> rho2;
  std::vector<std::string> detectors{"count"};
  std::size_t trials = 1000;
  std::uint64_t master_seed = 0;
  double tau = 0.0;
  std::size_t calibration_trials = kDefaultCalibrationTrials;
  int rho_sign = 1;
};

struct SweepRow {
  std::size_t n = 0, d = 0, k = 0;
  double rho2 = 0.0;
  std::string detector;
  double type1 = nan(), type2 = nan(), risk = nan(), ci1 = nan(), ci2 = nan();
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double lb_partition = nan(), lb_closed = nan(), cond_strong = nan(), cond_sum = nan();
  std::string note;

  static double nan() { return std::numeric_limits<double>::quiet_NaN(); }
};

// Identity of a row for checkpointing: (n, d, k, rho2 as printed, detector).
using SweepKey = std::tuple<std::size_t, std::size_t, std::size_t, std::string, std::string>;
SweepKey sweep_key(std::size_t n, std::size_t d, std::size_t k, double rho2, const std::string& detector);

// Runs every grid point and detector not in `done`, invoking on_row after
// each finished row. Errors at a point are recorded in the row's note.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::set<SweepKey>& done = {},
                                const std::function<void(const SweepRow&)>& on_row = {});

// Count-test risk curve: n = 100, d = 1, k = n, tau = 0, 13 points with 1 - rho^2
// log-spaced from n^-2 to n^-5.
SweepSpec risk_curve_spec(std::size_t n = 100, std::size_t points = 13, std::size_t trials = 1000);

}  // namespace corrdetect
