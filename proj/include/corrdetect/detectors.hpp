#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "corrdetect/model.hpp"

namespace corrdetect {

inline constexpr std::size_t kDefaultCalibrationTrials = 1000000;

struct CountTestConfig {
  double rho = 0.0;
  std::size_t d = 1;
  double tau = 0.0;
  double p_rho_d = 0.0;  // P_P[sum_l L_I >= d tau]
  double q_rho_d = 0.0;  // P_Q[sum_l L_I >= d tau]
  double p_stderr = 0.0;
  double q_stderr = 0.0;
  std::size_t calibration_trials = 0;
  std::uint64_t calibration_seed = 0;

  double acceptance_threshold(std::size_t k) const { return 0.5 * static_cast<double>(k) * p_rho_d; }
};

// Monte Carlo estimates of P_{rho,d} and Q_{rho,d}. tau must lie strictly
// inside (-d_KL(Q||P), d_KL(P||Q)).
CountTestConfig calibrate_count(const ModelParams& params, double tau, std::size_t trials, std::uint64_t seed);

// Number of pairs (i, j) with sum_l L_I(X_il, Y_jl) >= d tau.
std::size_t count_statistic(const DatabasePair& pair, const ModelParams& params, double tau);
int count_test(const DatabasePair& pair, const ModelParams& params, const CountTestConfig& cfg);

// Total variation distance between N(0, v1) and N(0, v2).
double tv_centered_gaussians(double v1, double v2);

struct ComparisonTestConfig {
  double theta = 0.0;
  double crossing_point = 0.0;  // t*, in units of sqrt(2nd)
  double variance_ratio = 1.0;  // Var_H1(S) / Var_H0(S)
  bool accept_small = true;     // decide H1 when |S| <= theta (rho > 0) or |S| >= theta (rho < 0)
  double tv = 0.0;              // TV between the two laws of S / sqrt(2nd)
};

ComparisonTestConfig comparison_threshold(const ModelParams& params);
double comparison_statistic(const DatabasePair& pair);  // sum_ij (X_ij - Y_ij)
int comparison_test(const DatabasePair& pair, const ModelParams& params, const ComparisonTestConfig& cfg);

struct SumTestConfig {
  double threshold = 0.0;  // k d |rho| / 2
  int sign = 1;
};

SumTestConfig sum_threshold(const ModelParams& params);
double sum_statistic(const DatabasePair& pair);  // (sum_i X_i)^T (sum_j Y_j)
int sum_test(const DatabasePair& pair, const ModelParams& params);

// Uniform interface used by the risk estimator. aux_seed feeds randomized
// detectors and is ignored by deterministic ones.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  virtual int decide(const DatabasePair& pair, std::uint64_t aux_seed) const = 0;
};

struct DetectorOptions {
  double tau = 0.0;
  std::size_t calibration_trials = kDefaultCalibrationTrials;
  std::uint64_t calibration_seed = 0;
};

// Names: count, comparison, sum, coin, always0, always1.
std::unique_ptr<Detector> make_detector(const std::string& name, const ModelParams& params,
                                        const DetectorOptions& options = {});

class CountDetector : public Detector {
 public:
  CountDetector(const ModelParams& params, CountTestConfig cfg) : params_(params), cfg_(cfg) {}
  std::string name() const override { return "count"; }
  int decide(const DatabasePair& pair, std::uint64_t) const override { return count_test(pair, params_, cfg_); }
  const CountTestConfig& config() const { return cfg_; }

 private:
  ModelParams params_;
  CountTestConfig cfg_;
};

class ComparisonDetector : public Detector {
 public:
  explicit ComparisonDetector(const ModelParams& params)
      : params_(params), cfg_(comparison_threshold(params)) {}
  std::string name() const override { return "comparison"; }
  int decide(const DatabasePair& pair, std::uint64_t) const override {
    return comparison_test(pair, params_, cfg_);
  }
  const ComparisonTestConfig& config() const { return cfg_; }

 private:
  ModelParams params_;
  ComparisonTestConfig cfg_;
};

class SumDetector : public Detector {
 public:
  explicit SumDetector(const ModelParams& params) : params_(params) { sum_threshold(params); }
  std::string name() const override { return "sum"; }
  int decide(const DatabasePair& pair, std::uint64_t) const override { return sum_test(pair, params_); }

 private:
  ModelParams params_;
};

class ConstantDetector : public Detector {
 public:
  explicit ConstantDetector(int value) : value_(value) {}
  std::string name() const override { return value_ ? "always1" : "always0"; }
  int decide(const DatabasePair&, std::uint64_t) const override { return value_; }

 private:
  int value_;
};

// Fair coin, independent of the data.
class CoinDetector : public Detector {
 public:
  std::string name() const override { return "coin"; }
  int decide(const DatabasePair&, std::uint64_t aux_seed) const override;
};

}  // namespace corrdetect
