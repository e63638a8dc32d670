#include "corrdetect/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "corrdetect/errors.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/partitions.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect {

double proportion_halfwidth(std::size_t successes, std::size_t trials) {
  if (trials == 0) return std::numeric_limits<double>::quiet_NaN();
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  if (successes >= 5 && trials - successes >= 5) return z * std::sqrt(p * (1.0 - p) / n);
  const double denom = 1.0 + z * z / n;
  return z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
}

namespace {

struct ErrorCounts {
  std::size_t type1 = 0;
  std::size_t type2 = 0;
};

}  // namespace

RiskEstimate estimate_risk(const Detector& detector, const ModelParams& params, std::size_t trials,
                           std::uint64_t seed) {
  params.validate();
  if (trials == 0) throw DomainError("estimate_risk needs trials >= 1");
  auto parts = run_chunks<ErrorCounts>(trials, [&](std::size_t, std::size_t b, std::size_t e) {
    ErrorCounts c;
    DatabasePair pair;
    HiddenStructure hidden;
    for (std::size_t t = b; t < e; ++t) {
      sample_null_into(params, derive_seed(seed, SeedTag::null_data, t), pair);
      c.type1 += detector.decide(pair, derive_seed(seed, SeedTag::detector, 2 * t)) == 1 ? 1 : 0;
      sample_alternative_into(params, derive_seed(seed, SeedTag::alt_data, t), pair, hidden);
      c.type2 += detector.decide(pair, derive_seed(seed, SeedTag::detector, 2 * t + 1)) == 0 ? 1 : 0;
    }
    return c;
  });
  ErrorCounts all;
  for (const auto& p : parts) {
    all.type1 += p.type1;
    all.type2 += p.type2;
  }
  RiskEstimate r;
  const double n = static_cast<double>(trials);
  r.type1 = static_cast<double>(all.type1) / n;
  r.type2 = static_cast<double>(all.type2) / n;
  r.risk = r.type1 + r.type2;
  r.trials_per_hypothesis = trials;
  r.ci1 = proportion_halfwidth(all.type1, trials);
  r.ci2 = proportion_halfwidth(all.type2, trials);
  r.seed = seed;
  return r;
}

LowerBound risk_lower_bound(const ModelParams& params, BoundMethod method) {
  params.validate();
  LowerBound lb;
  const double tol = 1e-12;
  switch (method) {
    case BoundMethod::closed:
      lb.second_moment = second_moment_upper_bound(params);
      lb.method = "closed";
      break;
    case BoundMethod::cycle:
      lb.second_moment = second_moment_cycle(params, CycleMode::enumerate).value;
      lb.method = "cycle";
      break;
    case BoundMethod::partition: {
      if (!(static_cast<double>(params.d) * params.rho2() < 1.0)) {
        throw DomainError("partition bound requires d rho^2 < 1");
      }
      try {
        if (params.d == 1 && params.k == params.n) {
          const auto s = second_moment_partition_sum(params.rho, params.n, tol);
          lb.second_moment = s.value + s.tail_bound;
          lb.method = "partition";
        } else {
          const std::size_t m = equiv_sum_terms_for(params, tol);
          const auto s = second_moment_equiv_sum(params, m);
          lb.second_moment = s.value + s.tail_bound;
          lb.method = "equiv_sum";
        }
      } catch (const CapacityError&) {
        // The series would need too many terms; the closed product is the same
        // value for d = 1, k = n and an upper bound otherwise.
        lb.second_moment = second_moment_upper_bound(params);
        lb.method = "closed_fallback";
      }
      break;
    }
  }
  const double excess = std::max(0.0, lb.second_moment - 1.0);
  lb.raw = 1.0 - 0.5 * std::sqrt(excess);
  lb.value = std::clamp(lb.raw, 0.0, 1.0);
  return lb;
}

BayesRiskEstimate exact_bayes_risk(const ModelParams& params, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("exact_bayes_risk needs trials >= 1");
  params.require_density();
  auto parts = run_chunks<MomentAccumulator>(trials, [&](std::size_t, std::size_t b, std::size_t e) {
    MomentAccumulator acc;
    DatabasePair pair;
    for (std::size_t t = b; t < e; ++t) {
      sample_null_into(params, derive_seed(seed, SeedTag::null_data, t), pair);
      const double L = exact_likelihood_ratio(pair, params);
      acc.add(1.0 - 0.5 * std::abs(L - 1.0));
    }
    return acc;
  });
  MomentAccumulator all;
  for (const auto& p : parts) all.merge(p);
  return {all.mean(), all.stderr_of_mean(), trials, seed};
}

ConditionReport regime_conditions(const ModelParams& params) {
  params.validate();
  ConditionReport r;
  const double n = static_cast<double>(params.n), k = static_cast<double>(params.k),
               d = static_cast<double>(params.d);
  const double x = d * params.rho2();
  r.cond_strong = x < 1.0 ? (k / n) * (k / n) * (partition_product(x, params.k) - 1.0)
                          : std::numeric_limits<double>::infinity();
  const double omr = params.one_minus_rho2();
  r.count_rate_gap = omr <= 0.0 ? 0.0 : std::exp(std::log(omr) + (4.0 / d) * std::log(n * n / k));
  r.cond_sum = params.rho2() * d * k * k / (n * n);
  if (r.cond_strong <= kWeakImpossibleLevel) r.regimes.emplace_back("weak_detection_impossible");
  if (r.cond_strong < kStrongImpossibleLevel) r.regimes.emplace_back("strong_detection_impossible");
  if (r.count_rate_gap <= kCountRegimeLevel) r.regimes.emplace_back("count_test_regime");
  if (r.cond_sum >= kSumRegimeLevel) r.regimes.emplace_back("sum_test_regime");
  if (r.regimes.empty()) r.regimes.emplace_back("undetermined");
  return r;
}

namespace {

std::string format_rho2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SweepKey sweep_key(std::size_t n, std::size_t d, std::size_t k, double rho2, const std::string& detector) {
  return {n, d, k, format_rho2(rho2), detector};
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::set<SweepKey>& done,
                                const std::function<void(const SweepRow&)>& on_row) {
  if (spec.n.empty() || spec.d.empty() || spec.k.empty() || spec.rho2.empty()) {
    throw DomainError("sweep grid must be nonempty in every coordinate");
  }
  std::vector<std::string> detectors = spec.detectors;
  if (detectors.empty()) detectors.emplace_back("none");

  std::vector<SweepRow> rows;
  std::uint64_t point_index = 0;
  for (std::size_t n : spec.n) {
    for (std::size_t d : spec.d) {
      for (std::size_t k_raw : spec.k) {
        for (double rho2 : spec.rho2) {
          const std::size_t k = k_raw == 0 ? n : k_raw;
          const std::uint64_t point_seed = derive_seed(spec.master_seed, SeedTag::trial, point_index++);
          SweepRow base;
          base.n = n;
          base.d = d;
          base.k = k;
          base.rho2 = rho2;
          base.seed = point_seed;

          bool pending = false;
          for (const auto& det : detectors) pending = pending || !done.count(sweep_key(n, d, k, rho2, det));
          if (!pending) continue;

          ModelParams params;
          std::string point_error;
          try {
            params = ModelParams::from_rho2(n, d, k, rho2, spec.rho_sign);
          } catch (const std::exception& e) {
            point_error = e.what();
          }
          if (point_error.empty()) {
            try {
              base.lb_partition = risk_lower_bound(params, BoundMethod::partition).value;
            } catch (const std::exception& e) {
              base.note += std::string("lb_partition: ") + e.what() + "; ";
            }
            try {
              base.lb_closed = risk_lower_bound(params, BoundMethod::closed).value;
            } catch (const std::exception& e) {
              base.note += std::string("lb_closed: ") + e.what() + "; ";
            }
            try {
              const auto c = regime_conditions(params);
              base.cond_strong = c.cond_strong;
              base.cond_sum = c.cond_sum;
            } catch (const std::exception& e) {
              base.note += std::string("conditions: ") + e.what() + "; ";
            }
          }

          for (const auto& det : detectors) {
            if (done.count(sweep_key(n, d, k, rho2, det))) continue;
            SweepRow row = base;
            row.detector = det;
            if (!point_error.empty()) {
              row.note += point_error;
            } else if (det != "none") {
              try {
                DetectorOptions opt;
                opt.tau = spec.tau;
                opt.calibration_trials = spec.calibration_trials;
                opt.calibration_seed = derive_seed(point_seed, SeedTag::calibration, 0);
                const auto detector = make_detector(det, params, opt);
                const RiskEstimate r = estimate_risk(*detector, params, spec.trials, point_seed);
                row.type1 = r.type1;
                row.type2 = r.type2;
                row.risk = r.risk;
                row.ci1 = r.ci1;
                row.ci2 = r.ci2;
                row.trials = r.trials_per_hypothesis;
                if (r.ci1 > 0.1 || r.ci2 > 0.1) row.note += "wide_ci; ";
              } catch (const std::exception& e) {
                row.note += std::string(det) + ": " + e.what() + "; ";
              }
            }
            while (!row.note.empty() && (row.note.back() == ' ' || row.note.back() == ';')) row.note.pop_back();
            if (on_row) on_row(row);
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

SweepSpec risk_curve_spec(std::size_t n, std::size_t points, std::size_t trials) {
  SweepSpec s;
  s.n = {n};
  s.d = {1};
  s.k = {0};
  s.detectors = {"count"};
  s.trials = trials;
  s.tau = 0.0;
  const double lo = std::log10(static_cast<double>(n)) * 2.0;  // 1 - rho^2 = n^-2 ...
  const double hi = std::log10(static_cast<double>(n)) * 5.0;  // ... down to n^-5
  s.rho2.clear();
  for (std::size_t i = 0; i < points; ++i) {
    const double e = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    s.rho2.push_back(1.0 - std::pow(10.0, -e));
  }
  return s;
}

}  // namespace corrdetect
