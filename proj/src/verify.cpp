#include "corrdetect/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "corrdetect/detectors.hpp"
#include "corrdetect/exponents.hpp"
#include "corrdetect/hermite.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/model.hpp"
#include "corrdetect/oracles.hpp"
#include "corrdetect/partitions.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Runs body; an escaped exception fails the check with its message.
VerifyCheck guarded(const std::string& name, const std::function<VerifyCheck()>& body) {
  const auto start = std::chrono::steady_clock::now();
  VerifyCheck c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c = {"", false, std::string("exception: ") + e.what()};
  }
  c.name = name;
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  c.detail += fmt(" [%.2f s]", took.count());
  return c;
}

VerifyCheck partition_counts(bool quick) {
  const std::size_t top = quick ? 30 : 60;
  for (std::size_t m = 1; m <= top; ++m) {
    BigInt total = 0;
    for (std::size_t l = 1; l <= m; ++l) {
      const std::size_t listed = enumerate_partitions(m, l).size();
      if (count_exact(m, l) != listed) return {"", false, "Par(" + std::to_string(m) + "," + std::to_string(l) + ") mismatch"};
      total += listed;
    }
    if (count_at_most(m, m) != total) return {"", false, "p(" + std::to_string(m) + ") mismatch"};
  }
  return {"", true, "m <= " + std::to_string(top)};
}

VerifyCheck hr_dominance() {
  for (std::size_t m = 1; m <= 200; ++m) {
    const double p = count_at_most(m, m).convert_to<double>();
    if (!(hardy_ramanujan_bound(m) >= p)) return {"", false, "fails at m = " + std::to_string(m)};
  }
  return {"", true, "m <= 200"};
}

VerifyCheck oracle_triangle(bool quick) {
  const std::size_t top = quick ? 5 : 7;
  double worst = 0.0;
  for (std::size_t n = 1; n <= top; ++n) {
    for (double r2 : {0.1, 0.3, 0.5, 0.8}) {
      const auto p = ModelParams::from_rho2(n, 1, n, r2);
      const auto ps = second_moment_partition_sum(p.rho, n, 1e-12);
      const double cyc = second_moment_cycle(p, CycleMode::enumerate).value;
      const double closed = second_moment_upper_bound(p);
      const double tol = 1e-9 + ps.tail_bound;
      const double dev = std::max({std::abs(ps.value - cyc), std::abs(ps.value - closed), std::abs(cyc - closed)});
      worst = std::max(worst, dev);
      if (dev > tol) return {"", false, fmt("n=%g rho2=%g deviation %.3e", static_cast<double>(n), r2, dev)};
    }
  }
  return {"", true, fmt("max deviation %.3e", worst)};
}

VerifyCheck general_triangle(bool quick) {
  const std::size_t top_n = quick ? 4 : 5;
  std::size_t points = 0;
  for (std::size_t n = 1; n <= top_n; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t d = 1; d <= 3; ++d) {
        for (double x : {0.15, 0.6}) {  // d rho^2
          const auto p = ModelParams::from_rho2(n, d, k, x / static_cast<double>(d));
          const double cyc = second_moment_cycle(p, CycleMode::enumerate).value;
          const std::size_t m = equiv_sum_terms_for(p, 1e-10);
          const auto eq = second_moment_equiv_sum(p, m);
          const double slack = 1e-12 * cyc;
          const double ub = second_moment_upper_bound(p);
          ++points;
          if (cyc < eq.value - slack || cyc > eq.value + eq.tail_bound + slack || ub < cyc - slack) {
            std::ostringstream os;
            os << "n=" << n << " k=" << k << " d=" << d << " d*rho2=" << x << ": cycle " << cyc << " equiv ["
               << eq.value << ", " << eq.value + eq.tail_bound << "] upper " << ub;
            return {"", false, os.str()};
          }
        }
      }
    }
  }
  return {"", true, std::to_string(points) + " grid points"};
}

VerifyCheck exact_likelihood(std::uint64_t seed) {
  double worst = 0.0;
  std::uint64_t idx = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t d : {1u, 2u}) {
        for (double r2 : {0.3, 0.999}) {
          for (int sign : {1, -1}) {
            const auto p = ModelParams::from_rho2(n, d, k, r2, sign);
            for (bool alt : {false, true}) {
              DatabasePair pair;
              sample_hypothesis_into(p, alt, derive_seed(seed, SeedTag::trial, idx++), pair);
              const double a = exact_log_likelihood_ratio(pair, p);
              const double b = oracle::log_likelihood_ratio_bruteforce(pair, p);
              const double dev = std::abs(a - b) / std::max(1.0, std::abs(b));
              worst = std::max(worst, dev);
              if (!(dev <= 1e-10)) {
                return {"", false, fmt("log L %.17g vs brute force %.17g (rho2=%g)", a, b, r2)};
              }
            }
          }
        }
      }
    }
  }
  return {"", true, fmt("max relative deviation of log L %.3e, includes rho2=0.999", worst)};
}

VerifyCheck psi_zeros() {
  for (double r2 : {0.1, 0.5, 0.9, 0.999}) {
    const double rho = std::sqrt(r2);
    if (psi_q(0.0, rho) != 0.0 || psi_q(1.0, rho) != 0.0 || psi_p(0.0, rho) != 0.0 || psi_p(-1.0, rho) != 0.0) {
      return {"", false, fmt("nonzero anchor at rho2=%g", r2)};
    }
  }
  return {"", true, "exact zeros at the anchors"};
}

VerifyCheck psi_quadrature(bool quick) {
  double worst = 0.0;
  const int pts = quick ? 5 : 13;
  for (double r2 : {0.1, 0.5, 0.9}) {
    const double rho = std::sqrt(r2);
    for (Measure w : {Measure::Q, Measure::P}) {
      const Interval dom = psi_domain(w, rho);
      const double mid = 0.5 * (dom.lo + dom.hi), half = 0.4 * (dom.hi - dom.lo);
      for (int i = 0; i < pts; ++i) {
        const double lam = mid - half + 2.0 * half * i / (pts - 1);
        const double a = w == Measure::Q ? psi_q(lam, rho) : psi_p(lam, rho);
        const double b = oracle::psi_quadrature(w, lam, rho);
        worst = std::max(worst, std::abs(a - b));
        if (!(std::abs(a - b) <= 1e-8)) {
          return {"", false, fmt("rho2=%g lambda=%g closed-form %.3e off quadrature", r2, lam, a - b)};
        }
      }
    }
  }
  return {"", true, fmt("max deviation %.3e", worst)};
}

VerifyCheck kl_quadrature() {
  double worst = 0.0;
  for (double r2 : {0.1, 0.5, 0.9}) {
    const double rho = std::sqrt(r2);
    const auto a = kl_divergences(rho);
    const auto b = oracle::kl_quadrature(rho);
    worst = std::max({worst, std::abs(a.p_q - b.p_q), std::abs(a.q_p - b.q_p)});
  }
  return {"", worst <= 1e-8, fmt("max deviation %.3e", worst)};
}

VerifyCheck exponent_bound() {
  // E_Q(0) >= -psi_Q(1/2): the Legendre sup is at least its value at 1/2.
  for (double r2 : {0.1, 0.5, 0.9}) {
    const double rho = std::sqrt(r2);
    const double e = legendre(0.0, Measure::Q, rho).value;
    if (!(e >= -psi_q(0.5, rho) - 1e-12)) return {"", false, fmt("rho2=%g: E_Q(0)=%g", r2, e)};
  }
  return {"", true, "rho2 in {0.1, 0.5, 0.9}"};
}

VerifyCheck tv_quadrature() {
  double worst = 0.0;
  for (double v : {0.5, 0.9, 1.5, 3.0}) {
    worst = std::max(worst, std::abs(tv_centered_gaussians(1.0, v) - oracle::tv_quadrature(1.0, v)));
  }
  return {"", worst <= 1e-10, fmt("max deviation %.3e", worst)};
}

VerifyCheck hermite_orthonormal() {
  // An independent 100-point rule, so the check does not reuse the default one.
  const QuadratureRule rule = gauss_hermite_rule(100);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 12; ++k) {
    for (std::size_t l = 0; l <= 12; ++l) {
      const double v = rule.integrate([&](double x) { return hermite_prob_normalized(k, x) * hermite_prob_normalized(l, x); });
      worst = std::max(worst, std::abs(v - (k == l ? 1.0 : 0.0)));
    }
  }
  return {"", worst <= 1e-8, fmt("max deviation %.3e", worst)};
}

VerifyCheck hermite_smoothing() {
  double worst = 0.0;
  for (std::size_t k = 0; k <= 12; ++k) {
    for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
      for (double x : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
        const double a = smoothed_hermite_expectation(k, rho, x);
        const double b = oracle::smoothed_hermite_quadrature(k, rho, x, HermiteFamily::monic);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
      }
    }
  }
  return {"", worst <= 1e-6, fmt("max relative deviation %.3e", worst)};
}

VerifyCheck equiv_classes(bool quick) {
  const std::size_t top_m = quick ? 8 : 12, top_d = quick ? 3 : 4;
  for (std::size_t d = 1; d <= top_d; ++d) {
    for (std::size_t m = 1; m <= top_m; ++m) {
      for (std::size_t l = 1; l <= m; ++l) {
        const BigInt a = count_equiv_classes_exact(m, l, d);
        if (a != oracle::enumerate_equiv_classes(m, l, d)) {
          return {"", false, "m=" + std::to_string(m) + " l=" + std::to_string(l) + " d=" + std::to_string(d)};
        }
        const auto b = equiv_class_bounds(m, l, d);
        if (a > b.upper_binomial || a > b.upper_dm || a.convert_to<double>() < b.lower * (1 - 1e-12)) {
          return {"", false, "bounds violated at m=" + std::to_string(m) + " l=" + std::to_string(l)};
        }
      }
    }
  }
  return {"", true, "m <= " + std::to_string(top_m) + ", d <= " + std::to_string(top_d)};
}

VerifyCheck count_calibration(bool quick, std::uint64_t seed) {
  const std::size_t trials = quick ? 100000 : 1000000;
  for (double r2 : {0.5, 0.9}) {
    const auto p = ModelParams::from_rho2(10, 1, 10, r2);
    const auto cfg = calibrate_count(p, 0.0, trials, derive_seed(seed, SeedTag::calibration, 0));
    const double P = oracle::llr_tail_semi_analytic(Measure::P, p.rho, 0.0);
    const double Q = oracle::llr_tail_semi_analytic(Measure::Q, p.rho, 0.0);
    if (std::abs(cfg.p_rho_d - P) > 4.0 * cfg.p_stderr + 1e-12 || std::abs(cfg.q_rho_d - Q) > 4.0 * cfg.q_stderr + 1e-12) {
      return {"", false, fmt("rho2=%g: MC (%.5f, %.5f)", r2, cfg.p_rho_d, cfg.q_rho_d) + fmt(" vs (%.5f, %.5f)", P, Q)};
    }
  }
  return {"", true, "P, Q within 4 stderr of the semi-analytic values"};
}

VerifyCheck coefficients(bool quick, std::uint64_t seed) {
  const std::size_t trials = quick ? 20000 : 200000;
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 2; ++n) {
    const auto p = ModelParams::from_rho2(n, 1, n, 0.5);
    std::vector<CoefficientIndex> idx;
    for (const auto& a : oracle::enumerate_index_matrices(n, 1, 2)) {
      for (const auto& b : oracle::enumerate_index_matrices(n, 1, 2)) idx.push_back({a, b});
    }
    const auto mc = oracle::coefficient_mc(idx, p, trials, derive_seed(seed, SeedTag::moment, n));
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const double c = orthogonal_coefficient(idx[q], p);
      ++checked;
      if (std::abs(c - mc[q].mean) > 4.0 * mc[q].std_error + 1e-12) {
        return {"", false, fmt("closed form %.6f vs MC %.6f +- %.6f", c, mc[q].mean, mc[q].std_error)};
      }
    }
  }
  return {"", true, std::to_string(checked) + " coefficients within 4 stderr"};
}

}  // namespace

std::vector<VerifyCheck> run_verification(bool quick, std::uint64_t seed) {
  std::vector<VerifyCheck> out;
  out.push_back(guarded("partition_counts_vs_enumeration", [&] { return partition_counts(quick); }));
  out.push_back(guarded("hardy_ramanujan_dominance", [] { return hr_dominance(); }));
  out.push_back(guarded("second_moment_oracle_triangle", [&] { return oracle_triangle(quick); }));
  out.push_back(guarded("second_moment_general_triangle", [&] { return general_triangle(quick); }));
  out.push_back(guarded("exact_likelihood_vs_bruteforce", [&] { return exact_likelihood(seed); }));
  out.push_back(guarded("psi_anchor_zeros", [] { return psi_zeros(); }));
  out.push_back(guarded("psi_vs_quadrature", [&] { return psi_quadrature(quick); }));
  out.push_back(guarded("kl_vs_quadrature", [] { return kl_quadrature(); }));
  out.push_back(guarded("exponent_half_bound", [] { return exponent_bound(); }));
  out.push_back(guarded("tv_crossing_vs_quadrature", [] { return tv_quadrature(); }));
  out.push_back(guarded("hermite_orthonormality", [] { return hermite_orthonormal(); }));
  out.push_back(guarded("hermite_smoothing_identity", [] { return hermite_smoothing(); }));
  out.push_back(guarded("equivalence_class_counts", [&] { return equiv_classes(quick); }));
  out.push_back(guarded("count_calibration_vs_semi_analytic", [&] { return count_calibration(quick, seed); }));
  out.push_back(guarded("orthogonal_coefficients_vs_mc", [&] { return coefficients(quick, seed); }));
  return out;
}

}  // namespace corrdetect
