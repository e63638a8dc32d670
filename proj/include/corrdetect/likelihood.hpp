#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corrdetect/model.hpp"
#include "corrdetect/partitions.hpp"

namespace corrdetect {

// Hard enumeration budgets.
inline constexpr std::size_t kExactMaxN = 8;
inline constexpr std::size_t kExactMaxSubsets = 10000;
inline constexpr std::size_t kCycleEnumerateMaxN = 9;

// log f_P(x, y) / f_Q(x, y) for a standard bivariate normal pair with
// correlation rho (P) against independence (Q).
double individual_llr(double x, double y, double rho);

// Same quantity with the rho-dependent constants hoisted. Evaluated as
// c0 - (y - rho x)^2 / (2(1 - rho^2)) + y^2/2, which stays accurate when
// 1 - rho^2 is tiny and the two quadratic terms nearly cancel.
struct LlrKernel {
  double rho;
  double c0;         // -log(1 - rho^2) / 2
  double inv_2s2;    // 1 / (2(1 - rho^2))

  explicit LlrKernel(double rho);
  double operator()(double x, double y) const {
    const double r = y - rho * x;
    return c0 - r * r * inv_2s2 + 0.5 * y * y;
  }
};

// Cycle statistics of sigma relative to S = [k] cap K (0-based: {0..k-1} cap K).
struct CycleType {
  // l -> number of cycles meeting S in exactly l >= 1 points.
  std::map<std::size_t, std::size_t> intersections;
  // length -> number of cycles lying entirely inside S.
  std::map<std::size_t, std::size_t> contained;
};

CycleType cycle_type(const std::vector<std::size_t>& sigma, const std::vector<std::size_t>& K, std::size_t k);

// The likelihood ratio L averaged over all n! permutations and all C(n,k)
// subsets, evaluated in log space.
double exact_log_likelihood_ratio(const DatabasePair& pair, const ModelParams& params);
double exact_likelihood_ratio(const DatabasePair& pair, const ModelParams& params);

struct MomentEstimate {
  std::string method;
  double value = 0.0;
  double std_error = 0.0;   // Monte Carlo methods
  double tail_bound = 0.0;  // series methods
  bool truncated = false;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t terms = 0;
};

enum class CycleMode { enumerate, mc };

// E_H0[L^2] = E_{sigma,K} prod over cycles C of sigma with C inside [k] cap K of
// (1 - rho^{2|C|})^{-d}.
MomentEstimate second_moment_cycle(const ModelParams& params, CycleMode mode, std::size_t trials = 0,
                                   std::uint64_t seed = 0);

// sum_m |Par(m, <= n)| rho^{2m} (d = 1, k = n).
MomentEstimate second_moment_partition_sum(double rho, std::size_t n, double tol);

// 1 + sum_{m=1}^{m_max} rho^{2m} sum_l prod_{i<l} ((k-i)/(n-i))^2 * classes(m, l, d),
// with a certified bound on the omitted terms.
MomentEstimate second_moment_equiv_sum(const ModelParams& params, std::size_t m_max);

// Bound on the terms m > m_max of the equivalence-class sum:
// (k/n)^2 sum_{m > m_max} (d rho^2)^m |Par(m, <= k)|.
double equiv_sum_tail_bound(const ModelParams& params, std::size_t m_max);

// Smallest m_max whose tail certificate is <= tol, or throws CapacityError.
std::size_t equiv_sum_terms_for(const ModelParams& params, double tol);

double second_moment_upper_bound(const ModelParams& params);

// Mean of L^2 over H0 draws, L evaluated exactly.
MomentEstimate second_moment_mc(const ModelParams& params, std::size_t trials, std::uint64_t seed);

struct IntMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<unsigned> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
  unsigned& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  unsigned operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t total() const;                   // |alpha|
  std::vector<std::size_t> row_support() const;  // RS(alpha)
};

struct CoefficientIndex {
  IntMatrix alpha;
  IntMatrix beta;
};

// True when beta is a row permutation of alpha.
bool row_equivalent(const IntMatrix& a, const IntMatrix& b);

// |[alpha]|: n! / prod over groups of identical rows (zero rows included) of multiplicity!.
BigInt class_size(const IntMatrix& alpha);

// E_H1[prod_ij h~_{alpha_ij}(X_ij) h~_{beta_ij}(Y_ij)] with the orthonormal family.
double orthogonal_coefficient(const CoefficientIndex& idx, const ModelParams& params);

}  // namespace corrdetect
