#include "corrdetect/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "corrdetect/errors.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect {

double individual_llr(double x, double y, double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("individual_llr requires |rho| < 1");
  return LlrKernel(rho)(x, y);
}

LlrKernel::LlrKernel(double r) : rho(r) {
  const double s2 = (1.0 - r) * (1.0 + r);
  c0 = -0.5 * std::log(s2);
  inv_2s2 = 0.5 / s2;
}

CycleType cycle_type(const std::vector<std::size_t>& sigma, const std::vector<std::size_t>& K, std::size_t k) {
  const std::size_t n = sigma.size();
  {
    std::vector<char> hit(n, 0);
    for (std::size_t v : sigma) {
      if (v >= n || hit[v]) throw DomainError("sigma is not a permutation");
      hit[v] = 1;
    }
  }
  std::vector<char> in_s(n, 0);
  for (std::size_t i : K) {
    if (i >= n) throw DomainError("subset index out of range");
    if (i < k) in_s[i] = 1;
  }
  std::vector<char> seen(n, 0);
  CycleType ct;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::size_t len = 0, hit = 0;
    for (std::size_t j = start; !seen[j]; j = sigma[j]) {
      seen[j] = 1;
      ++len;
      hit += in_s[j];
    }
    if (hit > 0) ++ct.intersections[hit];
    if (hit == len) ++ct.contained[len];
  }
  return ct;
}

namespace {

void check_exact_budget(const ModelParams& p) {
  p.require_density();
  if (p.n > kExactMaxN) {
    throw BudgetError("exact likelihood ratio enumerates n! permutations; n <= " + std::to_string(kExactMaxN));
  }
  if (binomial(p.n, p.k) > kExactMaxSubsets) {
    throw BudgetError("exact likelihood ratio: C(n,k) exceeds " + std::to_string(kExactMaxSubsets));
  }
}

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// log e_k(exp(a_0), ..., exp(a_{n-1})).
double log_elementary_symmetric(const double* a, std::size_t n, std::size_t k, std::vector<double>& work) {
  if (k == n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const double c = *std::max_element(a, a + n);
  work.assign(k + 1, 0.0);
  work[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = std::exp(a[i] - c);
    for (std::size_t j = std::min(k, i + 1); j >= 1; --j) work[j] += work[j - 1] * b;
  }
  if (work[k] > 1e-250) return static_cast<double>(k) * c + std::log(work[k]);
  // Dynamic range too wide for the scaled linear recursion; redo it in log space.
  const double ninf = -std::numeric_limits<double>::infinity();
  work.assign(k + 1, ninf);
  work[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = std::min(k, i + 1); j >= 1; --j) work[j] = log_add(work[j], work[j - 1] + a[i]);
  }
  return work[k];
}

}  // namespace

double exact_log_likelihood_ratio(const DatabasePair& pair, const ModelParams& params) {
  check_exact_budget(params);
  check_dimensions(pair, params);
  const std::size_t n = params.n, d = params.d;
  const LlrKernel llr(params.rho);
  if (params.rho == 0.0) return 0.0;

  std::vector<double> A(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = pair.X.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* y = pair.Y.row(j);
      double s = 0.0;
      for (std::size_t l = 0; l < d; ++l) s += llr(x[l], y[l]);
      A[i * n + j] = s;
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> a(n), work;
  // Streaming log-sum-exp over permutations.
  double top = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  do {
    for (std::size_t i = 0; i < n; ++i) a[i] = A[i * n + perm[i]];
    const double v = log_elementary_symmetric(a.data(), n, params.k, work);
    if (v > top) {
      acc = acc * std::exp(top - v) + 1.0;
      top = v;
    } else {
      acc += std::exp(v - top);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double log_count = log_factorial(n) + std::log(binomial(n, params.k).convert_to<double>());
  return top + std::log(acc) - log_count;
}

double exact_likelihood_ratio(const DatabasePair& pair, const ModelParams& params) {
  return std::exp(exact_log_likelihood_ratio(pair, params));
}

namespace {

// Per-cycle factors (1 - rho^{2L})^{-d}, L = 1..n.
std::vector<double> cycle_factors(const ModelParams& p) {
  std::vector<double> f(p.n + 1, 1.0);
  const double r2 = p.rho2();
  double pw = 1.0;
  for (std::size_t L = 1; L <= p.n; ++L) {
    pw *= r2;
    f[L] = std::pow(1.0 - pw, -static_cast<double>(p.d));
  }
  // Fixed points need 1 - rho^2 computed without cancellation.
  f[1] = std::pow(p.one_minus_rho2(), -static_cast<double>(p.d));
  return f;
}

double cycle_product(const std::vector<std::size_t>& sigma, const std::vector<char>& in_s,
                     const std::vector<double>& factors, std::vector<char>& seen) {
  const std::size_t n = sigma.size();
  std::fill(seen.begin(), seen.end(), 0);
  double prod = 1.0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::size_t len = 0;
    bool inside = true;
    for (std::size_t j = start; !seen[j]; j = sigma[j]) {
      seen[j] = 1;
      ++len;
      inside = inside && in_s[j];
    }
    if (inside) prod *= factors[len];
  }
  return prod;
}

}  // namespace

MomentEstimate second_moment_cycle(const ModelParams& params, CycleMode mode, std::size_t trials,
                                   std::uint64_t seed) {
  params.require_density();
  const std::size_t n = params.n, k = params.k;
  const auto factors = cycle_factors(params);
  MomentEstimate out;

  if (mode == CycleMode::enumerate) {
    if (n > kCycleEnumerateMaxN) {
      throw BudgetError("cycle enumeration supports n <= " + std::to_string(kCycleEnumerateMaxN));
    }
    out.method = "cycle_enumerate";
    // All k-subsets as membership masks of S = [k] cap K.
    std::vector<std::vector<char>> masks;
    std::vector<char> sel(n, 0);
    std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(k), 1);
    std::sort(sel.begin(), sel.end());
    do {
      std::vector<char> m(n, 0);
      for (std::size_t i = 0; i < k; ++i) m[i] = sel[i];
      masks.push_back(std::move(m));
    } while (std::next_permutation(sel.begin(), sel.end()));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<char> seen(n);
    long double sum = 0.0L;
    std::size_t count = 0;
    do {
      for (const auto& m : masks) {
        sum += cycle_product(perm, m, factors, seen);
        ++count;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.value = static_cast<double>(sum / static_cast<long double>(count));
    out.trials = count;
    return out;
  }

  if (trials == 0) throw DomainError("Monte Carlo mode needs trials >= 1");
  out.method = "cycle_mc";
  auto parts = run_chunks<MomentAccumulator>(trials, [&](std::size_t c, std::size_t b, std::size_t e) {
    MomentAccumulator acc;
    Rng rng(derive_seed(seed, SeedTag::chunk, c));
    HiddenStructure h;
    std::vector<char> in_s(n), seen(n);
    for (std::size_t t = b; t < e; ++t) {
      h = sample_hidden(params, rng.bits());
      std::fill(in_s.begin(), in_s.end(), 0);
      for (std::size_t i : h.K) in_s[i] = i < k;
      acc.add(cycle_product(h.sigma, in_s, factors, seen));
    }
    return acc;
  });
  MomentAccumulator total;
  for (const auto& p : parts) total.merge(p);
  out.value = total.mean();
  out.std_error = total.stderr_of_mean();
  out.trials = trials;
  out.seed = seed;
  return out;
}

MomentEstimate second_moment_partition_sum(double rho, std::size_t n, double tol) {
  const double r2 = rho * rho;
  if (!(r2 < 1.0)) throw DomainError("partition-sum second moment diverges for rho^2 >= 1");
  const SeriesResult s = partition_series(r2, n, tol);
  MomentEstimate out;
  out.method = "partition_sum";
  out.value = s.value;
  out.tail_bound = s.tail_bound;
  out.truncated = s.tail_bound > 0.0;
  out.terms = s.terms;
  return out;
}

namespace {

void check_equiv_domain(const ModelParams& p) {
  p.require_density();
  if (!(static_cast<double>(p.d) * p.rho2() < 1.0)) {
    throw DomainError("equivalence-class sum requires d rho^2 < 1");
  }
}

}  // namespace

double equiv_sum_tail_bound(const ModelParams& params, std::size_t m_max) {
  check_equiv_domain(params);
  const double kn = static_cast<double>(params.k) / static_cast<double>(params.n);
  return kn * kn * partition_tail_bound(static_cast<double>(params.d) * params.rho2(), params.k, m_max + 1);
}

std::size_t equiv_sum_terms_for(const ModelParams& params, double tol) {
  check_equiv_domain(params);
  for (std::size_t m = 0; m <= kClassCountLimit; ++m) {
    if (equiv_sum_tail_bound(params, m) <= tol) return m;
  }
  throw CapacityError("equivalence-class sum needs more than " + std::to_string(kClassCountLimit) + " terms");
}

MomentEstimate second_moment_equiv_sum(const ModelParams& params, std::size_t m_max) {
  check_equiv_domain(params);
  const std::size_t n = params.n, k = params.k;
  std::vector<double> w(k + 1, 1.0);  // w[l] = prod_{i<l} ((k-i)/(n-i))^2
  for (std::size_t l = 1; l <= k; ++l) {
    const double f = static_cast<double>(k - (l - 1)) / static_cast<double>(n - (l - 1));
    w[l] = w[l - 1] * f * f;
  }
  const auto classes = equiv_class_table(m_max, k, params.d);
  const long double r2 = static_cast<long double>(params.rho) * params.rho;
  long double total = 1.0L, pw = 1.0L;
  for (std::size_t m = 1; m <= m_max; ++m) {
    pw *= r2;
    long double inner = 0.0L;
    for (std::size_t l = 1; l <= std::min(k, m); ++l) inner += w[l] * classes[m][l].convert_to<long double>();
    total += pw * inner;
  }
  MomentEstimate out;
  out.method = "equiv_sum";
  out.value = static_cast<double>(total);
  out.tail_bound = equiv_sum_tail_bound(params, m_max);
  out.truncated = out.tail_bound > 0.0;
  out.terms = m_max + 1;
  return out;
}

double second_moment_upper_bound(const ModelParams& params) {
  params.validate();
  const double x = static_cast<double>(params.d) * params.rho2();
  if (!(x < 1.0)) throw DomainError("closed second-moment bound requires d rho^2 < 1");
  const double kn = static_cast<double>(params.k) / static_cast<double>(params.n);
  return 1.0 + kn * kn * (partition_product(x, params.k) - 1.0);
}

MomentEstimate second_moment_mc(const ModelParams& params, std::size_t trials, std::uint64_t seed) {
  check_exact_budget(params);
  if (trials == 0) throw DomainError("second_moment_mc needs trials >= 1");
  auto parts = run_chunks<MomentAccumulator>(trials, [&](std::size_t, std::size_t b, std::size_t e) {
    MomentAccumulator acc;
    DatabasePair pair;
    for (std::size_t t = b; t < e; ++t) {
      sample_null_into(params, derive_seed(seed, SeedTag::moment, t), pair);
      acc.add(std::exp(2.0 * exact_log_likelihood_ratio(pair, params)));
    }
    return acc;
  });
  MomentAccumulator total;
  for (const auto& p : parts) total.merge(p);
  MomentEstimate out;
  out.method = "mc";
  out.value = total.mean();
  out.std_error = total.stderr_of_mean();
  out.trials = trials;
  out.seed = seed;
  return out;
}

std::size_t IntMatrix::total() const {
  std::size_t s = 0;
  for (unsigned v : data) s += v;
  return s;
}

std::vector<std::size_t> IntMatrix::row_support() const {
  std::vector<std::size_t> rs;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if ((*this)(i, j) != 0) {
        rs.push_back(i);
        break;
      }
    }
  }
  return rs;
}

namespace {

std::vector<std::vector<unsigned>> sorted_rows(const IntMatrix& a) {
  std::vector<std::vector<unsigned>> r(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    r[i].assign(a.data.begin() + static_cast<std::ptrdiff_t>(i * a.cols),
                a.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * a.cols));
  }
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

bool row_equivalent(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  return sorted_rows(a) == sorted_rows(b);
}

BigInt class_size(const IntMatrix& alpha) {
  const auto rows = sorted_rows(alpha);
  BigInt v = 1;
  for (std::size_t i = 2; i <= alpha.rows; ++i) v *= i;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i < rows.size() && rows[i] == rows[i - 1]) {
      ++run;
    } else {
      for (std::size_t f = 2; f <= run; ++f) v /= f;
      run = 1;
    }
  }
  return v;
}

double orthogonal_coefficient(const CoefficientIndex& idx, const ModelParams& params) {
  params.validate();
  const auto& a = idx.alpha;
  const auto& b = idx.beta;
  if (a.rows != params.n || b.rows != params.n || a.cols != params.d || b.cols != params.d) {
    throw DimensionError("coefficient index must be n x d for both alpha and beta");
  }
  if (!row_equivalent(a, b)) return 0.0;
  const std::size_t l = a.row_support().size();
  if (l > params.k) return 0.0;
  double v = std::pow(params.rho, static_cast<double>(a.total())) / class_size(a).convert_to<double>();
  for (std::size_t i = 0; i < l; ++i) {
    v *= static_cast<double>(params.k - i) / static_cast<double>(params.n - i);
  }
  return v;
}

}  // namespace corrdetect
