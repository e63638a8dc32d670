#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace corrdetect {

using BigInt = boost::multiprecision::cpp_int;

// Passed as a part-count limit to mean "no limit" (equivalent to n >= m).
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

inline constexpr std::size_t kDefaultTableLimit = 1000;
inline constexpr std::size_t kEnumerationLimit = 60;
inline constexpr std::size_t kSeriesTermBudget = 50000;
inline constexpr std::size_t kClassCountLimit = 2000;

// max over 1 <= m <= 1000 of p(m) * 4*sqrt(3)*m * exp(-pi*sqrt(2m/3)), rounded
// up in the last digit; see tools/oracles/derive_hr_constant.py. The maximum
// is attained at m = 1000 and the ratio keeps creeping toward 1 beyond it, so
// this constant certifies tabulated m only.
inline constexpr double kHardyRamanujanC = 0.98604505761132;

// Exact |Par(m, l)| for m <= max_m, with cumulative |Par(m, <= n)|.
// Immutable after construction.
class PartitionTable {
 public:
  explicit PartitionTable(std::size_t max_m);

  std::size_t max_m() const { return max_m_; }
  const BigInt& exact(std::size_t m, std::size_t parts) const;
  const BigInt& at_most(std::size_t m, std::size_t n_parts) const;
  void write_csv(std::ostream& os) const;  // m,l,count

 private:
  std::size_t max_m_;
  std::vector<std::vector<BigInt>> exact_;    // exact_[m][l], l <= m
  std::vector<std::vector<BigInt>> at_most_;  // at_most_[m][n], n <= m
  BigInt zero_ = 0;
};

// Process-wide table with kDefaultTableLimit rows, built on first use.
const PartitionTable& shared_partition_table();

BigInt count_at_most(std::size_t m, std::size_t n_parts);
BigInt count_exact(std::size_t m, std::size_t parts);

// |Par(m, <= n_parts)| for m = 0..max_m by the one-dimensional recurrence over
// part sizes. Not limited by the shared table.
std::vector<BigInt> count_at_most_column(std::size_t n_parts, std::size_t max_m);

// All partitions of m into exactly `parts` parts, each listed in
// nonincreasing order, the list sorted lexicographically.
std::vector<std::vector<unsigned>> enumerate_partitions(std::size_t m, std::size_t parts);

double hardy_ramanujan_bound(std::size_t m, double c = kHardyRamanujanC);

// Rigorous upper bound on sum_{m >= m_from} |Par(m, <= n_parts)| * x^m, using
// p(m) < exp(pi*sqrt(2m/3)) and, for finite n_parts, |Par(m, <= n)| <=
// C(m+n-1, n-1). Returns +inf when neither bound is summable from m_from.
double partition_tail_bound(double x, std::size_t n_parts, std::size_t m_from);

struct SeriesResult {
  double value = 0.0;       // partial sum
  double tail_bound = 0.0;  // certified bound on the omitted terms
  std::size_t terms = 0;    // number of terms summed (m = 0..terms-1)
};

// sum_{m>=0} |Par(m, <= n_parts)| x^m, truncated once the certified tail is
// below tol (absolute).
SeriesResult partition_series(double x, std::size_t n_parts, double tol,
                              std::size_t max_terms = kSeriesTermBudget);

// prod_{i=1}^{n_parts} 1/(1 - x^i).
double partition_product(double x, std::size_t n_parts);

struct ClassCountBounds {
  double lower = 0.0;
  BigInt upper_binomial = 0;
  BigInt upper_dm = 0;
};

ClassCountBounds equiv_class_bounds(std::size_t m, std::size_t parts, std::size_t d);

// Number of multisets of `parts` nonzero vectors in N^d with total entry sum m.
BigInt count_equiv_classes_exact(std::size_t m, std::size_t parts, std::size_t d);

// table[m][l] = count_equiv_classes_exact(m, l, d) for m <= max_m, l <= max_parts.
std::vector<std::vector<BigInt>> equiv_class_table(std::size_t max_m, std::size_t max_parts,
                                                   std::size_t d);

BigInt binomial(std::size_t n, std::size_t r);

}  // namespace corrdetect
