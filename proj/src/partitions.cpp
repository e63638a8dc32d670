#include "corrdetect/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "corrdetect/errors.hpp"

namespace corrdetect {

namespace {

const double kHrExponent = std::numbers::pi * std::sqrt(2.0 / 3.0);

std::size_t clamp_parts(std::size_t m, std::size_t n_parts) { return std::min(m, n_parts); }

// log of the rigorous bound p(m) < exp(pi*sqrt(2m/3)).
double log_p_bound(std::size_t m) { return kHrExponent * std::sqrt(static_cast<double>(m)); }

double log_binomial(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// Sum of t(m) for m >= m0 when t(m+1)/t(m) is nonincreasing: t(m0)/(1 - r(m0)).
double geometric_tail(double log_first, double ratio) {
  if (!(ratio < 1.0)) return std::numeric_limits<double>::infinity();
  return std::exp(log_first) / (1.0 - ratio);
}

}  // namespace

PartitionTable::PartitionTable(std::size_t max_m) : max_m_(max_m) {
  exact_.resize(max_m + 1);
  at_most_.resize(max_m + 1);
  for (std::size_t m = 0; m <= max_m; ++m) {
    exact_[m].assign(m + 1, BigInt(0));
    if (m == 0) {
      exact_[0][0] = 1;
    } else {
      for (std::size_t l = 1; l <= m; ++l) {
        // Either some part equals 1 (drop it) or every part is >= 2 (subtract 1 from each).
        BigInt v = exact_[m - 1].size() > l - 1 ? exact_[m - 1][l - 1] : BigInt(0);
        if (m - l >= l) v += exact_[m - l][l];
        exact_[m][l] = std::move(v);
      }
    }
    at_most_[m].resize(m + 1);
    BigInt acc = 0;
    for (std::size_t n = 0; n <= m; ++n) {
      acc += exact_[m][n];
      at_most_[m][n] = acc;
    }
  }
}

const BigInt& PartitionTable::exact(std::size_t m, std::size_t parts) const {
  if (m > max_m_) {
    throw CapacityError("partition table holds m <= " + std::to_string(max_m_) + ", requested " +
                        std::to_string(m));
  }
  return parts > m ? zero_ : exact_[m][parts];
}

const BigInt& PartitionTable::at_most(std::size_t m, std::size_t n_parts) const {
  if (m > max_m_) {
    throw CapacityError("partition table holds m <= " + std::to_string(max_m_) + ", requested " +
                        std::to_string(m));
  }
  return at_most_[m][clamp_parts(m, n_parts)];
}

void PartitionTable::write_csv(std::ostream& os) const {
  os << "m,l,count\n";
  for (std::size_t m = 0; m <= max_m_; ++m) {
    for (std::size_t l = 0; l <= m; ++l) os << m << ',' << l << ',' << exact_[m][l].str() << '\n';
  }
}

const PartitionTable& shared_partition_table() {
  static const PartitionTable table(kDefaultTableLimit);
  return table;
}

BigInt count_at_most(std::size_t m, std::size_t n_parts) {
  return shared_partition_table().at_most(m, n_parts);
}

BigInt count_exact(std::size_t m, std::size_t parts) {
  return shared_partition_table().exact(m, parts);
}

std::vector<BigInt> count_at_most_column(std::size_t n_parts, std::size_t max_m) {
  std::vector<BigInt> col(max_m + 1, BigInt(0));
  col[0] = 1;
  // Conjugation: partitions with at most n parts = partitions with parts <= n.
  const std::size_t largest = clamp_parts(max_m, n_parts);
  for (std::size_t part = 1; part <= largest; ++part) {
    for (std::size_t m = part; m <= max_m; ++m) col[m] += col[m - part];
  }
  return col;
}

std::vector<std::vector<unsigned>> enumerate_partitions(std::size_t m, std::size_t parts) {
  if (m > kEnumerationLimit) {
    throw CapacityError("enumerate_partitions supports m <= " + std::to_string(kEnumerationLimit));
  }
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur;
  // Parts are generated in nonincreasing order; the smallest admissible first
  // part is tried first, which yields lexicographic order.
  auto rec = [&](auto&& self, std::size_t rest, std::size_t slots, std::size_t cap) -> void {
    if (slots == 0) {
      if (rest == 0) out.push_back(cur);
      return;
    }
    if (rest < slots) return;
    const std::size_t hi = std::min(cap, rest - (slots - 1));
    const std::size_t lo = (rest + slots - 1) / slots;
    for (std::size_t first = lo; first <= hi; ++first) {
      cur.push_back(static_cast<unsigned>(first));
      self(self, rest - first, slots - 1, first);
      cur.pop_back();
    }
  };
  rec(rec, m, parts, m);
  return out;
}

double hardy_ramanujan_bound(std::size_t m, double c) {
  if (m == 0) throw DomainError("hardy_ramanujan_bound requires m >= 1");
  if (!(c > 0.0)) throw DomainError("hardy_ramanujan_bound requires c > 0");
  const double md = static_cast<double>(m);
  return c * std::exp(kHrExponent * std::sqrt(md)) / (4.0 * std::sqrt(3.0) * md);
}

double partition_tail_bound(double x, std::size_t n_parts, std::size_t m_from) {
  if (x < 0.0 || x >= 1.0) throw DomainError("partition_tail_bound requires 0 <= x < 1");
  if (x == 0.0) return m_from == 0 ? 1.0 : 0.0;
  const double lx = std::log(x);
  const double m0 = static_cast<double>(m_from);
  if (n_parts == 0) return m_from == 0 ? 1.0 : 0.0;

  const double ratio_p = x * std::exp(kHrExponent * (std::sqrt(m0 + 1.0) - std::sqrt(m0)));
  double best = geometric_tail(log_p_bound(m_from) + m0 * lx, ratio_p);

  if (n_parts != kUnbounded) {
    const double n = static_cast<double>(n_parts);
    const double ratio_b = x * (m0 + n) / (m0 + 1.0);
    best = std::min(best, geometric_tail(log_binomial(m0 + n - 1.0, n - 1.0) + m0 * lx, ratio_b));
  }
  return best;
}

SeriesResult partition_series(double x, std::size_t n_parts, double tol, std::size_t max_terms) {
  if (!(x >= 0.0) || x >= 1.0) throw DomainError("partition_series requires 0 <= x < 1");
  if (!(tol > 0.0)) throw DomainError("partition_series requires tol > 0");
  SeriesResult r;
  if (x == 0.0 || n_parts == 0) {
    r.value = 1.0;
    r.terms = 1;
    return r;
  }
  std::size_t m_max = 0;
  double tail = partition_tail_bound(x, n_parts, 1);
  while (!(tail <= tol)) {
    ++m_max;
    if (m_max >= max_terms) {
      throw CapacityError("partition_series needs more than " + std::to_string(max_terms) +
                          " terms at x = " + std::to_string(x));
    }
    tail = partition_tail_bound(x, n_parts, m_max + 1);
  }
  const double work = static_cast<double>(m_max) * static_cast<double>(clamp_parts(m_max, n_parts));
  if (work > 5e7) {
    throw CapacityError("partition_series: dynamic program too large at x = " + std::to_string(x));
  }
  const auto col = count_at_most_column(n_parts, m_max);
  long double sum = 0.0L, comp = 0.0L;
  const long double lx = static_cast<long double>(x);
  for (std::size_t m = 0; m <= m_max; ++m) {
    const long double term = col[m].convert_to<long double>() * std::pow(lx, static_cast<long double>(m));
    const long double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  r.value = static_cast<double>(sum + comp);
  r.tail_bound = tail;
  r.terms = m_max + 1;
  return r;
}

double partition_product(double x, std::size_t n_parts) {
  if (!(x >= 0.0) || x >= 1.0) throw DomainError("partition_product requires 0 <= x < 1");
  if (n_parts == kUnbounded) throw DomainError("partition_product requires a finite part count");
  long double p = 1.0L;
  long double xi = 1.0L;
  for (std::size_t i = 1; i <= n_parts; ++i) {
    xi *= x;
    if (xi == 0.0L) break;
    p /= (1.0L - xi);
  }
  return static_cast<double>(p);
}

BigInt binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt v = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    v *= (n - r + i);
    v /= i;
  }
  return v;
}

namespace {

// Generating-function dynamic program over row weights q:
//   sum_{m,l} T[m][l] x^m y^l = prod_q sum_j w(q, j) x^{qj} y^j.
template <class Value, class Weight>
std::vector<std::vector<Value>> weighted_partition_dp(std::size_t max_m, std::size_t max_l, Weight w) {
  std::vector<std::vector<Value>> t(max_m + 1, std::vector<Value>(max_l + 1, Value(0)));
  t[0][0] = Value(1);
  for (std::size_t q = 1; q <= max_m; ++q) {
    std::vector<Value> wq;
    for (std::size_t j = 0; j * q <= max_m && j <= max_l; ++j) wq.push_back(w(q, j));
    // Descending m keeps the update in place: t[m - jq][l - j] still holds the
    // table from before weight q was admitted.
    for (std::size_t m = max_m; m >= q; --m) {
      for (std::size_t l = max_l; l >= 1; --l) {
        Value acc = t[m][l];
        for (std::size_t j = 1; j < wq.size() && j * q <= m && j <= l; ++j) {
          acc += wq[j] * t[m - j * q][l - j];
        }
        t[m][l] = acc;
      }
    }
  }
  return t;
}

void check_class_limits(std::size_t m, std::size_t d) {
  if (d == 0) throw DomainError("dimension d must be >= 1");
  if (m > kClassCountLimit) {
    throw CapacityError("equivalence-class counts supported for m <= " + std::to_string(kClassCountLimit));
  }
}

}  // namespace

std::vector<std::vector<BigInt>> equiv_class_table(std::size_t max_m, std::size_t max_parts, std::size_t d) {
  check_class_limits(max_m, d);
  max_parts = std::min(max_parts, max_m);
  // A multiset of j vectors drawn from the C(q+d-1, d-1) vectors of weight q
  // can be chosen in C(c_q + j - 1, j) ways.
  return weighted_partition_dp<BigInt>(max_m, max_parts, [d](std::size_t q, std::size_t j) {
    const BigInt c = binomial(q + d - 1, d - 1);
    BigInt v = 1;
    for (std::size_t i = 0; i < j; ++i) {
      v *= (c + i);
      v /= (i + 1);
    }
    return v;
  });
}

BigInt count_equiv_classes_exact(std::size_t m, std::size_t parts, std::size_t d) {
  check_class_limits(m, d);
  if (parts > m) return 0;
  return equiv_class_table(m, parts, d)[m][parts];
}

ClassCountBounds equiv_class_bounds(std::size_t m, std::size_t parts, std::size_t d) {
  check_class_limits(m, d);
  ClassCountBounds b;
  if (m > kDefaultTableLimit) {
    throw CapacityError("equiv_class_bounds supports m <= " + std::to_string(kDefaultTableLimit));
  }
  if (parts > m) return b;
  const auto lower = weighted_partition_dp<double>(m, parts, [d](std::size_t q, std::size_t j) {
    const double c = binomial(q + d - 1, d - 1).convert_to<double>();
    return std::exp(static_cast<double>(j) * std::log(c) - std::lgamma(static_cast<double>(j) + 1.0));
  });
  const auto upper = weighted_partition_dp<BigInt>(m, parts, [d](std::size_t q, std::size_t j) {
    return boost::multiprecision::pow(binomial(q + d - 1, d - 1), static_cast<unsigned>(j));
  });
  b.lower = lower[m][parts];
  b.upper_binomial = upper[m][parts];
  b.upper_dm = boost::multiprecision::pow(BigInt(d), static_cast<unsigned>(m)) * count_exact(m, parts);
  return b;
}

}  // namespace corrdetect
