#include "corrdetect/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "corrdetect/errors.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect::oracle {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_bivariate_density(double x, double y, double rho) {
  const double s2 = 1.0 - rho * rho;
  return -std::log(2.0 * std::numbers::pi * std::sqrt(s2)) - (x * x - 2.0 * rho * x * y + y * y) / (2.0 * s2);
}

double log_product_density(double x, double y) {
  return -std::log(2.0 * std::numbers::pi) - 0.5 * (x * x + y * y);
}

// Depth cap: tolerances near machine precision are never met on some
// integrands, and an uncapped bisection then explodes.
constexpr unsigned kMaxDepth = 12;

template <class F>
double integrate_line(F&& f, double tol) {
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, -kInf, kInf, kMaxDepth, tol, &err);
}

// Integral over the plane, split at y = rho x where the ridge of the
// correlated density sits.
template <class F>
double integrate_plane(F&& f, double rho, double tol) {
  auto outer = [&](double x) {
    const double c = rho * x;
    double err = 0.0;
    auto g = [&](double y) { return f(x, y); };
    return gauss_kronrod<double, 61>::integrate(g, -kInf, c, kMaxDepth, tol, &err) +
           gauss_kronrod<double, 61>::integrate(g, c, kInf, kMaxDepth, tol, &err);
  };
  return integrate_line(outer, tol);
}

}  // namespace

double log_likelihood_ratio_bruteforce(const DatabasePair& pair, const ModelParams& params) {
  params.require_density();
  check_dimensions(pair, params);
  const std::size_t n = params.n, d = params.d, k = params.k;
  if (n > 6) throw BudgetError("brute-force likelihood ratio supports n <= 6");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<char> sel(n, 0);
  std::vector<double> logs;
  do {
    std::fill(sel.begin(), sel.end(), 0);
    std::fill(sel.end() - static_cast<std::ptrdiff_t>(k), sel.end(), 1);
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!sel[i]) continue;
        for (std::size_t l = 0; l < d; ++l) {
          const double x = pair.X(i, l), y = pair.Y(perm[i], l);
          s += log_bivariate_density(x, y, params.rho) - log_product_density(x, y);
        }
      }
      logs.push_back(s);
    } while (std::next_permutation(sel.begin(), sel.end()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - top);
  return top + std::log(acc) - std::log(static_cast<double>(logs.size()));
}

double psi_quadrature(Measure which, double lambda, double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("psi_quadrature requires |rho| < 1");
  auto f = [&](double x, double y) {
    const double l = log_bivariate_density(x, y, rho) - log_product_density(x, y);
    const double base = which == Measure::Q ? log_product_density(x, y) : log_bivariate_density(x, y, rho);
    return std::exp(lambda * l + base);
  };
  return std::log(integrate_plane(f, rho, 1e-11));
}

KlPair kl_quadrature(double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("kl_quadrature requires |rho| < 1");
  auto fp = [&](double x, double y) {
    const double lp = log_bivariate_density(x, y, rho), lq = log_product_density(x, y);
    return (lp - lq) * std::exp(lp);
  };
  auto fq = [&](double x, double y) {
    const double lp = log_bivariate_density(x, y, rho), lq = log_product_density(x, y);
    return (lq - lp) * std::exp(lq);
  };
  return {integrate_plane(fp, rho, 1e-11), integrate_plane(fq, rho, 1e-11)};
}

double tv_quadrature(double v1, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) throw DomainError("variances must be positive");
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2);
  auto f = [&](double t) {
    const double a = std::exp(-0.5 * t * t / v1) / (s1 * std::sqrt(2.0 * std::numbers::pi));
    const double b = std::exp(-0.5 * t * t / v2) / (s2 * std::sqrt(2.0 * std::numbers::pi));
    return std::abs(a - b);
  };
  // Integrand is even; break [0, inf) at a ladder of points so the kink is
  // resolved by adaptivity rather than located analytically.
  double err = 0.0, total = 0.0;
  const double scale = std::max(s1, s2);
  double lo = 0.0;
  for (double hi : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0}) {
    total += gauss_kronrod<double, 61>::integrate(f, lo * scale, hi * scale, kMaxDepth, 1e-14, &err);
    lo = hi;
  }
  total += gauss_kronrod<double, 61>::integrate(f, lo * scale, kInf, kMaxDepth, 1e-14, &err);
  return total;  // 2 * (1/2) * int_0^inf
}

double llr_tail_semi_analytic(Measure which, double rho, double tau) {
  if (!(std::abs(rho) < 1.0) || rho == 0.0) throw DomainError("llr_tail_semi_analytic requires 0 < |rho| < 1");
  const double r2 = rho * rho, s2 = (1.0 - rho) * (1.0 + rho), c0 = -0.5 * std::log(s2);
  if (!(c0 - tau > -0.0)) throw DomainError("tau must be below -log(1-rho^2)/2");
  const double sd = std::sqrt(s2), ar = std::abs(rho);
  auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  // L_I >= tau  <=>  rho^2 y^2 - 2 rho x y + rho^2 x^2 - 2 s2 (c0 - tau) <= 0.
  auto inner = [&](double x) {
    const double rad = std::sqrt(s2 * (x * x + 2.0 * (c0 - tau)));
    const double lo = (rho * x - ar * rad) / r2, hi = (rho * x + ar * rad) / r2;
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (which == Measure::P) return phi * (Phi((hi - rho * x) / sd) - Phi((lo - rho * x) / sd));
    return phi * (Phi(hi) - Phi(lo));
  };
  return integrate_line(inner, 1e-12);
}

double smoothed_hermite_quadrature(std::size_t k, double rho, double x, HermiteFamily family,
                                   const QuadratureRule& rule) {
  const double mean = rho * x, sd = std::sqrt((1.0 - rho) * (1.0 + rho));
  return rule.integrate([&](double z) {
    const double y = mean + sd * z;
    return family == HermiteFamily::monic ? hermite_prob(k, y) : hermite_prob_normalized(k, y);
  });
}

std::size_t enumerate_equiv_classes(std::size_t m, std::size_t parts, std::size_t d) {
  if (m > 12 || d > 4 || d == 0) throw CapacityError("enumerate_equiv_classes supports m <= 12, 1 <= d <= 4");
  // Every nonzero vector of weight <= m, in a fixed order.
  std::vector<std::vector<unsigned>> vecs;
  std::vector<unsigned> cur(d, 0);
  auto gen = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos == d) {
      if (std::accumulate(cur.begin(), cur.end(), 0u) > 0) vecs.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  gen(gen, 0, m);
  std::vector<std::size_t> weight(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) weight[i] = std::accumulate(vecs[i].begin(), vecs[i].end(), 0u);
  // Multisets as nondecreasing index sequences.
  std::size_t count = 0;
  auto pick = [&](auto&& self, std::size_t from, std::size_t slots, std::size_t left) -> void {
    if (slots == 0) {
      count += left == 0 ? 1 : 0;
      return;
    }
    for (std::size_t i = from; i < vecs.size(); ++i) {
      if (weight[i] <= left) self(self, i, slots - 1, left - weight[i]);
    }
  };
  pick(pick, 0, parts, m);
  return count;
}

std::size_t class_size_bruteforce(const IntMatrix& alpha) {
  std::vector<std::size_t> perm(alpha.rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::set<std::vector<unsigned>> seen;
  do {
    std::vector<unsigned> img;
    for (std::size_t i = 0; i < alpha.rows; ++i) {
      for (std::size_t j = 0; j < alpha.cols; ++j) img.push_back(alpha(perm[i], j));
    }
    seen.insert(std::move(img));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return seen.size();
}

std::vector<CoefficientEstimate> coefficient_mc(const std::vector<CoefficientIndex>& indices,
                                                const ModelParams& params, std::size_t trials,
                                                std::uint64_t seed) {
  params.validate();
  const std::size_t n = params.n, d = params.d, cells = n * d;
  unsigned max_deg = 0;
  for (const auto& idx : indices) {
    if (idx.alpha.rows != n || idx.alpha.cols != d || idx.beta.rows != n || idx.beta.cols != d) {
      throw DimensionError("coefficient index shape mismatch");
    }
    for (unsigned v : idx.alpha.data) max_deg = std::max(max_deg, v);
    for (unsigned v : idx.beta.data) max_deg = std::max(max_deg, v);
  }
  // Sparse form: list of (cell, degree) factors for X and for Y.
  struct Factor {
    std::size_t cell;
    unsigned deg;
  };
  std::vector<std::vector<Factor>> fx(indices.size()), fy(indices.size());
  for (std::size_t q = 0; q < indices.size(); ++q) {
    for (std::size_t c = 0; c < cells; ++c) {
      if (indices[q].alpha.data[c]) fx[q].push_back({c, indices[q].alpha.data[c]});
      if (indices[q].beta.data[c]) fy[q].push_back({c, indices[q].beta.data[c]});
    }
  }
  using Accs = std::vector<MomentAccumulator>;
  auto parts = run_chunks<Accs>(trials, [&](std::size_t, std::size_t b, std::size_t e) {
    Accs acc(indices.size());
    DatabasePair pair;
    HiddenStructure hidden;
    HermiteEvaluator h(max_deg);
    const std::size_t stride = max_deg + 1;
    std::vector<double> hx(cells * stride), hy(cells * stride);
    for (std::size_t t = b; t < e; ++t) {
      sample_alternative_into(params, derive_seed(seed, SeedTag::alt_data, t), pair, hidden);
      for (std::size_t c = 0; c < cells; ++c) {
        h.evaluate(pair.X.data[c]);
        for (unsigned g = 0; g <= max_deg; ++g) hx[c * stride + g] = h.orthonormal(g);
        h.evaluate(pair.Y.data[c]);
        for (unsigned g = 0; g <= max_deg; ++g) hy[c * stride + g] = h.orthonormal(g);
      }
      for (std::size_t q = 0; q < indices.size(); ++q) {
        double v = 1.0;
        for (const auto& f : fx[q]) v *= hx[f.cell * stride + f.deg];
        for (const auto& f : fy[q]) v *= hy[f.cell * stride + f.deg];
        acc[q].add(v);
      }
    }
    return acc;
  });
  std::vector<MomentAccumulator> total(indices.size());
  for (const auto& p : parts) {
    for (std::size_t q = 0; q < indices.size(); ++q) total[q].merge(p[q]);
  }
  std::vector<CoefficientEstimate> out(indices.size());
  for (std::size_t q = 0; q < indices.size(); ++q) out[q] = {total[q].mean(), total[q].stderr_of_mean()};
  return out;
}

std::vector<IntMatrix> enumerate_index_matrices(std::size_t n, std::size_t d, std::size_t max_total) {
  std::vector<IntMatrix> out;
  IntMatrix cur(n, d);
  const std::size_t cells = n * d;
  auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos == cells) {
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur.data[pos] = v;
      self(self, pos + 1, left - v);
    }
    cur.data[pos] = 0;
  };
  rec(rec, 0, max_total);
  return out;
}

}  // namespace corrdetect::oracle
