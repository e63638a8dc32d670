#include "corrdetect/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "corrdetect/errors.hpp"
#include "corrdetect/rng.hpp"

namespace corrdetect {

void ModelParams::validate() const {
  if (n == 0) throw DomainError("n must be >= 1");
  if (d == 0) throw DomainError("d must be >= 1");
  if (k == 0 || k > n) throw DomainError("k must satisfy 1 <= k <= n");
  if (!(std::abs(rho) <= 1.0)) throw DomainError("|rho| must be <= 1");
}

void ModelParams::require_density() const {
  validate();
  if (!(std::abs(rho) < 1.0)) throw DomainError("density-based operations require |rho| < 1");
}

ModelParams ModelParams::from_rho2(std::size_t n, std::size_t d, std::size_t k, double rho2, int sign) {
  if (!(rho2 >= 0.0 && rho2 <= 1.0)) throw DomainError("rho^2 must lie in [0, 1]");
  ModelParams p{n, d, k, (sign < 0 ? -1.0 : 1.0) * std::sqrt(rho2)};
  p.validate();
  return p;
}

namespace {

void fill_normal(Rng& rng, Matrix& m) {
  for (double& v : m.data) v = rng.normal();
}

void resize(DatabasePair& pair, const ModelParams& p) {
  if (pair.X.rows != p.n || pair.X.cols != p.d) pair.X = Matrix(p.n, p.d);
  if (pair.Y.rows != p.n || pair.Y.cols != p.d) pair.Y = Matrix(p.n, p.d);
}

void shuffle(Rng& rng, std::vector<std::size_t>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

void draw_hidden(const ModelParams& p, std::uint64_t seed, HiddenStructure& h) {
  Rng rng(seed);
  h.sigma.resize(p.n);
  std::iota(h.sigma.begin(), h.sigma.end(), std::size_t{0});
  shuffle(rng, h.sigma);
  std::vector<std::size_t> idx(p.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < p.k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(p.n - i));
    std::swap(idx[i], idx[j]);
  }
  h.K.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(p.k));
  std::sort(h.K.begin(), h.K.end());
}

}  // namespace

void sample_null_into(const ModelParams& params, std::uint64_t seed, DatabasePair& pair) {
  params.validate();
  resize(pair, params);
  Rng rng(derive_seed(seed, SeedTag::null_data, 0));
  fill_normal(rng, pair.X);
  fill_normal(rng, pair.Y);
}

void sample_alternative_into(const ModelParams& params, std::uint64_t seed, DatabasePair& pair,
                             HiddenStructure& hidden) {
  params.validate();
  resize(pair, params);
  draw_hidden(params, derive_seed(seed, SeedTag::hidden, 0), hidden);
  Rng rng(derive_seed(seed, SeedTag::alt_data, 0));
  fill_normal(rng, pair.X);
  fill_normal(rng, pair.Y);
  const double rho = params.rho;
  const double s = std::sqrt(std::max(0.0, params.one_minus_rho2()));
  // The independent draw already sitting in Y plays the role of Z in
  // Y = rho X + sqrt(1 - rho^2) Z.
  for (std::size_t i : hidden.K) {
    const double* x = pair.X.row(i);
    double* y = pair.Y.row(hidden.sigma[i]);
    for (std::size_t j = 0; j < params.d; ++j) y[j] = rho * x[j] + s * y[j];
  }
}

void sample_hypothesis_into(const ModelParams& params, bool alternative, std::uint64_t seed, DatabasePair& pair) {
  if (alternative) {
    HiddenStructure h;
    sample_alternative_into(params, seed, pair, h);
  } else {
    sample_null_into(params, seed, pair);
  }
}

DatabasePair sample_null(const ModelParams& params, std::uint64_t seed) {
  DatabasePair pair;
  sample_null_into(params, seed, pair);
  return pair;
}

HiddenStructure sample_hidden(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  HiddenStructure h;
  draw_hidden(params, seed, h);
  return h;
}

std::pair<DatabasePair, HiddenStructure> sample_alternative(const ModelParams& params, std::uint64_t seed) {
  std::pair<DatabasePair, HiddenStructure> out;
  sample_alternative_into(params, seed, out.first, out.second);
  return out;
}

void check_dimensions(const DatabasePair& pair, const ModelParams& params) {
  if (pair.X.rows != params.n || pair.Y.rows != params.n || pair.X.cols != params.d || pair.Y.cols != params.d) {
    throw DimensionError("database pair is " + std::to_string(pair.X.rows) + "x" + std::to_string(pair.X.cols) +
                         " / " + std::to_string(pair.Y.rows) + "x" + std::to_string(pair.Y.cols) + ", expected " +
                         std::to_string(params.n) + "x" + std::to_string(params.d));
  }
}

}  // namespace corrdetect
