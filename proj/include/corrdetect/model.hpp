#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace corrdetect {

struct ModelParams {
  std::size_t n = 1;  // rows per database
  std::size_t d = 1;  // features per row
  std::size_t k = 1;  // correlated rows
  double rho = 0.0;

  double rho2() const { return rho * rho; }
  // Computed as (1 - rho)(1 + rho), which keeps relative accuracy near |rho| = 1.
  double one_minus_rho2() const { return (1.0 - rho) * (1.0 + rho); }

  void validate() const;            // throws DomainError
  void require_density() const;     // additionally rejects |rho| = 1

  // rho = sign * sqrt(rho2).
  static ModelParams from_rho2(std::size_t n, std::size_t d, std::size_t k, double rho2, int sign = 1);
};

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }
};

struct DatabasePair {
  Matrix X;
  Matrix Y;
};

struct HiddenStructure {
  std::vector<std::size_t> sigma;  // row i of X is matched to row sigma[i] of Y
  std::vector<std::size_t> K;      // sorted, |K| = k
};

DatabasePair sample_null(const ModelParams& params, std::uint64_t seed);
HiddenStructure sample_hidden(const ModelParams& params, std::uint64_t seed);
std::pair<DatabasePair, HiddenStructure> sample_alternative(const ModelParams& params, std::uint64_t seed);

// Allocation-free variants for Monte Carlo loops; `pair` is resized as needed.
void sample_null_into(const ModelParams& params, std::uint64_t seed, DatabasePair& pair);
void sample_alternative_into(const ModelParams& params, std::uint64_t seed, DatabasePair& pair,
                             HiddenStructure& hidden);

// Draws one database pair from H0 (alternative = false) or H1.
void sample_hypothesis_into(const ModelParams& params, bool alternative, std::uint64_t seed, DatabasePair& pair);

void check_dimensions(const DatabasePair& pair, const ModelParams& params);

}  // namespace corrdetect
