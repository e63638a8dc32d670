#pragma once

// Brute-force and quadrature routes that share no arithmetic with the
// production evaluators. Used by `corrdetect verify` and the test suites.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "corrdetect/exponents.hpp"
#include "corrdetect/hermite.hpp"
#include "corrdetect/likelihood.hpp"
#include "corrdetect/model.hpp"

namespace corrdetect::oracle {

// log L by explicit enumeration of every (sigma, K), densities evaluated from
// the bivariate normal formula. n <= 6.
double log_likelihood_ratio_bruteforce(const DatabasePair& pair, const ModelParams& params);

// log E[exp(lambda L_I)] under Q (independent) or P (correlated), by nested
// adaptive Gauss-Kronrod quadrature over the plane.
double psi_quadrature(Measure which, double lambda, double rho);

// (E_P[L_I], -E_Q[L_I]) by the same quadrature.
KlPair kl_quadrature(double rho);

// (1/2) int |phi_{v1} - phi_{v2}| by adaptive quadrature.
double tv_quadrature(double v1, double v2);

// P[L_I >= tau] for d = 1 under P or Q: at fixed x the event is an interval
// in y, so only a one-dimensional integral remains.
double llr_tail_semi_analytic(Measure which, double rho, double tau);

// E_{Y ~ N(rho x, 1 - rho^2)}[h_k(Y)] by Gauss-Hermite quadrature.
double smoothed_hermite_quadrature(std::size_t k, double rho, double x, HermiteFamily family,
                                   const QuadratureRule& rule = default_quadrature_rule());

// Number of multisets of `parts` nonzero vectors in N^d of total weight m, by
// listing them. m <= 12, d <= 4.
std::size_t enumerate_equiv_classes(std::size_t m, std::size_t parts, std::size_t d);

// |[alpha]| by listing all row permutations of alpha and counting distinct images.
std::size_t class_size_bruteforce(const IntMatrix& alpha);

struct CoefficientEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of E_H1[prod h~_{alpha_ij}(X_ij) h~_{beta_ij}(Y_ij)]
// for every index, all sharing the same H1 draws.
std::vector<CoefficientEstimate> coefficient_mc(const std::vector<CoefficientIndex>& indices,
                                                const ModelParams& params, std::size_t trials,
                                                std::uint64_t seed);

// All n x d nonnegative integer matrices with entry sum <= max_total.
std::vector<IntMatrix> enumerate_index_matrices(std::size_t n, std::size_t d, std::size_t max_total);

}  // namespace corrdetect::oracle
