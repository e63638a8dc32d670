#pragma once

#include <cstddef>

namespace corrdetect {

enum class Measure { P, Q };

// Log-MGFs of L_I under Q (independent pair) and P (correlated pair).
// psi_q is finite for |1 - lambda| < 1/|rho|, psi_p for |lambda| < 1/|rho|;
// outside those sets a DomainError is thrown.
double psi_q(double lambda, double rho);
double psi_p(double lambda, double rho);
double psi_q_prime(double lambda, double rho);
double psi_p_prime(double lambda, double rho);
double psi_q_second(double lambda, double rho);

// Open interval of lambda on which psi is finite.
struct Interval {
  double lo;
  double hi;
};
Interval psi_domain(Measure which, double rho);

struct KlPair {
  double p_q;  // d_KL(P || Q) = E_P[L_I]
  double q_p;  // d_KL(Q || P) = -E_Q[L_I]
};
KlPair kl_divergences(double rho);

struct LegendreResult {
  double value;
  double lambda_star;
};

// sup_lambda [lambda theta - psi(lambda)] for theta in (-d_KL(Q||P), d_KL(P||Q)).
LegendreResult legendre(double theta, Measure which, double rho);

struct ExponentProfile {
  double rho = 0.0;
  double tau = 0.0;
  double E_Q = 0.0;
  double E_P = 0.0;
  double lambda_star_Q = 0.0;
  double lambda_star_P = 0.0;
};
ExponentProfile exponent_profile(double tau, double rho);

struct ChernoffTails {
  double q_tail_bound;   // Q_{rho,d} <= exp(-d E_Q(tau))
  double p_lower_bound;  // P_{rho,d} >= 1 - exp(-d E_P(tau))
};
ChernoffTails chernoff_tails(double tau, double rho, std::size_t d);

}  // namespace corrdetect
