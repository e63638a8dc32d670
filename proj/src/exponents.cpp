#include "corrdetect/exponents.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "corrdetect/errors.hpp"

namespace corrdetect {

namespace {

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("exponents require |rho| < 1");
}

// log(1 - a^2) for a >= 0, accurate at both ends. psi's exact zeros at
// lambda in {0, 1} (Q) and {0, -1} (P) rely on every term going through here.
double log1m_sq(double a) {
  return a < 0.5 ? std::log1p(-a * a) : std::log((1.0 - a) * (1.0 + a));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Interval psi_domain(Measure which, double rho) {
  check_rho(rho);
  const double inf = std::numeric_limits<double>::infinity();
  if (rho == 0.0) return {-inf, inf};
  const double r = 1.0 / std::abs(rho);
  return which == Measure::Q ? Interval{1.0 - r, 1.0 + r} : Interval{-r, r};
}

double psi_q(double lambda, double rho) {
  check_rho(rho);
  if (rho == 0.0) return 0.0;
  const double a = std::abs(1.0 - lambda) * std::abs(rho);
  const double r2 = rho * rho;
  if (!(a < 1.0) || lambda < -(1.0 - r2) / r2) {
    throw DomainError("psi_Q(" + fmt(lambda) + ") is infinite at rho = " + fmt(rho));
  }
  return -0.5 * (lambda - 1.0) * log1m_sq(std::abs(rho)) - 0.5 * log1m_sq(a);
}

double psi_p(double lambda, double rho) {
  check_rho(rho);
  if (rho == 0.0) return 0.0;
  const double a = std::abs(lambda) * std::abs(rho);
  if (!(a < 1.0)) throw DomainError("psi_P(" + fmt(lambda) + ") is infinite at rho = " + fmt(rho));
  return -0.5 * lambda * log1m_sq(std::abs(rho)) - 0.5 * log1m_sq(a);
}

double psi_q_prime(double lambda, double rho) {
  check_rho(rho);
  if (rho == 0.0) return 0.0;
  const double u = 1.0 - lambda;
  const double a = std::abs(u) * std::abs(rho);
  if (!(a < 1.0)) throw DomainError("psi_Q' outside domain");
  return -0.5 * log1m_sq(std::abs(rho)) - u * rho * rho / ((1.0 - a) * (1.0 + a));
}

double psi_p_prime(double lambda, double rho) {
  // psi_P(lambda) = psi_Q(lambda + 1).
  return psi_q_prime(lambda + 1.0, rho);
}

double psi_q_second(double lambda, double rho) {
  check_rho(rho);
  const double u = 1.0 - lambda;
  const double a = std::abs(u) * std::abs(rho);
  if (!(a < 1.0)) throw DomainError("psi_Q'' outside domain");
  const double q = (1.0 - a) * (1.0 + a);
  return rho * rho * (1.0 + a * a) / (q * q);
}

KlPair kl_divergences(double rho) {
  check_rho(rho);
  if (rho == 0.0) return {0.0, 0.0};
  const double l = log1m_sq(std::abs(rho));
  const double r2 = rho * rho;
  const double omr = (1.0 - rho) * (1.0 + rho);
  // The closed form cancels badly for small rho; sum its power series there.
  double q_p;
  if (r2 < 1e-3) {
    // rho^2/(1-rho^2) + log(1-rho^2)/2 = sum_{j>=1} rho^{2j} (1 - 1/(2j)).
    q_p = 0.0;
    double pw = 1.0;
    for (int j = 1; j <= 12; ++j) {
      pw *= r2;
      q_p += pw * (1.0 - 0.5 / j);
    }
  } else {
    q_p = r2 / omr + 0.5 * l;
  }
  return {-0.5 * l, q_p};
}

LegendreResult legendre(double theta, Measure which, double rho) {
  check_rho(rho);
  const KlPair kl = kl_divergences(rho);
  if (rho == 0.0) {
    if (theta != 0.0) throw DomainError("at rho = 0 the Legendre transform is finite only at theta = 0");
    return {0.0, 0.0};
  }
  if (!(theta > -kl.q_p && theta < kl.p_q)) {
    throw DomainError("theta = " + fmt(theta) + " outside (-d_KL(Q||P), d_KL(P||Q)) = (" + fmt(-kl.q_p) + ", " +
                      fmt(kl.p_q) + ")");
  }
  // psi_P(l) = psi_Q(l + 1): optimise over mu = lambda + shift in [0, 1], where
  // psi_Q'(0) = -d_KL(Q||P) < theta < d_KL(P||Q) = psi_Q'(1) puts the maximiser.
  const double shift = which == Measure::Q ? 0.0 : 1.0;
  auto objective = [&](double mu) { return (mu - shift) * theta - psi_q(mu, rho); };
  auto gradient = [&](double mu) { return theta - psi_q_prime(mu, rho); };

  double lo = 0.0, hi = 1.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    }
  }
  // The gradient is decreasing in mu; keep a sign bracket for the Newton steps.
  double blo = 0.0, bhi = 1.0;
  double mu = 0.5 * (lo + hi);
  const double scale = 1.0 + std::abs(theta) + kl.p_q + kl.q_p;
  for (int it = 0; it < 200; ++it) {
    const double gr = gradient(mu);
    if (std::abs(gr) <= 1e-10 * scale) {
      return {objective(mu), mu - shift};
    }
    if (gr > 0.0) {
      blo = mu;
    } else {
      bhi = mu;
    }
    double next = mu + gr / psi_q_second(mu, rho);
    if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
    if (next == mu) break;
    mu = next;
  }
  if (std::abs(gradient(mu)) <= 1e-8 * scale) return {objective(mu), mu - shift};
  throw ConvergenceError("Legendre transform did not converge at theta = " + fmt(theta) + ", rho = " + fmt(rho));
}

ExponentProfile exponent_profile(double tau, double rho) {
  ExponentProfile p;
  p.rho = rho;
  p.tau = tau;
  const auto q = legendre(tau, Measure::Q, rho);
  const auto pp = legendre(tau, Measure::P, rho);
  p.E_Q = q.value;
  p.lambda_star_Q = q.lambda_star;
  p.E_P = pp.value;
  p.lambda_star_P = pp.lambda_star;
  return p;
}

ChernoffTails chernoff_tails(double tau, double rho, std::size_t d) {
  const ExponentProfile p = exponent_profile(tau, rho);
  const double dd = static_cast<double>(d);
  return {std::exp(-dd * p.E_Q), -std::expm1(-dd * p.E_P)};
}

}  // namespace corrdetect
