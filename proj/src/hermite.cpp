#include "corrdetect/hermite.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "corrdetect/errors.hpp"

namespace corrdetect {

namespace {

void check_degree(std::size_t k) {
  if (k > kMaxHermiteDegree) {
    throw DomainError("Hermite degree " + std::to_string(k) + " exceeds " + std::to_string(kMaxHermiteDegree));
  }
}

}  // namespace

double hermite_prob(std::size_t k, double x) {
  check_degree(k);
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (std::size_t j = 1; j < k; ++j) {
    const double next = x * cur - static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_prob_normalized(std::size_t k, double x) {
  check_degree(k);
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (std::size_t j = 1; j < k; ++j) {
    const double next = (x * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(static_cast<double>(j + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_phys(std::size_t k, double x) {
  check_degree(k);
  if (k == 0) return 1.0;
  double prev = 1.0, cur = 2.0 * x;
  for (std::size_t j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - 2.0 * static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteEvaluator::HermiteEvaluator(std::size_t max_degree)
    : max_degree_(max_degree), monic_(max_degree + 1), orthonormal_(max_degree + 1) {
  check_degree(max_degree);
}

void HermiteEvaluator::evaluate(double x) {
  monic_[0] = orthonormal_[0] = 1.0;
  if (max_degree_ == 0) return;
  monic_[1] = orthonormal_[1] = x;
  for (std::size_t j = 1; j < max_degree_; ++j) {
    const double jd = static_cast<double>(j);
    monic_[j + 1] = x * monic_[j] - jd * monic_[j - 1];
    orthonormal_[j + 1] = (x * orthonormal_[j] - std::sqrt(jd) * orthonormal_[j - 1]) / std::sqrt(jd + 1.0);
  }
}

QuadratureRule gauss_hermite_rule(std::size_t order) {
  if (order == 0 || order > kMaxHermiteDegree) throw DomainError("quadrature order must be in [1, 170]");
  // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
  // orthonormal recurrence, off-diagonal sqrt(j).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(order > 1 ? order - 1 : 0));
  for (std::size_t j = 1; j < order; ++j) sub[static_cast<Eigen::Index>(j - 1)] = std::sqrt(static_cast<double>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigenvalue solve failed");

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  HermiteEvaluator h(order);
  double total = 0.0;
  for (std::size_t i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
    // Polish against h~_order(x) = 0 with h~_order' = sqrt(order) h~_{order-1}.
    for (int it = 0; it < 3; ++it) {
      h.evaluate(x);
      const double deriv = std::sqrt(static_cast<double>(order)) * h.orthonormal(order - 1);
      if (deriv == 0.0) break;
      x -= h.orthonormal(order) / deriv;
    }
    h.evaluate(x);
    double s = 0.0;
    for (std::size_t j = 0; j < order; ++j) s += h.orthonormal(j) * h.orthonormal(j);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / s;
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

const QuadratureRule& default_quadrature_rule() {
  static const QuadratureRule rule = gauss_hermite_rule(kDefaultQuadratureOrder);
  return rule;
}

double gaussian_inner(std::size_t k, std::size_t l, const QuadratureRule& rule) {
  if (k + l > 2 * rule.order - 1) {
    throw CapacityError("quadrature of order " + std::to_string(rule.order) + " cannot integrate degree " +
                        std::to_string(k + l) + " exactly");
  }
  return rule.integrate([&](double y) { return hermite_prob_normalized(k, y) * hermite_prob_normalized(l, y); });
}

double smoothed_hermite_expectation(std::size_t k, double rho, double x, HermiteFamily family) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("smoothed_hermite_expectation requires |rho| < 1");
  const double h = family == HermiteFamily::monic ? hermite_prob(k, x) : hermite_prob_normalized(k, x);
  return std::pow(rho, static_cast<double>(k)) * h;
}

}  // namespace corrdetect
