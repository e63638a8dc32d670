#pragma once

#include <cstddef>
#include <vector>

namespace corrdetect {

// Highest degree accepted by the evaluators; sqrt(k!) stays finite in double
// precision up to here.
inline constexpr std::size_t kMaxHermiteDegree = 170;
inline constexpr std::size_t kDefaultQuadratureOrder = 64;

// The Rodrigues formula (-1)^k e^{x^2/2} d^k/dx^k e^{-x^2/2} gives the monic
// probabilist family with E[h_k^2] = k!. Orthonormality-dependent code uses
// h_k / sqrt(k!).
enum class HermiteFamily { monic, orthonormal };

double hermite_prob(std::size_t k, double x);
double hermite_prob_normalized(std::size_t k, double x);
double hermite_phys(std::size_t k, double x);

// Holds h_0(x), ..., h_max(x) of both probabilist normalizations for the last
// x passed to evaluate().
class HermiteEvaluator {
 public:
  explicit HermiteEvaluator(std::size_t max_degree);

  void evaluate(double x);
  std::size_t max_degree() const { return max_degree_; }
  double monic(std::size_t k) const { return monic_[k]; }
  double orthonormal(std::size_t k) const { return orthonormal_[k]; }

 private:
  std::size_t max_degree_;
  std::vector<double> monic_;
  std::vector<double> orthonormal_;
};

// Gauss rule for the standard normal measure; weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t order = 0;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

QuadratureRule gauss_hermite_rule(std::size_t order = kDefaultQuadratureOrder);
const QuadratureRule& default_quadrature_rule();

// E[h~_k(Y) h~_l(Y)] for Y ~ N(0,1), orthonormal family.
double gaussian_inner(std::size_t k, std::size_t l, const QuadratureRule& rule = default_quadrature_rule());

// E_{Y ~ N(rho x, 1 - rho^2)}[h_k(Y)] = rho^k h_k(x).
double smoothed_hermite_expectation(std::size_t k, double rho, double x,
                                    HermiteFamily family = HermiteFamily::monic);

}  // namespace corrdetect
