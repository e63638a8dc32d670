#include "corrdetect/parallel.hpp"

#include <cmath>

namespace corrdetect {

namespace {
std::atomic<unsigned> g_threads{1};

void neumaier(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}
}  // namespace

unsigned default_threads() { return g_threads.load(); }

void set_default_threads(unsigned n) { g_threads.store(n == 0 ? 1 : n); }

void MomentAccumulator::add(double x) {
  neumaier(sum, sum_c, x);
  neumaier(sq, sq_c, x * x);
  ++count;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  neumaier(sum, sum_c, o.sum);
  neumaier(sum, sum_c, o.sum_c);
  neumaier(sq, sq_c, o.sq);
  neumaier(sq, sq_c, o.sq_c);
  count += o.count;
}

double MomentAccumulator::mean() const {
  return count == 0 ? 0.0 : (sum + sum_c) / static_cast<double>(count);
}

double MomentAccumulator::variance() const {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double m = mean();
  const double v = ((sq + sq_c) - n * m * m) / (n - 1.0);
  return v > 0.0 ? v : 0.0;
}

double MomentAccumulator::stderr_of_mean() const {
  return count == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
}

}  // namespace corrdetect
