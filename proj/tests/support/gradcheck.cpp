#include "gradcheck.hpp"

#include <algorithm>

namespace geoctx::testing {

Tensor2 random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

Tensor2 numeric_gradient(const std::function<double()>& f, Tensor2& x, double h) {
  Tensor2 g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f();
    x.data()[i] = keep - h;
    const double down = f();
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Tensor2& analytic, const Tensor2& numeric, double floor) {
  const double denom = std::max({analytic.norm(), numeric.norm(), floor});
  return (analytic - numeric).norm() / denom;
}

}  // namespace geoctx::testing
