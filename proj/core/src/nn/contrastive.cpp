#include "geoctx/nn/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geoctx/error.hpp"

namespace geoctx::nn {

namespace {
constexpr double kNormGuard = 1e-12;
}

NtXentResult ntxent_loss(const Tensor2& z1, const Tensor2& z2, double temperature) {
  const auto b = z1.rows();
  if (b < 2) throw Error(ErrorKind::DegenerateBatch, "batch of " + std::to_string(b) + " pairs");
  require_shape(z2, b, z1.cols(), "ntxent z2");
  if (!(temperature > 0.0)) throw Error(ErrorKind::ParameterOutOfRange, "temperature must be > 0");
  require_finite(z1, "ntxent z1");
  require_finite(z2, "ntxent z2");

  const auto m = 2 * b;
  Tensor2 z(m, z1.cols());
  z.topRows(b) = z1;
  z.bottomRows(b) = z2;
  Eigen::VectorXd norm = z.rowwise().norm().cwiseMax(kNormGuard);
  Tensor2 u = norm.cwiseInverse().asDiagonal() * z;
  Tensor2 sim = (u * u.transpose()) / temperature;

  // dL/dsim, filled row by row.
  Tensor2 dsim = Tensor2::Zero(m, m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index pos = (i + b) % m;
    double mx = -INFINITY;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i) mx = std::max(mx, sim(i, k));
    }
    double denom = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      dsim(i, k) = std::exp(sim(i, k) - mx);
      denom += dsim(i, k);
    }
    total += mx + std::log(denom) - sim(i, pos);
    dsim.row(i) /= denom;
    dsim(i, pos) -= 1.0;
  }
  const double scale = 1.0 / static_cast<double>(m);
  dsim *= scale;

  Tensor2 du = (dsim + dsim.transpose()) * u / temperature;
  // Through the row normalisation: (du - u (u . du)) / ||z||, unless guarded.
  Tensor2 dz(m, z.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double raw = z.row(i).norm();
    if (raw > kNormGuard) {
      dz.row(i) = (du.row(i) - u.row(i) * u.row(i).dot(du.row(i))) / raw;
    } else {
      dz.row(i) = du.row(i) / kNormGuard;
    }
  }
  NtXentResult r;
  r.loss = total * scale;
  r.dz1 = dz.topRows(b);
  r.dz2 = dz.bottomRows(b);
  return r;
}

}  // namespace geoctx::nn
