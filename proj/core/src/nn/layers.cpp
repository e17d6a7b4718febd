#include "geoctx/nn/layers.hpp"

#include <cmath>

#include "geoctx/error.hpp"

namespace geoctx::nn {

Tensor2 normalize_adjacency(const Tensor2& adj) {
  if (adj.rows() != adj.cols()) throw Error(ErrorKind::ShapeMismatch, "adjacency must be square");
  require_finite(adj, "normalize_adjacency");
  Tensor2 a = adj;
  a.diagonal().array() += 1.0;
  Eigen::VectorXd inv_sqrt = a.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

Tensor2 normalize_adjacency(std::span<const std::uint8_t> adj, std::size_t n) {
  if (adj.size() != n * n) throw Error(ErrorKind::ShapeMismatch, "adjacency must be square");
  Tensor2 a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n * n; ++i) a.data()[i] = adj[i] ? 1.0 : 0.0;
  return normalize_adjacency(a);
}

Tensor2 glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor2 w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  if (x.cols() != w.rows()) throw Error(ErrorKind::ShapeMismatch, "dense: input width");
  require_shape(b, 1, w.cols(), "dense bias");
  Tensor2 y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

void dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy, Tensor2* dx, Tensor2& dw,
                    Tensor2& db) {
  require_shape(dy, x.rows(), w.cols(), "dense grad");
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
  if (dx) *dx = dy * w.transpose();
}

Tensor2 relu_forward(const Tensor2& x) { return x.cwiseMax(0.0); }

Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy) {
  require_shape(dy, y.rows(), y.cols(), "relu grad");
  return (y.array() > 0.0).select(dy, 0.0);
}

Tensor2 gcn_forward(const Tensor2& s, const Tensor2& h, const Tensor2& w) {
  if (s.rows() != s.cols() || s.cols() != h.rows() || h.cols() != w.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "gcn: S " + std::to_string(s.rows()) + "x" +
                                              std::to_string(s.cols()) + ", H " +
                                              std::to_string(h.rows()) + "x" +
                                              std::to_string(h.cols()) + ", W " +
                                              std::to_string(w.rows()) + "x" +
                                              std::to_string(w.cols()));
  }
  // Narrow side first.
  if (w.cols() < h.cols()) return s * (h * w);
  return (s * h) * w;
}

void gcn_backward(const Tensor2& s, const Tensor2& h, const Tensor2& w, const Tensor2& dy,
                  Tensor2* dh, Tensor2& dw) {
  require_shape(dy, s.rows(), w.cols(), "gcn grad");
  Tensor2 sdy = s.transpose() * dy;
  dw.noalias() += h.transpose() * sdy;
  if (dh) *dh = sdy * w.transpose();
}

Tensor2 graphnorm_forward(const Tensor2& h, const Tensor2& alpha, const Tensor2& gamma,
                          const Tensor2& beta, GraphNormCache* cache) {
  const auto d = h.cols();
  if (h.rows() < 1) throw Error(ErrorKind::ShapeMismatch, "graphnorm: empty input");
  require_shape(alpha, 1, d, "graphnorm alpha");
  require_shape(gamma, 1, d, "graphnorm gamma");
  require_shape(beta, 1, d, "graphnorm beta");
  const double n = static_cast<double>(h.rows());
  Tensor2 mean = h.colwise().sum() / n;
  Tensor2 c = h;
  c.rowwise() -= alpha.cwiseProduct(mean).row(0);
  Tensor2 var = c.cwiseAbs2().colwise().sum() / n;
  Tensor2 sigma(1, d);
  std::vector<bool> floored(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    floored[j] = var(0, j) < kGraphNormEps;
    sigma(0, j) = std::sqrt(floored[j] ? kGraphNormEps : var(0, j));
  }
  Tensor2 out = c;
  out.array().rowwise() *= (gamma.array() / sigma.array()).row(0);
  out.rowwise() += beta.row(0);
  if (cache) {
    cache->mean = std::move(mean);
    cache->centered = std::move(c);
    cache->sigma = std::move(sigma);
    cache->floored = std::move(floored);
  }
  return out;
}

void graphnorm_backward(const GraphNormCache& cache, const Tensor2& alpha, const Tensor2& gamma,
                        const Tensor2& dy, Tensor2* dh, Tensor2& dalpha, Tensor2& dgamma,
                        Tensor2& dbeta) {
  const Tensor2& c = cache.centered;
  require_shape(dy, c.rows(), c.cols(), "graphnorm grad");
  const auto d = c.cols();
  const double n = static_cast<double>(c.rows());
  dbeta += dy.colwise().sum();
  Tensor2 dyc = dy.cwiseProduct(c);
  Tensor2 dyc_sum = dyc.colwise().sum();
  dgamma.array() += dyc_sum.array() / cache.sigma.array();

  // dL/dc, including the path through sigma when the floor is inactive.
  Tensor2 dc = dy;
  dc.array().rowwise() *= (gamma.array() / cache.sigma.array()).row(0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (cache.floored[j]) continue;
    const double s = cache.sigma(0, j);
    const double ds = -gamma(0, j) * dyc_sum(0, j) / (s * s);
    dc.col(j) += (ds / (n * s)) * c.col(j);
  }
  Tensor2 dc_sum = dc.colwise().sum();
  dalpha -= cache.mean.cwiseProduct(dc_sum);
  if (dh) {
    *dh = dc;
    dh->rowwise() -= (alpha.cwiseProduct(dc_sum) / n).row(0);
  }
}

}  // namespace geoctx::nn
