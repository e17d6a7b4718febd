#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "geoctx/nn/tensor.hpp"

namespace geoctx::nn {

// Backward functions accumulate (+=) into parameter gradients and overwrite
// input gradients.

// D^-1/2 (A + I) D^-1/2 for a square 0/1 (or weighted) adjacency.
Tensor2 normalize_adjacency(const Tensor2& adj);
Tensor2 normalize_adjacency(std::span<const std::uint8_t> adj, std::size_t n);

// Glorot/Xavier uniform, limit sqrt(6 / (fan_in + fan_out)).
Tensor2 glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

// X W + b, b a 1 x out row broadcast over rows.
Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b);
void dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy, Tensor2* dx, Tensor2& dw,
                    Tensor2& db);

Tensor2 relu_forward(const Tensor2& x);
// Uses the forward output; y > 0 passes the gradient.
Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy);

// S H W, no bias and no activation.
Tensor2 gcn_forward(const Tensor2& s, const Tensor2& h, const Tensor2& w);
void gcn_backward(const Tensor2& s, const Tensor2& h, const Tensor2& w, const Tensor2& dy,
                  Tensor2* dh, Tensor2& dw);

inline constexpr double kGraphNormEps = 1e-5;

struct GraphNormCache {
  Tensor2 mean;      // 1 x d
  Tensor2 centered;  // H - alpha * mean
  Tensor2 sigma;     // 1 x d
  std::vector<bool> floored;
};

// Per column over the rows: c = h - alpha*mean, sigma = sqrt(max(mean(c^2), eps)),
// out = gamma * c / sigma + beta. alpha, gamma, beta are 1 x d.
Tensor2 graphnorm_forward(const Tensor2& h, const Tensor2& alpha, const Tensor2& gamma,
                          const Tensor2& beta, GraphNormCache* cache = nullptr);
void graphnorm_backward(const GraphNormCache& cache, const Tensor2& alpha, const Tensor2& gamma,
                        const Tensor2& dy, Tensor2* dh, Tensor2& dalpha, Tensor2& dgamma,
                        Tensor2& dbeta);

}  // namespace geoctx::nn
