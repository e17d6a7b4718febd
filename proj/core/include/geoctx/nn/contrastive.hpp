#pragma once

#include "geoctx/nn/tensor.hpp"

namespace geoctx::nn {

inline constexpr double kDefaultTemperature = 0.5;

struct NtXentResult {
  double loss = 0.0;
  Tensor2 dz1;
  Tensor2 dz2;
};

// Normalised-temperature cross entropy over the 2B rows of [z1; z2] with
// cosine similarity. Row i of z1 and row i of z2 are positives; the other
// 2B - 2 rows are negatives. Mean over all 2B anchors. Throws DegenerateBatch
// when B < 2.
NtXentResult ntxent_loss(const Tensor2& z1, const Tensor2& z2,
                         double temperature = kDefaultTemperature);

}  // namespace geoctx::nn
