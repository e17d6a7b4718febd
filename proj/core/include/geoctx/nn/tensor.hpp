#pragma once

#include <Eigen/Core>
#include <string_view>

namespace geoctx::nn {

// Dense row-major matrix of doubles. Row vectors (biases, per-column
// parameters) are 1 x d tensors.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// NonFiniteValue when any entry is NaN or infinite.
void require_finite(const Tensor2& t, std::string_view where);
// ShapeMismatch unless t is rows x cols.
void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, std::string_view where);

}  // namespace geoctx::nn
