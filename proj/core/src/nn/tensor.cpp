#include "geoctx/nn/tensor.hpp"

#include <string>

#include "geoctx/error.hpp"

namespace geoctx::nn {

void require_finite(const Tensor2& t, std::string_view where) {
  if (!t.allFinite()) {
    throw Error(ErrorKind::NonFiniteValue, "non-finite entry in " + std::string(where));
  }
}

void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, std::string_view where) {
  if (t.rows() != rows || t.cols() != cols) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(where) + ": got " + std::to_string(t.rows()) + "x" +
                    std::to_string(t.cols()) + ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

}  // namespace geoctx::nn
