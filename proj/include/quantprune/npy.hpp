// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "quantprune/matrix.hpp"

namespace quantprune {

// 1-D (scores) or 2-D (token/weight matrices) tensor payload. The on-disk
// container is NPY format version 1.0, little-endian float32, C order.
struct Tensor {
  std::vector<double> values;       // widened from float32, exact
  std::vector<std::size_t> shape;   // size 1 or 2

  bool is_vector() const noexcept { return shape.size() == 1; }
  std::size_t rows() const noexcept { return shape[0]; }
  std::size_t cols() const noexcept { return shape.size() == 2 ? shape[1] : 1; }
};

Tensor read_tensor(const std::filesystem::path& path);

void write_tensor(const Matrix& matrix, const std::filesystem::path& path);
void write_tensor(std::span<const double> vector,
                  const std::filesystem::path& path);

Matrix tensor_to_matrix(const Tensor& tensor);

}  // namespace quantprune
