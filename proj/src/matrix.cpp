// SPDX-License-Identifier: Apache-2.0

#include "quantprune/matrix.hpp"

#include <cmath>
#include <utility>

#include "quantprune/errors.hpp"

namespace quantprune {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw DataError("matrix data size does not match shape");
  }
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::take_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows_) throw DataError("row index out of range");
    for (std::size_t c = 0; c < cols_; ++c) {
      out(r, c) = (*this)(indices[r], c);
    }
  }
  return out;
}

TokenMatrix make_token_matrix(Matrix data, std::optional<GridShape> grid) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw DataError("token matrix must have at least one token and channel");
  }
  if (!data.all_finite()) {
    throw DataError("token matrix contains non-finite values");
  }
  if (grid && grid->rows * grid->cols != data.rows()) {
    throw DataError("grid shape does not cover the token count");
  }
  return TokenMatrix{std::move(data), grid};
}

}  // namespace quantprune
