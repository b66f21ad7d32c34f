// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace quantprune {

// Dense row-major matrix of doubles. File payloads are float32; values read
// from or destined for files are snapped to float32 precision at the I/O and
// generation boundaries so in-memory and file-mediated pipelines agree.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& values() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }

  bool all_finite() const noexcept;

  // Rows picked by `indices`, in the given order.
  Matrix take_rows(std::span<const std::size_t> indices) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// N visual tokens of D channels each; one row per token.
struct TokenMatrix {
  Matrix data;
  std::optional<GridShape> grid;

  std::size_t count() const noexcept { return data.rows(); }
  std::size_t dim() const noexcept { return data.cols(); }
};

// Validates N >= 1, D >= 1, finiteness and (when present) grid rows*cols == N.
TokenMatrix make_token_matrix(Matrix data,
                              std::optional<GridShape> grid = std::nullopt);

// Round-trips a double through float32.
inline double snap_to_f32(double x) noexcept {
  return static_cast<double>(static_cast<float>(x));
}

}  // namespace quantprune
