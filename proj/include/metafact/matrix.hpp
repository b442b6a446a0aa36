#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "metafact/error.hpp"

namespace metafact {

using Index = std::size_t;
using Vector = std::vector<double>;

/// Dense real matrix stored row-major. Every factor in the library (bases,
/// mixing matrices, projectors, sketches) is carried by this type.
///
/// Constructors taking external data reject NaN and Inf with NonFiniteInput.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols);
  Matrix(Index rows, Index cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(Index rows, Index cols) { return Matrix(rows, cols); }
  static Matrix identity(Index n);
  /// m x n matrix with ones on the main diagonal.
  static Matrix eye(Index rows, Index cols);
  static Matrix diagonal(std::span<const double> values);
  static Matrix column(std::span<const double> values);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(Index i, Index j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(Index i, Index j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(Index i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  Vector col(Index j) const;
  void set_col(Index j, std::span<const double> values);

  Matrix transpose() const;
  Matrix block(Index row0, Index col0, Index nrows, Index ncols) const;
  void set_block(Index row0, Index col0, const Matrix& src);
  Matrix select_cols(std::span<const Index> indices) const;
  Matrix select_rows(std::span<const Index> indices) const;

  bool operator==(const Matrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

/// aᵀ·b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
/// a·bᵀ without forming the transpose.
Matrix times_transpose(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double norm2(std::span<const double> x);

/// ‖aᵀa − I‖_F.
double orthonormality_defect(const Matrix& a);
/// ‖a − diag(a)‖_F for the leading square part.
double off_diagonal_norm(const Matrix& a);

bool all_finite(std::span<const double> values) noexcept;
void require_finite(const Matrix& a);

inline constexpr double kEps = 2.220446049250313e-16;

}  // namespace metafact
