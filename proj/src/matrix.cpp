#include "metafact/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace metafact {

namespace {

std::string shape(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace

Matrix::Matrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(Index rows, Index cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorKind::InvalidDimension, "data length " + std::to_string(data_.size()) +
                                                 " does not match " + std::to_string(rows_) +
                                                 "x" + std::to_string(cols_));
  }
  if (!all_finite(data_)) throw Error(ErrorKind::NonFiniteInput, "matrix has NaN or Inf entries");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorKind::InvalidDimension, "ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite(data_)) throw Error(ErrorKind::NonFiniteInput, "matrix has NaN or Inf entries");
}

Matrix Matrix::identity(Index n) { return eye(n, n); }

Matrix Matrix::eye(Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index i = 0; i < std::min(rows, cols); ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix out(values.size(), values.size());
  for (Index i = 0; i < values.size(); ++i) out(i, i) = values[i];
  return out;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Vector Matrix::col(Index j) const {
  Vector out(rows_);
  for (Index i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_col(Index j, std::span<const double> values) {
  for (Index i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix Matrix::block(Index row0, Index col0, Index nrows, Index ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "block exceeds " + shape(*this));
  }
  Matrix out(nrows, ncols);
  for (Index i = 0; i < nrows; ++i)
    for (Index j = 0; j < ncols; ++j) out(i, j) = (*this)(row0 + i, col0 + j);
  return out;
}

void Matrix::set_block(Index row0, Index col0, const Matrix& src) {
  if (row0 + src.rows() > rows_ || col0 + src.cols() > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "block " + shape(src) + " exceeds " + shape(*this));
  }
  for (Index i = 0; i < src.rows(); ++i)
    for (Index j = 0; j < src.cols(); ++j) (*this)(row0 + i, col0 + j) = src(i, j);
}

Matrix Matrix::select_cols(std::span<const Index> indices) const {
  Matrix out(rows_, indices.size());
  for (Index c = 0; c < indices.size(); ++c) {
    if (indices[c] >= cols_) throw Error(ErrorKind::IndexOutOfRange, "column index out of range");
    for (Index i = 0; i < rows_; ++i) out(i, c) = (*this)(i, indices[c]);
  }
  return out;
}

Matrix Matrix::select_rows(std::span<const Index> indices) const {
  Matrix out(indices.size(), cols_);
  for (Index r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows_) throw Error(ErrorKind::IndexOutOfRange, "row index out of range");
    std::copy_n(row(indices[r]).begin(), cols_, out.data().begin() + r * cols_);
  }
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "cannot multiply " + shape(a) + " by " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  const Index n = b.cols();
  for (Index i = 0; i < a.rows(); ++i) {
    double* orow = out.data().data() + i * n;
    for (Index p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* brow = b.data().data() + p * n;
      for (Index j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cannot form transpose(" + shape(a) + ") * " + shape(b));
  }
  Matrix out(a.cols(), b.cols());
  const Index n = b.cols();
  for (Index p = 0; p < a.rows(); ++p) {
    const double* brow = b.data().data() + p * n;
    for (Index i = 0; i < a.cols(); ++i) {
      const double api = a(p, i);
      if (api == 0.0) continue;
      double* orow = out.data().data() + i * n;
      for (Index j = 0; j < n; ++j) orow[j] += api * brow[j];
    }
  }
  return out;
}

Matrix times_transpose(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cannot form " + shape(a) + " * transpose(" + shape(b) + ")");
  }
  Matrix out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    for (Index j = 0; j < b.rows(); ++j) {
      const auto brow = b.row(j);
      double s = 0.0;
      for (Index p = 0; p < a.cols(); ++p) s += arow[p] * brow[p];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "cannot add " + shape(a) + " and " + shape(b));
  }
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (Index i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "cannot subtract " + shape(b) + " from " + shape(a));
  }
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (Index i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cannot apply " + shape(a) + " to vector of length " + std::to_string(x.size()));
  }
  Vector out(a.rows(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (Index j = 0; j < x.size(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return out;
}

double norm2(std::span<const double> x) {
  // Scaled accumulation guards against overflow for large entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double orthonormality_defect(const Matrix& a) {
  return frobenius_norm(transpose_times(a, a) - Matrix::identity(a.cols()));
}

double off_diagonal_norm(const Matrix& a) {
  Matrix off = a;
  for (Index i = 0; i < std::min(a.rows(), a.cols()); ++i) off(i, i) = 0.0;
  return frobenius_norm(off);
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const Matrix& a) {
  if (!all_finite(a.data())) throw Error(ErrorKind::NonFiniteInput, "matrix has NaN or Inf entries");
}

}  // namespace metafact
