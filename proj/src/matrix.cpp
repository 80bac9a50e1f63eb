#include "irspec/matrix.hpp"

#include <string>

namespace irspec {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data holds " + std::to_string(data_.size()) + " values, expected " +
                     std::to_string(rows * cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix project_rows(const Matrix& tokens, const Matrix& weight) {
  if (tokens.cols() != weight.cols()) {
    throw ShapeError("projection expects " + std::to_string(weight.cols()) + " input features, got " +
                     std::to_string(tokens.cols()));
  }
  Matrix out(tokens.rows(), weight.rows());
  for (std::size_t n = 0; n < tokens.rows(); ++n) {
    const auto in = tokens.row(n);
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      const auto w = weight.row(o);
      double acc = 0.0;
      for (std::size_t i = 0; i < in.size(); ++i) acc += w[i] * in[i];
      out(n, o) = acc;
    }
  }
  return out;
}

}  // namespace irspec
