#include "ncmlab/complex_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace ncm {

namespace {

void check_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("matrix dimensions must be positive");
}

void check_same_shape(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix shape mismatch");
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, Complex(0.0, 0.0)) {
  check_shape(rows, cols);
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  check_shape(rows, cols);
  if (a_.size() != rows * cols) throw std::invalid_argument("entry count does not match shape");
  if (!all_finite()) throw std::invalid_argument("matrix entries must be finite");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix ComplexMatrix::unit(std::size_t n, std::size_t i, std::size_t j) {
  ComplexMatrix m(n, n);
  m.at(i, j) = 1.0;
  return m;
}

Complex& ComplexMatrix::at(std::size_t i, std::size_t j) {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
  return a_[i * cols_ + j];
}

const Complex& ComplexMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
  return a_[i * cols_ + j];
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

Complex ComplexMatrix::trace() const {
  if (!is_square()) throw std::invalid_argument("trace requires a square matrix");
  Complex t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const Complex& z : a_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const Complex& z : a_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const {
  for (const Complex& z : a_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& b) {
  check_same_shape(*this, b);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += b.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& b) {
  check_same_shape(*this, b);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= b.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (Complex& z : a_) z *= s;
  return *this;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r = a;
  r += b;
  return r;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r = a;
  r -= b;
  return r;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  ComplexMatrix r(a.rows(), b.cols());
  // i-k-j order keeps the inner loops on contiguous rows.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  }
  return r;
}

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) {
  ComplexMatrix r = a;
  r *= s;
  return r;
}

ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("adjoint_times shape mismatch");
  ComplexMatrix r(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Complex c = std::conj(a(k, i));
      if (c == Complex(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += c * b(k, j);
    }
  }
  return r;
}

ComplexMatrix times_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("times_adjoint shape mismatch");
  ComplexMatrix r(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * std::conj(b(j, k));
      r(i, j) = s;
    }
  }
  return r;
}

double frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b);
  double s = 0.0;
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i)
    s += da[i].real() * db[i].real() + da[i].imag() * db[i].imag();
  return s;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
  return true;
}

}  // namespace ncm
