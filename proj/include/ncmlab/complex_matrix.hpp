// Dense complex matrices: storage, arithmetic, adjoints, traces.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ncm {

using Complex = std::complex<double>;

// Row-major dense matrix over C. Shapes are validated on construction and on
// every binary operation; entries are required to be finite.
class ComplexMatrix {
 public:
  ComplexMatrix() : ComplexMatrix(1, 1) {}
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> d);
  // Matrix unit e_{ij} (single 1 at row i, column j), 0-based.
  static ComplexMatrix unit(std::size_t n, std::size_t i, std::size_t j);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  Complex& at(std::size_t i, std::size_t j);
  const Complex& at(std::size_t i, std::size_t j) const;

  std::span<const Complex> data() const { return a_; }
  std::span<Complex> data() { return a_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& b);
  ComplexMatrix& operator-=(const ComplexMatrix& b);
  ComplexMatrix& operator*=(Complex s);

 private:
  std::size_t rows_, cols_;
  std::vector<Complex> a_;
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, const ComplexMatrix& a);

// a^* b and a b^* without forming the adjoint explicitly.
ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix times_adjoint(const ComplexMatrix& a, const ComplexMatrix& b);

// Frobenius real inner product Re tr(a^* b).
double frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& a, double tol);

}  // namespace ncm
