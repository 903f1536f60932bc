#include "ncmlab/filtration.hpp"

#include <stdexcept>

namespace ncm {

namespace {

void check_square_k(const ComplexMatrix& a, std::size_t k) {
  if (!a.is_square()) throw std::invalid_argument("expectation requires a square matrix");
  if (k < 1 || k > a.rows()) throw std::invalid_argument("expectation index out of range");
}

}  // namespace

ComplexMatrix corner_expectation(const ComplexMatrix& a, std::size_t k) {
  check_square_k(a, k);
  ComplexMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r(i, j) = a(i, j);
  return r;
}

ComplexMatrix augmented_expectation(const ComplexMatrix& a, std::size_t k) {
  check_square_k(a, k);
  ComplexMatrix r = corner_expectation(a, k);
  for (std::size_t i = k; i < a.rows(); ++i) r(i, i) = a(i, i);
  return r;
}

ComplexMatrix expectation(const ComplexMatrix& a, std::size_t k, FiltrationKind kind) {
  return kind == FiltrationKind::Corner ? corner_expectation(a, k)
                                        : augmented_expectation(a, k);
}

ComplexMatrix increment_of(const ComplexMatrix& a, std::size_t k, FiltrationKind kind) {
  check_square_k(a, k);
  ComplexMatrix d = expectation(a, k, kind);
  if (k > 1) d -= expectation(a, k - 1, kind);
  return d;
}

SignVector SignVector::all_plus(std::size_t n) {
  SignVector s;
  s.signs.assign(n, 1);
  return s;
}

void SignVector::validate(std::size_t n) const {
  if (signs.size() != n) throw std::invalid_argument("sign vector length mismatch");
  for (int e : signs)
    if (e != 1 && e != -1) throw std::invalid_argument("signs must be +1 or -1");
}

MartingaleSeq MartingaleSeq::from_terminal(const ComplexMatrix& x, FiltrationSpec spec) {
  if (!x.is_square() || x.rows() != spec.ambient_n)
    throw std::invalid_argument("terminal matrix does not match the ambient dimension");
  std::vector<ComplexMatrix> d;
  d.reserve(spec.ambient_n);
  for (std::size_t k = 1; k <= spec.ambient_n; ++k)
    d.push_back(increment_of(x, k, spec.kind));
  return MartingaleSeq(spec, std::move(d));
}

MartingaleSeq MartingaleSeq::from_increments(FiltrationSpec spec, std::vector<ComplexMatrix> d) {
  if (d.size() != spec.ambient_n)
    throw std::invalid_argument("expected one increment per filtration level");
  ComplexMatrix x(spec.ambient_n, spec.ambient_n);
  for (const ComplexMatrix& dk : d) {
    if (!dk.is_square() || dk.rows() != spec.ambient_n)
      throw std::invalid_argument("increment dimension mismatch");
    x += dk;
  }
  const double scale = 1.0 + x.frobenius_norm();
  for (std::size_t k = 1; k <= spec.ambient_n; ++k) {
    const ComplexMatrix expect = increment_of(x, k, spec.kind);
    if ((expect - d[k - 1]).frobenius_norm() > 1e-10 * scale)
      throw std::invalid_argument("increments are not adapted to the filtration");
  }
  return MartingaleSeq(spec, std::move(d));
}

ComplexMatrix MartingaleSeq::terminal() const { return partial_sum(increments_.size()); }

ComplexMatrix MartingaleSeq::partial_sum(std::size_t k) const {
  if (k > increments_.size()) throw std::invalid_argument("partial_sum index out of range");
  ComplexMatrix s(spec_.ambient_n, spec_.ambient_n);
  for (std::size_t i = 0; i < k; ++i) s += increments_[i];
  return s;
}

ComplexMatrix transform(const MartingaleSeq& m, const SignVector& signs) {
  signs.validate(m.length());
  ComplexMatrix s(m.spec().ambient_n, m.spec().ambient_n);
  for (std::size_t k = 0; k < m.length(); ++k) {
    if (signs.signs[k] > 0)
      s += m.increments()[k];
    else
      s -= m.increments()[k];
  }
  return s;
}

ComplexMatrix increment_stack(const ComplexMatrix& w, const FiltrationSpec& spec,
                              StackSide side) {
  const std::size_t n = spec.ambient_n;
  ComplexMatrix s(n * n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const ComplexMatrix d = increment_of(w, k, spec.kind);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        s((k - 1) * n + i, j) = (side == StackSide::Column) ? d(i, j) : std::conj(d(j, i));
  }
  return s;
}

ComplexMatrix unstack_gradient(const ComplexMatrix& g, const FiltrationSpec& spec,
                               StackSide side) {
  const std::size_t n = spec.ambient_n;
  ComplexMatrix out(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    ComplexMatrix block(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        block(i, j) = (side == StackSide::Column) ? g((k - 1) * n + i, j)
                                                  : std::conj(g((k - 1) * n + j, i));
    out += increment_of(block, k, spec.kind);
  }
  return out;
}

}  // namespace ncm
