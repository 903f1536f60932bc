#include "ncmlab/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "ncmlab/svd.hpp"

namespace ncm {

namespace {

double power_norm(const std::vector<double>& sigma, double p) {
  double top = 0.0;
  for (double s : sigma) top = std::max(top, s);
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (double s : sigma) acc += std::pow(s / top, p);
  return top * std::pow(acc, 1.0 / p);
}

}  // namespace

double schatten_norm(const ComplexMatrix& a, ExponentP p) {
  if (p.is_infinity()) return top_singular_value(a);
  const double pv = p.value();
  if (pv == 2.0) return a.frobenius_norm();
  return power_norm(singular_values(a), pv);
}

ComplexMatrix modulus(const ComplexMatrix& a) {
  const SvdResult s = svd(a, false, true);
  const std::size_t n = a.cols();
  ComplexMatrix m(n, n);
  // |a| = v diag(sigma) v^*
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc(0.0, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        acc += s.v(i, k) * s.values[k] * std::conj(s.v(j, k));
      m(i, j) = acc;
    }
  }
  return m;
}

double weak_l1_norm(const ComplexMatrix& a) {
  const std::vector<double> sigma = singular_values(a);
  double best = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k)
    best = std::max(best, static_cast<double>(k + 1) * sigma[k]);
  return best;
}

namespace {

// x^* x accumulated as a sum of outer products of the nonzero rows of x.
// Martingale increments are hooks (one row plus one column occupied), so
// skipping zero rows turns the n-term gram from O(n^4) into O(n^3) overall.
ComplexMatrix sparse_gram(const ComplexMatrix& x, Side side) {
  const std::size_t r = x.rows(), c = x.cols();
  const std::size_t m = (side == Side::Column) ? c : r;
  ComplexMatrix g(m, m);
  std::vector<std::size_t> idx;
  idx.reserve(m);
  const std::size_t lines = (side == Side::Column) ? r : c;
  for (std::size_t l = 0; l < lines; ++l) {
    idx.clear();
    for (std::size_t j = 0; j < m; ++j) {
      const Complex v = (side == Side::Column) ? x(l, j) : x(j, l);
      if (v != Complex(0.0, 0.0)) idx.push_back(j);
    }
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const std::size_t ia = idx[a];
      const Complex va = (side == Side::Column) ? x(l, ia) : x(ia, l);
      for (std::size_t b = a; b < idx.size(); ++b) {
        const std::size_t ib = idx[b];
        const Complex vb = (side == Side::Column) ? x(l, ib) : x(ib, l);
        // Column: (x^* x)_{ab} = sum_l conj(x_{la}) x_{lb};
        // Row:    (x x^*)_{ab} = sum_l x_{al} conj(x_{bl}).
        g(ia, ib) += (side == Side::Column) ? std::conj(va) * vb : va * std::conj(vb);
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < a; ++b) g(a, b) = std::conj(g(b, a));
  return g;
}

}  // namespace

ComplexMatrix gram_sum(std::span<const ComplexMatrix> xs, Side side) {
  if (xs.empty()) throw std::invalid_argument("gram_sum needs a nonempty sequence");
  const std::size_t r = xs[0].rows(), c = xs[0].cols();
  ComplexMatrix s = (side == Side::Column) ? ComplexMatrix(c, c) : ComplexMatrix(r, r);
  for (const ComplexMatrix& x : xs) {
    if (x.rows() != r || x.cols() != c)
      throw std::invalid_argument("gram_sum: mixed shapes in sequence");
    s += sparse_gram(x, side);
  }
  return s;
}

double psd_sqrt_norm(const ComplexMatrix& s, ExponentP p) {
  if (p.is_infinity()) return std::sqrt(std::max(top_singular_value(s), 0.0));
  const double pv = p.value();
  if (pv == 2.0) {
    // (sum lambda_i)^{1/2} = trace^{1/2} exactly.
    return std::sqrt(std::max(s.trace().real(), 0.0));
  }
  std::vector<double> lam = singular_values(s);
  for (double& l : lam) l = std::sqrt(std::max(l, 0.0));
  return power_norm(lam, pv);
}

double sq_fn_norm(std::span<const ComplexMatrix> xs, ExponentP p, Side side) {
  return psd_sqrt_norm(gram_sum(xs, side), p);
}

}  // namespace ncm
