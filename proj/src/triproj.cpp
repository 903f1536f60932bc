#include "ncmlab/triproj.hpp"

#include <stdexcept>

#include "ncmlab/norms.hpp"
#include "ncmlab/ratio_ascent.hpp"
#include "ncmlab/svd.hpp"

namespace ncm {

ComplexMatrix triangular(const ComplexMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("triangular requires a square matrix");
  ComplexMatrix t(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) t(i, j) = a(i, j);
  return t;
}

ComplexMatrix hilbert_matrix(std::size_t n) {
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        h(i, j) = 1.0 / (static_cast<double>(j) - static_cast<double>(i));
  return h;
}

HookParts column_parts(const ComplexMatrix& x) {
  if (!x.is_square()) throw std::invalid_argument("column_parts requires a square matrix");
  const std::size_t n = x.rows();
  HookParts parts;
  parts.columns.reserve(n);
  parts.rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ComplexMatrix col(n, n), row(n, n);
    for (std::size_t i = 0; i <= k; ++i) col(i, k) = x(i, k);  // diagonal goes here
    for (std::size_t j = 0; j < k; ++j) row(k, j) = x(k, j);
    parts.columns.push_back(std::move(col));
    parts.rows.push_back(std::move(row));
  }
  return parts;
}

namespace {

double t_ratio(const ComplexMatrix& x, ExponentP p) {
  const double den = schatten_norm(x, p);
  if (den == 0.0) throw std::invalid_argument("norm ratio undefined for the zero matrix");
  return schatten_norm(triangular(x), p) / den;
}

TriprojEstimate estimate_direct(std::size_t n, ExponentP p, const SolverOptions& opts) {
  RatioProblem problem;
  problem.value = [p](const MatrixTuple& xs) { return t_ratio(xs[0], p); };
  problem.gradient = [p](const MatrixTuple& xs) {
    const ComplexMatrix& x = xs[0];
    const ComplexMatrix tx = triangular(x);
    const double num = schatten_norm(tx, p);
    const double den = schatten_norm(x, p);
    // grad (N/D) ~ (G_N - (N/D) G_D) / D; T is its own adjoint as an entry mask.
    ComplexMatrix g = triangular(schatten_subgradient(tx, p));
    ComplexMatrix gd = schatten_subgradient(x, p);
    gd *= Complex(num / den, 0.0);
    g -= gd;
    g *= Complex(1.0 / den, 0.0);
    return MatrixTuple{g};
  };

  std::vector<MatrixTuple> starts;
  starts.push_back({hilbert_matrix(n)});
  starts.push_back({ComplexMatrix::identity(n)});
  const AscentResult res = maximize_ratio(problem, std::move(starts), opts);

  TriprojEstimate est;
  est.n = n;
  est.p = p;
  est.bound = res.best;
  est.witness = res.witness.empty() ? ComplexMatrix(n, n) : res.witness[0];
  est.iterations = res.iterations;
  est.converged = res.converged;
  est.gap = std::max(res.last_gain, opts.tolerance);
  est.seed = opts.seed;
  return est;
}

}  // namespace

TriprojEstimate triproj_norm_estimate(std::size_t n, ExponentP p, const SolverOptions& opts) {
  if (n < 1) throw std::invalid_argument("triproj_norm_estimate requires n >= 1");
  if (!p.is_infinity() && p.value() == 1.0) {
    // Duality route: run the infinity-norm search, then convert its witness.
    // If x attains r = ||Tx||_inf/||x||_inf and u v^* is the top singular
    // pair of Tx, then ||T(u v^*)||_1 >= |tr((Tx/||x||_inf)^* T(u v^*))| ...
    // >= r, so the rank-one y = u v^* certifies at least r at p = 1.
    TriprojEstimate inf_est = estimate_direct(n, ExponentP::infinity(), opts);
    const SvdResult s = svd(triangular(inf_est.witness), true, true);
    ComplexMatrix y(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y(i, j) = s.u(i, 0) * std::conj(s.v(j, 0));
    TriprojEstimate est = inf_est;
    est.p = ExponentP(1.0);
    est.witness = y;
    est.bound = t_ratio(y, ExponentP(1.0));
    return est;
  }
  return estimate_direct(n, p, opts);
}

}  // namespace ncm
