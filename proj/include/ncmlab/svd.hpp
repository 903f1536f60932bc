// Singular value machinery.
//
// Two backends, both deterministic:
//  - one-sided Jacobi (complex), cyclic pivot order, for full spectra and
//    singular vectors.  A column pair counts as orthogonal when
//    |<a_p, a_q>| <= 1e-12 * ||a_p|| ||a_q||; sweeps repeat until a full
//    sweep performs no rotation.
//  - Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization for
//    the top singular value of large matrices; stops when the GKL residual
//    bound drops below 1e-12 * theta.
#pragma once

#include <vector>

#include "ncmlab/complex_matrix.hpp"

namespace ncm {

struct SvdResult {
  std::vector<double> values;  // descending, >= 0
  ComplexMatrix u;             // rows x k, columns = left singular vectors
  ComplexMatrix v;             // cols x k, columns = right singular vectors
  bool converged = true;
  int sweeps = 0;
};

// Full spectrum (descending) via one-sided Jacobi.
std::vector<double> singular_values(const ComplexMatrix& a);

// Full decomposition a = u diag(values) v^*.
SvdResult svd(const ComplexMatrix& a, bool want_u = true, bool want_v = true);

// Largest singular value; routes to GKL when min(rows, cols) is large enough
// that Jacobi would dominate the runtime.
double top_singular_value(const ComplexMatrix& a);

// Top singular value and the corresponding u, v pair (always Jacobi-free GKL
// for large matrices; exact Jacobi otherwise).
struct TopTriple {
  double sigma;
  std::vector<Complex> u, v;
  bool converged;
};
TopTriple top_singular_triple(const ComplexMatrix& a);

// Extreme eigenvalues of a Hermitian matrix via the shift trick
// lambda_max(m) = sigma_max(m + c I) - c with c = ||m||_F.
double hermitian_eigen_max(const ComplexMatrix& m);
double hermitian_eigen_min(const ComplexMatrix& m);

// Eigen-decomposition of a positive semidefinite Hermitian matrix:
// m = v diag(values) v^*.  (For PSD matrices the right singular basis of the
// one-sided Jacobi SVD diagonalizes m itself.)
SvdResult psd_eigen(const ComplexMatrix& m);

// Top eigenpair of a Hermitian matrix (shifted PSD route).
struct EigenPair {
  double value;
  std::vector<Complex> vector;
};
EigenPair hermitian_top_eigenpair(const ComplexMatrix& m);

}  // namespace ncm
