// Triangular projection, the Hilbert-type antisymmetric matrix, the
// column/row hook split of its corner increments, and lower-bound estimation
// of the projection's Schatten p -> p norm.
#pragma once

#include <cstdint>
#include <vector>

#include "ncmlab/complex_matrix.hpp"
#include "ncmlab/exponent.hpp"
#include "ncmlab/solver_options.hpp"

namespace ncm {

// Upper-triangular truncation including the diagonal.
ComplexMatrix triangular(const ComplexMatrix& a);

// h_ij = 1/(j - i) off the diagonal, 0 on it; h^T = -h.
ComplexMatrix hilbert_matrix(std::size_t n);

// Corner increments d_k x split into hooks: columns[k-1] carries the k-th
// column of x down to and including the diagonal entry (so columns[k-1]
// = d_k(T x) for every x), rows[k-1] the k-th row strictly left of the
// diagonal; columns[k-1] + rows[k-1] = d_k x exactly.
struct HookParts {
  std::vector<ComplexMatrix> columns;
  std::vector<ComplexMatrix> rows;
};
HookParts column_parts(const ComplexMatrix& x);

struct TriprojEstimate {
  double bound = 0.0;        // certified: attained by witness
  ComplexMatrix witness;
  std::size_t n = 0;
  ExponentP p = ExponentP(2.0);
  std::size_t iterations = 0;
  bool converged = true;
  double gap = 0.0;          // optimizer's reported relative gap
  std::uint64_t seed = 0;
};

// Lower bound for t_{p,n} = ||T||_{S^p_n -> S^p_n} by projected gradient
// ascent over the unit sphere, seeded with the Hilbert matrix, the identity,
// and Gaussian restarts.  p = 1 is routed through p = infinity by duality
// (T is self-adjoint for trace pairing), with a rank-one witness whose exact
// p = 1 ratio is stored.
TriprojEstimate triproj_norm_estimate(std::size_t n, ExponentP p, const SolverOptions& opts);

}  // namespace ncm
