// Hardy-space norms of matrix martingales: the max form for p >= 2, the
// decomposition infimum for 1 <= p < 2 (certified upper bounds via
// subgradient descent), the conditioned bracket, and the dominant-element
// norm for positive sequences.
#pragma once

#include <span>

#include "ncmlab/complex_matrix.hpp"
#include "ncmlab/exponent.hpp"
#include "ncmlab/filtration.hpp"
#include "ncmlab/solver_options.hpp"

namespace ncm {

inline SolverOptions hardy_default_options() {
  SolverOptions o;
  o.restarts = 8;
  return o;
}

// max(column square function, row square function) of the increments; p >= 2.
double hardy_norm_high(const MartingaleSeq& m, ExponentP p);

struct Decomposition {
  ComplexMatrix y;  // column-side part
  ComplexMatrix z;  // row-side part (x = y + z)
};

struct HardyLowResult {
  double value = 0.0;  // certified upper bound, attained by the decomposition
  Decomposition decomposition;
  std::size_t iterations = 0;
  bool converged = true;
};

// inf over x = y + z of colfn(y) + rowfn(z), 1 <= p < 2.  Subgradient descent
// on z (full-matrix parametrization, increments re-derived through the
// filtration); the returned value never exceeds the trivial one-sided
// decompositions.
HardyLowResult hardy_norm_low(const MartingaleSeq& m, ExponentP p, const SolverOptions& opts);

// sum_k E_{k-1}(d_k x (d_k x)^*) with E_0 = 0; requires the corner family.
ComplexMatrix conditioned_bracket(const MartingaleSeq& m);

struct MaxCertificate {
  ComplexMatrix dominant;  // feasible: dominant >= x_k for every k
  double value = 0.0;      // ||dominant||_p
  std::size_t iterations = 0;
  bool converged = true;
};

// Best found ||y||_p over Hermitian y dominating every x_k (all PSD, same
// shape).  Penalty method with a final feasibility projection, so the
// certificate is always a genuine upper bound.
MaxCertificate hardy_max_norm_pos(std::span<const ComplexMatrix> xs, ExponentP p,
                                  const SolverOptions& opts);

// Certified H^1 upper bound from the explicit triangular split
// x = (lower-with-diagonal) + (strictly-upper): column square function of the
// first part plus row square function of the second, increments taken in the
// given family.  Used by the (1 + 2 t_1)-chain experiments.
double h1_triangular_split_bound(const ComplexMatrix& x, FiltrationKind kind);

}  // namespace ncm
