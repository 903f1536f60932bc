// Schatten p-norms, the operator-norm endpoint, weak-L1, matrix modulus,
// and column/row square functions of matrix sequences.
#pragma once

#include <span>
#include <vector>

#include "ncmlab/complex_matrix.hpp"
#include "ncmlab/exponent.hpp"

namespace ncm {

// ||a||_p = (sum sigma_i^p)^(1/p); p = inf gives the operator norm.
double schatten_norm(const ComplexMatrix& a, ExponentP p);

// |a| = (a^* a)^(1/2), via the right singular basis.
ComplexMatrix modulus(const ComplexMatrix& a);

// Weak-L1 quasi-norm: max_k (k+1) sigma_k with sigma_0 >= sigma_1 >= ...
double weak_l1_norm(const ComplexMatrix& a);

enum class Side { Column, Row };

// Column side: sum x_k^* x_k.  Row side: sum x_k x_k^*.
ComplexMatrix gram_sum(std::span<const ComplexMatrix> xs, Side side);

// || (gram_sum)^{1/2} ||_p, i.e. the p-norm of the square function of the
// sequence.  p = 2 collapses to (sum ||x_k||_2^2)^{1/2}.
double sq_fn_norm(std::span<const ComplexMatrix> xs, ExponentP p, Side side);

// p-norm read directly off a PSD matrix's eigenvalues' square roots:
// || s^{1/2} ||_p.  Shared by sq_fn_norm and the Hardy-space solvers.
double psd_sqrt_norm(const ComplexMatrix& s, ExponentP p);

}  // namespace ncm
