// Matrix filtrations and martingales.
//
// Two nested families of conditional expectations onto the upper-left corner
// algebras, indexed 1..n:
//  - Corner:     E_k(a) = p_k a p_k with p_k the projection onto the first k
//                coordinates (trace-annihilating outside the corner).
//  - Augmented:  F_k(a) = E_k(a) + sum_{i>k} a_ii e_ii, the unital,
//                trace-preserving refinement (the k-th algebra is the corner
//                block plus the diagonal tail).
// Martingale differences are d_k = E_k - E_{k-1} (E_0 = 0), and the
// augmented counterparts with F_0 = 0.  F_n = E_n = id.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ncmlab/complex_matrix.hpp"

namespace ncm {

enum class FiltrationKind { Corner, Augmented };

struct FiltrationSpec {
  std::size_t ambient_n = 1;
  FiltrationKind kind = FiltrationKind::Augmented;
};

// k is 1-based, 1 <= k <= a.rows(); a must be square.
ComplexMatrix corner_expectation(const ComplexMatrix& a, std::size_t k);
ComplexMatrix augmented_expectation(const ComplexMatrix& a, std::size_t k);
ComplexMatrix expectation(const ComplexMatrix& a, std::size_t k, FiltrationKind kind);

// d_k(a) (corner) or the augmented difference; k is 1-based.
ComplexMatrix increment_of(const ComplexMatrix& a, std::size_t k, FiltrationKind kind);

struct SignVector {
  std::vector<int> signs;  // each +1 or -1
  static SignVector all_plus(std::size_t n);
  void validate(std::size_t n) const;
};

// A martingale presented by its difference sequence with respect to one of
// the two filtrations.  Increment k is supported where d_k can place it;
// from_increments enforces that by re-deriving each difference from the sum.
class MartingaleSeq {
 public:
  static MartingaleSeq from_terminal(const ComplexMatrix& x, FiltrationSpec spec);
  static MartingaleSeq from_increments(FiltrationSpec spec, std::vector<ComplexMatrix> d);

  const FiltrationSpec& spec() const { return spec_; }
  std::span<const ComplexMatrix> increments() const { return increments_; }
  std::size_t length() const { return increments_.size(); }
  ComplexMatrix terminal() const;          // sum of all increments
  ComplexMatrix partial_sum(std::size_t k) const;  // sum of the first k

 private:
  MartingaleSeq(FiltrationSpec spec, std::vector<ComplexMatrix> d)
      : spec_(spec), increments_(std::move(d)) {}
  FiltrationSpec spec_;
  std::vector<ComplexMatrix> increments_;
};

// sum_k signs_k d_k of the martingale (same filtration).
ComplexMatrix transform(const MartingaleSeq& m, const SignVector& signs);

enum class StackSide { Column, Row };

// Vertical stack of the increments of w (column side) or of their adjoints
// (row side): an (n^2 x n) matrix whose Schatten p-norm is the corresponding
// square-function norm, because stack^* stack equals the Gram sum.
ComplexMatrix increment_stack(const ComplexMatrix& w, const FiltrationSpec& spec, StackSide side);

// Adjoint of the stacking map: pulls a stacked subgradient back to the
// terminal-matrix variable (each increment map is a self-adjoint entry mask).
ComplexMatrix unstack_gradient(const ComplexMatrix& g, const FiltrationSpec& spec,
                               StackSide side);

}  // namespace ncm
