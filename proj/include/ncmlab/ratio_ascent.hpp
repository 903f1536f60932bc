// Projected gradient ascent for norm-ratio objectives over tuples of
// matrices, with step halving, deterministic finite-difference fallback when
// the subgradient stalls, and exact re-evaluation of every candidate so the
// reported maximum is always attained by the stored witness.
#pragma once

#include <functional>
#include <vector>

#include "ncmlab/complex_matrix.hpp"
#include "ncmlab/exponent.hpp"
#include "ncmlab/solver_options.hpp"

namespace ncm {

using MatrixTuple = std::vector<ComplexMatrix>;

struct RatioProblem {
  // Exact objective (a ratio, scale-invariant in the tuple).
  std::function<double(const MatrixTuple&)> value;
  // Any ascent direction with d/dt value(x + t g) > 0 when one exists; may be
  // null, in which case only finite differences are used.
  std::function<MatrixTuple(const MatrixTuple&)> gradient;
};

struct AscentResult {
  double best = 0.0;
  MatrixTuple witness;
  std::size_t iterations = 0;  // total accepted + rejected steps across starts
  bool converged = false;      // every start exited by stall, none by budget
  double last_gain = 0.0;      // relative improvement of the final accepted step
};

// Maximizes problem.value from each start; starts are normalized to unit
// global Frobenius norm first.  Deterministic given opts.seed.
AscentResult maximize_ratio(const RatioProblem& problem, std::vector<MatrixTuple> starts,
                            const SolverOptions& opts);

// Subgradient G of a |-> ||a||_p with d||a||_p = Re tr(G^* da):
// G = sum_i w_i u_i v_i^* with w_i = (sigma_i/||a||_p)^(p-1); at p = inf the
// top cluster (within 1e-8 relative) is averaged; at p = 1 all positive
// directions carry weight 1.
ComplexMatrix schatten_subgradient(const ComplexMatrix& a, ExponentP p);

}  // namespace ncm
