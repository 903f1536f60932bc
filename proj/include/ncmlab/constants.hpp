// Lower-bound machinery for the best constants in the martingale
// inequalities under study: ratio functionals per inequality kind, explicit
// Hilbert-matrix witnesses, adversarial search over inputs, growth-law
// fitting, and a plain-text witness record format that replays exactly.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncmlab/complex_matrix.hpp"
#include "ncmlab/exponent.hpp"
#include "ncmlab/filtration.hpp"
#include "ncmlab/solver_options.hpp"

namespace ncm {

enum class InequalityKind {
  BgLower,        // ||x||_{H^p} / ||x||_p
  BgUpper,        // ||x||_p / ||x||_{H^p}
  Stein,          // colfn({E_k a_k}) / colfn({a_k})
  DoobDual,       // ||sum_k E_k a_k||_p / ||sum_k a_k||_p, a_k >= 0
  Transform,      // ||sum_k eps_k d_k x||_p / ||x||_p
  TransformWeak,  // weak-L1 numerator at p = 1
  HmaxGap,        // H^p_max of the martingale of x >= 0 over its H^1 norm
};

std::string to_string(InequalityKind kind);
InequalityKind parse_inequality_kind(const std::string& tag);

// Input of one ratio evaluation.  BG_LOWER / BG_UPPER / TRANSFORM /
// TRANSFORM_WEAK / HMAX_GAP take a single terminal matrix; STEIN and
// DOOB_DUAL take one matrix per filtration level.  The TRANSFORM kinds
// read the sign vector (required); everything else ignores it.
struct RatioInput {
  std::vector<ComplexMatrix> matrices;
  std::optional<SignVector> signs;
  FiltrationKind family = FiltrationKind::Augmented;
};

// The ratio named by `kind` at exponent p.  Solver-backed branches
// (BG at p < 2, HMAX_GAP) read budgets and the seed from opts and are
// deterministic given them.  A zero denominator throws std::domain_error;
// n = 1 always yields exactly 1.
double ratio(InequalityKind kind, const RatioInput& input, ExponentP p,
             const SolverOptions& opts = SolverOptions{});

struct ConstantEstimate {
  InequalityKind kind = InequalityKind::BgLower;
  std::size_t n = 0;
  ExponentP p = ExponentP(2.0);
  double lower_bound = 0.0;  // exact ratio() value of the stored witness
  RatioInput witness;
  std::size_t iterations = 0;
  bool converged = true;
  std::uint64_t seed = 0;
};

// Deterministic witness built from the n x n Hilbert-type matrix; supported
// for BG_LOWER (the matrix itself), STEIN (its row matrices), DOOB_DUAL
// (outer products of its columns), and HMAX_GAP.  Other kinds throw.
ConstantEstimate hilbert_witness(InequalityKind kind, std::size_t n, ExponentP p,
                                 const SolverOptions& opts = SolverOptions{});

// Best ratio found by projected gradient ascent (finite differences where no
// clean subgradient exists) over random starts, seeded with the Hilbert
// witness whenever hilbert_witness supports the kind -- so the returned bound
// is never below the witness bound.  TRANSFORM kinds alternate sign
// optimization (exhaustive for n <= 16, greedy single-flip beyond) with
// ascent over the terminal matrix.
ConstantEstimate adversarial_search(InequalityKind kind, std::size_t n, ExponentP p,
                                    const SolverOptions& opts);

// Least-squares fit of value ~= c * X^q in log-log coordinates, where
// X = log(n+1) (LogPower, points are (n, value)) or X = p (PPower, points
// are (p, value)).  Requires >= 4 points, positive values, and
// non-degenerate abscissae; throws std::invalid_argument otherwise.
enum class GrowthModel { LogPower, PPower };

struct GrowthFit {
  double exponent = 0.0;   // q
  double prefactor = 0.0;  // c
  double r_squared = 0.0;
};

GrowthFit growth_fit(std::span<const std::pair<double, double>> points, GrowthModel model);

// Plain-text witness records: tag, n, p, bound, seed, iterations, converged,
// family, optional signs, then each matrix as its shape plus flattened
// complex entries at full precision.  Reading back and re-running ratio()
// with the stored seed reproduces lower_bound to ~1e-15 relative.
void write_witness_records(std::ostream& os, std::span<const ConstantEstimate> estimates);
std::vector<ConstantEstimate> read_witness_records(std::istream& is);

}  // namespace ncm
