#pragma once

#include <cstddef>
#include <cstdint>

namespace ncm {

// Shared knobs for the iterative solvers (norm-ratio ascent, Hardy-space
// decomposition descent, max-norm penalty method).
struct SolverOptions {
  std::size_t max_iterations = 400;
  double tolerance = 1e-9;   // relative improvement considered progress
  std::size_t restarts = 16; // random restarts beyond the canonical starts
  std::uint64_t seed = 1;
};

}  // namespace ncm
