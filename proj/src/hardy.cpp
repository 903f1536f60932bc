#include "ncmlab/hardy.hpp"

#include <cmath>
#include <stdexcept>

#include "ncmlab/norms.hpp"
#include "ncmlab/ratio_ascent.hpp"
#include "ncmlab/rng.hpp"
#include "ncmlab/svd.hpp"
#include "ncmlab/triproj.hpp"

namespace ncm {

namespace {

double decomposition_value(const ComplexMatrix& x, const ComplexMatrix& z,
                           const FiltrationSpec& spec, ExponentP p) {
  const ComplexMatrix y = x - z;
  return schatten_norm(increment_stack(y, spec, StackSide::Column), p) +
         schatten_norm(increment_stack(z, spec, StackSide::Row), p);
}

}  // namespace

double hardy_norm_high(const MartingaleSeq& m, ExponentP p) {
  if (!p.is_infinity() && p.value() < 2.0)
    throw std::invalid_argument("hardy_norm_high requires p >= 2 (use hardy_norm_low)");
  return std::max(sq_fn_norm(m.increments(), p, Side::Column),
                  sq_fn_norm(m.increments(), p, Side::Row));
}

HardyLowResult hardy_norm_low(const MartingaleSeq& m, ExponentP p, const SolverOptions& opts) {
  if (p.is_infinity() || p.value() >= 2.0)
    throw std::invalid_argument("hardy_norm_low requires 1 <= p < 2 (use hardy_norm_high)");
  const FiltrationSpec spec = m.spec();
  const std::size_t n = spec.ambient_n;
  const ComplexMatrix x = m.terminal();
  const double xscale = x.frobenius_norm();

  HardyLowResult out;
  // Trivial decompositions seed the incumbent: z = 0 (all column) and
  // z = x (all row); the solver can only improve on them.
  ComplexMatrix best_z(n, n);
  double best = decomposition_value(x, best_z, spec, p);
  {
    const double all_row = decomposition_value(x, x, spec, p);
    if (all_row < best) {
      best = all_row;
      best_z = x;
    }
  }
  if (xscale == 0.0) {
    out.value = 0.0;
    out.decomposition = {x, best_z};
    return out;
  }

  Rng root(opts.seed);
  std::vector<ComplexMatrix> starts = {ComplexMatrix(n, n), x};
  {
    // The strictly-lower part of x is a natural row-side candidate.
    ComplexMatrix lower(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) lower(i, j) = x(i, j);
    starts.push_back(lower);
  }
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Rng child = root.split(r + 1);
    ComplexMatrix g = random_gaussian_matrix(child, n, n);
    g *= Complex(0.5 * xscale / std::max(g.frobenius_norm(), 1e-300), 0.0);
    starts.push_back(g);
  }

  // Subgradient descent with diminishing steps c/sqrt(it+1), best iterate
  // kept.  The stacked form keeps the subgradient bounded through
  // singular-value crossings, which is what the epsilon-smoothing is for.
  const std::size_t iters_per_start = std::max<std::size_t>(opts.max_iterations / 2, 10);
  double last_best_gain = 0.0;
  for (const ComplexMatrix& z0 : starts) {
    ComplexMatrix z = z0;
    double f = decomposition_value(x, z, spec, p);
    if (f < best) {
      best = f;
      best_z = z;
    }
    const double step0 = 0.5 * xscale;
    for (std::size_t it = 0; it < iters_per_start; ++it) {
      const ComplexMatrix y = x - z;
      ComplexMatrix g_col = unstack_gradient(
          schatten_subgradient(increment_stack(y, spec, StackSide::Column), p), spec,
          StackSide::Column);
      g_col *= Complex(-1.0, 0.0);  // d/dz of the y-term
      const ComplexMatrix g_row = unstack_gradient(
          schatten_subgradient(increment_stack(z, spec, StackSide::Row), p), spec,
          StackSide::Row);
      ComplexMatrix g = g_col + g_row;
      const double gn = g.frobenius_norm();
      ++out.iterations;
      if (gn <= 1e-14) break;
      g *= Complex(-step0 / (gn * std::sqrt(static_cast<double>(it + 1))), 0.0);
      z += g;
      f = decomposition_value(x, z, spec, p);
      if (f < best * (1.0 - 1e-15)) {
        last_best_gain = (best - f) / std::max(best, 1e-300);
        best = f;
        best_z = z;
      }
    }
  }
  out.value = best;
  out.decomposition = {x - best_z, best_z};
  // Diminishing steps always terminate; flag only a run whose incumbent was
  // still moving materially when the budget ran out.
  out.converged = last_best_gain <= 1e-3;
  return out;
}

ComplexMatrix conditioned_bracket(const MartingaleSeq& m) {
  if (m.spec().kind != FiltrationKind::Corner)
    throw std::invalid_argument("conditioned_bracket requires the corner family");
  const std::size_t n = m.spec().ambient_n;
  ComplexMatrix acc(n, n);
  for (std::size_t k = 2; k <= n; ++k) {
    const ComplexMatrix& dk = m.increments()[k - 1];
    acc += corner_expectation(times_adjoint(dk, dk), k - 1);
  }
  return acc;
}

MaxCertificate hardy_max_norm_pos(std::span<const ComplexMatrix> xs, ExponentP p,
                                  const SolverOptions& opts) {
  if (xs.empty()) throw std::invalid_argument("hardy_max_norm_pos needs a nonempty sequence");
  const std::size_t n = xs[0].rows();
  for (const auto& x : xs) {
    if (!x.is_square() || x.rows() != n)
      throw std::invalid_argument("hardy_max_norm_pos: mixed shapes");
    if (!is_hermitian(x, 1e-8 * (1.0 + x.max_abs())))
      throw std::invalid_argument("hardy_max_norm_pos: inputs must be Hermitian");
    if (hermitian_eigen_min(x) < -1e-8 * (1.0 + x.max_abs()))
      throw std::invalid_argument("hardy_max_norm_pos: inputs must be positive");
  }

  const auto feasibility_gap = [&](const ComplexMatrix& y) {
    double lam = 0.0;
    for (const auto& x : xs) lam = std::max(lam, hermitian_eigen_max(x - y));
    return lam;  // >= 0 means y must be lifted by lam*I
  };
  const auto project_value = [&](const ComplexMatrix& y, ComplexMatrix& feas) {
    feas = y;
    const double lam = std::max(feasibility_gap(y), 0.0);
    for (std::size_t i = 0; i < n; ++i) feas(i, i) += lam;
    return schatten_norm(feas, p);
  };

  MaxCertificate out;
  // Feasible canonical starts: the sum (dominates each PSD term) and the
  // scalar envelope (max top eigenvalue) * I.
  ComplexMatrix sum(n, n);
  double top = 0.0;
  for (const auto& x : xs) {
    sum += x;
    top = std::max(top, hermitian_eigen_max(x));
  }
  ComplexMatrix best_y = sum;
  double best = project_value(sum, best_y);
  {
    ComplexMatrix envelope(n, n);
    for (std::size_t i = 0; i < n; ++i) envelope(i, i) = top;
    ComplexMatrix feas(n, n);
    const double v = project_value(envelope, feas);
    if (v < best) {
      best = v;
      best_y = feas;
    }
  }

  // Penalty descent: phi_rho(y) = ||y||_p + rho sum_k max(0, lmax(x_k - y))^2.
  const double scale = 1.0 + sum.frobenius_norm();
  Rng root(opts.seed);
  const std::size_t n_starts = 1 + std::min<std::size_t>(opts.restarts, 8);
  for (std::size_t si = 0; si < n_starts; ++si) {
    ComplexMatrix y = sum;
    if (si > 0) {
      Rng child = root.split(si);
      ComplexMatrix h = random_hermitian_matrix(child, n);
      h *= Complex(0.3 * scale / std::max(h.frobenius_norm(), 1e-300), 0.0);
      y += h;
    }
    double rho = 1.0 / scale;
    for (int outer = 0; outer < 8; ++outer, rho *= 10.0) {
      double step = 0.2 * scale;
      const std::size_t inner = std::max<std::size_t>(opts.max_iterations / 8, 20);
      double phi = 0.0;
      {
        double pen = 0.0;
        for (const auto& x : xs) {
          const double l = std::max(hermitian_eigen_max(x - y), 0.0);
          pen += l * l;
        }
        phi = schatten_norm(y, p) + rho * pen;
      }
      for (std::size_t it = 0; it < inner; ++it) {
        // Gradient of the penalty part: -2 rho max(0,l_k) v_k v_k^*.
        ComplexMatrix g = schatten_subgradient(y, p);
        bool any_active = false;
        for (const auto& x : xs) {
          const EigenPair ep = hermitian_top_eigenpair(x - y);
          if (ep.value <= 0.0) continue;
          any_active = true;
          const double w = -2.0 * rho * ep.value;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              g(i, j) += w * ep.vector[i] * std::conj(ep.vector[j]);
        }
        // Hermitian projection of the step direction.
        ComplexMatrix gh(n, n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            gh(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
        const double gn = gh.frobenius_norm();
        ++out.iterations;
        if (gn <= 1e-14 * scale) break;
        bool moved = false;
        while (step > 1e-12 * scale) {
          ComplexMatrix yn = y;
          ComplexMatrix delta = gh;
          delta *= Complex(-step / gn, 0.0);
          yn += delta;
          double pen = 0.0;
          for (const auto& x : xs) {
            const double l = std::max(hermitian_eigen_max(x - yn), 0.0);
            pen += l * l;
          }
          const double phin = schatten_norm(yn, p) + rho * pen;
          if (phin < phi) {
            y = std::move(yn);
            phi = phin;
            step = std::min(step * 1.3, scale);
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;
        (void)any_active;
      }
      ComplexMatrix feas(n, n);
      const double v = project_value(y, feas);
      if (v < best) {
        best = v;
        best_y = feas;
      }
    }
  }
  out.dominant = best_y;
  out.value = best;
  out.converged = true;
  return out;
}

double h1_triangular_split_bound(const ComplexMatrix& x, FiltrationKind kind) {
  if (!x.is_square()) throw std::invalid_argument("h1_triangular_split_bound: square input");
  const std::size_t n = x.rows();
  ComplexMatrix lower(n, n), upper0(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j <= i)
        lower(i, j) = x(i, j);
      else
        upper0(i, j) = x(i, j);
    }
  const FiltrationSpec spec{n, kind};
  const MartingaleSeq my = MartingaleSeq::from_terminal(lower, spec);
  const MartingaleSeq mz = MartingaleSeq::from_terminal(upper0, spec);
  return sq_fn_norm(my.increments(), ExponentP(1.0), Side::Column) +
         sq_fn_norm(mz.increments(), ExponentP(1.0), Side::Row);
}

}  // namespace ncm
