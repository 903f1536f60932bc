#include "ncmlab/ratio_ascent.hpp"

#include <cmath>
#include <stdexcept>

#include "ncmlab/norms.hpp"
#include "ncmlab/rng.hpp"
#include "ncmlab/svd.hpp"

namespace ncm {

namespace {

double tuple_norm(const MatrixTuple& xs) {
  double s = 0.0;
  for (const auto& x : xs) {
    const double f = x.frobenius_norm();
    s += f * f;
  }
  return std::sqrt(s);
}

double tuple_inner(const MatrixTuple& a, const MatrixTuple& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += frobenius_inner(a[i], b[i]);
  return s;
}

void tuple_axpy(MatrixTuple& y, double alpha, const MatrixTuple& x) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    ComplexMatrix t = x[i];
    t *= Complex(alpha, 0.0);
    y[i] += t;
  }
}

void tuple_scale(MatrixTuple& xs, double s) {
  for (auto& x : xs) x *= Complex(s, 0.0);
}

MatrixTuple random_tuple_like(Rng& rng, const MatrixTuple& shape) {
  MatrixTuple t;
  t.reserve(shape.size());
  for (const auto& x : shape) t.push_back(random_gaussian_matrix(rng, x.rows(), x.cols()));
  return t;
}

}  // namespace

ComplexMatrix schatten_subgradient(const ComplexMatrix& a, ExponentP p) {
  const SvdResult s = svd(a, true, true);
  const std::size_t k = s.values.size();
  const double top = k ? s.values[0] : 0.0;
  ComplexMatrix g(a.rows(), a.cols());
  if (top <= 0.0) return g;

  std::vector<double> w(k, 0.0);
  if (p.is_infinity()) {
    std::size_t cluster = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (s.values[i] >= top * (1.0 - 1e-8)) ++cluster;
    for (std::size_t i = 0; i < cluster; ++i) w[i] = 1.0 / static_cast<double>(cluster);
  } else {
    const double pv = p.value();
    const double nrm = schatten_norm(a, p);
    if (nrm <= 0.0) return g;
    for (std::size_t i = 0; i < k; ++i) {
      if (s.values[i] <= top * 1e-14 && pv < 2.0) {
        w[i] = (pv == 1.0) ? 0.0 : 0.0;  // flat directions: any value in [0,1] valid; pick 0
      } else {
        w[i] = std::pow(s.values[i] / nrm, pv - 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      Complex acc(0.0, 0.0);
      for (std::size_t m = 0; m < k; ++m) {
        if (w[m] == 0.0) continue;
        acc += w[m] * s.u(i, m) * std::conj(s.v(j, m));
      }
      g(i, j) = acc;
    }
  return g;
}

AscentResult maximize_ratio(const RatioProblem& problem, std::vector<MatrixTuple> starts,
                            const SolverOptions& opts) {
  if (starts.empty()) throw std::invalid_argument("maximize_ratio needs at least one start");
  Rng root(opts.seed);
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Rng child = root.split(r + 1);
    starts.push_back(random_tuple_like(child, starts.front()));
  }

  AscentResult out;
  out.converged = true;
  for (std::size_t si = 0; si < starts.size(); ++si) {
    MatrixTuple x = starts[si];
    const double n0 = tuple_norm(x);
    if (n0 == 0.0) continue;
    tuple_scale(x, 1.0 / n0);

    double f = problem.value(x);
    if (f > out.best) {
      out.best = f;
      out.witness = x;
    }
    double step = 0.25;
    std::size_t stalls = 0;
    bool budget_hit = true;
    Rng probe_rng = root.split(1000 + si);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
      MatrixTuple g;
      if (problem.gradient) {
        g = problem.gradient(x);
        // Project onto the tangent space of the unit sphere.
        const double c = tuple_inner(g, x);
        tuple_axpy(g, -c, x);
      }
      double gn = problem.gradient ? tuple_norm(g) : 0.0;
      if (gn <= 1e-13) {
        // Deterministic finite-difference probe along 8 random directions.
        double best_gain = 0.0;
        MatrixTuple best_dir;
        for (int d = 0; d < 8; ++d) {
          MatrixTuple dir = random_tuple_like(probe_rng, x);
          const double c = tuple_inner(dir, x);
          tuple_axpy(dir, -c, x);
          const double dn = tuple_norm(dir);
          if (dn == 0.0) continue;
          tuple_scale(dir, 1.0 / dn);
          MatrixTuple xp = x;
          tuple_axpy(xp, 1e-6, dir);
          tuple_scale(xp, 1.0 / tuple_norm(xp));
          const double fp = problem.value(xp);
          ++out.iterations;
          if (fp - f > best_gain) {
            best_gain = fp - f;
            best_dir = dir;
          }
        }
        if (best_dir.empty()) {
          budget_hit = false;  // stationary: clean exit
          break;
        }
        g = best_dir;
        gn = 1.0;
      }
      tuple_scale(g, 1.0 / gn);

      bool improved = false;
      while (step > 1e-10) {
        MatrixTuple xn = x;
        tuple_axpy(xn, step, g);
        const double nn = tuple_norm(xn);
        if (nn == 0.0) break;
        tuple_scale(xn, 1.0 / nn);
        const double fn = problem.value(xn);
        ++out.iterations;
        if (fn > f * (1.0 + 1e-15) || (f == 0.0 && fn > 0.0)) {
          const double gain = (f > 0.0) ? (fn - f) / f : 1.0;
          x = std::move(xn);
          f = fn;
          if (f > out.best) {
            out.best = f;
            out.witness = x;
            out.last_gain = gain;
          }
          step = std::min(step * 1.4, 1.0);
          improved = true;
          if (gain < opts.tolerance) ++stalls;
          else stalls = 0;
          break;
        }
        step *= 0.5;
      }
      if (!improved || stalls >= 8) {
        budget_hit = false;
        break;
      }
    }
    if (budget_hit) out.converged = false;
  }
  return out;
}

}  // namespace ncm
