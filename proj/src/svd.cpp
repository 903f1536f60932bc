#include "ncmlab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "ncmlab/rng.hpp"

namespace ncm {

namespace {

constexpr double kJacobiTol = 1e-12;  // pair (p,q) orthogonal when |g| <= tol*|a_p||a_q|
constexpr int kJacobiMaxSweeps = 60;
constexpr double kGklTol = 1e-12;     // residual bound <= tol * theta
constexpr std::size_t kGklDenseCutoff = 96;  // Jacobi below, Lanczos at/above

// ---------------------------------------------------------------------------
// One-sided Jacobi on a column-major workspace.  Columns of w converge to
// u_j * sigma_j; v accumulates the product of the plane rotations.

struct JacobiWork {
  std::size_t r = 0, c = 0;
  std::vector<Complex> w;  // r x c, column-major
  std::vector<Complex> v;  // c x c, column-major (only if wanted)
  bool want_v = false;
  bool converged = true;
  int sweeps = 0;
};

void jacobi_run(JacobiWork& jw) {
  const std::size_t r = jw.r, c = jw.c;
  std::vector<double> colnorm2(c, 0.0);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    // Fresh column norms each sweep so update drift cannot accumulate.
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      const Complex* col = jw.w.data() + j * r;
      for (std::size_t i = 0; i < r; ++i) s += std::norm(col[i]);
      colnorm2[j] = s;
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        Complex* cp = jw.w.data() + p * r;
        Complex* cq = jw.w.data() + q * r;
        Complex g(0.0, 0.0);
        for (std::size_t i = 0; i < r; ++i) g += std::conj(cp[i]) * cq[i];
        const double alpha = colnorm2[p], beta = colnorm2[q];
        const double ag = std::abs(g);
        if (ag <= kJacobiTol * std::sqrt(alpha * beta) || ag == 0.0) continue;
        rotated = true;
        const Complex phase = g / ag;            // diag(1, conj(phase)) makes the Gram real
        const double tau = (beta - alpha) / (2.0 * ag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        const Complex m = std::conj(phase) * sn;  // a_p' = cs a_p - m a_q ; a_q' = sn a_p + conj(phase) cs a_q
        const Complex mc = std::conj(phase) * cs;
        for (std::size_t i = 0; i < r; ++i) {
          const Complex wp = cp[i], wq = cq[i];
          cp[i] = cs * wp - m * wq;
          cq[i] = sn * wp + mc * wq;
        }
        colnorm2[p] = alpha * cs * cs - 2.0 * cs * sn * ag + beta * sn * sn;
        colnorm2[q] = alpha * sn * sn + 2.0 * cs * sn * ag + beta * cs * cs;
        if (jw.want_v) {
          Complex* vp = jw.v.data() + p * c;
          Complex* vq = jw.v.data() + q * c;
          for (std::size_t i = 0; i < c; ++i) {
            const Complex xp = vp[i], xq = vq[i];
            vp[i] = cs * xp - m * xq;
            vq[i] = sn * xp + mc * xq;
          }
        }
      }
    }
    jw.sweeps = sweep + 1;
    if (!rotated) return;
  }
  jw.converged = false;
}

SvdResult jacobi_svd_tall(const ComplexMatrix& a, bool want_u, bool want_v) {
  const std::size_t r = a.rows(), c = a.cols();
  JacobiWork jw;
  jw.r = r;
  jw.c = c;
  jw.want_v = want_v;
  jw.w.assign(r * c, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) jw.w[j * r + i] = a(i, j);
  if (want_v) {
    jw.v.assign(c * c, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < c; ++j) jw.v[j * c + j] = 1.0;
  }
  jacobi_run(jw);

  std::vector<double> sigma(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    const Complex* col = jw.w.data() + j * r;
    for (std::size_t i = 0; i < r; ++i) s += std::norm(col[i]);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult out;
  out.converged = jw.converged;
  out.sweeps = jw.sweeps;
  out.values.resize(c);
  for (std::size_t j = 0; j < c; ++j) out.values[j] = sigma[order[j]];
  if (want_u) {
    out.u = ComplexMatrix(r, c);
    const double cutoff = (out.values.empty() ? 0.0 : out.values[0]) * 1e-300;
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t src = order[j];
      if (sigma[src] <= cutoff) continue;  // zero column: leave u_j = 0
      const double inv = 1.0 / sigma[src];
      for (std::size_t i = 0; i < r; ++i) out.u(i, j) = jw.w[src * r + i] * inv;
    }
  }
  if (want_v) {
    out.v = ComplexMatrix(c, c);
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t src = order[j];
      for (std::size_t i = 0; i < c; ++i) out.v(i, j) = jw.v[src * c + i];
    }
  }
  return out;
}

SvdResult jacobi_svd(const ComplexMatrix& a, bool want_u, bool want_v) {
  if (a.rows() >= a.cols()) return jacobi_svd_tall(a, want_u, want_v);
  // Wide matrix: run on the adjoint and swap the factor roles.
  SvdResult t = jacobi_svd_tall(a.adjoint(), want_v, want_u);
  SvdResult out;
  out.values = std::move(t.values);
  out.converged = t.converged;
  out.sweeps = t.sweeps;
  if (want_u) out.u = std::move(t.v);
  if (want_v) out.v = std::move(t.u);
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric tridiagonal helpers (for the Lanczos stopping rule).

// Number of eigenvalues of T strictly below x (Sturm count via LDL^T).
int sturm_count_below(const std::vector<double>& d, const std::vector<double>& e, double x) {
  const std::size_t k = d.size();
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  for (double v : e) scale = std::max(scale, std::abs(v));
  const double pivmin = std::max(scale, 1.0) * 1e-307;
  int count = 0;
  double piv = d[0] - x;
  if (std::abs(piv) < pivmin) piv = -pivmin;
  if (piv < 0.0) ++count;
  for (std::size_t i = 1; i < k; ++i) {
    piv = (d[i] - x) - e[i - 1] * e[i - 1] / piv;
    if (std::abs(piv) < pivmin) piv = -pivmin;
    if (piv < 0.0) ++count;
  }
  return count;
}

double tridiag_eigen_max(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t k = d.size();
  if (k == 1) return d[0];
  double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < k; ++i) {
    const double left = (i > 0) ? std::abs(e[i - 1]) : 0.0;
    const double right = (i + 1 < k) ? std::abs(e[i]) : 0.0;
    lo = std::max(lo, d[i]);
    hi = std::max(hi, d[i] + left + right);
  }
  hi += 1e-300;
  const int n = static_cast<int>(k);
  for (int it = 0; it < 120 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count_below(d, e, mid) >= n)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Eigenvector of T for the (isolated) top eigenvalue: inverse iteration with
// a pivot-guarded Thomas solve.  Adequate here because the Lanczos top Ritz
// value separates quickly; the frozen reference tests guard the end result.
std::vector<double> tridiag_top_eigenvector(const std::vector<double>& d,
                                            const std::vector<double>& e, double lambda) {
  const std::size_t k = d.size();
  if (k == 1) return {1.0};
  double scale = std::abs(lambda);
  for (double v : d) scale = std::max(scale, std::abs(v));
  const double pivmin = std::max(scale, 1.0) * 1e-290;
  const double shift = lambda + std::max(scale, 1.0) * 1e-14;
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = (i % 2 == 0) ? 1.0 : -0.5;  // deterministic start
  std::vector<double> diag(k), rhs(k), x(k);
  for (int round = 0; round < 3; ++round) {
    for (std::size_t i = 0; i < k; ++i) diag[i] = d[i] - shift;
    rhs = w;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      double piv = diag[i];
      if (std::abs(piv) < pivmin) piv = (piv < 0.0) ? -pivmin : pivmin;
      const double m = e[i] / piv;
      diag[i] = piv;
      diag[i + 1] -= m * e[i];
      rhs[i + 1] -= m * rhs[i];
    }
    if (std::abs(diag[k - 1]) < pivmin) diag[k - 1] = (diag[k - 1] < 0.0) ? -pivmin : pivmin;
    x[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t ii = k - 1; ii-- > 0;) x[ii] = (rhs[ii] - e[ii] * x[ii + 1]) / diag[ii];
    double nrm = 0.0;
    for (double vv : x) nrm += vv * vv;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0 || !std::isfinite(nrm)) return std::vector<double>(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) w[i] = x[i] / nrm;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.

void matvec(const ComplexMatrix& a, const std::vector<Complex>& x, std::vector<Complex>& y) {
  const std::size_t r = a.rows(), c = a.cols();
  y.assign(r, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    Complex s(0.0, 0.0);
    const Complex* row = a.data().data() + i * c;
    for (std::size_t j = 0; j < c; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void matvec_adjoint(const ComplexMatrix& a, const std::vector<Complex>& x,
                    std::vector<Complex>& y) {
  const std::size_t r = a.rows(), c = a.cols();
  y.assign(c, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    const Complex* row = a.data().data() + i * c;
    const Complex xi = x[i];
    for (std::size_t j = 0; j < c; ++j) y[j] += std::conj(row[j]) * xi;
  }
}

void reorthogonalize(std::vector<Complex>& w, const std::vector<std::vector<Complex>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      Complex proj(0.0, 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) proj += std::conj(b[i]) * w[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= proj * b[i];
    }
  }
}

double vec_norm(const std::vector<Complex>& w) {
  double s = 0.0;
  for (const Complex& z : w) s += std::norm(z);
  return std::sqrt(s);
}

struct GklResult {
  double theta = 0.0;
  bool converged = false;
  std::vector<Complex> u, v;  // only filled when want_vectors
};

// Top singular value of a (rows >= cols assumed NOT required; works on the
// given orientation).  Deterministic jittered start vector.
GklResult gkl_top(const ComplexMatrix& a, bool want_vectors) {
  const std::size_t r = a.rows(), c = a.cols();
  GklResult out;
  const double fro = a.frobenius_norm();
  if (fro == 0.0) {
    out.converged = true;
    if (want_vectors) {
      out.u.assign(r, Complex(0.0, 0.0));
      out.v.assign(c, Complex(0.0, 0.0));
    }
    return out;
  }
  const std::size_t kmax = std::min<std::size_t>(std::min(r, c), 1000);

  std::vector<std::vector<Complex>> us, vs;
  std::vector<double> alpha, beta;
  us.reserve(kmax);
  vs.reserve(kmax);

  std::vector<Complex> v(c);
  for (std::size_t i = 0; i < c; ++i) {
    std::uint64_t h = i + 1;
    const double jitter = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
    v[i] = Complex(1.0 + 0.25 * (jitter - 0.5), 0.0);
  }
  {
    const double nv = vec_norm(v);
    for (auto& z : v) z /= nv;
  }
  vs.push_back(v);

  std::vector<Complex> w, g;
  const double tiny = fro * 1e-15;
  for (std::size_t k = 0; k < kmax; ++k) {
    matvec(a, vs[k], w);
    if (k > 0) {
      const double b = beta[k - 1];
      for (std::size_t i = 0; i < r; ++i) w[i] -= b * us[k - 1][i];
    }
    reorthogonalize(w, us);
    const double ak = vec_norm(w);
    if (ak <= tiny) {  // Krylov space exhausted; theta so far is exact
      out.converged = true;
      break;
    }
    alpha.push_back(ak);
    for (auto& z : w) z /= ak;
    us.push_back(w);

    matvec_adjoint(a, us[k], g);
    for (std::size_t i = 0; i < c; ++i) g[i] -= ak * vs[k][i];
    reorthogonalize(g, vs);
    const double bk = vec_norm(g);

    // theta_k = sigma_max(B_k) via the tridiagonal B_k B_k^T
    // (diag alpha_i^2 + beta_i^2 with beta running strictly between steps,
    // offdiag beta_i alpha_{i+1}).  With (theta, cu) the top left singular
    // pair of B_k and u = U_k cu, v = V_k cv:  A v = theta u exactly and
    // ||A^* u - theta v|| = bk |cu_last|, so theta is within that residual of
    // a true singular value while never exceeding sigma_max.
    const std::size_t m = alpha.size();
    std::vector<double> d(m), e(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) {
      const double bi = (i + 1 < m) ? beta[i] : 0.0;
      d[i] = alpha[i] * alpha[i] + bi * bi;
      if (i + 1 < m) e[i] = bi * alpha[i + 1];
    }
    const double lam = tridiag_eigen_max(d, e);
    const double theta = std::sqrt(std::max(lam, 0.0));
    out.theta = theta;

    const std::vector<double> cu = tridiag_top_eigenvector(d, e, lam);
    const double resid = bk * std::abs(cu.back());
    if ((resid <= kGklTol * std::max(theta, tiny) && m >= 6) || bk <= tiny) {
      out.converged = true;
      if (want_vectors) {
        // cv = B^T cu / theta keeps the (u, v) pair sign-consistent.
        std::vector<double> cv(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
          double s = alpha[j] * cu[j];
          if (j > 0) s += beta[j - 1] * cu[j - 1];
          cv[j] = (theta > 0.0) ? s / theta : 0.0;
        }
        out.u.assign(r, Complex(0.0, 0.0));
        out.v.assign(c, Complex(0.0, 0.0));
        for (std::size_t j = 0; j < m; ++j) {
          for (std::size_t i = 0; i < r; ++i) out.u[i] += cu[j] * us[j][i];
          for (std::size_t i = 0; i < c; ++i) out.v[i] += cv[j] * vs[j][i];
        }
        const double nu = vec_norm(out.u), nv2 = vec_norm(out.v);
        if (nu > 0.0)
          for (auto& z : out.u) z /= nu;
        if (nv2 > 0.0)
          for (auto& z : out.v) z /= nv2;
      }
      return out;
    }
    beta.push_back(bk);
    for (auto& z : g) z /= bk;
    vs.push_back(g);
  }
  // Iteration cap: theta is still a certified lower estimate of sigma_max.
  return out;
}

}  // namespace

std::vector<double> singular_values(const ComplexMatrix& a) {
  return jacobi_svd(a, false, false).values;
}

SvdResult svd(const ComplexMatrix& a, bool want_u, bool want_v) {
  return jacobi_svd(a, want_u, want_v);
}

double top_singular_value(const ComplexMatrix& a) {
  if (std::min(a.rows(), a.cols()) < kGklDenseCutoff) {
    const auto vals = singular_values(a);
    return vals.empty() ? 0.0 : vals[0];
  }
  return gkl_top(a, false).theta;
}

TopTriple top_singular_triple(const ComplexMatrix& a) {
  TopTriple out;
  if (std::min(a.rows(), a.cols()) < kGklDenseCutoff) {
    const SvdResult full = svd(a, true, true);
    out.sigma = full.values.empty() ? 0.0 : full.values[0];
    out.converged = full.converged;
    out.u.resize(a.rows());
    out.v.resize(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) out.u[i] = full.u(i, 0);
    for (std::size_t i = 0; i < a.cols(); ++i) out.v[i] = full.v(i, 0);
    return out;
  }
  GklResult g = gkl_top(a, true);
  out.sigma = g.theta;
  out.converged = g.converged;
  out.u = std::move(g.u);
  out.v = std::move(g.v);
  return out;
}

double hermitian_eigen_max(const ComplexMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("hermitian_eigen_max requires a square matrix");
  const double shift = m.frobenius_norm();
  if (shift == 0.0) return 0.0;
  ComplexMatrix shifted = m;
  for (std::size_t i = 0; i < m.rows(); ++i) shifted(i, i) += shift;
  return top_singular_value(shifted) - shift;
}

double hermitian_eigen_min(const ComplexMatrix& m) {
  ComplexMatrix neg = m;
  neg *= Complex(-1.0, 0.0);
  return -hermitian_eigen_max(neg);
}

SvdResult psd_eigen(const ComplexMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("psd_eigen requires a square matrix");
  // Symmetrize to remove accumulation roundoff before diagonalizing.
  ComplexMatrix h(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return svd(h, false, true);
}

EigenPair hermitian_top_eigenpair(const ComplexMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("hermitian_top_eigenpair requires square input");
  const double shift = m.frobenius_norm() + 1.0;
  ComplexMatrix shifted = m;
  for (std::size_t i = 0; i < m.rows(); ++i) shifted(i, i) += shift;
  TopTriple t = top_singular_triple(shifted);
  EigenPair out;
  out.value = t.sigma - shift;
  out.vector = std::move(t.v);
  return out;
}

}  // namespace ncm
