#include <algorithm>
#include <cmath>
#include <numeric>

#include "fovkit/matcore.hpp"

namespace fov {

namespace {

double offdiag_norm(const std::vector<cplx>& m, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += std::norm(m[static_cast<size_t>(i) * n + j]);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition hermitian_eig_raw(std::vector<cplx> m, int n, const Tolerances& tol) {
  if (n < 1 || m.size() != static_cast<size_t>(n) * n)
    throw Error(ErrorCode::DimensionMismatch, "bad raw eigensolver input");
  auto at = [&m, n](int i, int j) -> cplx& { return m[static_cast<size_t>(i) * n + j]; };
  // symmetrize against rounding; the diagonal must be real for the sweeps
  for (int i = 0; i < n; ++i) {
    at(i, i) = cplx{at(i, i).real(), 0.0};
    for (int j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (at(i, j) + std::conj(at(j, i)));
      at(i, j) = avg;
      at(j, i) = std::conj(avg);
    }
  }
  std::vector<cplx> v(static_cast<size_t>(n) * n, cplx{0.0, 0.0});
  auto vat = [&v, n](int i, int j) -> cplx& { return v[static_cast<size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) vat(i, i) = 1.0;

  double scale = 0.0;
  for (const auto& z : m) scale += std::norm(z);
  scale = std::sqrt(scale);

  if (scale > 0.0) {
    bool converged = false;
    for (int sweep = 0; sweep < tol.eig_max_sweeps; ++sweep) {
      if (offdiag_norm(m, n) <= tol.eig_offdiag_rel * scale) {
        converged = true;
        break;
      }
      // fixed row-major pivot order keeps results reproducible
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const cplx apq = at(p, q);
          const double mag = std::abs(apq);
          if (mag <= 1e-18 * scale) continue;
          const cplx omega = apq / mag;
          const double app = at(p, p).real();
          const double aqq = at(q, q).real();
          const double theta = (app - aqq) / (2.0 * mag);
          const double sign = theta >= 0.0 ? 1.0 : -1.0;
          const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const cplx so = s * omega;
          const cplx soc = s * std::conj(omega);
          // U = [[c, -s w],[s conj(w), c]] on coordinates (p, q); M <- U* M U
          for (int j = 0; j < n; ++j) {
            const cplx mp = at(p, j);
            const cplx mq = at(q, j);
            at(p, j) = c * mp + so * mq;
            at(q, j) = -soc * mp + c * mq;
          }
          for (int i = 0; i < n; ++i) {
            const cplx mp = at(i, p);
            const cplx mq = at(i, q);
            at(i, p) = c * mp + soc * mq;
            at(i, q) = -so * mp + c * mq;
            const cplx vp = vat(i, p);
            const cplx vq = vat(i, q);
            vat(i, p) = c * vp + soc * vq;
            vat(i, q) = -so * vp + c * vq;
          }
          at(p, q) = 0.0;
          at(q, p) = 0.0;
        }
      }
    }
    if (!converged && offdiag_norm(m, n) > tol.eig_offdiag_rel * scale)
      throw Error(ErrorCode::NonConvergence, "Jacobi sweeps exhausted");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = at(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return diag[a] > diag[b]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    CVec col(n);
    for (int i = 0; i < n; ++i) col[i] = vat(i, order[k]);
    // canonical phase, same convention as ProjectiveVector
    for (const auto& z : col) {
      const double a = std::abs(z);
      if (a > 1e-13) {
        const cplx phase = std::conj(z) / a;
        for (auto& w : col) w *= phase;
        break;
      }
    }
    out.vectors[k] = std::move(col);
  }
  return out;
}

EigenDecomposition hermitian_eig(const HermitianMatrix& hm, const Tolerances& tol) {
  const int n = hm.n();
  std::vector<cplx> data(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) data[static_cast<size_t>(i) * n + j] = hm.mat().at(i, j);
  return hermitian_eig_raw(std::move(data), n, tol);
}

}  // namespace fov
