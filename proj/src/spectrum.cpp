#include <algorithm>
#include <cmath>

#include "fovkit/matcore.hpp"

namespace fov {

namespace {

// eigenvalues of [[a, b],[c, d]]
std::pair<cplx, cplx> eig2(cplx a, cplx b, cplx c, cplx d) {
  const cplx half_tr = 0.5 * (a + d);
  const cplx disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
  return {half_tr + disc, half_tr - disc};
}

void hessenberg(ComplexMatrix& h) {
  const int n = h.n();
  for (int k = 0; k < n - 2; ++k) {
    double colnorm = 0.0;
    for (int i = k + 1; i < n; ++i) colnorm += std::norm(h.at(i, k));
    colnorm = std::sqrt(colnorm);
    if (colnorm <= 0.0) continue;
    const cplx x0 = h.at(k + 1, k);
    const double x0a = std::abs(x0);
    const cplx phase = x0a > 0.0 ? x0 / x0a : cplx{1.0, 0.0};
    const cplx alpha = -phase * colnorm;
    CVec v(n, cplx{0.0, 0.0});
    v[k + 1] = x0 - alpha;
    for (int i = k + 2; i < n; ++i) v[i] = h.at(i, k);
    double vn = 0.0;
    for (int i = k + 1; i < n; ++i) vn += std::norm(v[i]);
    if (vn <= 0.0) continue;
    vn = std::sqrt(vn);
    for (int i = k + 1; i < n; ++i) v[i] /= vn;
    // H <- (I - 2vv*) H (I - 2vv*)
    for (int j = 0; j < n; ++j) {
      cplx s = 0.0;
      for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * h.at(i, j);
      s *= 2.0;
      for (int i = k + 1; i < n; ++i) h.at(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h.at(i, j) * v[j];
      s *= 2.0;
      for (int j = k + 1; j < n; ++j) h.at(i, j) -= s * std::conj(v[j]);
    }
  }
}

}  // namespace

std::vector<cplx> spectrum(const ComplexMatrix& a) {
  const int n = a.n();
  std::vector<cplx> eigs;
  eigs.reserve(n);
  if (n == 1) {
    eigs.push_back(a.at(0, 0));
    return eigs;
  }

  ComplexMatrix h = a;
  hessenberg(h);
  const double scale = std::max(h.frobenius(), 1e-300);
  const double eps = 2.220446049250313e-16;

  int m = n - 1;
  int iter = 0;
  int total = 0;
  while (m >= 0) {
    if (++total > 200 * n)
      throw Error(ErrorCode::NonConvergence, "eigenvalue iteration stalled");
    // deflate negligible subdiagonals
    for (int i = 0; i < m; ++i) {
      const double bound = eps * (std::abs(h.at(i, i)) + std::abs(h.at(i + 1, i + 1)));
      if (std::abs(h.at(i + 1, i)) <= std::max(bound, 1e-300 * scale))
        h.at(i + 1, i) = 0.0;
    }
    if (m == 0) {
      eigs.push_back(h.at(0, 0));
      break;
    }
    if (h.at(m, m - 1) == cplx{0.0, 0.0}) {
      eigs.push_back(h.at(m, m));
      --m;
      iter = 0;
      continue;
    }
    if (m == 1 || h.at(m - 1, m - 2) == cplx{0.0, 0.0}) {
      const auto [l1, l2] = eig2(h.at(m - 1, m - 1), h.at(m - 1, m), h.at(m, m - 1), h.at(m, m));
      eigs.push_back(l1);
      eigs.push_back(l2);
      m -= 2;
      iter = 0;
      continue;
    }
    int l = m;
    while (l > 0 && h.at(l, l - 1) != cplx{0.0, 0.0}) --l;

    cplx shift;
    if (iter > 0 && iter % 12 == 0) {
      shift = h.at(m, m) + 0.9 * std::abs(h.at(m, m - 1));
    } else {
      const auto [l1, l2] = eig2(h.at(m - 1, m - 1), h.at(m - 1, m), h.at(m, m - 1), h.at(m, m));
      shift = std::abs(l1 - h.at(m, m)) < std::abs(l2 - h.at(m, m)) ? l1 : l2;
    }
    ++iter;

    // explicit shifted QR sweep on the active block via Givens rotations
    for (int i = l; i <= m; ++i) h.at(i, i) -= shift;
    std::vector<cplx> gc(m), gs(m);
    for (int i = l; i < m; ++i) {
      const cplx x = h.at(i, i);
      const cplx y = h.at(i + 1, i);
      const double r = std::sqrt(std::norm(x) + std::norm(y));
      cplx c{1.0, 0.0}, s{0.0, 0.0};
      if (r > 0.0) {
        c = x / r;
        s = y / r;
      }
      gc[i] = c;
      gs[i] = s;
      for (int j = i; j <= m; ++j) {
        const cplx hi = h.at(i, j);
        const cplx hj = h.at(i + 1, j);
        h.at(i, j) = std::conj(c) * hi + std::conj(s) * hj;
        h.at(i + 1, j) = -s * hi + c * hj;
      }
    }
    for (int i = l; i < m; ++i) {
      const cplx c = gc[i];
      const cplx s = gs[i];
      for (int r2 = l; r2 <= std::min(i + 1, m); ++r2) {
        const cplx hi = h.at(r2, i);
        const cplx hj = h.at(r2, i + 1);
        h.at(r2, i) = c * hi + s * hj;
        h.at(r2, i + 1) = -std::conj(s) * hi + std::conj(c) * hj;
      }
    }
    for (int i = l; i <= m; ++i) h.at(i, i) += shift;
  }

  std::sort(eigs.begin(), eigs.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return eigs;
}

}  // namespace fov
