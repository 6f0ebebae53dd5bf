#include "fovkit/reducibility.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "fovkit/errors.hpp"

#include <json.hpp>

namespace fov {

namespace {

// rows of the constraint "XM - MX = 0" appended to sys; X is vectorized
// row-major, x_{ij} -> column i*n + j
void append_commutation_rows(std::vector<std::vector<cplx>>& sys, const ComplexMatrix& m) {
  const int n = m.n();
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      std::vector<cplx> row(static_cast<size_t>(n) * n, cplx{0.0, 0.0});
      for (int j = 0; j < n; ++j) row[static_cast<size_t>(p) * n + j] += m.at(j, q);
      for (int i = 0; i < n; ++i) row[static_cast<size_t>(i) * n + q] -= m.at(p, i);
      sys.push_back(std::move(row));
    }
  }
}

bool is_scalar_multiple_of_identity(const ComplexMatrix& y, double rel) {
  const int n = y.n();
  cplx mean{0.0, 0.0};
  for (int i = 0; i < n; ++i) mean += y.at(i, i);
  mean /= static_cast<double>(n);
  double off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx d = y.at(i, j) - (i == j ? mean : cplx{0.0, 0.0});
      off += std::norm(d);
    }
  return std::sqrt(off) <= rel * std::max(1.0, y.frobenius());
}

}  // namespace

CommutantBasis commutant_dimension(const ComplexMatrix& a, const Tolerances& tol) {
  const int n = a.n();
  const int nn = n * n;

  std::vector<std::vector<cplx>> sys;
  sys.reserve(static_cast<size_t>(2) * nn);
  append_commutation_rows(sys, a);
  append_commutation_rows(sys, a.adjoint());

  // Gram = M* M; its eigenvalues are squared singular values of the stack
  std::vector<cplx> gram(static_cast<size_t>(nn) * nn, cplx{0.0, 0.0});
  for (const auto& row : sys)
    for (int c1 = 0; c1 < nn; ++c1) {
      if (std::abs(row[c1]) == 0.0) continue;
      const cplx rc1 = std::conj(row[c1]);
      for (int c2 = 0; c2 < nn; ++c2)
        gram[static_cast<size_t>(c1) * nn + c2] += rc1 * row[c2];
    }

  const EigenDecomposition eig = hermitian_eig_raw(std::move(gram), nn, tol);
  const double smax = std::sqrt(std::max(0.0, eig.values.front()));
  const double cut = tol.commutant_rel * smax;

  // the Gram squares the conditioning, so its sigma estimates bottom out near
  // sqrt(eps)*smax; screen candidates there, then decide by the directly
  // computed constraint residual which is accurate to rounding
  const double screen = std::max(cut, 1e-6 * smax);
  const ComplexMatrix aa = a.adjoint();

  CommutantBasis cb;
  for (int k = nn - 1; k >= 0; --k) {
    const double sigma = std::sqrt(std::max(0.0, eig.values[k]));
    if (sigma > screen) break;
    ComplexMatrix x(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x.at(i, j) = eig.vectors[k][static_cast<size_t>(i) * n + j];
    const double f = x.frobenius();
    if (f > 0.0) x = x.scaled(cplx{1.0 / f, 0.0});
    const double r1 = (x * a - a * x).frobenius();
    const double r2 = (x * aa - aa * x).frobenius();
    if (std::sqrt(r1 * r1 + r2 * r2) > cut) continue;
    cb.basis.push_back(std::move(x));
  }
  cb.dimension = static_cast<int>(cb.basis.size());
  return cb;
}

bool is_unitarily_irreducible(const ComplexMatrix& a, const Tolerances& tol) {
  return commutant_dimension(a, tol).dimension == 1;
}

ComplexMatrix invariant_projection(const ComplexMatrix& a, const CommutantBasis& cb,
                                   const Tolerances& tol) {
  if (cb.dimension <= 1)
    throw Error(ErrorCode::NoReduction, "commutant is trivial: no reducing subspace");
  const int n = a.n();
  const double a_scale = std::max(1.0, a.frobenius());

  for (const ComplexMatrix& x : cb.basis) {
    // the commutant is *-closed, so one of the Hermitian parts of a
    // non-scalar element is itself non-scalar
    const ComplexMatrix cand[2] = {x + x.adjoint(), (x - x.adjoint()).scaled(cplx{0.0, 1.0})};
    for (const ComplexMatrix& y : cand) {
      if (is_scalar_multiple_of_identity(y, 1e-8)) continue;
      const EigenDecomposition eig = hermitian_eig(HermitianMatrix(y, 1e-6), tol);
      int split = 0;
      double best_gap = -1.0;
      for (int k = 0; k + 1 < n; ++k) {
        const double gap = eig.values[k] - eig.values[k + 1];
        if (gap > best_gap) {
          best_gap = gap;
          split = k + 1;
        }
      }
      if (split <= 0 || split >= n) continue;
      ComplexMatrix p(n);
      for (int k = 0; k < split; ++k) {
        const CVec& v = eig.vectors[k];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) p.at(i, j) += v[i] * std::conj(v[j]);
      }
      // sanity: P must commute with A or the element was too close to scalar
      const ComplexMatrix comm = p * a - a * p;
      if (comm.frobenius() <= 1e-6 * a_scale) return p;
    }
  }
  throw Error(ErrorCode::NoReduction, "no usable non-scalar commutant element found");
}

std::string reducibility_json(const ComplexMatrix& a, const Tolerances& tol) {
  const CommutantBasis cb = commutant_dimension(a, tol);
  nlohmann::json j;
  j["dimension"] = cb.dimension;
  j["irreducible"] = cb.dimension == 1;
  if (cb.dimension > 1) {
    const ComplexMatrix p = invariant_projection(a, cb, tol);
    const int n = p.n();
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      nlohmann::json rrow = nlohmann::json::array(), irow = nlohmann::json::array();
      for (int jj = 0; jj < n; ++jj) {
        rrow.push_back(std::real(p.at(i, jj)));
        irow.push_back(std::imag(p.at(i, jj)));
      }
      re.push_back(std::move(rrow));
      im.push_back(std::move(irow));
    }
    j["projector"] = {{"n", n}, {"re", std::move(re)}, {"im", std::move(im)}};
  }
  return j.dump(2);
}

}  // namespace fov
