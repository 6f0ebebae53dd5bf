#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "fovkit/errors.hpp"
#include "fovkit/matcore.hpp"
#include "fovkit/reducibility.hpp"
#include "fovkit/rng.hpp"
#include "../oracles.hpp"

#include <json.hpp>

using fov::CommutantBasis;
using fov::ComplexMatrix;
using fov::cplx;
using fov::CVec;

namespace {

ComplexMatrix irreducible4x4(double k1, double k2, double r) {
  ComplexMatrix a(4);
  a.at(2, 2) = 1.0;
  a.at(3, 3) = 1.0;
  auto addk = [&](int i, int j, double v) {
    a.at(i, j) += cplx{0.0, v};
    a.at(j, i) += cplx{0.0, v};
  };
  addk(0, 2, k1);
  addk(1, 3, k2);
  addk(2, 3, r);
  return a;
}

// H = diag(0,0,0,1,1,1), K = [[0, K1], [K1, R]] with K1 = diag(2,2,1),
// R = [[1,0,1],[0,0,1],[1,1,0]]
ComplexMatrix coupled6x6() {
  ComplexMatrix a(6);
  for (int i = 3; i < 6; ++i) a.at(i, i) = 1.0;
  const double k1[3] = {2.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    a.at(i, 3 + i) += cplx{0.0, k1[i]};
    a.at(3 + i, i) += cplx{0.0, k1[i]};
  }
  const double r[3][3] = {{1, 0, 1}, {0, 0, 1}, {1, 1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a.at(3 + i, 3 + j) += cplx{0.0, r[i][j]};
  return a;
}

ComplexMatrix direct_sum(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix s(a.n() + b.n());
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) s.at(i, j) = a.at(i, j);
  for (int i = 0; i < b.n(); ++i)
    for (int j = 0; j < b.n(); ++j) s.at(a.n() + i, a.n() + j) = b.at(i, j);
  return s;
}

double commutation_residual(const ComplexMatrix& x, const ComplexMatrix& a) {
  return (x * a - a * x).frobenius() + (x * a.adjoint() - a.adjoint() * x).frobenius();
}

}  // namespace

TEST_SUITE_BEGIN("reducibility");

TEST_CASE("scalar matrices commute with everything") {
  ComplexMatrix a = ComplexMatrix::identity(2).scaled(cplx{1.5, -0.5});
  const CommutantBasis cb = fov::commutant_dimension(a);
  CHECK(cb.dimension == 4);
  for (const auto& x : cb.basis) {
    CHECK(std::abs(x.frobenius() - 1.0) <= 1e-12);
    CHECK(commutation_residual(x, a) <= 1e-8 * std::max(1.0, a.frobenius()));
  }
}

TEST_CASE("distinct diagonal has a diagonal commutant") {
  ComplexMatrix a(2);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = 2.0;
  const CommutantBasis cb = fov::commutant_dimension(a);
  CHECK(cb.dimension == 2);
  // every basis element must itself be diagonal
  for (const auto& x : cb.basis) {
    CHECK(std::abs(x.at(0, 1)) <= 1e-10);
    CHECK(std::abs(x.at(1, 0)) <= 1e-10);
  }
}

TEST_CASE("coupled four dimensional instance is irreducible") {
  const ComplexMatrix a = irreducible4x4(2.0, 1.0, 1.0);
  const CommutantBasis cb = fov::commutant_dimension(a);
  CHECK(cb.dimension == 1);
  CHECK(fov::is_unitarily_irreducible(a));
  CHECK_THROWS_AS(fov::invariant_projection(a, cb), fov::Error);
}

TEST_CASE("coupled six dimensional instance is irreducible") {
  const ComplexMatrix a = coupled6x6();
  CHECK(fov::commutant_dimension(a).dimension == 1);
  CHECK(fov::is_unitarily_irreducible(a));
}

TEST_CASE("upper triangular two by two is irreducible") {
  ComplexMatrix a(2);
  a.at(0, 0) = 1.0;
  a.at(0, 1) = 1.0;
  a.at(1, 1) = 2.0;
  CHECK(fov::is_unitarily_irreducible(a));
}

TEST_CASE("direct sums are reducible and the projector splits the blocks") {
  ComplexMatrix a1(2);
  a1.at(0, 1) = 2.0;
  ComplexMatrix a2(1);
  a2.at(0, 0) = 1.0;
  const ComplexMatrix a = direct_sum(a1, a2);

  const CommutantBasis cb = fov::commutant_dimension(a);
  CHECK(cb.dimension >= 2);
  CHECK_FALSE(fov::is_unitarily_irreducible(a));
  for (const auto& x : cb.basis)
    CHECK(commutation_residual(x, a) <= 1e-8 * std::max(1.0, a.frobenius()));

  const ComplexMatrix p = fov::invariant_projection(a, cb);
  CHECK((p - p.adjoint()).frobenius() <= 1e-9);
  CHECK((p * p - p).frobenius() <= 1e-9);
  CHECK((p * a - a * p).frobenius() <= 1e-6 * a.frobenius());
  // reconstruction through the split
  const ComplexMatrix q = ComplexMatrix::identity(3) - p;
  const ComplexMatrix rebuilt = p * a * p + q * a * q;
  CHECK((a - rebuilt).frobenius() <= 1e-6 * a.frobenius());
  // the split must align with the block structure: no coupling of e3 to e1,e2
  CHECK(std::abs(p.at(0, 2)) <= 1e-6);
  CHECK(std::abs(p.at(1, 2)) <= 1e-6);
  const double tr = std::real(p.trace());
  CHECK(tr > 0.5);
  CHECK(tr < 2.5);
}

TEST_CASE("normal matrices split along eigenprojections") {
  ComplexMatrix d(2);
  d.at(1, 1) = 5.0;
  const CommutantBasis cb = fov::commutant_dimension(d);
  CHECK(cb.dimension == 2);
  const ComplexMatrix p = fov::invariant_projection(d, cb);
  CHECK(std::abs(std::real(p.trace()) - 1.0) <= 1e-9);
  CHECK((p * d - d * p).frobenius() <= 1e-8);

  fov::Rng rng(2024);
  const std::vector<cplx> eigs = {cplx{0.0, 0.0}, cplx{1.0, 0.5}, cplx{-0.5, 1.0},
                                  cplx{2.0, -1.0}};
  const ComplexMatrix nm = oracle::normal_with_eigs(eigs, rng);
  const CommutantBasis cbn = fov::commutant_dimension(nm);
  CHECK(cbn.dimension == 4);
  const ComplexMatrix pn = fov::invariant_projection(nm, cbn);
  CHECK((pn * pn - pn).frobenius() <= 1e-8);
  CHECK((pn * nm - nm * pn).frobenius() <= 1e-6 * nm.frobenius());
  const double trn = std::real(pn.trace());
  CHECK(trn > 0.5);
  CHECK(trn < 3.5);
}

TEST_CASE("commutant dimension is a unitary invariant") {
  fov::Rng rng(515);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    ComplexMatrix a = trial % 4 == 0
                          ? direct_sum(oracle::random_matrix(n - 1, rng), oracle::random_matrix(1, rng))
                          : oracle::random_matrix(n, rng);
    const ComplexMatrix u = oracle::random_unitary(n, rng);
    const ComplexMatrix conj = u.adjoint() * a * u;
    CHECK(fov::commutant_dimension(a).dimension == fov::commutant_dimension(conj).dimension);
  }
}

TEST_CASE("block sums add commutant dimensions") {
  fov::Rng rng(616);
  for (int trial = 0; trial < 8; ++trial) {
    const ComplexMatrix a1 = oracle::random_matrix(2, rng);
    const ComplexMatrix a2 = oracle::random_matrix(2 + trial % 2, rng);
    const int d1 = fov::commutant_dimension(a1).dimension;
    const int d2 = fov::commutant_dimension(a2).dimension;
    const int ds = fov::commutant_dimension(direct_sum(a1, a2)).dimension;
    CHECK(ds >= d1 + d2);
  }
}

TEST_CASE("reducibility json") {
  ComplexMatrix a1(2);
  a1.at(0, 1) = 2.0;
  ComplexMatrix a2(1);
  a2.at(0, 0) = 1.0;
  const nlohmann::json jr =
      nlohmann::json::parse(fov::reducibility_json(direct_sum(a1, a2)));
  CHECK(jr.at("dimension").get<int>() >= 2);
  CHECK(jr.at("irreducible").get<bool>() == false);
  CHECK(jr.contains("projector"));
  CHECK(jr.at("projector").at("n").get<int>() == 3);

  const nlohmann::json ji =
      nlohmann::json::parse(fov::reducibility_json(irreducible4x4(2.0, 1.0, 1.0)));
  CHECK(ji.at("dimension").get<int>() == 1);
  CHECK(ji.at("irreducible").get<bool>() == true);
  CHECK_FALSE(ji.contains("projector"));
}

TEST_SUITE_END();
