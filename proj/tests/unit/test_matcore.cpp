#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fovkit/matcore.hpp"
#include "fovkit/rng.hpp"
#include "oracles.hpp"

using namespace fov;

namespace {

const double kSqrt2 = std::sqrt(2.0);

ComplexMatrix shift_matrix_2x2() {
  return ComplexMatrix::from_rows({{cplx{0, 0}, cplx{2, 0}}, {cplx{0, 0}, cplx{0, 0}}});
}

}  // namespace

TEST_SUITE_BEGIN("matcore");

TEST_CASE("vector helpers") {
  CVec x{cplx{1, 0}, cplx{0, 1}};
  CVec y{cplx{0, 0}, cplx{2, 0}};
  CHECK(vec_norm(x) == doctest::Approx(kSqrt2).epsilon(1e-14));
  // conjugate-linear in the first argument
  CHECK(vec_dot(x, y) == cplx{0, -2});
  CHECK(vec_norm(vec_sub(vec_add(x, y), y)) == doctest::Approx(vec_norm(x)));
}

TEST_CASE("matrix construction rejects bad input") {
  CHECK_THROWS_AS(ComplexMatrix(0), Error);
  CHECK_THROWS_AS(ComplexMatrix(17), Error);
  CHECK_THROWS_AS(ComplexMatrix(2, {cplx{1, 0}}), Error);
  std::vector<cplx> bad(4, cplx{0, 0});
  bad[2] = cplx{std::nan(""), 0};
  CHECK_THROWS_AS(ComplexMatrix(2, bad), Error);
}

TEST_CASE("hermitian gate") {
  const ComplexMatrix shifted = shift_matrix_2x2();
  CHECK_THROWS_AS(HermitianMatrix{shifted}, Error);
  ComplexMatrix h = ComplexMatrix::from_rows({{cplx{1, 0}, cplx{0, -1}}, {cplx{0, 1}, cplx{2, 0}}});
  CHECK_NOTHROW(HermitianMatrix{h});
}

TEST_CASE("cartesian decomposition of the shift matrix") {
  const auto [h, k] = cartesian_decompose(shift_matrix_2x2());
  CHECK(h.mat().at(0, 1) == cplx{1, 0});
  CHECK(h.mat().at(1, 0) == cplx{1, 0});
  CHECK(k.mat().at(0, 1) == cplx{0, -1});
  CHECK(k.mat().at(1, 0) == cplx{0, 1});
  // H + iK reconstructs A
  const ComplexMatrix back = h.mat() + k.mat().scaled(cplx{0, 1});
  CHECK((back - shift_matrix_2x2()).frobenius() <= 1e-14);
}

TEST_CASE("reconstruction holds for random matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);
    const ComplexMatrix a = oracle::random_matrix(n, rng);
    const auto [h, k] = cartesian_decompose(a);
    const ComplexMatrix back = h.mat() + k.mat().scaled(cplx{0, 1});
    CHECK((back - a).frobenius() <= 1e-14 * std::max(1.0, a.frobenius()));
  }
}

TEST_CASE("jacobi matches the quadratic formula on 2x2") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix m = oracle::random_hermitian(2, rng);
    const auto eig = hermitian_eig(HermitianMatrix(m));
    const auto [l1, l2] = oracle::eig2x2(m.at(0, 0), m.at(0, 1), m.at(1, 0), m.at(1, 1));
    const double hi = std::max(l1.real(), l2.real());
    const double lo = std::min(l1.real(), l2.real());
    CHECK(eig.values[0] == doctest::Approx(hi).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("jacobi recovers planted spectra") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 15);
    std::vector<double> planted(n);
    for (auto& v : planted) v = 3.0 * rng.gaussian();
    std::sort(planted.rbegin(), planted.rend());
    std::vector<cplx> as_cplx(planted.begin(), planted.end());
    const ComplexMatrix m = oracle::normal_with_eigs(as_cplx, rng);
    const ComplexMatrix sym = (m + m.adjoint()).scaled(0.5);
    const auto eig = hermitian_eig(HermitianMatrix(sym));
    const double scale = sym.frobenius();
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(eig.values[i] - planted[i]) <= 1e-11 * std::max(1.0, scale));
  }
}

TEST_CASE("jacobi residual and orthonormality bounds") {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 15);
    const ComplexMatrix m = oracle::random_hermitian(n, rng);
    const auto eig = hermitian_eig(HermitianMatrix(m));
    const double scale = m.frobenius();
    for (int k = 0; k < n; ++k) {
      const CVec mv = m.apply(eig.vectors[k]);
      const CVec lv = vec_scale(eig.vectors[k], eig.values[k]);
      CHECK(vec_norm(vec_sub(mv, lv)) <= 1e-11 * std::max(1.0, scale));
      for (int j = 0; j <= k; ++j) {
        const cplx g = vec_dot(eig.vectors[j], eig.vectors[k]);
        const double want = j == k ? 1.0 : 0.0;
        CHECK(std::abs(g - cplx{want, 0}) <= 1e-11);
      }
    }
    // descending order
    for (int k = 0; k + 1 < n; ++k) CHECK(eig.values[k] >= eig.values[k + 1]);
  }
}

TEST_CASE("jacobi handles the zero matrix and repeated eigenvalues") {
  const auto eig0 = hermitian_eig(HermitianMatrix(ComplexMatrix(3)));
  for (double v : eig0.values) CHECK(v == 0.0);

  Rng rng(55);
  const ComplexMatrix m = oracle::normal_with_eigs({cplx{2, 0}, cplx{2, 0}, cplx{-1, 0}}, rng);
  const ComplexMatrix sym = (m + m.adjoint()).scaled(0.5);
  const auto eig = hermitian_eig(HermitianMatrix(sym));
  CHECK(eig.values[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eig.values[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("jacobi is deterministic") {
  Rng rng(66);
  const ComplexMatrix m = oracle::random_hermitian(5, rng);
  const auto a = hermitian_eig(HermitianMatrix(m));
  const auto b = hermitian_eig(HermitianMatrix(m));
  for (int i = 0; i < 5; ++i) {
    CHECK(a.values[i] == b.values[i]);
    for (int r = 0; r < 5; ++r) CHECK(a.vectors[i][r] == b.vectors[i][r]);
  }
}

TEST_CASE("general spectrum on planted normal and triangular matrices") {
  Rng rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);
    std::vector<cplx> planted(n);
    for (auto& v : planted) v = 2.0 * rng.cgaussian();
    const ComplexMatrix m = oracle::normal_with_eigs(planted, rng);
    auto got = spectrum(m);
    std::sort(planted.begin(), planted.end(), [](cplx a, cplx b) {
      if (a.real() != b.real()) return a.real() > b.real();
      return a.imag() > b.imag();
    });
    // match by greedy nearest pairing; spectra are well separated here
    for (int i = 0; i < n; ++i) {
      double best = 1e9;
      for (const auto& g : got) best = std::min(best, std::abs(g - planted[i]));
      CHECK(best <= 1e-9 * std::max(1.0, m.frobenius()));
    }
  }

  // upper triangular: eigenvalues are the diagonal
  ComplexMatrix t(3);
  t.at(0, 0) = cplx{3, 1};
  t.at(0, 1) = cplx{5, -2};
  t.at(0, 2) = cplx{1, 1};
  t.at(1, 1) = cplx{-2, 0.5};
  t.at(1, 2) = cplx{4, 0};
  t.at(2, 2) = cplx{0, -1};
  const auto got = spectrum(t);
  for (const cplx want : {cplx{3, 1}, cplx{-2, 0.5}, cplx{0, -1}}) {
    double best = 1e9;
    for (const auto& g : got) best = std::min(best, std::abs(g - want));
    CHECK(best <= 1e-10);
  }
}

TEST_CASE("fov_value on frozen examples") {
  const ComplexMatrix disk = shift_matrix_2x2();
  const ProjectiveVector x(CVec{cplx{1, 0}, cplx{1, 0}});
  CHECK(std::abs(fov_value(disk, x) - cplx{1, 0}) <= 1e-14);

  ComplexMatrix a3(3);
  a3.at(0, 1) = cplx{2, 0};
  a3.at(2, 2) = cplx{1, 0};
  const ProjectiveVector e3(CVec{cplx{0, 0}, cplx{0, 0}, cplx{1, 0}});
  CHECK(std::abs(fov_value(a3, e3) - cplx{1, 0}) <= 1e-15);
}

TEST_CASE("compress") {
  ComplexMatrix a3(3);
  a3.at(0, 1) = cplx{2, 0};
  a3.at(2, 2) = cplx{1, 0};
  const std::vector<ProjectiveVector> basis{
      ProjectiveVector(CVec{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}}),
      ProjectiveVector(CVec{cplx{0, 0}, cplx{1, 0}, cplx{0, 0}})};
  const ComplexMatrix b = compress(a3, basis);
  CHECK(b.n() == 2);
  CHECK((b - shift_matrix_2x2()).frobenius() <= 1e-14);

  const std::vector<ProjectiveVector> slanted{
      ProjectiveVector(CVec{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}}),
      ProjectiveVector(CVec{cplx{1, 0}, cplx{1, 0}, cplx{0, 0}})};
  CHECK_THROWS_AS(compress(a3, slanted), Error);
}

TEST_CASE("compression stays inside the numerical range") {
  // support values of the compression never exceed those of the parent
  Rng rng(88);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = oracle::random_matrix(4, rng);
    const ComplexMatrix u = oracle::random_unitary(4, rng);
    std::vector<CVec> basis;
    for (int j = 0; j < 2; ++j) {
      CVec col(4);
      for (int i = 0; i < 4; ++i) col[i] = u.at(i, j);
      basis.push_back(col);
    }
    const ComplexMatrix b = compress(a, basis);
    for (int s = 0; s < 16; ++s) {
      const double theta = 2.0 * M_PI * s / 16;
      const cplx w = std::polar(1.0, -theta);
      const ComplexMatrix ha = (a.scaled(w) + a.scaled(w).adjoint()).scaled(0.5);
      const ComplexMatrix hb = (b.scaled(w) + b.scaled(w).adjoint()).scaled(0.5);
      const double la = hermitian_eig(HermitianMatrix(ha)).values[0];
      const double lb = hermitian_eig(HermitianMatrix(hb)).values[0];
      CHECK(lb <= la + 1e-10);
    }
  }
}

TEST_CASE("projective distance") {
  const ProjectiveVector e1(CVec{cplx{1, 0}, cplx{0, 0}});
  const ProjectiveVector e2(CVec{cplx{0, 0}, cplx{1, 0}});
  const ProjectiveVector mix(CVec{cplx{1, 0}, cplx{1, 0}});
  CHECK(projective_distance(e1, e2) == doctest::Approx(kSqrt2).epsilon(1e-15));
  CHECK(projective_distance(e1, mix) == doctest::Approx(1.0).epsilon(1e-14));
  // phase invariance
  const ProjectiveVector spun(CVec{cplx{0, 0}, std::polar(1.0, 2.2)});
  CHECK(projective_distance(e2, spun) <= 1e-14);
  CHECK(projective_distance(e1, e1) == 0.0);
}

TEST_CASE("canonical representative") {
  const ProjectiveVector v(CVec{cplx{0, 0}, std::polar(2.0, 1.3), std::polar(1.0, -0.4)});
  CHECK(std::abs(v.rep()[0]) <= 1e-15);
  CHECK(v.rep()[1].imag() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.rep()[1].real() > 0.0);
  CHECK(vec_norm(v.rep()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(ProjectiveVector(CVec{cplx{0, 0}, cplx{0, 0}}), Error);
}

TEST_CASE("rank of a vector set") {
  const ProjectiveVector e1(CVec{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}});
  const ProjectiveVector e2(CVec{cplx{0, 0}, cplx{1, 0}, cplx{0, 0}});
  const ProjectiveVector mix(CVec{cplx{1, 0}, cplx{1, 0}, cplx{0, 0}});
  CHECK(rank_of_set({e1, e2, mix}, 1e-6) == 2);
  CHECK(rank_of_set({e1}, 1e-6) == 1);
  const ProjectiveVector e3(CVec{cplx{0, 0}, cplx{0, 0}, cplx{1, 0}});
  CHECK(rank_of_set({e1, e2, e3}, 1e-6) == 3);
  // more vectors than the dimension
  CHECK(rank_of_set({e1, e2, e3, mix, mix}, 1e-6) == 3);
  CHECK_THROWS_AS(rank_of_set({}, 1e-6), Error);
}

TEST_CASE("singular values of a near-degenerate set") {
  const ProjectiveVector e1(CVec{cplx{1, 0}, cplx{0, 0}});
  const ProjectiveVector close(CVec{cplx{1, 0}, cplx{1e-8, 0}});
  const auto sv = singular_values_of_set({e1, close});
  REQUIRE(sv.size() == 2);
  CHECK(sv[0] == doctest::Approx(kSqrt2).epsilon(1e-7));
  CHECK(sv[1] <= 1e-7);
}

TEST_CASE("frozen small eigenproblems") {
  const auto d = hermitian_eig(HermitianMatrix(
      ComplexMatrix::from_rows({{cplx{3, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{1, 0}}})));
  CHECK(d.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(d.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(d.vectors[0][0] - cplx{1, 0}) <= 1e-14);
  CHECK(std::abs(d.vectors[1][1] - cplx{1, 0}) <= 1e-14);

  const auto f = hermitian_eig(HermitianMatrix(
      ComplexMatrix::from_rows({{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}})));
  CHECK(f.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.values[1] == doctest::Approx(-1.0).epsilon(1e-14));

  const auto g = hermitian_eig(HermitianMatrix(
      ComplexMatrix::from_rows({{cplx{2, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{2, 0}}})));
  CHECK(g.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(g.values[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigenvalue sum equals the trace") {
  Rng rng(111);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 15);
    const ComplexMatrix m = oracle::random_hermitian(n, rng);
    const auto eig = hermitian_eig(HermitianMatrix(m));
    const double sum = std::accumulate(eig.values.begin(), eig.values.end(), 0.0);
    CHECK(std::abs(sum - m.trace().real()) <= 1e-10 * std::max(1.0, m.frobenius()));
  }
}

TEST_CASE("raw eigensolver handles orders beyond the matrix cap") {
  // 36x36 diag + rank structure, the size the commutant solve needs
  const int n = 36;
  std::vector<cplx> data(static_cast<size_t>(n) * n, cplx{0, 0});
  for (int i = 0; i < n; ++i) data[static_cast<size_t>(i) * n + i] = cplx{double(i), 0};
  for (int i = 0; i + 1 < n; ++i) {
    data[static_cast<size_t>(i) * n + i + 1] = cplx{0.5, 0.25};
    data[static_cast<size_t>(i + 1) * n + i] = cplx{0.5, -0.25};
  }
  const auto eig = hermitian_eig_raw(data, n);
  double sum = std::accumulate(eig.values.begin(), eig.values.end(), 0.0);
  CHECK(sum == doctest::Approx(n * (n - 1) / 2.0).epsilon(1e-12));
  for (int k = 0; k + 1 < n; ++k) CHECK(eig.values[k] >= eig.values[k + 1]);
  // spot-check one residual
  CVec x = eig.vectors[0];
  CVec mx(n, cplx{0, 0});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mx[i] += data[static_cast<size_t>(i) * n + j] * x[j];
  CHECK(vec_norm(vec_sub(mx, vec_scale(x, eig.values[0]))) <= 1e-10 * n);
}

TEST_CASE("projective distance obeys the triangle inequality") {
  Rng rng(222);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    CVec a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.cgaussian();
      b[i] = rng.cgaussian();
      c[i] = rng.cgaussian();
    }
    const ProjectiveVector x(a), y(b), z(c);
    CHECK(projective_distance(x, z) <=
          projective_distance(x, y) + projective_distance(y, z) + 1e-12);
  }
}

TEST_CASE("fov_value is phase invariant and unitary equivariant") {
  Rng rng(333);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    const ComplexMatrix a = oracle::random_matrix(n, rng);
    CVec raw(n);
    for (auto& z : raw) z = rng.cgaussian();
    const double nrm = vec_norm(raw);
    for (auto& z : raw) z /= nrm;
    const cplx base = fov_value(a, raw);
    const cplx spun = fov_value(a, vec_scale(raw, std::polar(1.0, 1.7)));
    CHECK(std::abs(base - spun) <= 1e-13 * std::max(1.0, a.frobenius()));

    const ComplexMatrix u = oracle::random_unitary(n, rng);
    const ComplexMatrix conj = u.adjoint() * a * u;
    const CVec ux = u.adjoint().apply(raw);
    CHECK(std::abs(fov_value(conj, ux) - base) <= 1e-12 * std::max(1.0, a.frobenius()));
  }
}

TEST_CASE("compress frozen examples") {
  ComplexMatrix d(3);
  d.at(1, 1) = cplx{1, 0};
  d.at(2, 2) = cplx{5, 0};
  std::vector<CVec> first_two{{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}},
                              {cplx{0, 0}, cplx{1, 0}, cplx{0, 0}}};
  const ComplexMatrix b = compress(d, first_two);
  CHECK(b.at(0, 0) == cplx{0, 0});
  CHECK(b.at(1, 1) == cplx{1, 0});
  CHECK(b.at(0, 1) == cplx{0, 0});

  std::vector<CVec> full;
  for (int j = 0; j < 3; ++j) {
    CVec e(3, cplx{0, 0});
    e[j] = 1.0;
    full.push_back(e);
  }
  CHECK((compress(d, full) - d).frobenius() <= 1e-15);
}

TEST_CASE("matrix json round trip") {
  Rng rng(99);
  const ComplexMatrix a = oracle::random_matrix(3, rng);
  const ComplexMatrix back = matrix_from_json(matrix_to_json(a));
  CHECK((back - a).frobenius() == 0.0);
  CHECK_THROWS_AS(matrix_from_json("{\"n\": 2}"), Error);
  CHECK_THROWS_AS(matrix_from_json("not json"), Error);
}

TEST_SUITE_END();
