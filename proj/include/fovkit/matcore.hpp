#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "fovkit/errors.hpp"
#include "fovkit/tolerances.hpp"

namespace fov {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr int kMaxOrder = 16;

// ---- small-vector helpers ----------------------------------------------

double vec_norm(const CVec& v);
// Conjugate-linear in the first argument.
cplx vec_dot(const CVec& x, const CVec& y);
CVec vec_scale(const CVec& v, cplx s);
CVec vec_add(const CVec& x, const CVec& y);
CVec vec_sub(const CVec& x, const CVec& y);

// ---- dense complex matrix ----------------------------------------------

// Square complex matrix of order 1..16, entries required finite.
class ComplexMatrix {
public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int n);
  ComplexMatrix(int n, std::vector<cplx> entries);  // row-major

  static ComplexMatrix identity(int n);
  static ComplexMatrix from_rows(const std::vector<std::vector<cplx>>& rows);

  int n() const { return n_; }
  cplx& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const cplx& at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  ComplexMatrix adjoint() const;
  ComplexMatrix operator+(const ComplexMatrix& o) const;
  ComplexMatrix operator-(const ComplexMatrix& o) const;
  ComplexMatrix operator*(const ComplexMatrix& o) const;
  ComplexMatrix scaled(cplx s) const;
  CVec apply(const CVec& x) const;

  cplx trace() const;
  double frobenius() const;
  double max_abs() const;

private:
  int n_ = 0;
  std::vector<cplx> a_;
  void check_entries() const;
};

// Strong type for matrices that passed the Hermitian check.
class HermitianMatrix {
public:
  explicit HermitianMatrix(ComplexMatrix m, double rel_tol = Tolerances{}.hermitian_rel);
  const ComplexMatrix& mat() const { return m_; }
  int n() const { return m_.n(); }

private:
  ComplexMatrix m_;
};

// Unit vector representing a point of complex projective space. The stored
// representative is canonical: first coordinate of magnitude above 1e-13 is
// real and positive.
class ProjectiveVector {
public:
  explicit ProjectiveVector(CVec rep);
  const CVec& rep() const { return v_; }
  int n() const { return static_cast<int>(v_.size()); }

private:
  CVec v_;
};

struct EigenDecomposition {
  std::vector<double> values;     // descending
  std::vector<CVec> vectors;      // orthonormal, same order as values
};

// ---- operations ---------------------------------------------------------

// A = H + iK with H, K Hermitian; reconstruction is exact to rounding.
std::pair<HermitianMatrix, HermitianMatrix> cartesian_decompose(const ComplexMatrix& a);

// Cyclic Jacobi with fixed row-major sweep order. Throws NonConvergence when
// the off-diagonal mass has not dropped below eig_offdiag_rel * |M|_F after
// eig_max_sweeps sweeps.
EigenDecomposition hermitian_eig(const HermitianMatrix& m, const Tolerances& tol = {});

// Same solver on raw row-major Hermitian data with no order cap; needed for
// the n^2-sized Gram systems in the commutant solve. Caller guarantees the
// data is Hermitian (it is symmetrized against rounding internally).
EigenDecomposition hermitian_eig_raw(std::vector<cplx> data, int n, const Tolerances& tol = {});

cplx fov_value(const ComplexMatrix& a, const ProjectiveVector& x);
cplx fov_value(const ComplexMatrix& a, const CVec& x);

// B = V* A V for an orthonormal basis list V.
ComplexMatrix compress(const ComplexMatrix& a, const std::vector<ProjectiveVector>& basis,
                       const Tolerances& tol = {});
ComplexMatrix compress(const ComplexMatrix& a, const std::vector<CVec>& basis,
                       const Tolerances& tol = {});

// Frobenius distance of the rank-one projectors, sqrt(2 - 2|<x,y>|^2).
double projective_distance(const ProjectiveVector& x, const ProjectiveVector& y);
double projective_distance(const CVec& x, const CVec& y);

// Singular values (descending) of the matrix whose columns are the given
// representatives; rank counts values above tol * largest.
std::vector<double> singular_values_of_set(const std::vector<ProjectiveVector>& xs);
int rank_of_set(const std::vector<ProjectiveVector>& xs, double tol);

// Eigenvalues of a general square matrix, sorted by descending real part then
// descending imaginary part. Values only, order <= 16; used by the boundary
// classifiers, not exposed as a general-purpose solver.
std::vector<cplx> spectrum(const ComplexMatrix& a);

// ---- serialization ------------------------------------------------------

// Format: {"n": int, "re": [[...]], "im": [[...]]}, row-major.
std::string matrix_to_json(const ComplexMatrix& a);
ComplexMatrix matrix_from_json(const std::string& text);
ComplexMatrix load_matrix_file(const std::string& path);
void save_matrix_file(const ComplexMatrix& a, const std::string& path);

}  // namespace fov
