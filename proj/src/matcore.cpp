#include "fovkit/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fov {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::PointNotOnBoundary: return "PointNotOnBoundary";
    case ErrorCode::PointNotOnSupportLine: return "PointNotOnSupportLine";
    case ErrorCode::DegenerateCut: return "DegenerateCut";
    case ErrorCode::CollinearGenerators: return "CollinearGenerators";
    case ErrorCode::TargetOutsideRange: return "TargetOutsideRange";
    case ErrorCode::RankDeficit: return "RankDeficit";
    case ErrorCode::WitnessNotFound: return "WitnessNotFound";
    case ErrorCode::ArcNotOnBoundary: return "ArcNotOnBoundary";
    case ErrorCode::NoReduction: return "NoReduction";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// ---- vector helpers -----------------------------------------------------

double vec_norm(const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

cplx vec_dot(const CVec& x, const CVec& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "vector sizes differ");
  cplx s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

CVec vec_scale(const CVec& v, cplx s) {
  CVec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i] * s;
  return r;
}

CVec vec_add(const CVec& x, const CVec& y) {
  CVec r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

CVec vec_sub(const CVec& x, const CVec& y) {
  CVec r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

// ---- ComplexMatrix ------------------------------------------------------

namespace {

void check_order(int n) {
  if (n < 1 || n > kMaxOrder)
    throw Error(ErrorCode::InvalidArgument,
                "matrix order " + std::to_string(n) + " outside 1.." + std::to_string(kMaxOrder));
}

}  // namespace

ComplexMatrix::ComplexMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, cplx{0.0, 0.0}) {
  check_order(n);
}

ComplexMatrix::ComplexMatrix(int n, std::vector<cplx> entries) : n_(n), a_(std::move(entries)) {
  check_order(n);
  if (a_.size() != static_cast<size_t>(n) * n)
    throw Error(ErrorCode::DimensionMismatch, "entry count does not match order");
  check_entries();
}

void ComplexMatrix::check_entries() const {
  for (const auto& z : a_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(ErrorCode::NonFiniteEntry, "matrix entry is not finite");
}

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::from_rows(const std::vector<std::vector<cplx>>& rows) {
  const int n = static_cast<int>(rows.size());
  check_order(n);
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (rows[i].size() != static_cast<size_t>(n))
      throw Error(ErrorCode::DimensionMismatch, "ragged row in matrix literal");
    for (int j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
  }
  m.check_entries();
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m.at(i, j) = std::conj(at(j, i));
  return m;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& o) const {
  if (n_ != o.n_) throw Error(ErrorCode::DimensionMismatch, "matrix orders differ");
  ComplexMatrix m(n_);
  for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] + o.a_[i];
  return m;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& o) const {
  if (n_ != o.n_) throw Error(ErrorCode::DimensionMismatch, "matrix orders differ");
  ComplexMatrix m(n_);
  for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] - o.a_[i];
  return m;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& o) const {
  if (n_ != o.n_) throw Error(ErrorCode::DimensionMismatch, "matrix orders differ");
  ComplexMatrix m(n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      const cplx aik = at(i, k);
      if (aik == cplx{0.0, 0.0}) continue;
      for (int j = 0; j < n_; ++j) m.at(i, j) += aik * o.at(k, j);
    }
  return m;
}

ComplexMatrix ComplexMatrix::scaled(cplx s) const {
  ComplexMatrix m(n_);
  for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] * s;
  return m;
}

CVec ComplexMatrix::apply(const CVec& x) const {
  if (static_cast<int>(x.size()) != n_)
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match matrix order");
  CVec y(n_, cplx{0.0, 0.0});
  for (int i = 0; i < n_; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < n_; ++j) s += at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

cplx ComplexMatrix::trace() const {
  cplx s = 0.0;
  for (int i = 0; i < n_; ++i) s += at(i, i);
  return s;
}

double ComplexMatrix::frobenius() const {
  double s = 0.0;
  for (const auto& z : a_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : a_) m = std::max(m, std::abs(z));
  return m;
}

// ---- HermitianMatrix ----------------------------------------------------

HermitianMatrix::HermitianMatrix(ComplexMatrix m, double rel_tol) : m_(std::move(m)) {
  const double defect = (m_ - m_.adjoint()).frobenius();
  if (defect > rel_tol * std::max(1.0, m_.frobenius()))
    throw Error(ErrorCode::NotHermitian, "Hermitian defect " + std::to_string(defect));
}

// ---- ProjectiveVector ---------------------------------------------------

ProjectiveVector::ProjectiveVector(CVec rep) : v_(std::move(rep)) {
  const double nrm = vec_norm(v_);
  if (!(nrm > 1e-300)) throw Error(ErrorCode::ZeroVector, "cannot projectivize the zero vector");
  for (auto& z : v_) z /= nrm;
  // canonical phase: first coordinate above the noise floor made real positive
  for (const auto& z : v_) {
    const double m = std::abs(z);
    if (m > 1e-13) {
      const cplx phase = std::conj(z) / m;
      for (auto& w : v_) w *= phase;
      break;
    }
  }
}

// ---- operations ---------------------------------------------------------

std::pair<HermitianMatrix, HermitianMatrix> cartesian_decompose(const ComplexMatrix& a) {
  const ComplexMatrix adj = a.adjoint();
  const ComplexMatrix h = (a + adj).scaled(0.5);
  const ComplexMatrix k = (a - adj).scaled(cplx{0.0, -0.5});
  return {HermitianMatrix(h), HermitianMatrix(k)};
}

cplx fov_value(const ComplexMatrix& a, const CVec& x) {
  return vec_dot(x, a.apply(x));
}

cplx fov_value(const ComplexMatrix& a, const ProjectiveVector& x) {
  return fov_value(a, x.rep());
}

ComplexMatrix compress(const ComplexMatrix& a, const std::vector<CVec>& basis,
                       const Tolerances& tol) {
  const int k = static_cast<int>(basis.size());
  if (k < 1) throw Error(ErrorCode::EmptySet, "empty compression basis");
  for (const auto& v : basis)
    if (static_cast<int>(v.size()) != a.n())
      throw Error(ErrorCode::DimensionMismatch, "basis vector length does not match matrix order");
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const cplx g = vec_dot(basis[i], basis[j]);
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(g - want) > tol.orthonormal)
        throw Error(ErrorCode::NonOrthonormalBasis, "compression basis is not orthonormal");
    }
  ComplexMatrix b(k);
  std::vector<CVec> av(k);
  for (int j = 0; j < k; ++j) av[j] = a.apply(basis[j]);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) b.at(i, j) = vec_dot(basis[i], av[j]);
  return b;
}

ComplexMatrix compress(const ComplexMatrix& a, const std::vector<ProjectiveVector>& basis,
                       const Tolerances& tol) {
  std::vector<CVec> cols;
  cols.reserve(basis.size());
  for (const auto& v : basis) cols.push_back(v.rep());
  return compress(a, cols, tol);
}

double projective_distance(const CVec& x, const CVec& y) {
  const double c = std::min(1.0, std::abs(vec_dot(x, y)));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * c * c));
}

double projective_distance(const ProjectiveVector& x, const ProjectiveVector& y) {
  return projective_distance(x.rep(), y.rep());
}

std::vector<double> singular_values_of_set(const std::vector<ProjectiveVector>& xs) {
  const int m = static_cast<int>(xs.size());
  if (m < 1) throw Error(ErrorCode::EmptySet, "empty vector set");
  const int n = xs[0].n();
  for (const auto& x : xs)
    if (x.n() != n) throw Error(ErrorCode::DimensionMismatch, "mixed vector lengths in set");
  // Gram matrix of the smaller side; singular values are square roots of its
  // eigenvalues.
  const int g = std::min(n, m);
  ComplexMatrix gram(g);
  if (m <= n) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) gram.at(i, j) = vec_dot(xs[i].rep(), xs[j].rep());
  } else {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        cplx s = 0.0;
        for (int t = 0; t < m; ++t) s += xs[t].rep()[r] * std::conj(xs[t].rep()[c]);
        gram.at(r, c) = s;
      }
  }
  // symmetrize against rounding before the Hermitian gate
  ComplexMatrix sym = (gram + gram.adjoint()).scaled(0.5);
  EigenDecomposition eig = hermitian_eig(HermitianMatrix(sym));
  std::vector<double> sv;
  sv.reserve(eig.values.size());
  for (double v : eig.values) sv.push_back(std::sqrt(std::max(0.0, v)));
  return sv;
}

int rank_of_set(const std::vector<ProjectiveVector>& xs, double tol) {
  const std::vector<double> sv = singular_values_of_set(xs);
  const double top = sv.empty() ? 0.0 : sv[0];
  if (top <= 0.0) return 0;
  int r = 0;
  for (double s : sv)
    if (s > tol * top) ++r;
  return r;
}

// ---- serialization ------------------------------------------------------

std::string matrix_to_json(const ComplexMatrix& a) {
  nlohmann::json j;
  j["n"] = a.n();
  std::vector<std::vector<double>> re(a.n(), std::vector<double>(a.n()));
  std::vector<std::vector<double>> im(a.n(), std::vector<double>(a.n()));
  for (int i = 0; i < a.n(); ++i)
    for (int c = 0; c < a.n(); ++c) {
      re[i][c] = a.at(i, c).real();
      im[i][c] = a.at(i, c).imag();
    }
  j["re"] = re;
  j["im"] = im;
  return j.dump(2);
}

ComplexMatrix matrix_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::IoError, std::string("bad matrix JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("re") || !j.contains("im"))
    throw Error(ErrorCode::IoError, "matrix JSON requires fields n, re, im");
  const int n = j["n"].get<int>();
  check_order(n);
  const auto& re = j["re"];
  const auto& im = j["im"];
  if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
    throw Error(ErrorCode::IoError, "matrix JSON row count does not match n");
  ComplexMatrix a(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(re[i].size()) != n || static_cast<int>(im[i].size()) != n)
      throw Error(ErrorCode::IoError, "matrix JSON column count does not match n");
    for (int c = 0; c < n; ++c)
      a.at(i, c) = cplx{re[i][c].get<double>(), im[i][c].get<double>()};
  }
  // re-run the finiteness gate on external input
  return ComplexMatrix(n, std::vector<cplx>(&a.at(0, 0), &a.at(0, 0) + n * n));
}

ComplexMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return matrix_from_json(ss.str());
}

void save_matrix_file(const ComplexMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << matrix_to_json(a) << "\n";
}

}  // namespace fov
