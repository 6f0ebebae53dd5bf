#pragma once

#include <string>
#include <vector>

#include "fovkit/matcore.hpp"

namespace fov {

// Basis of {X : XA = AX, XA* = A*X}. dimension == 1 means the commutant is
// trivial (scalars only), i.e. A is unitarily irreducible.
struct CommutantBasis {
  int dimension = 0;
  std::vector<ComplexMatrix> basis;  // unit Frobenius norm each
};

CommutantBasis commutant_dimension(const ComplexMatrix& a, const Tolerances& tol = {});

bool is_unitarily_irreducible(const ComplexMatrix& a, const Tolerances& tol = {});

// Orthogonal projector P with 0 < rank < n commuting with A and A*, built
// from a non-scalar Hermitian commutant element; P and I-P split A into a
// direct sum in the eigenbasis of that element. Throws NoReduction when the
// commutant is trivial.
ComplexMatrix invariant_projection(const ComplexMatrix& a, const CommutantBasis& cb,
                                   const Tolerances& tol = {});

// {"dimension", "irreducible", "projector"?} - projector present iff reducible.
std::string reducibility_json(const ComplexMatrix& a, const Tolerances& tol = {});

}  // namespace fov
