#pragma once

#include <string>
#include <vector>

#include "fovkit/boundary.hpp"
#include "fovkit/matcore.hpp"

namespace fov {

// Preimages of one target under f_A, clustered projectively. Members keep
// insertion order; each cluster lists member indices and is represented by
// its first member.
struct FiberSample {
  cplx target;
  std::vector<ProjectiveVector> members;
  std::vector<double> residuals;         // |f_A(x) - target| per member
  std::vector<std::vector<int>> clusters;
  int rank = 0;

  std::vector<ProjectiveVector> representatives() const;
};

// Chord of the range through an interior point: the two boundary hits of the
// line z + t e^{i phi} with their generating vectors.
struct LineCut {
  double phi = 0.0;
  cplx z_plus;   // hit in the +e^{i phi} direction
  cplx z_minus;  // hit in the opposite direction
  ProjectiveVector gen_plus;
  ProjectiveVector gen_minus;
};

// Generator(s) of a point on the support line at angle theta. Multiplicity
// one gives the unique generator; on a segment the returned vector solves the
// compression sub-problem at exactly the requested point.
std::vector<ProjectiveVector> boundary_preimage(const ComplexMatrix& a, double theta,
                                                cplx point, const Tolerances& tol = {});

// Throws DegenerateCut when z sits within the boundary guard of the curve,
// InvalidArgument when z is not interior.
LineCut line_cut(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z, double phi,
                 const Tolerances& tol = {});

// Deterministic 2x2 inverse: coarse grid over x = [cos t, e^{i phi} sin t]
// followed by damped Newton. Throws TargetOutsideRange when z is not in the
// ellipse of b.
ProjectiveVector solve_2x2(const ComplexMatrix& b, cplx z, const Tolerances& tol = {});

// Compress-and-lift along one chord direction. Throws CollinearGenerators
// when the cut generators coincide projectively (caller perturbs phi).
ProjectiveVector interior_preimage(const ComplexMatrix& a, const BoundaryCurve& curve,
                                   cplx z, double phi, const Tolerances& tol = {});

// n linearly independent preimages of an interior point; sweeps cut
// directions and unitary reshuffles until the member set has full rank.
// Throws RankDeficit (with the achieved rank) when the attempt budget runs
// out first.
FiberSample fiber_basis(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                        const Tolerances& tol = {});

// Brute-force fiber oracle: seeded sphere starts refined by Gauss-Newton,
// converged points clustered. Deterministic given the seed; empty when z is
// outside the range.
FiberSample fiber_sample(const ComplexMatrix& a, cplx z, int budget, std::uint64_t seed,
                         const Tolerances& tol = {});

std::string fiber_json(const FiberSample& sample);

namespace detail {

// Sphere-constrained Gauss-Newton for f_A(x) = z in the real tangent chart
// at the iterate, with step halving. When cap_anchor is set, any iterate
// leaving the cap aborts the start (the probe rejection rule).
struct SolveOptions {
  const CVec* cap_anchor = nullptr;
  double cap_radius = 0.0;        // projective distance bound when anchored
  double accept = -1.0;           // override: absolute residual gate
};

struct SolveResult {
  CVec x;
  double residual = 0.0;
  bool converged = false;
  bool left_cap = false;
};

SolveResult refine_on_sphere(const ComplexMatrix& a, cplx z, CVec start,
                             const SolveOptions& opt, const Tolerances& tol = {});

}  // namespace detail

}  // namespace fov
