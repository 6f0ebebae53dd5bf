#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fovkit/matcore.hpp"

namespace fov {

// Support data of F(A) at one angle: the largest eigenvalue of
// H(theta) = (e^{-i theta} A + e^{i theta} A*)/2, its eigenspace, and the
// boundary point(s) realized on the support line. A multiple top eigenvalue
// produces a segment; its endpoints come from the extreme eigenvalues of the
// skew part of the compression onto the eigenspace.
struct SupportPoint {
  double theta = 0.0;
  double lambda_max = 0.0;
  int multiplicity = 1;
  std::vector<ProjectiveVector> generators;        // top eigenspace basis
  std::vector<cplx> points;                        // increasing offset along the line
  std::vector<ProjectiveVector> point_generators;  // unit vectors realizing each point
  std::optional<std::pair<cplx, cplx>> segment;    // present when multiplicity >= 2
};

struct FlatSegment {
  double theta;  // outward normal angle
  cplx p_lo;     // smaller offset t = Im(e^{-i theta} p) first
  cplx p_hi;
  ProjectiveVector gen_lo;
  ProjectiveVector gen_hi;
  double length() const { return std::abs(p_hi - p_lo); }
};

struct CornerPoint {
  cplx z;
  double theta_lo;  // normal cone [theta_lo, theta_hi]; theta_hi > 2*pi when wrapping
  double theta_hi;
  ProjectiveVector generator;
};

struct PolyVertex {
  cplx p;
  double theta;  // angle of the sample that produced this vertex
};

struct BoundaryCurve {
  ComplexMatrix a;                   // matrix the curve belongs to
  std::vector<SupportPoint> samples; // sorted by theta
  std::vector<PolyVertex> polyline;  // CCW, closed implicitly (last connects to first)
  std::vector<FlatSegment> flats;    // sorted by theta
  std::vector<CornerPoint> corners;
  double scale = 1.0;                // max(1, |A|_F)
  bool degenerate = false;           // empty interior: F(A) is a point or a segment
  cplx degen_lo, degen_hi;           // extreme points when degenerate
};

enum class Region { Interior, Boundary, Exterior };

struct MembershipResult {
  Region region;
  double signed_distance;  // negative inside
};

enum class PointKind { Corner, FlatInterior, Round };
enum class SideKind { Segment, Arc };

// One-sided neighborhood flags are ordered along the CCW traversal: incoming
// is the side the walk arrives from, outgoing the side it leaves by.
struct BoundaryClass {
  PointKind kind;
  SideKind incoming;
  SideKind outgoing;
};

struct TraceOptions {
  int base_samples = 720;
  bool adaptive = true;
};

SupportPoint support_data(const ComplexMatrix& a, double theta, const Tolerances& tol = {});

BoundaryCurve trace_boundary(const ComplexMatrix& a, const TraceOptions& opt = {},
                             const Tolerances& tol = {});

MembershipResult membership(const BoundaryCurve& curve, cplx z, const Tolerances& tol = {});

// Throws PointNotOnBoundary when membership(z) is not Boundary.
BoundaryClass classify_point(const BoundaryCurve& curve, cplx z, const Tolerances& tol = {});

// True when every support value is explained by the spectrum, i.e. F(A) is
// the convex hull of the eigenvalues within tol.
bool is_convexoid(const ComplexMatrix& a, double tol = 1e-8);

bool is_normal(const ComplexMatrix& a);

double perimeter(const BoundaryCurve& curve);

// Boundary point at the prescribed real part on the upper (or lower) arc,
// located by bisection on the support angle. Throws InvalidArgument when
// alpha is outside the real extent of F(A).
PolyVertex boundary_at_real(const BoundaryCurve& curve, double alpha, bool upper,
                            const Tolerances& tol = {});

// Walk the boundary from a point by the given arc length (CCW when ccw is
// true) and snap the landing spot back onto the true curve through its
// support angle.
PolyVertex walk_boundary(const BoundaryCurve& curve, cplx from, double arc_length, bool ccw,
                         const Tolerances& tol = {});

// One row per computed boundary value: theta, re, im, multiplicity, class.
std::string boundary_csv(const BoundaryCurve& curve, const Tolerances& tol = {});
// Flats, corners, degeneracy and extent in one JSON object.
std::string boundary_summary_json(const BoundaryCurve& curve);

}  // namespace fov
