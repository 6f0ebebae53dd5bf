#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fovkit/boundary.hpp"
#include "fovkit/fiber.hpp"
#include "fovkit/matcore.hpp"

namespace fov {

// Certificate that values between f(x) and f(y) are attained arbitrarily
// close to x: v lies in span{x,y}, within cap_radius of x in the projector
// metric, and f(v) interpolates with weight delta toward f(y).
struct ScalingWitness {
  ProjectiveVector v;
  double delta = 0.0;       // interpolation weight, eps^2/8
  double cap_radius = 0.0;  // allowed ||vv* - xx*||_F, eps/2
  double residual = 0.0;    // |f(v) - (delta f(y) + (1-delta) f(x))|
};

ScalingWitness scaling_witness(const ComplexMatrix& a, const ProjectiveVector& x,
                               const ProjectiveVector& y, double eps,
                               const Tolerances& tol = {});

struct ProbeTarget {
  cplx w;
  std::string label;          // arc_ccw / arc_cw / chord_mid / ring / center
  bool reached = false;
  bool solvable = true;       // an unconstrained solve reaches it (checked when unreached)
  double best_residual = 0.0; // best |f(v) - w| over in-cap starts
  double witness_gap = -1.0;  // min projective distance from the representative to an
                              // exhibited preimage of w; -1 when not computed
};

struct EpsBlock {
  double eps = 0.0;
  double rho = 0.0;  // target disc radius, eps^2/8
  std::vector<ProbeTarget> targets;
  bool all_reached = false;
};

struct RepresentativeRecord {
  ProjectiveVector x;
  bool refuted = false;  // at every eps, some solvable boundary target stays unreached
                         // with its whole exhibited fiber beyond the largest tested cap
  std::vector<EpsBlock> blocks;
};

enum class ProbeMode { Strong, Weak };
enum class Verdict { EvidencePass, Refuted };

struct ContinuityReport {
  cplx z;
  ProbeMode mode = ProbeMode::Strong;
  Verdict verdict = Verdict::EvidencePass;
  std::vector<RepresentativeRecord> representatives;
  std::optional<ProjectiveVector> witness;  // weak mode: first passing representative
  std::vector<std::string> notes;
};

struct ProbeSpec {
  std::vector<double> eps_grid = {0.3, 0.1, 0.03, 0.01};
  std::vector<ProjectiveVector> representatives;  // empty: derive from the fiber
  int rep_budget = 2000;  // fiber_sample budget when deriving representatives
  int max_representatives = 6;
  int starts_per_target = 12;
  std::uint64_t seed = 0x5EEDBA5E;
};

ContinuityReport probe_strong(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                              const ProbeSpec& spec = {}, const Tolerances& tol = {});
ContinuityReport probe_weak(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                            const ProbeSpec& spec = {}, const Tolerances& tol = {});

std::string continuity_report_json(const ContinuityReport& report);

struct ArcSpec {
  std::string label = "arc";
  double orientation = 1.0;  // +1 walks counterclockwise from z, -1 clockwise
  int k_begin = 3;           // samples at arc length 2^-k * perimeter
  int k_end = 13;
};

struct ArcSample {
  cplx zeta;
  double arc_length = 0.0;
  double min_distance = 0.0;  // over fiber members at zeta, to the candidate
};

// How fibers along a one-sided boundary arc approaching z stay away from a
// named fiber point of z, with the coordinate structure that forces it.
struct SeparationCertificate {
  std::string arc;
  std::vector<int> coordinate_pattern;  // indices with |x_j| <= 1e-6 on every arc fiber
  std::string sign_pattern;             // per index: 0 zero, + nonneg, - nonpos, * free
  double distance_bound = 0.0;          // infimum of min_distance over the samples
  std::vector<ArcSample> samples;
};

SeparationCertificate separation_certificate(const ComplexMatrix& a, const BoundaryCurve& curve,
                                             cplx z, const ArcSpec& arc,
                                             const ProjectiveVector& candidate,
                                             const Tolerances& tol = {});

std::string separation_csv(const SeparationCertificate& cert);

struct ContinuityPrediction {
  std::string verdict;  // "strong" or "unresolved - probe"
  std::vector<std::string> rule_chain;
};

ContinuityPrediction predict_continuity(const ComplexMatrix& a, const BoundaryCurve& curve,
                                        cplx z, const Tolerances& tol = {});

}  // namespace fov
