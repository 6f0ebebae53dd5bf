#pragma once

namespace fov {

// Numeric knobs used across the library. All fields are defaults chosen for
// dense matrices of order <= 16 at unit-ish scale; the CLI may override a
// subset from a JSON config file.
struct Tolerances {
  // matrix predicates
  double hermitian_rel = 1e-12;   // |M - M*|_F <= hermitian_rel * max(1, |M|_F)
  double unit_norm = 1e-14;
  double orthonormal = 1e-12;

  // Hermitian eigensolver (cyclic Jacobi)
  double eig_offdiag_rel = 1e-14;
  int eig_max_sweeps = 100;

  // boundary tracing
  double multiplicity_rel = 1e-8;  // top-eigenspace grouping, relative to max(1, |lambda|)
  double support_line = 1e-8;
  double membership = 1e-8;
  double corner_theta = 1e-6;      // minimum normal-angle interval for a corner
  double corner_generator = 1e-6;
  double flat_min_length = 1e-6;
  double turning_angle = 0.05;     // radians; refine where the polyline turns faster
  int base_samples = 720;
  int max_samples = 20000;

  // fibers
  double boundary_guard = 1e-9;    // line cuts refuse targets this close to the boundary
  double cluster = 1e-6;
  double rank = 1e-6;
  double fiber_residual = 1e-10;   // scaled by max(1, |A|_F)
  double fiber_accept = 1e-13;     // solver acceptance gate, scaled the same way
  int gauss_newton_iters = 50;

  // continuity probes
  double witness_residual = 1e-8;
  double cap_slack = 1e-9;
  double cap_leave_factor = 1.25;

  // reducibility
  double commutant_rel = 1e-9;
  double commutant_residual = 1e-8;

  double convexoid = 1e-8;
};

}  // namespace fov
