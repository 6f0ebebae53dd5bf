#include "fovkit/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "fovkit/errors.hpp"
#include "fovkit/reducibility.hpp"
#include "fovkit/rng.hpp"

#include <json.hpp>

namespace fov {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- scaling witness ----------------------------------------------------

struct SpanProblem {
  CVec u1, u2;
  cplx b11, b12, b21, b22;
  bool collinear = false;
};

SpanProblem span_setup(const ComplexMatrix& a, const CVec& x, const CVec& y) {
  SpanProblem sp;
  sp.u1 = x;
  const cplx overlap = vec_dot(x, y);
  CVec w = vec_sub(y, vec_scale(x, overlap));
  const double nw = vec_norm(w);
  if (nw <= 1e-13) {
    sp.collinear = true;
    return sp;
  }
  sp.u2 = vec_scale(w, cplx{1.0 / nw, 0.0});
  const CVec au1 = a.apply(sp.u1);
  const CVec au2 = a.apply(sp.u2);
  sp.b11 = vec_dot(sp.u1, au1);
  sp.b12 = vec_dot(sp.u1, au2);
  sp.b21 = vec_dot(sp.u2, au1);
  sp.b22 = vec_dot(sp.u2, au2);
  return sp;
}

cplx span_value(const SpanProblem& sp, double t, double psi) {
  const double c = std::cos(t), s = std::sin(t);
  const cplx ph = std::polar(1.0, psi);
  return c * c * sp.b11 + c * s * (ph * sp.b12 + std::conj(ph) * sp.b21) + s * s * sp.b22;
}

// d/dt and d/dpsi of span_value
void span_grad(const SpanProblem& sp, double t, double psi, cplx& gt, cplx& gp) {
  const double c = std::cos(t), s = std::sin(t);
  const cplx ph = std::polar(1.0, psi);
  const cplx mixed = ph * sp.b12 + std::conj(ph) * sp.b21;
  gt = -2.0 * c * s * sp.b11 + (c * c - s * s) * mixed + 2.0 * c * s * sp.b22;
  gp = c * s * cplx{0.0, 1.0} * (ph * sp.b12 - std::conj(ph) * sp.b21);
}

// 2-parameter Newton toward span_value = target, t clamped into [0, t_max]
std::pair<double, double> span_newton(const SpanProblem& sp, cplx target, double t0, double psi0,
                                      double t_max, int iters) {
  double t = t0, psi = psi0;
  double best_t = t, best_psi = psi;
  double best_r = std::abs(span_value(sp, t, psi) - target);
  for (int it = 0; it < iters; ++it) {
    const cplx r = span_value(sp, t, psi) - target;
    const double rn = std::abs(r);
    if (rn < best_r) {
      best_r = rn;
      best_t = t;
      best_psi = psi;
    }
    if (rn <= 1e-16) break;
    cplx gt, gp;
    span_grad(sp, t, psi, gt, gp);
    const double j11 = std::real(gt), j12 = std::real(gp);
    const double j21 = std::imag(gt), j22 = std::imag(gp);
    const double det = j11 * j22 - j12 * j21;
    double dt, dpsi;
    if (std::abs(det) > 1e-18) {
      dt = -(j22 * std::real(r) - j12 * std::imag(r)) / det;
      dpsi = -(-j21 * std::real(r) + j11 * std::imag(r)) / det;
    } else {
      // gradient descent on |r|^2
      dt = -(j11 * std::real(r) + j21 * std::imag(r));
      dpsi = -(j12 * std::real(r) + j22 * std::imag(r));
      const double g = std::hypot(dt, dpsi);
      if (g <= 1e-18) break;
      dt /= g;
      dpsi /= g;
      const double step = std::min(0.1, rn);
      dt *= step;
      dpsi *= step;
    }
    double damp = 1.0;
    bool moved = false;
    for (int h = 0; h < 25; ++h) {
      const double tn = std::clamp(t + damp * dt, 0.0, t_max);
      const double pn = psi + damp * dpsi;
      if (std::abs(span_value(sp, tn, pn) - target) < rn) {
        t = tn;
        psi = pn;
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) break;
  }
  const double rf = std::abs(span_value(sp, t, psi) - target);
  if (rf < best_r) return {t, psi};
  return {best_t, best_psi};
}

}  // namespace

ScalingWitness scaling_witness(const ComplexMatrix& a, const ProjectiveVector& x,
                               const ProjectiveVector& y, double eps, const Tolerances& tol) {
  if (!(eps > 0.0) || eps > 2.0)
    throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 2]");
  if (static_cast<int>(x.rep().size()) != a.n() || static_cast<int>(y.rep().size()) != a.n())
    throw Error(ErrorCode::DimensionMismatch, "vector size does not match the matrix");

  const double delta = eps * eps / 8.0;
  const double cap = eps / 2.0;
  const cplx fx = fov_value(a, x);
  const cplx fy = fov_value(a, y);
  const cplx target = delta * fy + (1.0 - delta) * fx;
  const double scale = std::max(1.0, a.frobenius());

  const SpanProblem sp = span_setup(a, x.rep(), y.rep());
  if (sp.collinear || projective_distance(x, y) <= 1e-12)
    return ScalingWitness{x, delta, cap, std::abs(fov_value(a, x) - target)};

  const double t_max = std::asin(std::min(1.0, eps / (2.0 * std::sqrt(2.0))));

  // coarse grid, then Newton, then a rim pass when the target sits on the
  // cap boundary, then a zoomed re-grid as a last resort
  double bt = 0.0, bpsi = 0.0;
  double br = std::numeric_limits<double>::infinity();
  auto grid_pass = [&](double tlo, double thi, double plo, double phi, int nt, int np) {
    for (int i = 0; i < nt; ++i) {
      const double t = tlo + (thi - tlo) * i / (nt - 1);
      for (int j = 0; j < np; ++j) {
        const double psi = plo + (phi - plo) * j / np;
        const double r = std::abs(span_value(sp, t, psi) - target);
        if (r < br) {
          br = r;
          bt = t;
          bpsi = psi;
        }
      }
    }
  };
  grid_pass(0.0, t_max, 0.0, kTwoPi, 256, 256);

  auto polish = [&](double t0, double p0) {
    const auto [t1, p1] = span_newton(sp, target, t0, p0, t_max, 60);
    const double r1 = std::abs(span_value(sp, t1, p1) - target);
    if (r1 < br) {
      br = r1;
      bt = t1;
      bpsi = p1;
    }
  };
  polish(bt, bpsi);

  if (br > 1e-12 * scale) {
    // rim: t pinned at t_max, dense psi scan + polish
    double rim_psi = 0.0, rim_r = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4096; ++j) {
      const double psi = kTwoPi * j / 4096;
      const double r = std::abs(span_value(sp, t_max, psi) - target);
      if (r < rim_r) {
        rim_r = r;
        rim_psi = psi;
      }
    }
    polish(t_max, rim_psi);
  }
  if (br > 1e-12 * scale) {
    for (int zoom = 0; zoom < 2 && br > 1e-13 * scale; ++zoom) {
      const double wt = t_max / std::pow(64.0, zoom + 1);
      const double wp = kTwoPi / std::pow(64.0, zoom + 1);
      grid_pass(std::max(0.0, bt - wt), std::min(t_max, bt + wt), bpsi - wp, bpsi + wp, 128, 128);
      polish(bt, bpsi);
    }
  }

  const CVec v = vec_add(vec_scale(sp.u1, cplx{std::cos(bt), 0.0}),
                         vec_scale(sp.u2, std::polar(std::sin(bt), bpsi)));
  ScalingWitness out{ProjectiveVector(v), delta, cap, 0.0};
  out.residual = std::abs(fov_value(a, out.v) - target);
  if (out.residual > tol.witness_residual * scale)
    throw Error(ErrorCode::WitnessNotFound, "span search missed the interpolated value");
  return out;
}

// ---- probes -------------------------------------------------------------

namespace {

// everything known about one probe target, shared across representatives
struct TargetPlan {
  cplx w;
  std::string label;
  bool on_boundary = false;  // nondegenerate boundary point with a known support angle
  bool snapped = false;      // value taken verbatim from a curve sample, angle known exactly
  double theta = 0.0;
  std::vector<CVec> face;  // top eigenspace basis at theta; w is attained on it
  bool solved = false;
  bool solvable = false;
  std::vector<CVec> witnesses;  // exhibited preimages, value within acceptance
  CVec face_lo, face_hi;        // endpoint generators when the face is a segment
  double amp_lo = -1.0, amp_hi = -1.0;  // blend amplitudes of the exhibited preimage
};

// support angle of a point at or near the boundary: the argmax of the support
// margin Re(e^{-i theta} w) - h(theta), seeded at the nearest polyline vertex.
// the margin peaks sharply at the true angle even where a near-degenerate
// eigenvalue makes the attained set ambiguous, which defeats any criterion
// based on distance to the attained points
double nearest_support_theta(const ComplexMatrix& a, const BoundaryCurve& curve, cplx w,
                             const Tolerances& tol) {
  double th0 = 0.0, best = std::numeric_limits<double>::infinity();
  for (const auto& v : curve.polyline) {
    const double d = std::abs(v.p - w);
    if (d < best) {
      best = d;
      th0 = v.theta;
    }
  }
  const auto margin = [&](double th) {
    return std::cos(th) * std::real(w) + std::sin(th) * std::imag(w) -
           support_data(a, th, tol).lambda_max;
  };
  const double span = curve.polyline.size() > 1
                          ? 8.0 * kTwoPi / static_cast<double>(curve.polyline.size())
                          : kTwoPi;
  double lo = th0 - span, hi = th0 + span;
  double th_best = th0, m_best = margin(th0);
  for (int round = 0; round < 6; ++round) {
    const int grid = 32;
    int bj = grid / 2;
    double bm = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= grid; ++j) {
      const double th = lo + (hi - lo) * j / grid;
      const double m = margin(th);
      if (m > bm) {
        bm = m;
        bj = j;
      }
      if (m > m_best) {
        m_best = m;
        th_best = th;
      }
    }
    const double wd = (hi - lo) / grid;
    const double c = lo + wd * bj;
    lo = c - wd;
    hi = c + wd;
  }
  return th_best;
}

std::vector<TargetPlan> build_plans(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                                    double rho, const Tolerances& tol) {
  std::vector<TargetPlan> out;
  const auto add = [&](cplx w, std::string label, const double* theta_hint) {
    TargetPlan t;
    t.w = w;
    t.label = std::move(label);
    if (!curve.degenerate && membership(curve, w, tol).region == Region::Boundary) {
      t.on_boundary = true;
      t.snapped = theta_hint != nullptr;
      t.theta = theta_hint ? *theta_hint : nearest_support_theta(a, curve, w, tol);
      for (const auto& g : support_data(a, t.theta, tol).generators)
        t.face.push_back(g.rep());
    }
    out.push_back(std::move(t));
  };

  add(z, "center", nullptr);
  const MembershipResult mb = membership(curve, z, tol);

  if (mb.region == Region::Boundary && !curve.degenerate) {
    const PolyVertex wp = walk_boundary(curve, z, rho, true, tol);
    const PolyVertex wm = walk_boundary(curve, z, rho, false, tol);
    add(wp.p, "arc_ccw", &wp.theta);
    add(wm.p, "arc_cw", &wm.theta);
    add(0.5 * (wp.p + wm.p), "chord_mid", nullptr);
    const PolyVertex hp = walk_boundary(curve, z, 0.5 * rho, true, tol);
    const PolyVertex hm = walk_boundary(curve, z, 0.5 * rho, false, tol);
    add(hp.p, "arc_ccw_half", &hp.theta);
    add(hm.p, "arc_cw_half", &hm.theta);
  } else if (curve.degenerate) {
    const cplx d = curve.degen_hi - curve.degen_lo;
    const double len = std::abs(d);
    if (len > 0.0) {
      const cplx dir = d / len;
      for (int sgn : {+1, -1}) {
        const cplx c = z + static_cast<double>(sgn) * rho * dir;
        if (membership(curve, c, tol).region != Region::Exterior)
          add(c, sgn > 0 ? "seg_fwd" : "seg_back", nullptr);
      }
    }
  }

  if (!curve.degenerate) {
    for (int j = 0; j < 8; ++j) {
      const cplx c = z + std::polar(rho, kTwoPi * j / 8);
      if (membership(curve, c, tol).signed_distance < -1e-12 * curve.scale)
        add(c, "ring_" + std::to_string(j), nullptr);
    }
  }

  // drop duplicates, first label wins
  std::vector<TargetPlan> dedup;
  for (auto& t : out) {
    bool seen = false;
    for (const auto& k : dedup)
      if (std::abs(k.w - t.w) <= 1e-13 * std::max(1.0, curve.scale)) {
        seen = true;
        break;
      }
    if (!seen) dedup.push_back(std::move(t));
  }
  return dedup;
}

// multistart Gauss-Newton from inside the eps-cap of x; reports whether some
// converged in-cap start matched the value, and the best residual seen
std::pair<bool, double> attempt_target(const ComplexMatrix& a, const CVec& x, cplx w, double eps,
                                       std::uint64_t seed, const ProbeSpec& spec,
                                       const Tolerances& tol) {
  const int n = a.n();
  detail::SolveOptions opt;
  opt.cap_anchor = &x;
  opt.cap_radius = tol.cap_leave_factor * eps;
  const double accept = tol.fiber_accept * std::max(1.0, a.frobenius());
  double best = std::numeric_limits<double>::infinity();
  const double s_max = std::asin(std::min(1.0, eps / std::sqrt(2.0)));

  for (int k = 0; k < spec.starts_per_target; ++k) {
    CVec start = x;
    if (k > 0) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
      CVec eta(n);
      for (auto& e : eta) e = rng.cgaussian();
      const cplx along = vec_dot(x, eta);
      eta = vec_sub(eta, vec_scale(x, along));
      const double ne = vec_norm(eta);
      if (ne <= 1e-14) continue;
      const double s = rng.uniform() * s_max;
      start = vec_add(vec_scale(x, cplx{std::cos(s), 0.0}),
                      vec_scale(eta, cplx{std::sin(s) / ne, 0.0}));
    }
    const detail::SolveResult res = detail::refine_on_sphere(a, w, start, opt, tol);
    if (res.left_cap || !res.converged) continue;
    best = std::min(best, res.residual);
    if (res.residual <= accept &&
        projective_distance(res.x, x) <= eps + tol.cap_slack)
      return {true, res.residual};
  }
  return {false, best};
}

// can the target be hit at all, cap-free? answered constructively: preimages
// with |f(x) - w| below the acceptance threshold are exhibited before an
// unreached target may count against a representative, and the collected
// witnesses then measure how far the fiber of w sits from that representative
void solve_plan(const ComplexMatrix& a, const BoundaryCurve& curve, TargetPlan& t,
                std::uint64_t seed, const Tolerances& tol) {
  if (t.solved) return;
  t.solved = true;
  const int n = a.n();
  const double accept = tol.fiber_accept * std::max(1.0, a.frobenius());
  const MembershipResult mb = membership(curve, t.w, tol);
  if (mb.region == Region::Exterior) return;

  // an exhibited x only counts once |f(x) - w| clears the same acceptance
  // gate the cap-constrained attempts use; constructs land within ~1e-12 of
  // the fiber, so one warm polish reaches the quadratic basin
  const auto try_add = [&](const CVec& x0) {
    if (std::abs(fov_value(a, x0) - t.w) <= accept) {
      t.witnesses.push_back(x0);
      return true;
    }
    const detail::SolveResult pol =
        detail::refine_on_sphere(a, t.w, x0, detail::SolveOptions{}, tol);
    if (pol.residual <= accept) {
      t.witnesses.push_back(pol.x);
      return true;
    }
    return false;
  };

  if (mb.region == Region::Interior) {
    for (double phi : {0.0, 0.9, 2.1}) {
      try {
        try_add(interior_preimage(a, curve, t.w, phi, tol).rep());
      } catch (const Error&) {
      }
    }
  } else {
    // rebuild the fiber at the support angle of w; blind descent stalls in
    // the quadratically flat basin around a boundary fiber
    const double th = t.on_boundary ? t.theta : nearest_support_theta(a, curve, t.w, tol);
    try {
      for (const auto& g : boundary_preimage(a, th, t.w, tol)) try_add(g.rep());
    } catch (const Error&) {
    }

    // a two-dimensional face attains its values on a family of blends; fan
    // the relative phase out so the witnesses cover every nearby branch (the
    // acceptance gate discards phases the face does not actually admit)
    const SupportPoint sp = support_data(a, th, tol);
    if (sp.point_generators.size() >= 2 && !t.witnesses.empty()) {
      const CVec& lo = sp.point_generators.front().rep();
      const CVec& hi = sp.point_generators.back().rep();
      const CVec b0 = t.witnesses.front();
      const cplx al = vec_dot(lo, b0);
      const cplx be = vec_dot(hi, b0);
      t.face_lo = lo;
      t.face_hi = hi;
      t.amp_lo = std::abs(al);
      t.amp_hi = std::abs(be);
      if (std::abs(al) > 1e-9 && std::abs(be) > 1e-9) {
        for (int k = 1; k < 16; ++k) {
          const cplx ph = std::polar(1.0, kTwoPi * k / 16.0);
          CVec x = vec_add(vec_scale(lo, al), vec_scale(hi, be * ph));
          const double nx = vec_norm(x);
          if (nx > 1e-14) try_add(vec_scale(x, cplx{1.0 / nx, 0.0}));
        }
      }
    }

    // second track: near-degenerate angles report a segment whose chord
    // misses points on the true arc sliver, so also follow the plain leading
    // eigenvector, which attains those points
    if (t.witnesses.empty()) {
      const auto top_vec = [&](double ang) {
        std::vector<cplx> h(static_cast<size_t>(n) * n);
        const cplx e{std::cos(ang), -std::sin(ang)};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            h[static_cast<size_t>(i) * n + j] = 0.5 * (e * a.at(i, j) + std::conj(e * a.at(j, i)));
        return hermitian_eig_raw(std::move(h), n, tol).vectors.front();
      };
      const double span = curve.polyline.size() > 1
                              ? 8.0 * kTwoPi / static_cast<double>(curve.polyline.size())
                              : kTwoPi;
      double lo2 = th - span, hi2 = th + span;
      CVec gbest = top_vec(th);
      double qbest = std::abs(fov_value(a, gbest) - t.w);
      for (int round = 0; round < 6; ++round) {
        const int grid = 32;
        int bj = grid / 2;
        double bq = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= grid; ++j) {
          const double ang = lo2 + (hi2 - lo2) * j / grid;
          const CVec g = top_vec(ang);
          const double q = std::abs(fov_value(a, g) - t.w);
          if (q < bq) {
            bq = q;
            bj = j;
          }
          if (q < qbest) {
            qbest = q;
            gbest = g;
          }
        }
        const double wd = (hi2 - lo2) / grid;
        const double c = lo2 + wd * bj;
        lo2 = c - wd;
        hi2 = c + wd;
      }
      try_add(gbest);
    }

    // a value assembled by arithmetic (midpoint, caller input) can sit a hair
    // inside the curve even when classified boundary; the face machinery
    // cannot certify such a value, but a chord cut through it can
    if (!t.snapped && t.witnesses.empty()) {
      for (double phi : {0.0, 0.9, 2.1}) {
        try {
          try_add(interior_preimage(a, curve, t.w, phi, tol).rep());
        } catch (const Error&) {
        }
      }
    }
  }

  // last resort: cap-free multistart
  if (t.witnesses.empty()) {
    detail::SolveOptions opt;
    for (int k = 0; k < 24; ++k) {
      Rng rng(Rng::derive(seed, 7000 + static_cast<std::uint64_t>(k)));
      CVec start(n);
      for (auto& e : start) e = rng.cgaussian();
      const double nrm = vec_norm(start);
      if (nrm <= 1e-14) continue;
      start = vec_scale(start, cplx{1.0 / nrm, 0.0});
      const detail::SolveResult res = detail::refine_on_sphere(a, t.w, start, opt, tol);
      if (res.converged) try_add(res.x);
    }
  }
  t.solvable = !t.witnesses.empty();
}

std::vector<ProjectiveVector> derive_representatives(const ComplexMatrix& a,
                                                     const BoundaryCurve& curve, cplx z,
                                                     const ProbeSpec& spec,
                                                     const Tolerances& tol) {
  const FiberSample fs = fiber_sample(a, z, spec.rep_budget, spec.seed, tol);
  std::vector<ProjectiveVector> reps;
  for (const int idx : [&] {
         std::vector<int> fronts;
         for (const auto& c : fs.clusters)
           if (!c.empty()) fronts.push_back(c.front());
         return fronts;
       }()) {
    const ProjectiveVector& cand = fs.members[idx];
    bool close = false;
    for (const auto& r : reps)
      if (projective_distance(r, cand) < 0.15) {
        close = true;
        break;
      }
    if (!close) reps.push_back(cand);
    if (static_cast<int>(reps.size()) >= spec.max_representatives) break;
  }
  if (reps.empty()) reps.push_back(interior_preimage(a, curve, z, 0.0, tol));
  return reps;
}

ContinuityReport run_probe(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                           const ProbeSpec& spec, const Tolerances& tol, ProbeMode mode) {
  if (membership(curve, z, tol).region == Region::Exterior)
    throw Error(ErrorCode::TargetOutsideRange, "probe point lies outside the range");

  ContinuityReport report;
  report.z = z;
  report.mode = mode;

  std::vector<ProjectiveVector> reps =
      spec.representatives.empty() ? derive_representatives(a, curve, z, spec, tol)
                                   : spec.representatives;

  // a genuine break keeps the whole fiber of some nearby boundary value at a
  // distance from the representative that does not shrink with eps, so the
  // exhibited preimages must all sit beyond the largest tested cap; a fiber
  // that merely drifts (distance falling with eps) drops below this floor at
  // the small caps and never refutes
  const double refute_floor =
      spec.eps_grid.empty()
          ? 0.0
          : *std::max_element(spec.eps_grid.begin(), spec.eps_grid.end());

  // targets and their witnesses are representative independent; plan once
  std::vector<std::vector<TargetPlan>> plans;
  plans.reserve(spec.eps_grid.size());
  for (const double eps : spec.eps_grid)
    plans.push_back(build_plans(a, curve, z, eps * eps / 8.0, tol));

  // how close the fiber of the planned value comes to xr: minimum over the
  // exhibited witnesses plus two constructs aimed at xr -- the projection of
  // xr onto the face (the whole face may attain w, as at a corner) and the
  // amplitude-locked blend with its relative phase turned toward xr; both
  // count only if they pass the same acceptance gate as every witness
  const double accept = tol.fiber_accept * std::max(1.0, a.frobenius());
  const auto fiber_gap = [&](const TargetPlan& plan, const CVec& xr) {
    // the representative is its own preimage of any value it attains
    if (std::abs(fov_value(a, xr) - plan.w) <= accept) return 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& wx : plan.witnesses) dmin = std::min(dmin, projective_distance(wx, xr));
    // a candidate built from an off-curve value carries the residual error of
    // the recovered support angle; one unconstrained polish absorbs it. a
    // snapped value forbids the polish: there full descent can land on a
    // nearby branch whose values agree to the cube of the arc step
    const auto consider = [&](CVec c) {
      if (std::abs(fov_value(a, c) - plan.w) <= accept) {
        dmin = std::min(dmin, projective_distance(c, xr));
        return;
      }
      if (plan.snapped) return;
      const detail::SolveResult pol =
          detail::refine_on_sphere(a, plan.w, c, detail::SolveOptions{}, tol);
      if (pol.residual <= accept) dmin = std::min(dmin, projective_distance(pol.x, xr));
    };
    if (!plan.face.empty()) {
      CVec proj(xr.size(), cplx{0.0, 0.0});
      for (const auto& g : plan.face) proj = vec_add(proj, vec_scale(g, vec_dot(g, xr)));
      const double np = vec_norm(proj);
      if (np > 1e-9) consider(vec_scale(proj, cplx{1.0 / np, 0.0}));
    }
    if (plan.amp_lo >= 0.0 && plan.amp_hi >= 0.0 && !plan.face_lo.empty()) {
      const cplx dl = vec_dot(plan.face_lo, xr);
      const cplx dh = vec_dot(plan.face_hi, xr);
      const cplx pl = std::abs(dl) > 1e-12 ? dl / std::abs(dl) : cplx{1.0, 0.0};
      const cplx ph = std::abs(dh) > 1e-12 ? dh / std::abs(dh) : cplx{1.0, 0.0};
      CVec x = vec_add(vec_scale(plan.face_lo, plan.amp_lo * pl),
                       vec_scale(plan.face_hi, plan.amp_hi * ph));
      const double nx = vec_norm(x);
      if (nx > 1e-9) consider(vec_scale(x, cplx{1.0 / nx, 0.0}));
    }
    return dmin;
  };

  int refuted_count = 0;
  for (size_t ir = 0; ir < reps.size(); ++ir) {
    RepresentativeRecord rec{reps[ir], false, {}};
    bool refuted_every_eps = !spec.eps_grid.empty();
    for (size_t ie = 0; ie < spec.eps_grid.size(); ++ie) {
      const double eps = spec.eps_grid[ie];
      EpsBlock block;
      block.eps = eps;
      block.rho = eps * eps / 8.0;
      bool missing_here = false;    // some solvable target left unreached
      bool displaced_here = false;  // ... whose exhibited fiber is a jump away
      std::vector<TargetPlan>& eps_plans = plans[ie];
      for (size_t it = 0; it < eps_plans.size(); ++it) {
        TargetPlan& plan = eps_plans[it];
        ProbeTarget pt;
        pt.w = plan.w;
        pt.label = plan.label;
        const std::uint64_t seed =
            Rng::derive(spec.seed, (ir * 64 + ie) * 64 + it);
        const auto [gn_ok, res] = attempt_target(a, rec.x.rep(), plan.w, eps, seed, spec, tol);
        pt.best_residual = std::isfinite(res) ? res : -1.0;
        bool ok = gn_ok;
        if (plan.on_boundary) {
          // a value on the boundary is attained only on its face, yet where
          // two boundary pieces meet tangentially an in-cap solve can match
          // it to roughly the cube of the step from outside the face; settle
          // reached by whether an exhibited preimage lies inside the cap
          solve_plan(a, curve, plan, Rng::derive(spec.seed, 40000 + ie * 64 + it), tol);
          pt.solvable = plan.solvable;
          if (plan.solvable) {
            const double dmin = fiber_gap(plan, rec.x.rep());
            pt.witness_gap = dmin;
            ok = dmin <= eps + tol.cap_slack;
            if (!ok) {
              missing_here = true;
              if (dmin >= refute_floor - 1e-9) displaced_here = true;
            }
          }
        } else if (!gn_ok) {
          solve_plan(a, curve, plan, Rng::derive(spec.seed, 40000 + ie * 64 + it), tol);
          pt.solvable = plan.solvable;
          if (plan.solvable) missing_here = true;
        }
        pt.reached = ok;
        block.targets.push_back(std::move(pt));
      }
      block.all_reached = !missing_here;
      if (!displaced_here) refuted_every_eps = false;
      rec.blocks.push_back(std::move(block));
    }
    rec.refuted = refuted_every_eps;
    if (rec.refuted) ++refuted_count;
    report.representatives.push_back(std::move(rec));
  }

  if (mode == ProbeMode::Strong) {
    report.verdict = refuted_count > 0 ? Verdict::Refuted : Verdict::EvidencePass;
  } else {
    report.verdict = refuted_count == static_cast<int>(report.representatives.size())
                         ? Verdict::Refuted
                         : Verdict::EvidencePass;
    for (const auto& rec : report.representatives)
      if (!rec.refuted) {
        report.witness = rec.x;
        break;
      }
  }
  report.notes.push_back(
      "pass is evidence only: no counterexample at the tested resolutions; "
      "refutation carries the unreached-target table");
  return report;
}

}  // namespace

ContinuityReport probe_strong(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                              const ProbeSpec& spec, const Tolerances& tol) {
  return run_probe(a, curve, z, spec, tol, ProbeMode::Strong);
}

ContinuityReport probe_weak(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                            const ProbeSpec& spec, const Tolerances& tol) {
  return run_probe(a, curve, z, spec, tol, ProbeMode::Weak);
}

std::string continuity_report_json(const ContinuityReport& report) {
  nlohmann::json j;
  j["z"] = {std::real(report.z), std::imag(report.z)};
  j["mode"] = report.mode == ProbeMode::Strong ? "strong" : "weak";
  j["verdict"] = report.verdict == Verdict::EvidencePass ? "evidence-pass" : "refuted";
  j["notes"] = report.notes;
  if (report.witness) {
    nlohmann::json w;
    std::vector<double> re, im;
    for (const cplx& c : report.witness->rep()) {
      re.push_back(std::real(c));
      im.push_back(std::imag(c));
    }
    w["re"] = re;
    w["im"] = im;
    j["witness"] = std::move(w);
  }
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rec : report.representatives) {
    nlohmann::json r;
    std::vector<double> re, im;
    for (const cplx& c : rec.x.rep()) {
      re.push_back(std::real(c));
      im.push_back(std::imag(c));
    }
    r["x"] = {{"re", re}, {"im", im}};
    r["refuted"] = rec.refuted;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : rec.blocks) {
      nlohmann::json jb;
      jb["eps"] = b.eps;
      jb["rho"] = b.rho;
      jb["all_reached"] = b.all_reached;
      nlohmann::json ts = nlohmann::json::array();
      for (const auto& t : b.targets) {
        ts.push_back({{"w", {std::real(t.w), std::imag(t.w)}},
                      {"label", t.label},
                      {"reached", t.reached},
                      {"solvable", t.solvable},
                      {"best_residual", t.best_residual},
                      {"witness_gap", t.witness_gap}});
      }
      jb["targets"] = std::move(ts);
      blocks.push_back(std::move(jb));
    }
    r["blocks"] = std::move(blocks);
    reps.push_back(std::move(r));
  }
  j["representatives"] = std::move(reps);
  return j.dump(2);
}

// ---- separation certificates --------------------------------------------

SeparationCertificate separation_certificate(const ComplexMatrix& a, const BoundaryCurve& curve,
                                             cplx z, const ArcSpec& arc,
                                             const ProjectiveVector& candidate,
                                             const Tolerances& tol) {
  if (membership(curve, z, tol).region != Region::Boundary)
    throw Error(ErrorCode::ArcNotOnBoundary, "certificate base point is not on the boundary");
  const double perim = perimeter(curve);
  const int n = a.n();

  SeparationCertificate cert;
  cert.arc = arc.label;
  cert.distance_bound = std::numeric_limits<double>::infinity();
  std::vector<ProjectiveVector> members;

  for (int k = arc.k_begin; k <= arc.k_end; ++k) {
    const double s = perim * std::pow(2.0, -k);
    const PolyVertex hit = walk_boundary(curve, z, s, arc.orientation > 0.0, tol);
    const std::vector<ProjectiveVector> gens = boundary_preimage(a, hit.theta, hit.p, tol);
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& g : gens) {
      min_d = std::min(min_d, projective_distance(g, candidate));
      members.push_back(g);
    }
    cert.samples.push_back({hit.p, s, min_d});
    cert.distance_bound = std::min(cert.distance_bound, min_d);
  }

  cert.sign_pattern.assign(static_cast<size_t>(n), '*');
  for (int jcoord = 0; jcoord < n; ++jcoord) {
    double max_abs = 0.0, max_im = 0.0;
    double min_re = std::numeric_limits<double>::infinity();
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& m : members) {
      const cplx c = m.rep()[jcoord];
      max_abs = std::max(max_abs, std::abs(c));
      max_im = std::max(max_im, std::abs(std::imag(c)));
      min_re = std::min(min_re, std::real(c));
      max_re = std::max(max_re, std::real(c));
    }
    if (max_abs <= 1e-6) {
      cert.coordinate_pattern.push_back(jcoord);
      cert.sign_pattern[jcoord] = '0';
    } else if (max_im <= 1e-6 && min_re >= -1e-6) {
      cert.sign_pattern[jcoord] = '+';
    } else if (max_im <= 1e-6 && max_re <= 1e-6) {
      cert.sign_pattern[jcoord] = '-';
    }
  }
  return cert;
}

std::string separation_csv(const SeparationCertificate& cert) {
  std::string out = "arc_length,zeta_re,zeta_im,min_distance\n";
  for (const auto& s : cert.samples) {
    out += fmt17(s.arc_length);
    out += ',';
    out += fmt17(std::real(s.zeta));
    out += ',';
    out += fmt17(std::imag(s.zeta));
    out += ',';
    out += fmt17(s.min_distance);
    out += '\n';
  }
  return out;
}

// ---- prediction ---------------------------------------------------------

ContinuityPrediction predict_continuity(const ComplexMatrix& a, const BoundaryCurve& curve,
                                        cplx z, const Tolerances& tol) {
  ContinuityPrediction pred;
  const MembershipResult mb = membership(curve, z, tol);

  if (mb.region == Region::Interior) {
    pred.rule_chain.push_back("interior point -> strong");
    pred.verdict = "strong";
    return pred;
  }
  pred.rule_chain.push_back(mb.region == Region::Boundary ? "not interior: boundary point"
                                                          : "not interior: outside the range");

  if (mb.region == Region::Boundary) {
    const BoundaryClass cls = classify_point(curve, z, tol);
    if (cls.kind != PointKind::Round) {
      pred.rule_chain.push_back(cls.kind == PointKind::Corner
                                    ? "boundary class corner -> strong"
                                    : "boundary class flat -> strong");
      pred.verdict = "strong";
      return pred;
    }
    pred.rule_chain.push_back("boundary class round: undecided");

    const FiberSample fs = fiber_sample(a, z, 2000, 0xC0117, tol);
    if (fs.clusters.size() == 1) {
      pred.rule_chain.push_back("single fiber cluster -> strong");
      pred.verdict = "strong";
      return pred;
    }
    pred.rule_chain.push_back("fiber clusters: " + std::to_string(fs.clusters.size()));
  }

  if (is_convexoid(a)) {
    pred.rule_chain.push_back("convexoid matrix -> strong");
    pred.verdict = "strong";
    return pred;
  }
  pred.rule_chain.push_back("not convexoid");

  if (a.n() == 2) {
    pred.rule_chain.push_back("order 2 -> strong");
    pred.verdict = "strong";
    return pred;
  }
  if (a.n() == 3 && is_unitarily_irreducible(a, tol)) {
    pred.rule_chain.push_back("order 3, trivial commutant -> strong");
    pred.verdict = "strong";
    return pred;
  }
  pred.rule_chain.push_back(a.n() == 3 ? "order 3 but reducible" : "order above 3");
  pred.verdict = "unresolved - probe";
  return pred;
}

}  // namespace fov
