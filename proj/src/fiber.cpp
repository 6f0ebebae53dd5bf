#include "fovkit/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "fovkit/rng.hpp"

namespace fov {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

// orthonormal complex basis of the tangent space x-perp
std::vector<CVec> tangent_basis(const CVec& x) {
  const int n = static_cast<int>(x.size());
  std::vector<CVec> basis;
  for (double floor : {1e-6, 1e-12}) {
    basis.clear();
    for (int k = 0; k < n && static_cast<int>(basis.size()) < n - 1; ++k) {
      CVec v(n, cplx{0.0, 0.0});
      v[k] = 1.0;
      v = vec_sub(v, vec_scale(x, vec_dot(x, v)));
      for (const CVec& b : basis) v = vec_sub(v, vec_scale(b, vec_dot(b, v)));
      const double nv = vec_norm(v);
      if (nv > floor) basis.push_back(vec_scale(v, 1.0 / nv));
    }
    if (static_cast<int>(basis.size()) == n - 1) break;
  }
  return basis;
}

void append_member(FiberSample& sample, const ComplexMatrix& a, ProjectiveVector x,
                   const Tolerances& tol) {
  const double res = std::abs(fov_value(a, x) - sample.target);
  const int idx = static_cast<int>(sample.members.size());
  for (auto& cluster : sample.clusters) {
    if (projective_distance(sample.members[cluster.front()], x) < tol.cluster) {
      cluster.push_back(idx);
      sample.members.push_back(std::move(x));
      sample.residuals.push_back(res);
      return;
    }
  }
  sample.clusters.push_back({idx});
  sample.members.push_back(std::move(x));
  sample.residuals.push_back(res);
}

void finish_sample(FiberSample& sample, const Tolerances& tol) {
  sample.rank = sample.members.empty() ? 0 : rank_of_set(sample.members, tol.rank);
}

// deterministic Haar-ish unitary from Gram-Schmidt over gaussian columns
ComplexMatrix seeded_unitary(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CVec> cols;
  while (static_cast<int>(cols.size()) < n) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx{rng.gaussian(), rng.gaussian()};
    for (const CVec& c : cols) v = vec_sub(v, vec_scale(c, vec_dot(c, v)));
    const double nv = vec_norm(v);
    if (nv < 1e-8) continue;
    cols.push_back(vec_scale(v, 1.0 / nv));
  }
  ComplexMatrix u(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) u.at(i, j) = cols[j][i];
  return u;
}

}  // namespace

std::vector<ProjectiveVector> FiberSample::representatives() const {
  std::vector<ProjectiveVector> reps;
  reps.reserve(clusters.size());
  for (const auto& cluster : clusters) reps.push_back(members[cluster.front()]);
  return reps;
}

namespace detail {

SolveResult refine_on_sphere(const ComplexMatrix& a, cplx z, CVec start,
                             const SolveOptions& opt, const Tolerances& tol) {
  SolveResult out;
  const double scale = std::max(1.0, a.frobenius());
  const double accept = opt.accept >= 0.0 ? opt.accept : tol.fiber_accept * scale;

  CVec x = start;
  {
    const double nx = vec_norm(x);
    if (nx <= 0.0) return out;
    x = vec_scale(x, 1.0 / nx);
  }
  double res = std::abs(fov_value(a, x) - z);

  for (int iter = 0; iter < tol.gauss_newton_iters; ++iter) {
    if (res <= accept) break;
    const std::vector<CVec> basis = tangent_basis(x);
    const int p = 2 * static_cast<int>(basis.size());
    if (p == 0) break;
    const CVec ax = a.apply(x);
    const cplx r = fov_value(a, x) - z;

    // rows Re/Im of df along each real chart direction
    std::vector<double> j0(p), j1(p);
    for (size_t k = 0; k < basis.size(); ++k) {
      const CVec& b = basis[k];
      const cplx d_re = vec_dot(b, ax) + vec_dot(x, a.apply(b));
      const cplx d_im = cplx{0.0, 1.0} * (vec_dot(x, a.apply(b)) - vec_dot(b, ax));
      j0[2 * k] = d_re.real();
      j1[2 * k] = d_re.imag();
      j0[2 * k + 1] = d_im.real();
      j1[2 * k + 1] = d_im.imag();
    }

    // minimal-norm Gauss-Newton step via the 2x2 JJ^T pseudo-inverse
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    for (int k = 0; k < p; ++k) {
      g00 += j0[k] * j0[k];
      g01 += j0[k] * j1[k];
      g11 += j1[k] * j1[k];
    }
    const double tr = g00 + g11;
    const double det = g00 * g11 - g01 * g01;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double l1 = 0.5 * (tr + disc);
    const double l2 = 0.5 * (tr - disc);
    if (l1 <= 1e-30) break;
    // eigenvectors of the symmetric 2x2
    double v1x, v1y;
    if (std::abs(g01) > 1e-300) {
      v1x = l1 - g11;
      v1y = g01;
    } else {
      v1x = g00 >= g11 ? 1.0 : 0.0;
      v1y = g00 >= g11 ? 0.0 : 1.0;
    }
    const double n1 = std::hypot(v1x, v1y);
    v1x /= n1;
    v1y /= n1;
    const double v2x = -v1y, v2y = v1x;
    const double c1 = r.real() * v1x + r.imag() * v1y;
    const double c2 = r.real() * v2x + r.imag() * v2y;
    double u0 = -(c1 / l1) * v1x;
    double u1 = -(c1 / l1) * v1y;
    if (l2 > 1e-14 * l1) {
      u0 += -(c2 / l2) * v2x;
      u1 += -(c2 / l2) * v2y;
    }

    double damp = 1.0;
    bool moved = false;
    for (int half = 0; half < 25; ++half) {
      CVec cand = x;
      for (size_t k = 0; k < basis.size(); ++k) {
        const cplx coef{damp * (j0[2 * k] * u0 + j1[2 * k] * u1),
                        damp * (j0[2 * k + 1] * u0 + j1[2 * k + 1] * u1)};
        cand = vec_add(cand, vec_scale(basis[k], coef));
      }
      const double nc = vec_norm(cand);
      if (nc <= 0.0) break;
      cand = vec_scale(cand, 1.0 / nc);
      const double cres = std::abs(fov_value(a, cand) - z);
      if (cres < res) {
        if (opt.cap_anchor != nullptr &&
            projective_distance(cand, *opt.cap_anchor) > opt.cap_radius) {
          out.x = cand;
          out.residual = cres;
          out.left_cap = true;
          return out;
        }
        x = cand;
        res = cres;
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) break;
  }

  out.x = x;
  out.residual = res;
  out.converged = res <= accept;
  return out;
}

}  // namespace detail

std::vector<ProjectiveVector> boundary_preimage(const ComplexMatrix& a, double theta,
                                                cplx point, const Tolerances& tol) {
  const SupportPoint sp = support_data(a, theta, tol);
  const cplx rotated = std::polar(1.0, -sp.theta) * point;
  if (std::abs(rotated.real() - sp.lambda_max) >
      tol.support_line * std::max(1.0, std::abs(sp.lambda_max)))
    throw Error(ErrorCode::PointNotOnSupportLine,
                "offset " + std::to_string(rotated.real() - sp.lambda_max));
  if (sp.multiplicity == 1) return {sp.point_generators[0]};

  // segment: blend the extreme generators to land exactly on the point
  const double t = rotated.imag();
  const double t_lo = std::imag(std::polar(1.0, -sp.theta) * sp.points.front());
  const double t_hi = std::imag(std::polar(1.0, -sp.theta) * sp.points.back());
  if (t_hi - t_lo <= 1e-14 * std::max(1.0, a.frobenius()))
    return {sp.point_generators.front()};
  const double u = std::clamp((t - t_lo) / (t_hi - t_lo), 0.0, 1.0);
  const CVec& w_lo = sp.point_generators.front().rep();
  const CVec& w_hi = sp.point_generators.back().rep();
  CVec y = vec_add(vec_scale(w_lo, std::sqrt(1.0 - u)), vec_scale(w_hi, std::sqrt(u)));
  return {ProjectiveVector(y)};
}

LineCut line_cut(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z, double phi,
                 const Tolerances& tol) {
  if (curve.degenerate)
    throw Error(ErrorCode::DegenerateCut, "range has empty interior");
  const MembershipResult mem = membership(curve, z, tol);
  if (mem.signed_distance > tol.membership)
    throw Error(ErrorCode::InvalidArgument, "cut target outside the range");
  if (mem.signed_distance > -tol.boundary_guard)
    throw Error(ErrorCode::DegenerateCut,
                "target within " + std::to_string(mem.signed_distance) + " of the boundary");

  auto hit = [&](double dir) -> std::pair<cplx, ProjectiveVector> {
    const cplx e_dir = std::polar(1.0, dir);
    auto ray_t = [&](double theta, double h) {
      const double c = std::cos(theta - dir);
      if (c <= 0.01) return std::numeric_limits<double>::infinity();
      return (h - std::real(std::polar(1.0, -theta) * z)) / c;
    };
    // coarse: support lines already sampled by the trace
    int best = -1;
    double best_t = std::numeric_limits<double>::infinity();
    const int s = static_cast<int>(curve.samples.size());
    for (int i = 0; i < s; ++i) {
      const double t = ray_t(curve.samples[i].theta, curve.samples[i].lambda_max);
      if (t < best_t) {
        best_t = t;
        best = i;
      }
    }
    if (best < 0)
      throw Error(ErrorCode::NonConvergence, "no support line crosses the cut direction");

    // refine by the side of the ray the attained point falls on: the exit
    // tangency flips the sign, a segment hit straddles it
    struct Eval {
      double c = 0.0;
      bool straddle = false;
    };
    auto eval = [&](double theta) {
      const SupportPoint sp = support_data(a, wrap_angle(theta), tol);
      Eval ev;
      const double c0 = std::imag(std::conj(e_dir) * (sp.points.front() - z));
      const double c1 = std::imag(std::conj(e_dir) * (sp.points.back() - z));
      ev.straddle = sp.points.size() >= 2 && (c0 <= 0.0) != (c1 < 0.0);
      ev.c = std::abs(c0) <= std::abs(c1) ? c0 : c1;
      return ev;
    };

    double theta_hat = curve.samples[best].theta;
    bool located = false;
    for (int span = 1; span <= 4 && !located; span *= 2) {
      double lo = curve.samples[((best - span) % s + s) % s].theta;
      double hi = curve.samples[(best + span) % s].theta;
      if (lo > theta_hat) lo -= kTwoPi;
      if (hi < theta_hat) hi += kTwoPi;
      Eval elo = eval(lo);
      Eval ehi = eval(hi);
      if (elo.straddle) {
        theta_hat = lo;
        located = true;
        break;
      }
      if (ehi.straddle) {
        theta_hat = hi;
        located = true;
        break;
      }
      if ((elo.c < 0.0) == (ehi.c < 0.0)) {
        // same side at both ends: a corner plateau keeps the cross tiny
        if (std::abs(elo.c) <= 1e-9 * curve.scale || std::abs(ehi.c) <= 1e-9 * curve.scale)
          located = true;
        continue;  // otherwise widen the bracket
      }
      for (int it = 0; it < 110 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Eval em = eval(mid);
        if (em.straddle) {
          lo = hi = mid;
          break;
        }
        if ((em.c < 0.0) == (elo.c < 0.0)) {
          lo = mid;
          elo = em;
        } else {
          hi = mid;
          ehi = em;
        }
      }
      theta_hat = 0.5 * (lo + hi);
      located = true;
    }
    if (!located)
      throw Error(ErrorCode::NonConvergence, "cut refinement lost the bracket");

    const SupportPoint sp = support_data(a, wrap_angle(theta_hat), tol);
    const double t_hat = ray_t(sp.theta, sp.lambda_max);
    if (!std::isfinite(t_hat))
      throw Error(ErrorCode::NonConvergence, "cut direction degenerate at the tangency");
    const cplx w = z + t_hat * e_dir;
    const ProjectiveVector gen = boundary_preimage(a, sp.theta, w, tol).front();
    return {w, gen};
  };

  auto plus = hit(phi);
  auto minus = hit(phi + M_PI);
  LineCut cut{wrap_angle(phi), plus.first, minus.first, plus.second, minus.second};
  return cut;
}

ProjectiveVector solve_2x2(const ComplexMatrix& b, cplx z, const Tolerances& tol) {
  if (b.n() != 2) throw Error(ErrorCode::DimensionMismatch, "solver needs a 2x2 matrix");
  const double scale = std::max(1.0, b.frobenius());

  // ellipse membership gate: foci are the eigenvalues
  const cplx tr = b.at(0, 0) + b.at(1, 1);
  const cplx det = b.at(0, 0) * b.at(1, 1) - b.at(0, 1) * b.at(1, 0);
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  const cplx l1 = 0.5 * (tr + disc);
  const cplx l2 = 0.5 * (tr - disc);
  const double fro2 = b.frobenius() * b.frobenius();
  const double minor2 = std::max(0.0, 0.25 * (fro2 - std::norm(l1) - std::norm(l2)));
  const double major = std::sqrt(minor2 + 0.25 * std::norm(l1 - l2));
  if (std::abs(z - l1) + std::abs(z - l2) > 2.0 * major + tol.boundary_guard * scale)
    throw Error(ErrorCode::TargetOutsideRange, "target outside the 2x2 range");

  auto value = [&](double t, double phi) {
    const double c = std::cos(t), s = std::sin(t);
    const cplx e = std::polar(1.0, phi);
    return c * c * b.at(0, 0) + s * s * b.at(1, 1) +
           c * s * (b.at(0, 1) * e + b.at(1, 0) * std::conj(e));
  };

  // coarse multistart grid, lexicographic tie-break
  struct Start {
    double r, t, phi;
  };
  std::vector<Start> starts;
  for (int j = 0; j < 32; ++j) {
    const double t = 0.5 * M_PI * j / 31.0;
    for (int k = 0; k < 32; ++k) {
      const double phi = kTwoPi * k / 32.0;
      starts.push_back({std::abs(value(t, phi) - z), t, phi});
    }
  }
  std::stable_sort(starts.begin(), starts.end(),
                   [](const Start& x, const Start& y) { return x.r < y.r; });

  const double accept = 1e-12 * scale;
  double best_res = std::numeric_limits<double>::infinity();
  double best_t = 0.0, best_phi = 0.0;
  for (int si = 0; si < std::min<int>(16, starts.size()); ++si) {
    double t = starts[si].t, phi = starts[si].phi;
    cplx r = value(t, phi) - z;
    for (int iter = 0; iter < 60 && std::abs(r) > accept; ++iter) {
      const double c = std::cos(t), s = std::sin(t);
      const cplx e = std::polar(1.0, phi);
      const cplx off = b.at(0, 1) * e + b.at(1, 0) * std::conj(e);
      const cplx dt = 2.0 * c * s * (b.at(1, 1) - b.at(0, 0)) + std::cos(2.0 * t) * off;
      const cplx dphi = c * s * cplx{0.0, 1.0} * (b.at(0, 1) * e - b.at(1, 0) * std::conj(e));
      // damped least-squares step on the two real equations
      const double j00 = dt.real(), j01 = dphi.real();
      const double j10 = dt.imag(), j11 = dphi.imag();
      double a00 = j00 * j00 + j10 * j10, a01 = j00 * j01 + j10 * j11;
      double a11 = j01 * j01 + j11 * j11;
      const double lam = 1e-12 * (a00 + a11 + 1.0);
      a00 += lam;
      a11 += lam;
      const double rhs0 = -(j00 * r.real() + j10 * r.imag());
      const double rhs1 = -(j01 * r.real() + j11 * r.imag());
      const double den = a00 * a11 - a01 * a01;
      if (den <= 0.0) break;
      const double st = (rhs0 * a11 - rhs1 * a01) / den;
      const double sp = (rhs1 * a00 - rhs0 * a01) / den;
      double damp = 1.0;
      bool moved = false;
      for (int half = 0; half < 20; ++half) {
        const double tn = t + damp * st;
        const double pn = phi + damp * sp;
        const cplx rn = value(tn, pn) - z;
        if (std::abs(rn) < std::abs(r)) {
          t = tn;
          phi = pn;
          r = rn;
          moved = true;
          break;
        }
        damp *= 0.5;
      }
      if (!moved) break;
    }
    if (std::abs(r) < best_res) {
      best_res = std::abs(r);
      best_t = t;
      best_phi = phi;
    }
    if (best_res <= accept) break;
  }

  if (best_res > 1e-10 * scale)
    throw Error(ErrorCode::NonConvergence,
                "2x2 solve stalled at residual " + std::to_string(best_res));
  CVec x(2);
  x[0] = std::cos(best_t);
  x[1] = std::polar(1.0, best_phi) * std::sin(best_t);
  return ProjectiveVector(x);
}

ProjectiveVector interior_preimage(const ComplexMatrix& a, const BoundaryCurve& curve,
                                   cplx z, double phi, const Tolerances& tol) {
  if (curve.degenerate) {
    const double extent = std::abs(curve.degen_hi - curve.degen_lo);
    if (extent <= 1e-12 * curve.scale && std::abs(z - curve.degen_lo) <= tol.membership) {
      // constant map: every unit vector is a preimage; vary with phi so that
      // repeated cuts still span the space
      const int n = a.n();
      CVec x(n);
      for (int k = 0; k < n; ++k)
        x[k] = std::polar(1.0 / std::sqrt(static_cast<double>(n)), k * phi);
      return ProjectiveVector(x);
    }
    throw Error(ErrorCode::DegenerateCut, "range has empty interior");
  }
  const LineCut cut = line_cut(a, curve, z, phi, tol);
  if (projective_distance(cut.gen_plus, cut.gen_minus) < 1e-9)
    throw Error(ErrorCode::CollinearGenerators, "cut generators coincide");
  const CVec v1 = cut.gen_plus.rep();
  CVec v2 = vec_sub(cut.gen_minus.rep(), vec_scale(v1, vec_dot(v1, cut.gen_minus.rep())));
  v2 = vec_scale(v2, 1.0 / vec_norm(v2));
  const ComplexMatrix b = compress(a, std::vector<CVec>{v1, v2}, tol);
  const ProjectiveVector y = solve_2x2(b, z, tol);
  const CVec x = vec_add(vec_scale(v1, y.rep()[0]), vec_scale(v2, y.rep()[1]));
  const ProjectiveVector out(x);
  if (std::abs(fov_value(a, out) - z) > 1e-9)
    throw Error(ErrorCode::NonConvergence, "lifted preimage missed the target");
  return out;
}

FiberSample fiber_basis(const ComplexMatrix& a, const BoundaryCurve& curve, cplx z,
                        const Tolerances& tol) {
  const int n = a.n();
  FiberSample sample;
  sample.target = z;

  constexpr std::uint64_t kShuffleSeed = 0x51BA5EED0BA5E5ULL;
  int attempts = 0;
  ComplexMatrix u = ComplexMatrix::identity(n);
  ComplexMatrix at = a;
  for (int round = 0; attempts < 500; ++round) {
    if (round > 0) {
      u = seeded_unitary(n, Rng::derive(kShuffleSeed, static_cast<std::uint64_t>(round)));
      at = u.adjoint() * a * u;
    }
    const int m = std::min(64, 8 << std::min(round, 3));
    for (int j = 0; j < m && attempts < 500; ++j) {
      ++attempts;
      const double phi = M_PI * j / m;
      try {
        const ProjectiveVector y = interior_preimage(at, curve, z, phi, tol);
        append_member(sample, a, ProjectiveVector(u.apply(y.rep())), tol);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateCut || e.code() == ErrorCode::InvalidArgument)
          throw;
        continue;  // collinear generators or a stalled solve: try the next cut
      }
      if (!sample.members.empty() && rank_of_set(sample.members, tol.rank) == n) {
        finish_sample(sample, tol);
        return sample;
      }
    }
  }
  finish_sample(sample, tol);
  throw Error(ErrorCode::RankDeficit, "achieved rank " + std::to_string(sample.rank) +
                                          " of " + std::to_string(n) + " after " +
                                          std::to_string(attempts) + " attempts");
}

FiberSample fiber_sample(const ComplexMatrix& a, cplx z, int budget, std::uint64_t seed,
                         const Tolerances& tol) {
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  const int n = a.n();
  FiberSample sample;
  sample.target = z;
  for (int i = 0; i < budget; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    CVec start(n);
    for (int k = 0; k < n; ++k) start[k] = cplx{rng.gaussian(), rng.gaussian()};
    if (vec_norm(start) < 1e-8) continue;
    const detail::SolveResult res =
        detail::refine_on_sphere(a, z, std::move(start), detail::SolveOptions{}, tol);
    if (res.converged) append_member(sample, a, ProjectiveVector(res.x), tol);
  }
  finish_sample(sample, tol);
  return sample;
}

std::string fiber_json(const FiberSample& sample) {
  nlohmann::json j;
  j["target"] = {sample.target.real(), sample.target.imag()};
  j["rank"] = sample.rank;
  j["members"] = sample.members.size();
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& cluster : sample.clusters) {
    const ProjectiveVector& rep = sample.members[cluster.front()];
    nlohmann::json e;
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (const cplx c : rep.rep()) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    e["re"] = re;
    e["im"] = im;
    e["size"] = cluster.size();
    e["residual"] = sample.residuals[cluster.front()];
    clusters.push_back(e);
  }
  j["clusters"] = clusters;
  return j.dump(2);
}

}  // namespace fov
