#include "fovkit/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

namespace fov {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // keep exact zero exact
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

double cross2(cplx a, cplx b) { return std::imag(std::conj(a) * b); }

HermitianMatrix hermitian_part(const ComplexMatrix& a, double theta) {
  const ComplexMatrix r = a.scaled(std::polar(1.0, -theta));
  return HermitianMatrix((r + r.adjoint()).scaled(0.5));
}

double point_segment_dist(cplx z, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 <= 0.0) return std::abs(z - a);
  double u = std::real(std::conj(ab) * (z - a)) / len2;
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(z - (a + u * ab));
}

// contiguous stretch of polyline vertices that share one geometric point
struct VertGroup {
  cplx p;
  double theta_first = 0.0;
  double theta_last = 0.0;
  int sample_first = -1;  // index into the flattened vert list
  int sample_last = -1;
  bool from_one_segment = false;  // single multiplicity>=2 sample spans this group pair
};

struct Vert {
  cplx p;
  double theta;
  int sample;  // order index of owning sample
  int part;    // 0 single, 1 segment-lo, 2 segment-hi
};

std::vector<Vert> flatten(const std::vector<SupportPoint>& samples) {
  std::vector<Vert> verts;
  verts.reserve(samples.size() * 2);
  for (int s = 0; s < static_cast<int>(samples.size()); ++s) {
    const SupportPoint& sp = samples[s];
    if (sp.points.size() == 1) {
      verts.push_back({sp.points[0], sp.theta, s, 0});
    } else {
      verts.push_back({sp.points[0], sp.theta, s, 1});
      verts.push_back({sp.points[1], sp.theta, s, 2});
    }
  }
  return verts;
}

std::vector<VertGroup> group_verts(const std::vector<Vert>& verts, double merge_tol) {
  std::vector<VertGroup> groups;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    if (!groups.empty() && std::abs(verts[i].p - groups.back().p) <= merge_tol) {
      groups.back().theta_last = verts[i].theta;
      groups.back().sample_last = i;
    } else {
      VertGroup g;
      g.p = verts[i].p;
      g.theta_first = g.theta_last = verts[i].theta;
      g.sample_first = g.sample_last = i;
      groups.push_back(g);
    }
  }
  return groups;
}

}  // namespace

SupportPoint support_data(const ComplexMatrix& a, double theta, const Tolerances& tol) {
  SupportPoint sp;
  sp.theta = wrap_angle(theta);
  const cplx phase = std::polar(1.0, sp.theta);
  const EigenDecomposition eig = hermitian_eig(hermitian_part(a, sp.theta), tol);
  sp.lambda_max = eig.values[0];
  const double thresh = tol.multiplicity_rel * std::max(1.0, std::abs(sp.lambda_max));
  int mult = 1;
  while (mult < a.n() && eig.values[mult] >= sp.lambda_max - thresh) ++mult;
  sp.multiplicity = mult;
  for (int k = 0; k < mult; ++k) sp.generators.emplace_back(eig.vectors[k]);

  if (mult == 1) {
    const ProjectiveVector v(eig.vectors[0]);
    sp.points.push_back(fov_value(a, v));
    sp.point_generators.push_back(v);
    return sp;
  }

  // the support set is a segment: extreme offsets come from the skew part of
  // the compression onto the top eigenspace
  std::vector<CVec> basis(eig.vectors.begin(), eig.vectors.begin() + mult);
  const ComplexMatrix b = compress(a, basis, tol);
  const ComplexMatrix br = b.scaled(std::polar(1.0, -sp.theta));
  const ComplexMatrix c = (br - br.adjoint()).scaled(cplx{0.0, -0.5});
  const EigenDecomposition ceig = hermitian_eig(HermitianMatrix(c), tol);
  const double mu_hi = ceig.values[0];
  const double mu_lo = ceig.values[mult - 1];
  auto lift = [&](const CVec& u) {
    CVec w(a.n(), cplx{0.0, 0.0});
    for (int k = 0; k < mult; ++k) w = vec_add(w, vec_scale(basis[k], u[k]));
    return ProjectiveVector(w);
  };
  const ProjectiveVector w_lo = lift(ceig.vectors[mult - 1]);
  const ProjectiveVector w_hi = lift(ceig.vectors[0]);
  const cplx p_lo = phase * cplx{sp.lambda_max, mu_lo};
  const cplx p_hi = phase * cplx{sp.lambda_max, mu_hi};
  sp.points = {p_lo, p_hi};
  sp.point_generators = {w_lo, w_hi};
  sp.segment = std::make_pair(p_lo, p_hi);
  return sp;
}

namespace {

BoundaryCurve point_curve(const ComplexMatrix& a, cplx value, const Tolerances& tol) {
  BoundaryCurve curve;
  curve.a = a;
  curve.scale = std::max(1.0, a.frobenius());
  for (int j = 0; j < 16; ++j)
    curve.samples.push_back(support_data(a, kTwoPi * j / 16.0, tol));
  curve.polyline.push_back({value, 0.0});
  curve.degenerate = true;
  curve.degen_lo = curve.degen_hi = value;
  return curve;
}

}  // namespace

BoundaryCurve trace_boundary(const ComplexMatrix& a, const TraceOptions& opt,
                             const Tolerances& tol) {
  const int n = a.n();
  const double maxscale = std::max(1.0, a.frobenius());
  const int base = std::max(16, opt.base_samples);

  // scalar family: the range is a single point
  {
    const cplx mean = a.trace() / static_cast<double>(n);
    ComplexMatrix shifted = a;
    for (int i = 0; i < n; ++i) shifted.at(i, i) -= mean;
    if (shifted.frobenius() <= 1e-13 * maxscale) return point_curve(a, mean, tol);
  }

  std::map<double, SupportPoint> samples;
  auto add_sample = [&](double theta) {
    const double t = wrap_angle(theta);
    auto it = samples.lower_bound(t - 1e-15);
    if (it != samples.end() && std::abs(it->first - t) <= 1e-15) return;
    samples.emplace(t, support_data(a, t, tol));
  };
  for (int j = 0; j < base; ++j) add_sample(kTwoPi * j / base);

  const double merge_tol = 1e-10 * maxscale;
  auto snapshot = [&]() {
    std::vector<SupportPoint> v;
    v.reserve(samples.size());
    for (const auto& kv : samples) v.push_back(kv.second);
    return v;
  };

  // adaptive pass: subdivide the angle gaps next to polyline vertices that
  // turn faster than the threshold (corners and transitions keep firing
  // until the gap floor)
  if (opt.adaptive) {
    for (int round = 0; round < 64; ++round) {
      if (static_cast<int>(samples.size()) >= tol.max_samples) break;
      const std::vector<Vert> verts = flatten(snapshot());
      const std::vector<VertGroup> groups = group_verts(verts, merge_tol);
      const int m = static_cast<int>(groups.size());
      if (m < 3) break;
      std::vector<double> marks;
      for (int i = 0; i < m; ++i) {
        const VertGroup& prev = groups[(i + m - 1) % m];
        const VertGroup& cur = groups[i];
        const VertGroup& next = groups[(i + 1) % m];
        const cplx e1 = cur.p - prev.p;
        const cplx e2 = next.p - cur.p;
        if (std::abs(e1) <= merge_tol || std::abs(e2) <= merge_tol) continue;
        const double turn =
            std::atan2(std::abs(cross2(e1, e2)), std::real(std::conj(e1) * e2));
        if (turn <= tol.turning_angle) continue;
        double gap_in = cur.theta_first - prev.theta_last;
        if (gap_in < 0.0) gap_in += kTwoPi;
        double gap_out = next.theta_first - cur.theta_last;
        if (gap_out < 0.0) gap_out += kTwoPi;
        if (gap_in > tol.boundary_guard)
          marks.push_back(wrap_angle(prev.theta_last + gap_in / 2.0));
        if (gap_out > tol.boundary_guard)
          marks.push_back(wrap_angle(cur.theta_last + gap_out / 2.0));
      }
      if (marks.empty()) break;
      const size_t before = samples.size();
      for (double t : marks) {
        if (static_cast<int>(samples.size()) >= tol.max_samples) break;
        add_sample(t);
      }
      if (samples.size() == before) break;
    }
  }

  // hunt flats under every long polyline edge: bisect the angle gap toward
  // the transition, then certify by eigenvalue multiplicity
  std::vector<FlatSegment> flats;
  auto record_flat = [&](const SupportPoint& sp) {
    if (!sp.segment) return;
    if (std::abs(sp.segment->second - sp.segment->first) <= tol.flat_min_length * maxscale)
      return;
    for (const FlatSegment& f : flats)
      if (std::abs(f.p_lo - sp.segment->first) <= 1e-7 * maxscale &&
          std::abs(f.p_hi - sp.segment->second) <= 1e-7 * maxscale)
        return;
    flats.push_back(FlatSegment{sp.theta, sp.segment->first, sp.segment->second,
                                sp.point_generators[0], sp.point_generators[1]});
  };
  for (const auto& kv : samples) record_flat(kv.second);

  {
    const std::vector<Vert> verts = flatten(snapshot());
    const std::vector<VertGroup> groups = group_verts(verts, merge_tol);
    const int m = static_cast<int>(groups.size());
    for (int i = 0; i < m && m >= 2; ++i) {
      const VertGroup& cur = groups[i];
      const VertGroup& next = groups[(i + 1) % m];
      const double chord = std::abs(next.p - cur.p);
      if (chord <= tol.flat_min_length * maxscale) continue;
      // a multiplicity>=2 sample already certifies its own segment
      if (cur.sample_last + 1 == next.sample_first &&
          verts[cur.sample_last].sample == verts[next.sample_first].sample)
        continue;
      double lo = cur.theta_last;
      double hi = next.theta_first;
      if (hi < lo) hi += kTwoPi;
      bool found = false;
      for (int iter = 0; iter < 80 && hi - lo > 1e-13; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const SupportPoint sp = support_data(a, mid, tol);
        if (sp.multiplicity >= 2) {
          record_flat(sp);
          add_sample(mid);
          found = true;
          break;
        }
        const double d_lo = std::abs(sp.points[0] - cur.p);
        const double d_hi = std::abs(sp.points[0] - next.p);
        if (std::min(d_lo, d_hi) > 0.45 * chord) break;  // honest arc, no jump
        if (d_lo <= d_hi)
          lo = mid;
        else
          hi = mid;
      }
      if (!found && hi - lo <= 1e-13) {
        const SupportPoint sp = support_data(a, 0.5 * (lo + hi), tol);
        if (sp.multiplicity >= 2) {
          record_flat(sp);
          add_sample(0.5 * (lo + hi));
        }
      }
    }
  }

  BoundaryCurve curve;
  curve.a = a;
  curve.scale = maxscale;
  curve.samples = snapshot();

  // corners: maximal runs of samples sharing one generator across a cone of
  // support angles; compare against the run head so smooth drift breaks out
  {
    const int s = static_cast<int>(curve.samples.size());
    auto mult1 = [&](int i) { return curve.samples[i].multiplicity == 1; };
    std::vector<char> used(s, 0);
    int start = -1;
    for (int i = 0; i < s; ++i) {
      const int prev = (i + s - 1) % s;
      if (!mult1(i) || !mult1(prev) ||
          projective_distance(curve.samples[i].point_generators[0],
                              curve.samples[prev].point_generators[0]) >= tol.corner_generator) {
        start = i;
        break;
      }
    }
    if (start >= 0) {
      int i = start;
      int seen = 0;
      while (seen < s) {
        if (!mult1(i)) {
          i = (i + 1) % s;
          ++seen;
          continue;
        }
        const int run_begin = i;
        const ProjectiveVector& head = curve.samples[run_begin].point_generators[0];
        double extent = 0.0;
        int count = 1;
        int j = i;
        while (count < s) {
          const int k = (j + 1) % s;
          if (!mult1(k) ||
              projective_distance(head, curve.samples[k].point_generators[0]) >=
                  tol.corner_generator)
            break;
          double step = curve.samples[k].theta - curve.samples[j].theta;
          if (step < 0.0) step += kTwoPi;
          extent += step;
          j = k;
          ++count;
        }
        if (extent > tol.corner_theta && extent < kTwoPi - 1e-9) {
          // sharpen the cone ends past sample resolution
          auto gen_matches = [&](double theta_q) {
            const SupportPoint sp = support_data(a, wrap_angle(theta_q), tol);
            return sp.multiplicity == 1 &&
                   projective_distance(sp.point_generators[0], head) < tol.corner_generator;
          };
          double lo_in = curve.samples[run_begin].theta;
          double lo_out = curve.samples[(run_begin + s - 1) % s].theta;
          if (lo_out > lo_in) lo_out -= kTwoPi;
          for (int it = 0; it < 50 && lo_in - lo_out > 1e-10; ++it) {
            const double mid = 0.5 * (lo_in + lo_out);
            (gen_matches(mid) ? lo_in : lo_out) = mid;
          }
          double hi_in = curve.samples[run_begin].theta + extent;
          double hi_out = hi_in;
          {
            double step = curve.samples[(j + 1) % s].theta - curve.samples[j].theta;
            if (step < 0.0) step += kTwoPi;
            hi_out += step;
          }
          for (int it = 0; it < 50 && hi_out - hi_in > 1e-10; ++it) {
            const double mid = 0.5 * (hi_in + hi_out);
            (gen_matches(mid) ? hi_in : hi_out) = mid;
          }
          const double theta_lo = wrap_angle(lo_in);
          curve.corners.push_back(CornerPoint{curve.samples[run_begin].points[0], theta_lo,
                                              theta_lo + (hi_in - lo_in), head});
        }
        i = (j + 1) % s;
        seen += count;
      }
    }
  }

  std::sort(flats.begin(), flats.end(),
            [](const FlatSegment& x, const FlatSegment& y) { return x.theta < y.theta; });
  curve.flats = std::move(flats);

  // final polyline: per-point vertices, consecutive duplicates merged
  {
    const std::vector<Vert> verts = flatten(curve.samples);
    const std::vector<VertGroup> groups = group_verts(verts, merge_tol);
    for (const VertGroup& g : groups) curve.polyline.push_back({g.p, g.theta_first});
    while (curve.polyline.size() > 1 &&
           std::abs(curve.polyline.back().p - curve.polyline.front().p) <= merge_tol)
      curve.polyline.pop_back();
  }

  // empty-interior detection: a width estimate from area over perimeter
  {
    double area2 = 0.0;
    double perim = 0.0;
    const auto& pl = curve.polyline;
    const int m = static_cast<int>(pl.size());
    for (int i = 0; i < m; ++i) {
      const cplx p = pl[i].p;
      const cplx q = pl[(i + 1) % m].p;
      area2 += cross2(p, q);
      perim += std::abs(q - p);
    }
    if (m < 3 || perim <= 0.0 || std::abs(area2) / perim <= 1e-10 * maxscale) {
      curve.degenerate = true;
      cplx far = pl[0].p;
      for (const auto& v : pl)
        if (std::abs(v.p - pl[0].p) > std::abs(far - pl[0].p)) far = v.p;
      const cplx dir = std::abs(far - pl[0].p) > 0.0 ? (far - pl[0].p) / std::abs(far - pl[0].p)
                                                     : cplx{1.0, 0.0};
      double lo = 1e300, hi = -1e300;
      cplx plo = pl[0].p, phi = pl[0].p;
      for (const auto& v : pl) {
        const double u = std::real(std::conj(dir) * v.p);
        if (u < lo) {
          lo = u;
          plo = v.p;
        }
        if (u > hi) {
          hi = u;
          phi = v.p;
        }
      }
      curve.degen_lo = plo;
      curve.degen_hi = phi;
    }
  }

  return curve;
}

MembershipResult membership(const BoundaryCurve& curve, cplx z, const Tolerances& tol) {
  if (curve.degenerate) {
    const double d = point_segment_dist(z, curve.degen_lo, curve.degen_hi);
    return {d <= tol.membership ? Region::Boundary : Region::Exterior, d};
  }
  const auto& pl = curve.polyline;
  const int m = static_cast<int>(pl.size());
  bool inside = true;
  double min_altitude = 1e300;
  double min_segdist = 1e300;
  for (int i = 0; i < m; ++i) {
    const cplx p = pl[i].p;
    const cplx q = pl[(i + 1) % m].p;
    const cplx e = q - p;
    const double len = std::abs(e);
    min_segdist = std::min(min_segdist, point_segment_dist(z, p, q));
    if (len <= 0.0) continue;
    const double alt = cross2(e, z - p) / len;  // positive on the inner side
    if (alt < 0.0) inside = false;
    min_altitude = std::min(min_altitude, alt);
  }
  const double sd = inside ? -min_altitude : min_segdist;

  // the polyline bulges inward between vertices, so near the fence the
  // chordal verdict is off by the sagitta; settle it with the exact support
  // margin sup_theta Re(e^{-i theta} z) - h(theta), which equals the signed
  // distance on both sides of the boundary of a convex set
  const double chord_guard = 1e-3 * curve.scale;
  if (std::abs(sd) <= chord_guard && !curve.samples.empty()) {
    const int ms = static_cast<int>(curve.samples.size());
    int bi = 0;
    double bm = -1e300;
    for (int i = 0; i < ms; ++i) {
      const SupportPoint& s = curve.samples[i];
      const double mg = std::cos(s.theta) * std::real(z) + std::sin(s.theta) * std::imag(z) -
                        s.lambda_max;
      if (mg > bm) {
        bm = mg;
        bi = i;
      }
    }
    double lo = curve.samples[(bi + ms - 1) % ms].theta;
    double hi = curve.samples[(bi + 1) % ms].theta;
    const double th_b = curve.samples[bi].theta;
    if (lo > th_b) lo -= kTwoPi;
    if (hi < th_b) hi += kTwoPi;
    const auto margin = [&](double th) {
      return std::cos(th) * std::real(z) + std::sin(th) * std::imag(z) -
             support_data(curve.a, th, tol).lambda_max;
    };
    double sd_ref = bm;
    for (int round = 0; round < 5; ++round) {
      const int grid = 32;
      int bj = 0;
      double bv = -1e300;
      for (int j = 0; j <= grid; ++j) {
        const double th = lo + (hi - lo) * j / grid;
        const double mg = margin(th);
        if (mg > bv) {
          bv = mg;
          bj = j;
        }
      }
      const double w = (hi - lo) / grid;
      const double c = lo + w * bj;
      lo = c - w;
      hi = c + w;
      sd_ref = bv;
    }
    if (std::abs(sd_ref) <= tol.membership) return {Region::Boundary, sd_ref};
    return {sd_ref < 0.0 ? Region::Interior : Region::Exterior, sd_ref};
  }

  if (std::abs(sd) <= tol.membership) return {Region::Boundary, sd};
  return {sd < 0.0 ? Region::Interior : Region::Exterior, sd};
}

BoundaryClass classify_point(const BoundaryCurve& curve, cplx z, const Tolerances& tol) {
  const MembershipResult mem = membership(curve, z, tol);
  if (mem.region != Region::Boundary)
    throw Error(ErrorCode::PointNotOnBoundary,
                "signed distance " + std::to_string(mem.signed_distance));

  if (curve.degenerate) {
    const bool at_end = std::abs(z - curve.degen_lo) <= tol.membership ||
                        std::abs(z - curve.degen_hi) <= tol.membership;
    return {at_end ? PointKind::Corner : PointKind::FlatInterior, SideKind::Segment,
            SideKind::Segment};
  }

  SideKind incoming = SideKind::Arc;
  SideKind outgoing = SideKind::Arc;
  bool interior_of_flat = false;
  for (const FlatSegment& f : curve.flats) {
    const double d = point_segment_dist(z, f.p_lo, f.p_hi);
    if (d > tol.membership) continue;
    const double d_lo = std::abs(z - f.p_lo);
    const double d_hi = std::abs(z - f.p_hi);
    if (d_lo <= tol.membership) outgoing = SideKind::Segment;  // flat leaves z CCW
    if (d_hi <= tol.membership) incoming = SideKind::Segment;  // flat arrives at z
    if (d_lo > tol.membership && d_hi > tol.membership) {
      interior_of_flat = true;
      incoming = outgoing = SideKind::Segment;
    }
  }

  for (const CornerPoint& c : curve.corners)
    if (std::abs(z - c.z) <= tol.membership) return {PointKind::Corner, incoming, outgoing};
  if (interior_of_flat) return {PointKind::FlatInterior, incoming, outgoing};
  return {PointKind::Round, incoming, outgoing};
}

bool is_convexoid(const ComplexMatrix& a, double tol) {
  const std::vector<cplx> eigs = spectrum(a);
  const Tolerances t;
  const int grid = 1024;
  for (int j = 0; j < grid; ++j) {
    const double theta = kTwoPi * j / grid;
    const double h = hermitian_eig(hermitian_part(a, theta), t).values[0];
    double hs = -1e300;
    for (const cplx mu : eigs)
      hs = std::max(hs, std::real(std::polar(1.0, -theta) * mu));
    if (h > hs + tol) return false;
  }
  return true;
}

bool is_normal(const ComplexMatrix& a) {
  const ComplexMatrix adj = a.adjoint();
  const double f = a.frobenius();
  return ((a * adj) - (adj * a)).frobenius() <= 1e-12 * f * f;
}

double perimeter(const BoundaryCurve& curve) {
  const auto& pl = curve.polyline;
  const int m = static_cast<int>(pl.size());
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += std::abs(pl[(i + 1) % m].p - pl[i].p);
  return s;
}

PolyVertex boundary_at_real(const BoundaryCurve& curve, double alpha, bool upper,
                            const Tolerances& tol) {
  const ComplexMatrix& a = curve.a;
  const double right = hermitian_eig(hermitian_part(a, 0.0), tol).values[0];
  const double left = -hermitian_eig(hermitian_part(a, M_PI), tol).values[0];
  if (alpha < left - 1e-9 || alpha > right + 1e-9)
    throw Error(ErrorCode::InvalidArgument, "real part outside the range extent");
  const double target = std::clamp(alpha, left, right);

  // on the upper arc Re decreases as theta runs 0..pi; mirrored below
  double lo = upper ? 0.0 : M_PI;
  double hi = upper ? M_PI : kTwoPi;
  PolyVertex best{cplx{target, 0.0}, lo};
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const SupportPoint sp = support_data(a, mid, tol);
    if (sp.multiplicity >= 2) {
      const cplx p0 = sp.points[0];
      const cplx p1 = sp.points[1];
      const double x0 = p0.real();
      const double x1 = p1.real();
      if ((target - x0) * (target - x1) <= 0.0 && std::abs(x1 - x0) > 0.0) {
        const double u = (target - x0) / (x1 - x0);
        return {p0 + u * (p1 - p0), mid};
      }
      const double xgo = upper ? std::min(x0, x1) : std::max(x0, x1);
      if ((upper && xgo > target) || (!upper && xgo < target))
        lo = mid;
      else
        hi = mid;
      continue;
    }
    const cplx p = sp.points[0];
    best = {p, mid};
    if (std::abs(p.real() - target) <= 1e-13 * curve.scale) return best;
    const bool go_later = upper ? (p.real() > target) : (p.real() < target);
    if (go_later)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return best;
}

PolyVertex walk_boundary(const BoundaryCurve& curve, cplx from, double arc_length, bool ccw,
                         const Tolerances& tol) {
  if (curve.degenerate)
    throw Error(ErrorCode::ArcNotOnBoundary, "degenerate range has no arcs to walk");
  const auto& pl = curve.polyline;
  const int m = static_cast<int>(pl.size());
  const double total = perimeter(curve);
  double s = std::fmod(std::abs(arc_length), total);

  // locate the start: nearest point of the closed polyline
  int e0 = 0;
  double u0 = 0.0, bestd = 1e300;
  for (int i = 0; i < m; ++i) {
    const cplx p = pl[i].p;
    const cplx q = pl[(i + 1) % m].p;
    const cplx ab = q - p;
    const double len2 = std::norm(ab);
    double u = len2 > 0.0 ? std::clamp(std::real(std::conj(ab) * (from - p)) / len2, 0.0, 1.0)
                          : 0.0;
    const double d = std::abs(from - (p + u * ab));
    if (d < bestd) {
      bestd = d;
      e0 = i;
      u0 = u;
    }
  }

  int e = e0;
  double u = u0;
  for (int hops = 0; hops <= 2 * m && s > 0.0; ++hops) {
    const cplx p = pl[e].p;
    const cplx q = pl[(e + 1) % m].p;
    const double len = std::abs(q - p);
    if (ccw) {
      const double room = (1.0 - u) * len;
      if (s <= room) {
        u += s / std::max(len, 1e-300);
        s = 0.0;
      } else {
        s -= room;
        e = (e + 1) % m;
        u = 0.0;
      }
    } else {
      const double room = u * len;
      if (s <= room) {
        u -= s / std::max(len, 1e-300);
        s = 0.0;
      } else {
        s -= room;
        e = (e + m - 1) % m;
        u = 1.0;
      }
    }
  }

  const cplx pa = pl[e].p;
  const cplx pb = pl[(e + 1) % m].p;
  const cplx landing = pa + u * (pb - pa);

  // exact when the landing edge lies on a flat
  for (const FlatSegment& f : curve.flats)
    if (point_segment_dist(landing, f.p_lo, f.p_hi) <= 1e-7 * curve.scale)
      return {landing, f.theta};

  double ta = pl[e].theta;
  double tb = pl[(e + 1) % m].theta;
  if (tb < ta) tb += kTwoPi;
  const double theta = wrap_angle(ta + u * (tb - ta));
  const SupportPoint sp = support_data(curve.a, theta, tol);
  cplx snapped = sp.points[0];
  for (const cplx cand : sp.points)
    if (std::abs(cand - landing) < std::abs(snapped - landing)) snapped = cand;
  return {snapped, theta};
}

namespace {

const char* kind_name(PointKind k) {
  switch (k) {
    case PointKind::Corner: return "corner";
    case PointKind::FlatInterior: return "flat";
    case PointKind::Round: return "round";
  }
  return "round";
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string boundary_csv(const BoundaryCurve& curve, const Tolerances& tol) {
  std::string out = "theta,re,im,multiplicity,class\n";
  for (const SupportPoint& sp : curve.samples) {
    for (const cplx p : sp.points) {
      PointKind kind = PointKind::Round;
      try {
        kind = classify_point(curve, p, tol).kind;
      } catch (const Error&) {
        // a point of a degenerate sliver can sit just off the polyline
      }
      out += fmt17(sp.theta);
      out += ',';
      out += fmt17(p.real());
      out += ',';
      out += fmt17(p.imag());
      out += ',';
      out += std::to_string(sp.multiplicity);
      out += ',';
      out += kind_name(kind);
      out += '\n';
    }
  }
  return out;
}

std::string boundary_summary_json(const BoundaryCurve& curve) {
  nlohmann::json j;
  j["degenerate"] = curve.degenerate;
  j["samples"] = curve.samples.size();
  j["perimeter"] = perimeter(curve);
  nlohmann::json flats = nlohmann::json::array();
  for (const FlatSegment& f : curve.flats) {
    nlohmann::json e;
    e["theta"] = f.theta;
    e["p_lo"] = {f.p_lo.real(), f.p_lo.imag()};
    e["p_hi"] = {f.p_hi.real(), f.p_hi.imag()};
    e["length"] = f.length();
    flats.push_back(e);
  }
  j["flats"] = flats;
  nlohmann::json corners = nlohmann::json::array();
  for (const CornerPoint& c : curve.corners) {
    nlohmann::json e;
    e["z"] = {c.z.real(), c.z.imag()};
    e["theta_lo"] = c.theta_lo;
    e["theta_hi"] = c.theta_hi;
    corners.push_back(e);
  }
  j["corners"] = corners;
  if (curve.degenerate) {
    j["extreme_points"] = {{curve.degen_lo.real(), curve.degen_lo.imag()},
                           {curve.degen_hi.real(), curve.degen_hi.imag()}};
  }
  return j.dump(2);
}

}  // namespace fov
