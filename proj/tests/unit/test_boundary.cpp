#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "fovkit/boundary.hpp"
#include "fovkit/errors.hpp"
#include "fovkit/matcore.hpp"
#include "fovkit/rng.hpp"
#include "../oracles.hpp"

#include <json.hpp>

using fov::BoundaryCurve;
using fov::ComplexMatrix;
using fov::cplx;
using fov::CVec;
using fov::PointKind;
using fov::Region;
using fov::SideKind;
using fov::Tolerances;
using fov::TraceOptions;

namespace {

ComplexMatrix shift2x2() {
  ComplexMatrix a(2);
  a.at(0, 1) = 2.0;
  return a;
}

ComplexMatrix diag_matrix(const std::vector<cplx>& d) {
  ComplexMatrix a(static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) a.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return a;
}

// two rotated shift blocks glued on the diagonal; both blocks share the top
// eigenvalue of the real part, so theta = 0 supports a vertical segment
ComplexMatrix reducible4x4(double b, double k) {
  ComplexMatrix a(4);
  a.at(0, 1) = cplx{0.0, k};
  a.at(1, 0) = cplx{0.0, k};
  a.at(1, 1) = cplx{1.0, b};
  a.at(2, 3) = cplx{0.0, k};
  a.at(3, 2) = cplx{0.0, k};
  a.at(3, 3) = cplx{1.0, -b};
  return a;
}

std::vector<cplx> polyline_points(const BoundaryCurve& c) {
  std::vector<cplx> pts;
  for (const auto& v : c.polyline) pts.push_back(v.p);
  return pts;
}

}  // namespace

TEST_SUITE_BEGIN("boundary");

TEST_CASE("support data of the shift matrix lies on the unit circle") {
  const ComplexMatrix a = shift2x2();
  for (int j = 0; j < 37; ++j) {
    const double theta = 2.0 * M_PI * j / 37.0;
    const fov::SupportPoint sp = fov::support_data(a, theta);
    CHECK(sp.multiplicity == 1);
    CHECK(sp.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sp.points[0] - std::polar(1.0, theta)) <= 1e-12);
    // the generating vector reproduces the boundary point
    CHECK(std::abs(fov::fov_value(a, sp.point_generators[0]) - sp.points[0]) <= 1e-12);
    CHECK(std::abs(fov::vec_norm(sp.point_generators[0].rep()) - 1.0) <= 1e-14);
  }
}

TEST_CASE("support data reports the segment of a reducible pair") {
  const ComplexMatrix a = reducible4x4(1.0, 1.0);
  const fov::SupportPoint sp = fov::support_data(a, 0.0);
  CHECK(sp.multiplicity == 2);
  REQUIRE(sp.segment.has_value());
  CHECK(std::abs(sp.segment->first - cplx{1.0, -1.0}) <= 1e-10);
  CHECK(std::abs(sp.segment->second - cplx{1.0, 1.0}) <= 1e-10);
  // offsets are ordered along the support line
  CHECK(std::imag(sp.points[0]) < std::imag(sp.points[1]));
  // lifted generators reproduce the endpoints exactly
  CHECK(std::abs(fov::fov_value(a, sp.point_generators[0]) - sp.segment->first) <= 1e-10);
  CHECK(std::abs(fov::fov_value(a, sp.point_generators[1]) - sp.segment->second) <= 1e-10);
}

TEST_CASE("disk boundary: trace of the 2x2 shift") {
  const ComplexMatrix a = shift2x2();
  const BoundaryCurve curve = fov::trace_boundary(a);
  CHECK(!curve.degenerate);
  CHECK(curve.flats.empty());
  CHECK(curve.corners.empty());
  CHECK(curve.samples.size() == 720);
  for (const auto& v : curve.polyline) CHECK(std::abs(std::abs(v.p) - 1.0) <= 1e-8);
  CHECK(std::abs(fov::perimeter(curve) - 2.0 * M_PI) <= 1e-4);

  CHECK(fov::membership(curve, cplx{0.0, 0.0}).region == Region::Interior);
  CHECK(fov::membership(curve, cplx{0.0, 0.0}).signed_distance ==
        doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(fov::membership(curve, cplx{1.0, 0.0}).region == Region::Boundary);
  CHECK(fov::membership(curve, cplx{1.2, 0.0}).region == Region::Exterior);
  CHECK(fov::membership(curve, cplx{1.2, 0.0}).signed_distance ==
        doctest::Approx(0.2).epsilon(1e-4));

  const fov::BoundaryClass cls = fov::classify_point(curve, cplx{0.0, 1.0});
  CHECK(cls.kind == PointKind::Round);
  CHECK(cls.incoming == SideKind::Arc);
  CHECK(cls.outgoing == SideKind::Arc);
  CHECK_THROWS_AS(fov::classify_point(curve, cplx{0.5, 0.0}), fov::Error);

  CHECK(!fov::is_normal(a));
  CHECK(!fov::is_convexoid(a));
}

TEST_CASE("normal matrix: polygon with exact corners and flats") {
  const ComplexMatrix a = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const BoundaryCurve curve = fov::trace_boundary(a);
  CHECK(!curve.degenerate);
  REQUIRE(curve.flats.size() == 3);
  REQUIRE(curve.corners.size() == 3);

  // corner values and normal cones
  std::vector<cplx> cz;
  for (const auto& c : curve.corners) cz.push_back(c.z);
  std::sort(cz.begin(), cz.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  CHECK(std::abs(cz[0] - cplx{0, 0}) <= 1e-9);
  CHECK(std::abs(cz[1] - cplx{0, 1}) <= 1e-9);
  CHECK(std::abs(cz[2] - cplx{1, 0}) <= 1e-9);
  for (const auto& c : curve.corners) {
    if (std::abs(c.z - cplx{0, 0}) > 1e-9) continue;
    CHECK(c.theta_lo == doctest::Approx(M_PI).epsilon(1e-5));
    CHECK(c.theta_hi == doctest::Approx(1.5 * M_PI).epsilon(1e-5));
    // corner generator is the invariant eigenvector
    CVec e1(3, cplx{0, 0});
    e1[0] = 1.0;
    CHECK(fov::projective_distance(c.generator.rep(), e1) <= 1e-8);
  }

  // flat normals at pi/4, pi, 3pi/2 with exact endpoints
  std::vector<double> thetas;
  for (const auto& f : curve.flats) thetas.push_back(f.theta);
  std::sort(thetas.begin(), thetas.end());
  CHECK(thetas[0] == doctest::Approx(M_PI / 4).epsilon(1e-9));
  CHECK(thetas[1] == doctest::Approx(M_PI).epsilon(1e-9));
  CHECK(thetas[2] == doctest::Approx(1.5 * M_PI).epsilon(1e-9));
  for (const auto& f : curve.flats) {
    CHECK(std::abs(fov::fov_value(a, f.gen_lo) - f.p_lo) <= 1e-10);
    CHECK(std::abs(fov::fov_value(a, f.gen_hi) - f.p_hi) <= 1e-10);
  }

  // two-sided distance between the traced polyline and the true triangle
  const std::vector<cplx> tri = {cplx{0, 0}, cplx{1, 0}, cplx{0, 1}};
  CHECK(oracle::hausdorff(polyline_points(curve), tri) <= 1e-8);

  CHECK(fov::membership(curve, cplx{0.25, 0.25}).region == Region::Interior);
  const fov::BoundaryClass edge = fov::classify_point(curve, cplx{0.5, 0.0});
  CHECK(edge.kind == PointKind::FlatInterior);
  CHECK(edge.incoming == SideKind::Segment);
  CHECK(edge.outgoing == SideKind::Segment);
  const fov::BoundaryClass corner = fov::classify_point(curve, cplx{1.0, 0.0});
  CHECK(corner.kind == PointKind::Corner);
  CHECK(corner.incoming == SideKind::Segment);
  CHECK(corner.outgoing == SideKind::Segment);

  CHECK(fov::is_normal(a));
  CHECK(fov::is_convexoid(a));
}

TEST_CASE("rotated similarity copy of a polygon keeps exact geometry") {
  fov::Rng rng(2026);
  const ComplexMatrix d = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const ComplexMatrix u = oracle::random_unitary(3, rng);
  const double phi = 0.7381;
  const ComplexMatrix a = (u.adjoint() * d * u).scaled(std::polar(1.0, phi));
  const BoundaryCurve curve = fov::trace_boundary(a);

  std::vector<cplx> tri = {cplx{0, 0}, cplx{1, 0}, cplx{0, 1}};
  for (cplx& z : tri) z *= std::polar(1.0, phi);
  CHECK(curve.flats.size() == 3);
  CHECK(curve.corners.size() == 3);
  CHECK(oracle::hausdorff(polyline_points(curve), tri) <= 1e-8);

  std::vector<cplx> cz;
  for (const auto& c : curve.corners) cz.push_back(c.z);
  for (cplx v : tri) {
    double best = 1e300;
    for (cplx got : cz) best = std::min(best, std::abs(got - v));
    CHECK(best <= 1e-9);
  }
}

TEST_CASE("reducible pair: vertical flat with endpoints off the grid") {
  const ComplexMatrix a = reducible4x4(1.0, 1.0);
  const BoundaryCurve curve = fov::trace_boundary(a);
  CHECK(!curve.degenerate);
  bool found = false;
  for (const auto& f : curve.flats) {
    if (std::abs(f.p_lo - cplx{1.0, -1.0}) <= 1e-9 &&
        std::abs(f.p_hi - cplx{1.0, 1.0}) <= 1e-9) {
      found = true;
      CHECK(f.theta == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
  CHECK(found);

  // flat endpoint adjoining an arc is a smooth junction, not a corner
  const fov::BoundaryClass hi = fov::classify_point(curve, cplx{1.0, 1.0});
  CHECK(hi.kind == PointKind::Round);
  CHECK(hi.incoming == SideKind::Segment);
  CHECK(hi.outgoing == SideKind::Arc);
  const fov::BoundaryClass lo = fov::classify_point(curve, cplx{1.0, -1.0});
  CHECK(lo.kind == PointKind::Round);
  CHECK(lo.incoming == SideKind::Arc);
  CHECK(lo.outgoing == SideKind::Segment);
  const fov::BoundaryClass mid = fov::classify_point(curve, cplx{1.0, 0.0});
  CHECK(mid.kind == PointKind::FlatInterior);
}

TEST_CASE("classification flags agree with the point kind") {
  // not Round exactly when both sides are segments
  const ComplexMatrix tri = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const BoundaryCurve ct = fov::trace_boundary(tri);
  const ComplexMatrix red = reducible4x4(1.0, 1.0);
  const BoundaryCurve cr = fov::trace_boundary(red);
  const std::vector<std::pair<const BoundaryCurve*, cplx>> probes = {
      {&ct, cplx{0.5, 0.0}}, {&ct, cplx{1.0, 0.0}},  {&ct, cplx{0.5, 0.5}},
      {&cr, cplx{1.0, 1.0}}, {&cr, cplx{1.0, -1.0}}, {&cr, cplx{1.0, 0.0}},
  };
  for (const auto& pr : probes) {
    const fov::BoundaryClass cls = fov::classify_point(*pr.first, pr.second);
    const bool both_seg =
        cls.incoming == SideKind::Segment && cls.outgoing == SideKind::Segment;
    CHECK((cls.kind != PointKind::Round) == both_seg);
  }
}

TEST_CASE("hermitian matrix degenerates to a real segment") {
  const ComplexMatrix a = diag_matrix({cplx{0.3, 0}, cplx{2.5, 0}, cplx{1.0, 0}});
  const BoundaryCurve curve = fov::trace_boundary(a);
  CHECK(curve.degenerate);
  const double lo = std::min(curve.degen_lo.real(), curve.degen_hi.real());
  const double hi = std::max(curve.degen_lo.real(), curve.degen_hi.real());
  CHECK(lo == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(hi == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(std::abs(curve.degen_lo.imag()) <= 1e-10);

  CHECK(fov::membership(curve, cplx{1.0, 0.0}).region == Region::Boundary);
  CHECK(fov::membership(curve, cplx{1.0, 0.1}).region == Region::Exterior);
  CHECK(fov::membership(curve, cplx{3.0, 0.0}).region == Region::Exterior);
  CHECK(fov::classify_point(curve, cplx{0.3, 0.0}).kind == PointKind::Corner);
  CHECK(fov::classify_point(curve, cplx{1.7, 0.0}).kind == PointKind::FlatInterior);
  CHECK(fov::is_normal(a));
}

TEST_CASE("scalar matrix degenerates to a point") {
  const cplx alpha{2.0, 3.0};
  const ComplexMatrix a = diag_matrix({alpha, alpha});
  const BoundaryCurve curve = fov::trace_boundary(a);
  CHECK(curve.degenerate);
  CHECK(std::abs(curve.degen_lo - alpha) <= 1e-12);
  CHECK(std::abs(curve.degen_hi - alpha) <= 1e-12);
  CHECK(fov::membership(curve, alpha).region == Region::Boundary);
  CHECK(fov::membership(curve, alpha + 0.1).region == Region::Exterior);
  CHECK(fov::classify_point(curve, alpha).kind == PointKind::Corner);
}

TEST_CASE("eigenvalues stay inside the traced region") {
  fov::Rng rng(77);
  for (int rep = 0; rep < 4; ++rep) {
    const ComplexMatrix a = oracle::random_matrix(5, rng);
    const BoundaryCurve curve = fov::trace_boundary(a);
    for (const cplx mu : fov::spectrum(a)) {
      const fov::MembershipResult m = fov::membership(curve, mu);
      CHECK((m.region != Region::Exterior || m.signed_distance <= 1e-7));
    }
  }
}

TEST_CASE("every polyline vertex obeys every support line") {
  fov::Rng rng(91);
  const ComplexMatrix a = oracle::random_matrix(6, rng);
  const BoundaryCurve curve = fov::trace_boundary(a);
  for (int j = 0; j < 90; ++j) {
    const double theta = 2.0 * M_PI * j / 90.0;
    const double h = fov::support_data(a, theta).lambda_max;
    for (const auto& v : curve.polyline) {
      CHECK(std::real(std::polar(1.0, -theta) * v.p) <= h + 1e-8);
    }
  }
}

TEST_CASE("support function equivariance under scaling and shifting") {
  fov::Rng rng(123);
  ComplexMatrix a = oracle::random_matrix(4, rng);
  a = a.scaled(1.0 / a.frobenius());
  const double phi = 1.234;
  const cplx c{0.3, -0.8};
  ComplexMatrix b = a.scaled(std::polar(1.0, phi));
  for (int i = 0; i < 4; ++i) b.at(i, i) += c;
  for (int j = 0; j < 64; ++j) {
    const double theta = 2.0 * M_PI * j / 64.0;
    const double hb = fov::support_data(b, theta).lambda_max;
    const double ha = fov::support_data(a, theta - phi).lambda_max;
    const double expect = ha + std::real(std::polar(1.0, -theta) * c);
    CHECK(hb == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("support function is invariant under unitary similarity") {
  fov::Rng rng(321);
  ComplexMatrix a = oracle::random_matrix(5, rng);
  a = a.scaled(1.0 / a.frobenius());
  const ComplexMatrix u = oracle::random_unitary(5, rng);
  const ComplexMatrix b = u.adjoint() * a * u;
  for (int j = 0; j < 64; ++j) {
    const double theta = 2.0 * M_PI * j / 64.0 + 0.0123;
    CHECK(fov::support_data(a, theta).lambda_max ==
          doctest::Approx(fov::support_data(b, theta).lambda_max).epsilon(1e-10));
  }
}

TEST_CASE("2x2 boundary matches the ellipse formula") {
  fov::Rng rng(55);
  for (int rep = 0; rep < 3; ++rep) {
    ComplexMatrix a = oracle::random_matrix(2, rng);
    a = a.scaled(1.0 / a.frobenius());
    const oracle::Ellipse e = oracle::ellipse_of(a);
    const BoundaryCurve curve = fov::trace_boundary(a);
    for (const auto& v : curve.polyline) CHECK(oracle::ellipse_defect(e, v.p) <= 1e-7);
    for (int j = 0; j < 32; ++j) {
      const double theta = 2.0 * M_PI * j / 32.0;
      CHECK(fov::support_data(a, theta).lambda_max ==
            doctest::Approx(oracle::ellipse_support(e, theta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("convexoid check separates normal from quadratic behavior") {
  CHECK(fov::is_convexoid(diag_matrix({cplx{1, 1}, cplx{-1, 0}, cplx{0, 2}})));
  ComplexMatrix jordan(3);
  jordan.at(0, 1) = 1.0;
  jordan.at(1, 2) = 1.0;
  CHECK(!fov::is_convexoid(jordan));
  ComplexMatrix t(2);
  t.at(0, 0) = 1.0;
  t.at(0, 1) = 1.0;
  t.at(1, 1) = 2.0;
  CHECK(!fov::is_convexoid(t));
  CHECK(fov::is_convexoid(shift2x2().scaled(0.0)));
}

TEST_CASE("boundary point at prescribed real part") {
  const ComplexMatrix disk = shift2x2();
  const BoundaryCurve cd = fov::trace_boundary(disk);
  const fov::PolyVertex up = fov::boundary_at_real(cd, 0.5, true);
  CHECK(std::abs(up.p - cplx{0.5, std::sqrt(0.75)}) <= 1e-6);
  const fov::PolyVertex dn = fov::boundary_at_real(cd, 0.5, false);
  CHECK(std::abs(dn.p - cplx{0.5, -std::sqrt(0.75)}) <= 1e-6);

  const ComplexMatrix tri = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const BoundaryCurve ct = fov::trace_boundary(tri);
  CHECK(std::abs(fov::boundary_at_real(ct, 0.5, true).p - cplx{0.5, 0.5}) <= 1e-9);
  CHECK(std::abs(fov::boundary_at_real(ct, 0.5, false).p - cplx{0.5, 0.0}) <= 1e-9);
  CHECK_THROWS_AS(fov::boundary_at_real(ct, 1.5, true), fov::Error);
}

TEST_CASE("walking the boundary by arc length") {
  const ComplexMatrix disk = shift2x2();
  const BoundaryCurve cd = fov::trace_boundary(disk);
  const fov::PolyVertex q1 = fov::walk_boundary(cd, cplx{1.0, 0.0}, M_PI / 2, true);
  CHECK(std::abs(q1.p - cplx{0.0, 1.0}) <= 1e-3);
  CHECK(std::abs(std::abs(q1.p) - 1.0) <= 1e-10);  // snapped back onto the curve
  const fov::PolyVertex q2 = fov::walk_boundary(cd, cplx{1.0, 0.0}, M_PI / 2, false);
  CHECK(std::abs(q2.p - cplx{0.0, -1.0}) <= 1e-3);

  const ComplexMatrix tri = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const BoundaryCurve ct = fov::trace_boundary(tri);
  const fov::PolyVertex w1 = fov::walk_boundary(ct, cplx{0.0, 0.0}, 0.5, true);
  CHECK(std::abs(w1.p - cplx{0.5, 0.0}) <= 1e-9);
  CHECK(w1.theta == doctest::Approx(1.5 * M_PI).epsilon(1e-9));
  const fov::PolyVertex w2 =
      fov::walk_boundary(ct, cplx{0.0, 0.0}, 1.0 + std::sqrt(0.5), true);
  CHECK(std::abs(w2.p - cplx{0.5, 0.5}) <= 1e-9);
  const fov::PolyVertex w3 = fov::walk_boundary(ct, cplx{0.0, 0.0}, 0.5, false);
  CHECK(std::abs(w3.p - cplx{0.0, 0.5}) <= 1e-9);
}

TEST_CASE("csv and summary outputs") {
  const ComplexMatrix tri = diag_matrix({cplx{0, 0}, cplx{1, 0}, cplx{0, 1}});
  const BoundaryCurve ct = fov::trace_boundary(tri);
  const std::string csv = fov::boundary_csv(ct);
  CHECK(csv.rfind("theta,re,im,multiplicity,class\n", 0) == 0);
  // every realized boundary value of a polygon is a vertex
  CHECK(csv.find(",corner\n") != std::string::npos);
  CHECK(csv.find(",round\n") == std::string::npos);
  size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  size_t pts = 0;
  for (const auto& sp : ct.samples) pts += sp.points.size();
  CHECK(rows == pts + 1);

  const std::string csv_disk = fov::boundary_csv(fov::trace_boundary(shift2x2()));
  CHECK(csv_disk.find(",round\n") != std::string::npos);
  CHECK(csv_disk.find(",corner\n") == std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(fov::boundary_summary_json(ct));
  CHECK(j.at("degenerate").get<bool>() == false);
  CHECK(j.at("flats").size() == 3);
  CHECK(j.at("corners").size() == 3);
  CHECK(j.at("perimeter").get<double>() == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("tracing is deterministic") {
  fov::Rng rng(2024);
  const ComplexMatrix a = oracle::random_matrix(4, rng);
  const BoundaryCurve c1 = fov::trace_boundary(a);
  const BoundaryCurve c2 = fov::trace_boundary(a);
  REQUIRE(c1.polyline.size() == c2.polyline.size());
  for (size_t i = 0; i < c1.polyline.size(); ++i) {
    CHECK(c1.polyline[i].p == c2.polyline[i].p);
    CHECK(c1.polyline[i].theta == c2.polyline[i].theta);
  }
  CHECK(fov::boundary_csv(c1) == fov::boundary_csv(c2));
}

TEST_CASE("polyline is counterclockwise and convex") {
  fov::Rng rng(440);
  for (int rep = 0; rep < 3; ++rep) {
    const ComplexMatrix a = oracle::random_matrix(3 + rep, rng);
    const BoundaryCurve curve = fov::trace_boundary(a);
    const auto& pl = curve.polyline;
    const int m = static_cast<int>(pl.size());
    REQUIRE(m >= 3);
    double area2 = 0.0;
    for (int i = 0; i < m; ++i)
      area2 += std::imag(std::conj(pl[i].p) * pl[(i + 1) % m].p);
    CHECK(area2 > 0.0);
    // convexity: no right turn sharper than rounding noise
    for (int i = 0; i < m; ++i) {
      const cplx e1 = pl[(i + 1) % m].p - pl[i].p;
      const cplx e2 = pl[(i + 2) % m].p - pl[(i + 1) % m].p;
      const double turn = std::imag(std::conj(e1) * e2);
      CHECK(turn >= -1e-9 * curve.scale * curve.scale);
    }
  }
}

TEST_CASE("sparse non-adaptive trace still closes up") {
  const ComplexMatrix a = shift2x2();
  TraceOptions opt;
  opt.base_samples = 64;
  opt.adaptive = false;
  const BoundaryCurve curve = fov::trace_boundary(a, opt);
  CHECK(curve.samples.size() == 64);
  CHECK(std::abs(fov::perimeter(curve) - 2.0 * M_PI) <= 1e-2);
}

TEST_SUITE_END();
