#include <gtest/gtest.h>

#include <random>

#include "curvehull/pipeline.hpp"

using namespace curvehull;

namespace {

const std::vector<std::string> XY{"x", "y"};

CurveJob plane_job(const std::string& f, std::vector<std::string> gens, double lo, double hi) {
  CurveJob j;
  j.variables = XY;
  j.curve = parse_poly(f, XY);
  for (const auto& g : gens) j.generators.push_back(parse_poly(g, XY));
  j.box = {{"x", {lo, hi}}};
  return j;
}

bool nonincreasing(const std::vector<LevelRecord>& levels) {
  for (size_t i = 1; i < levels.size(); ++i)
    if (levels[i].gap > levels[i - 1].gap + 1e-6) return false;
  return true;
}

}  // namespace

TEST(Presentation, GoldenRingAndL) {
  const Presentation pr = augment_presentation(golden_job());
  ASSERT_EQ(pr.ring->size(), 2u);
  EXPECT_EQ(pr.ring->component(0).kind(), ComponentKind::PlaneQuotient);
  EXPECT_EQ(pr.ring->component(1).kind(), ComponentKind::Point);
  EXPECT_EQ(pr.L.size(), 3u);
  const auto XZ = pr.ring->component(0).plane().variables();
  RingElement u = pr.ring->lift(0, parse_poly("x", XZ));
  RingElement v = pr.ring->lift(0, parse_poly("z", XZ));
  EXPECT_EQ(pr.phi[0], u);
  EXPECT_EQ(pr.phi[1], u * v);
}

TEST(Presentation, LowerDimensionalHullAsksToRecoordinate) {
  CurveJob j;
  j.variables = XY;
  j.isolated_points = {{Rational(0), Rational(0)}, {Rational(3), Rational(0)}};
  try {
    augment_presentation(j);
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("re-coordinate"), std::string::npos);
  }
}

TEST(Presentation, ShearedCurveKeepsAmbientCoordinates) {
  // x y = 1 needs the shear x -> x + y; phi must still recover x and y
  const CurveJob j = plane_job("x*y-1", {"x"}, 0.2, 5);
  const Presentation pr = augment_presentation(j);
  const SampleCloud c = sample_job(pr, j.box, 100);
  ASSERT_FALSE(c.empty());
  for (const auto& p : c.points) {
    EXPECT_NEAR(p[0] * p[1], 1.0, 1e-8);
    EXPECT_GE(p[0], -1e-9);
  }
}

TEST(Golden, ExampleIsExactAndMatchesPrintedMatrix) {
  const CertReport r = run_example_golden();
  EXPECT_EQ(r.status, CertStatus::Exact) << r.reason;
  EXPECT_EQ(r.block_sizes, std::vector<size_t>{4});
  EXPECT_LE(r.gap, 1e-3);
  EXPECT_EQ(r.directions.size(), 64u);
}

TEST(Golden, TamperedEntryIsReported) {
  const CurveJob job = golden_job();
  const MomentSDP m = assemble_moment_sdp(explicit_spec(augment_presentation(job), job.subspaces));
  Pencil p = export_pencil(m);
  EXPECT_TRUE(golden_mismatches(m, p).empty());
  p.blocks[0].constant(1, 1) += 1;
  const auto diff = golden_mismatches(m, p);
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_NE(diff[0].find("(1,1)"), std::string::npos);
}

TEST(LevelSearch, CircleExactAtLevelOne) {
  const CertReport r = level_search(plane_job("x^2+y^2-1", {}, -1, 1), 4, 1e-3);
  EXPECT_EQ(r.status, CertStatus::Exact);
  EXPECT_EQ(r.level, 1);
  EXPECT_EQ(r.block_sizes, std::vector<size_t>{3});
  EXPECT_FALSE(membership({0.8, 0.7}, *r.pencil).status == MemberStatus::Inside);
  EXPECT_EQ(membership({0.5, 0.5}, *r.pencil).status, MemberStatus::Inside);
}

TEST(LevelSearch, CubicOvalGapsNonincreasingAndExact) {
  const CurveJob j = plane_job("y^2-x^3+x", {"-x^2-x"}, -2, 2);
  const CertReport r = level_search(j, 4, 1e-3, {.stop_at_exact = false});
  ASSERT_EQ(r.levels.size(), 4u);
  EXPECT_TRUE(nonincreasing(r.levels));
  EXPECT_EQ(r.status, CertStatus::Exact);
  EXPECT_LE(r.gap, 1e-3);
  EXPECT_EQ(r.levels[1].block_sizes, (std::vector<size_t>{5, 3}));
}

TEST(LevelSearch, TwoIsolatedPointsGiveTheSegment) {
  CurveJob j;
  j.variables = {"x"};
  j.isolated_points = {{Rational(0)}, {Rational(3)}};
  const CertReport r = level_search(j, 2, 1e-3);
  EXPECT_EQ(r.status, CertStatus::Exact);
  EXPECT_EQ(membership({1.5}, *r.pencil).status, MemberStatus::Inside);
  EXPECT_EQ(membership({3.0}, *r.pencil).status, MemberStatus::Inside);
  EXPECT_EQ(membership({3.1}, *r.pencil).status, MemberStatus::Outside);
  EXPECT_EQ(membership({-0.1}, *r.pencil).status, MemberStatus::Outside);
}

TEST(LevelSearch, NoncompactInputIsFlagged) {
  const CertReport r = level_search(plane_job("y-x^2", {}, -3, 3), 2, 1e-3);
  EXPECT_EQ(r.status, CertStatus::Failed);
  EXPECT_NE(r.reason.find("noncompact"), std::string::npos);
}

TEST(LevelSearch, DefaultLevelBlockSizes) {
  const Presentation pr = augment_presentation(plane_job("x^2+y^2-1", {"x+1"}, -1, 1));
  for (int d = 1; d <= 4; ++d) {
    const MomentSDP m = assemble_moment_sdp(default_level_spec(pr, d));
    ASSERT_EQ(m.blocks.size(), 2u);
    EXPECT_EQ(m.blocks[0].size(), static_cast<size_t>(2 * d + 1));
    EXPECT_EQ(m.blocks[1].size(), static_cast<size_t>(2 * (d - 1) + 1));
  }
}

TEST(JobInvariants, IsolatedPointOffTheCurve) {
  CurveJob j = golden_job();
  j.isolated_points = {{Rational(1, 2), Rational(0)}};
  EXPECT_THROW(level_search(j, 1, 1e-3), DomainError);
}

TEST(JobInvariants, NonIsolatedPoint) {
  CurveJob j = golden_job();
  j.isolated_points = {{Rational(1), Rational(0)}};
  EXPECT_THROW(level_search(j, 1, 1e-3), DomainError);
}

TEST(Noncompact, ParabolaEpigraph) {
  const CertReport r = closed_hull_noncompact(plane_job("y-x^2", {}, -3, 3), 4, 1e-3);
  ASSERT_EQ(r.fan.rays.size(), 1u);
  EXPECT_NEAR(r.fan.rays[0].direction[0], 0.0, 1e-9);
  EXPECT_NEAR(r.fan.rays[0].direction[1], 1.0, 1e-9);
  EXPECT_EQ(r.status, CertStatus::Exact) << r.reason;
  ASSERT_TRUE(r.pencil && r.cone_pencil && r.slice_pencil);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-3, 3), uy(-2, 10);
  int checked = 0, wrong = 0;
  while (checked < 100) {
    const double x = ux(rng), y = uy(rng);
    if (std::abs(y - x * x) < 1e-2) continue;
    ++checked;
    const bool inside = membership({x, y}, *r.pencil).status == MemberStatus::Inside;
    if (inside != (y > x * x)) ++wrong;
  }
  EXPECT_EQ(wrong, 0);
}

TEST(Noncompact, HyperbolaBranch) {
  const CertReport r = closed_hull_noncompact(plane_job("x*y-1", {"x"}, -4, 4), 4, 1e-3);
  ASSERT_EQ(r.fan.rays.size(), 2u);
  EXPECT_EQ(r.status, CertStatus::Exact) << r.reason;
  EXPECT_TRUE(r.slice_pencil.has_value());
  ASSERT_TRUE(r.pencil);
  EXPECT_EQ(membership({2.0, 2.0}, *r.pencil).status, MemberStatus::Inside);
  EXPECT_EQ(membership({50.0, 0.1}, *r.pencil).status, MemberStatus::Inside);
  EXPECT_EQ(membership({0.5, 0.5}, *r.pencil).status, MemberStatus::Outside);
  EXPECT_EQ(membership({-1.0, 3.0}, *r.pencil).status, MemberStatus::Outside);
}

TEST(Noncompact, HullWithALineIsRejected) {
  EXPECT_THROW(closed_hull_noncompact(plane_job("x*y-1", {}, -4, 4), 2, 1e-3), ConstructionError);
}

TEST(Noncompact, CompactInputAgreesWithLevelSearch) {
  const CurveJob j = plane_job("y^2-x^3+x", {"-x^2-x"}, -2, 2);
  const CertReport a = level_search(j, 4, 1e-3);
  const CertReport b = closed_hull_noncompact(j, 4, 1e-3);
  EXPECT_EQ(a.status, b.status);
  EXPECT_NEAR(a.gap, b.gap, 1e-6);
  EXPECT_TRUE(b.fan.empty());
  ASSERT_TRUE(b.slice_pencil);
}

TEST(VirtualCompactness, BoundedCoordinateOnHyperbolaBranch) {
  const CurveJob j = plane_job("x*y-1", {"x-1"}, -4, 4);
  EXPECT_TRUE(virtual_compactness_witness(j, parse_poly("y", XY)).verified);
  const WitnessResult unb = virtual_compactness_witness(j, parse_poly("x", XY));
  EXPECT_FALSE(unb.verified);
  EXPECT_FALSE(unb.reason.empty());
  const WitnessResult cst = virtual_compactness_witness(j, parse_poly("x*y", XY));
  EXPECT_FALSE(cst.verified);
  EXPECT_NE(cst.reason.find("constant"), std::string::npos);
}

TEST(VirtualCompactness, UnboundedBranchesHaveNoWitness) {
  EXPECT_FALSE(virtual_compactness_witness(plane_job("y-x^2", {}, -4, 4), parse_poly("x", XY)).verified);
  EXPECT_FALSE(virtual_compactness_witness(plane_job("y^2-x^3+x", {"x-1"}, -4, 4), parse_poly("x", XY)).verified);
}

TEST(Noncompact, ChartPrefersTheWidestPositiveFunctional) {
  const CurveJob j = plane_job("x*y-1", {"x"}, -4, 4);
  const Chart ch = noncompact_chart(j, recession_fan(j));
  EXPECT_EQ(ch.w[0], Rational(1));
  EXPECT_EQ(ch.w[1], Rational(707107, 1000000));
  EXPECT_EQ(ch.w[2], Rational(707107, 1000000));
}

TEST(Noncompact, ParabolaWithSmallChartDelta) {
  CurveJob j = plane_job("y-x^2", {}, -3, 3);
  j.chart_delta = 1e-2;
  const CertReport r = closed_hull_noncompact(j, 4, 1e-3);
  EXPECT_EQ(r.w, (std::vector<Rational>{Rational(1), Rational(0), Rational(1, 100)}));
  EXPECT_EQ(r.status, CertStatus::Exact);
  EXPECT_EQ(membership({0.0, 50.0}, *r.pencil).status, MemberStatus::Inside);
  EXPECT_EQ(membership({2.0, 3.0}, *r.pencil).status, MemberStatus::Outside);
}
