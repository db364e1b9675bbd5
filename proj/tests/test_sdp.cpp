#include <gtest/gtest.h>

#include <random>

#include "curvehull/sdp.hpp"

namespace sdp = curvehull::sdp;
using sdp::Matrix;
using sdp::Vector;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// The printed 4x4 pencil of the isolated-point example over (xi, eta, a, b, c).
sdp::Block golden_block() {
  sdp::Block b;
  b.constant = Matrix::Zero(4, 4);
  b.constant(0, 0) = 1;
  auto sym = [](int r, int c, double v) {
    Matrix m = Matrix::Zero(4, 4);
    m(r, c) += v;
    if (r != c) m(c, r) += v;
    return m;
  };
  Matrix xi = sym(1, 2, 1) + sym(3, 3, 3);
  Matrix eta = sym(2, 3, 1);
  Matrix a = sym(1, 3, 1);
  Matrix bb = sym(2, 2, 1) + sym(3, 3, -1);
  Matrix c = sym(0, 0, -1) + sym(1, 1, 1) + sym(3, 3, -2);
  b.coeffs = {xi, eta, a, bb, c};
  return b;
}

sdp::Problem pinned_golden(double xi, double eta) {
  sdp::Problem p;
  p.num_vars = 5;
  p.blocks = {golden_block()};
  p.eq_matrix = Matrix::Zero(2, 5);
  p.eq_matrix(0, 0) = 1;
  p.eq_matrix(1, 1) = 1;
  p.eq_rhs = Vector(2);
  p.eq_rhs << xi, eta;
  return p;
}

}  // namespace

TEST(CheckPsd, DiagonalWithZero) {
  auto r = sdp::check_psd(Matrix(Vector::Map(std::vector<double>{1, 0, 0, 0}.data(), 4).asDiagonal()), 1e-12);
  EXPECT_TRUE(r.psd);
  EXPECT_NEAR(r.min_eigenvalue, 0.0, 1e-15);
}

TEST(CheckPsd, Indefinite) {
  auto r = sdp::check_psd(mat({{0, 1}, {1, 0}}), 1e-12);
  EXPECT_FALSE(r.psd);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-14);
}

TEST(CheckPsd, GoldenMatrixAtCurvePoint) {
  Vector v(5);
  v << 2, 0, 0, 4, 1;
  auto r = sdp::check_psd(golden_block().at(v), 1e-12);
  EXPECT_TRUE(r.psd);
}

TEST(CheckPsd, RejectsAsymmetric) {
  EXPECT_THROW(sdp::check_psd(mat({{1, 2}, {0, 1}}), 1e-9), curvehull::StructuralError);
}

TEST(Solve, TwoByTwoDeterminant) {
  // maximize t s.t. [[1,t],[t,1]] >= 0
  sdp::Problem p;
  p.num_vars = 1;
  p.blocks = {{Matrix::Identity(2, 2), {mat({{0, 1}, {1, 0}})}}};
  p.objective = Vector::Ones(1);
  auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_NEAR(s.x[0], 1.0, 1e-6);
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
}

TEST(Solve, LargestEigenvalue) {
  // minimize l s.t. l I - diag(1,3) >= 0, i.e. maximize -l
  sdp::Problem p;
  p.num_vars = 1;
  p.blocks = {{-mat({{1, 0}, {0, 3}}), {Matrix::Identity(2, 2)}}};
  p.objective = -Vector::Ones(1);
  auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_NEAR(s.x[0], 3.0, 1e-6);
}

TEST(Solve, GoldenPencilOutsidePointIsInfeasible) {
  auto s = sdp::solve(pinned_golden(3, 0));
  EXPECT_EQ(s.status, sdp::Status::Infeasible) << s.diagnostics;
}

TEST(Solve, GoldenPencilSupportInXDirection) {
  sdp::Problem p;
  p.num_vars = 5;
  p.blocks = {golden_block()};
  Vector g = Vector::Zero(5);
  g[0] = 1;
  p.objective = g;
  auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_NEAR(s.objective, 2.0, 1e-6);
}

TEST(Solve, FeasibleInteriorPoint) {
  auto s = sdp::solve(pinned_golden(1.5, 0.1));
  EXPECT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_GE(s.psd_residual, -1e-7);
}

TEST(Solve, DetectsUnboundedRay) {
  // maximize x s.t. [[x, 1],[1, y]] >= 0: x can grow without bound
  sdp::Problem p;
  p.num_vars = 2;
  Matrix c = mat({{0, 1}, {1, 0}});
  p.blocks = {{c, {mat({{1, 0}, {0, 0}}), mat({{0, 0}, {0, 1}})}}};
  Vector g(2);
  g << 1, 0;
  p.objective = g;
  auto s = sdp::solve(p);
  EXPECT_EQ(s.status, sdp::Status::Unbounded) << s.diagnostics;
}

TEST(Solve, UnboundedWithoutImprovingRay) {
  // maximize y s.t. [[1, y],[y, q]] >= 0: y ~ sqrt(q) grows but no ray improves
  sdp::Problem p;
  p.num_vars = 2;
  p.blocks = {{mat({{1, 0}, {0, 0}}), {mat({{0, 1}, {1, 0}}), mat({{0, 0}, {0, 1}})}}};
  Vector g(2);
  g << 1, 0;
  p.objective = g;
  EXPECT_EQ(sdp::solve(p).status, sdp::Status::Unbounded);
  g << -1, 0;
  p.objective = g;
  EXPECT_EQ(sdp::solve(p).status, sdp::Status::Unbounded);
  g << 0, -1;
  p.objective = g;
  auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_NEAR(s.objective, 0.0, 1e-6);
}

TEST(Solve, InconsistentEqualities) {
  sdp::Problem p;
  p.num_vars = 1;
  p.blocks = {{Matrix::Identity(1, 1), {Matrix::Identity(1, 1)}}};
  p.eq_matrix = mat({{1}, {1}});
  p.eq_rhs = Vector(2);
  p.eq_rhs << 0, 1;
  EXPECT_EQ(sdp::solve(p).status, sdp::Status::Infeasible);
}

TEST(Solve, CapacityCap) {
  sdp::Problem p;
  p.num_vars = 0;
  p.blocks = {{Matrix::Identity(201, 201), {}}};
  EXPECT_THROW(sdp::solve(p), curvehull::CapacityError);
}

TEST(Solve, NoFreeVariables) {
  sdp::Problem p;
  p.num_vars = 1;
  p.blocks = {{Matrix::Identity(2, 2), {Matrix::Identity(2, 2)}}};
  p.eq_matrix = mat({{1}});
  p.eq_rhs = Vector::Constant(1, -0.5);
  auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
  EXPECT_NEAR(s.x[0], -0.5, 1e-12);
  p.eq_rhs = Vector::Constant(1, -2.0);
  EXPECT_EQ(sdp::solve(p).status, sdp::Status::Infeasible);
}

// Random bounded problems: weak duality, scaling invariance and PSD round trip.
TEST(SolveProperties, DualityScalingRoundTrip) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 3, m = 2 + trial % 4;
    sdp::Problem p;
    p.num_vars = static_cast<size_t>(m);
    sdp::Block b;
    b.constant = Matrix::Identity(n, n);
    for (int i = 0; i < m; ++i) {
      Matrix a(n, n);
      for (auto& v : a.reshaped()) v = nd(rng);
      b.coeffs.push_back(0.5 * (a + a.transpose()));
    }
    // ball constraint keeps the feasible set bounded
    sdp::Block ball;
    ball.constant = Matrix::Identity(m + 1, m + 1);
    for (int i = 0; i < m; ++i) {
      Matrix e = Matrix::Zero(m + 1, m + 1);
      e(0, i + 1) = e(i + 1, 0) = 1;
      ball.coeffs.push_back(e);
    }
    p.blocks = {b, ball};
    Vector g(m);
    for (auto& v : g) v = nd(rng);
    p.objective = g;
    auto s = sdp::solve(p);
    ASSERT_EQ(s.status, sdp::Status::Optimal) << s.diagnostics;
    EXPECT_LE(s.objective, s.dual_bound + 1e-7);
    EXPECT_LE(std::abs(s.gap), 1e-6 * (1 + std::abs(s.objective)));
    for (const auto& blk : p.blocks) EXPECT_TRUE(sdp::check_psd(blk.at(s.x), 1e-7).psd);

    sdp::Problem scaled = p;
    scaled.objective = 10.0 * g;
    auto s10 = sdp::solve(scaled);
    ASSERT_EQ(s10.status, sdp::Status::Optimal);
    EXPECT_NEAR(s10.objective, 10.0 * s.objective, 1e-6);
  }
}
