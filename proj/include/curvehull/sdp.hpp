#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curvehull/errors.hpp"

namespace curvehull::sdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Affine symmetric-matrix-valued map F(x) = constant + sum_i x_i coeffs[i].
struct Block {
  Matrix constant;
  std::vector<Matrix> coeffs;

  Eigen::Index size() const { return constant.rows(); }

  Matrix at(const Vector& x) const {
    Matrix m = constant;
    for (size_t i = 0; i < coeffs.size(); ++i)
      if (x[static_cast<Eigen::Index>(i)] != 0.0) m += x[static_cast<Eigen::Index>(i)] * coeffs[i];
    return m;
  }
};

/// maximize objective . x  s.t.  F_b(x) >= 0 for every block, eq_matrix x = eq_rhs.
/// Without an objective the problem is a feasibility question.
struct Problem {
  size_t num_vars = 0;
  std::vector<Block> blocks;
  Matrix eq_matrix;
  Vector eq_rhs;
  std::optional<Vector> objective;

  size_t total_dimension() const {
    size_t d = 0;
    for (const auto& b : blocks) d += static_cast<size_t>(b.size());
    return d;
  }
};

enum class Status { Optimal, Infeasible, Unbounded, Inaccurate };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Inaccurate: return "inaccurate";
  }
  return "?";
}

struct Solution {
  Status status = Status::Inaccurate;
  Vector x;                       // primal point (Optimal) or improving ray (Unbounded)
  double objective = 0.0;         // objective . x
  double dual_bound = 0.0;        // upper bound from the dual certificate
  double psd_residual = 0.0;      // most negative eigenvalue over blocks at x
  double gap = 0.0;               // dual_bound - objective
  std::vector<Matrix> dual;       // dual blocks (Optimal) or Farkas certificate (Infeasible)
  int iterations = 0;
  std::string diagnostics;
};

struct Options {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  size_t max_dimension = 200;
  double step_factor = 0.95;
};

struct PsdCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

inline double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline PsdCheck check_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw StructuralError("check_psd needs a square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw StructuralError("check_psd needs a symmetric matrix");
  double lo = min_eigenvalue(m);
  return {lo >= -tol, lo};
}

namespace detail {

inline double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

template <typename F>
Matrix spectral(const Matrix& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector d = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Largest alpha with m + alpha * dm >= 0, given m > 0.
inline double max_step(const Matrix& m, const Matrix& dm) {
  Eigen::LLT<Matrix> llt(m);
  Matrix scaled;
  if (llt.info() == Eigen::Success) {
    Matrix linv = llt.matrixL().solve(Matrix::Identity(m.rows(), m.cols()));
    scaled = linv * dm * linv.transpose();
  } else {
    Matrix isq = spectral(m, [](double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); });
    scaled = isq * dm * isq;
  }
  double lo = min_eigenvalue(0.5 * (scaled + scaled.transpose()));
  return lo >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

inline double scalar_step(double v, double dv) {
  return dv >= 0 ? std::numeric_limits<double>::infinity() : -v / dv;
}

// Conic data in standard dual form: maximize b.y s.t. S = C - sum y_i A_i >= 0.
struct Conic {
  std::vector<Matrix> C;
  std::vector<std::vector<Matrix>> A;  // A[i][block]
  Vector b;
  size_t m() const { return A.size(); }
  size_t nblocks() const { return C.size(); }
};

struct HsdeResult {
  Status status = Status::Inaccurate;
  Vector y;
  std::vector<Matrix> X;
  double pobj = 0, dobj = 0;
  int iterations = 0;
  std::string diagnostics;
};

// Infeasible-start path following on the homogeneous self-dual embedding
//   A(X) - b tau = 0,  C tau - A^T y - S = 0,  b.y - <C,X> - kappa = 0,
// with the Nesterov-Todd direction dX + W dS W = sigma mu S^-1 - X.
inline HsdeResult hsde(const Conic& P, const Options& opt) {
  const size_t m = P.m();
  const size_t nb = P.nblocks();
  double N = 0;
  for (const auto& c : P.C) N += static_cast<double>(c.rows());

  auto A_of = [&](const std::vector<Matrix>& X) {
    Vector v(static_cast<Eigen::Index>(m));
    for (size_t i = 0; i < m; ++i) {
      double s = 0;
      for (size_t k = 0; k < nb; ++k) s += inner(P.A[i][k], X[k]);
      v[static_cast<Eigen::Index>(i)] = s;
    }
    return v;
  };
  auto At_of = [&](const Vector& y) {
    std::vector<Matrix> out(nb);
    for (size_t k = 0; k < nb; ++k) {
      out[k] = Matrix::Zero(P.C[k].rows(), P.C[k].cols());
      for (size_t i = 0; i < m; ++i) out[k] += y[static_cast<Eigen::Index>(i)] * P.A[i][k];
    }
    return out;
  };
  auto inner_all = [&](const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double s = 0;
    for (size_t k = 0; k < nb; ++k) s += inner(a[k], b[k]);
    return s;
  };

  double normC = 0;
  for (const auto& c : P.C) normC += c.squaredNorm();
  normC = std::sqrt(normC);
  const double normb = P.b.norm();

  std::vector<Matrix> X(nb), S(nb);
  for (size_t k = 0; k < nb; ++k) {
    X[k] = Matrix::Identity(P.C[k].rows(), P.C[k].cols());
    S[k] = X[k];
  }
  Vector y = Vector::Zero(static_cast<Eigen::Index>(m));
  double tau = 1, kappa = 1;

  HsdeResult res;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    const Vector AX = A_of(X);
    const std::vector<Matrix> Aty = At_of(y);
    const Vector rp = AX - P.b * tau;
    std::vector<Matrix> rd(nb);
    double rd_norm = 0;
    for (size_t k = 0; k < nb; ++k) {
      rd[k] = P.C[k] * tau - Aty[k] - S[k];
      rd_norm += rd[k].squaredNorm();
    }
    rd_norm = std::sqrt(rd_norm);
    const double cx = inner_all(P.C, X);
    const double by = P.b.dot(y);
    const double rg = by - cx - kappa;
    const double mu = (inner_all(X, S) + tau * kappa) / (N + 1);

    // optimality of (X, y, S) / tau
    const double pres = rp.norm() / (tau * (1 + normb));
    const double dres = rd_norm / (tau * (1 + normC));
    const double pobj = cx / tau, dobj = by / tau;
    const double rgap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
    if (pres <= opt.feas_tol && dres <= opt.feas_tol && rgap <= opt.gap_tol) {
      res.status = Status::Optimal;
      res.y = y / tau;
      res.X.resize(nb);
      for (size_t k = 0; k < nb; ++k) res.X[k] = X[k] / tau;
      res.pobj = pobj;
      res.dobj = dobj;
      return res;
    }
    // Farkas certificate for the maximisation side: X >= 0, A(X) = 0, <C,X> < 0
    if (cx < 0 && AX.norm() <= opt.feas_tol * (-cx)) {
      res.status = Status::Infeasible;
      res.X.resize(nb);
      for (size_t k = 0; k < nb; ++k) res.X[k] = X[k] / (-cx);
      res.y = y;
      return res;
    }
    // improving ray: -A^T y >= 0 with b.y > 0
    if (by > 0) {
      double lo = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < nb; ++k) lo = std::min(lo, min_eigenvalue(-Aty[k] / by));
      if (lo >= -opt.feas_tol) {
        res.status = Status::Unbounded;
        res.y = y / by;
        return res;
      }
    }
    if (!std::isfinite(mu) || mu < 1e-30) {
      res.diagnostics = "complementarity underflow";
      break;
    }

    // NT scaling
    std::vector<Matrix> W(nb), Sinv(nb);
    bool ok = true;
    for (size_t k = 0; k < nb; ++k) {
      Matrix xh = spectral(X[k], [](double v) { return std::sqrt(std::max(v, 0.0)); });
      Matrix g = xh * S[k] * xh;
      Matrix gis = spectral(0.5 * (g + g.transpose()), [](double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); });
      W[k] = xh * gis * xh;
      W[k] = 0.5 * (W[k] + W[k].transpose());
      Sinv[k] = spectral(S[k], [](double v) { return 1.0 / std::max(v, 1e-300); });
      if (!W[k].allFinite() || !Sinv[k].allFinite()) ok = false;
    }
    if (!ok) {
      res.diagnostics = "scaling matrix breakdown";
      break;
    }

    std::vector<std::vector<Matrix>> WAW(m, std::vector<Matrix>(nb));
    std::vector<Matrix> WCW(nb);
    for (size_t k = 0; k < nb; ++k) {
      WCW[k] = W[k] * P.C[k] * W[k];
      for (size_t i = 0; i < m; ++i) WAW[i][k] = W[k] * P.A[i][k] * W[k];
    }
    Matrix M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Vector h(static_cast<Eigen::Index>(m));
    for (size_t i = 0; i < m; ++i) {
      double hi = 0;
      for (size_t k = 0; k < nb; ++k) hi += inner(P.A[i][k], WCW[k]);
      h[static_cast<Eigen::Index>(i)] = hi;
      for (size_t j = i; j < m; ++j) {
        double s = 0;
        for (size_t k = 0; k < nb; ++k) s += inner(P.A[i][k], WAW[j][k]);
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
        M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
      }
    }
    const double gamma = inner_all(P.C, WCW);
    Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success) {
      res.diagnostics = "Schur complement factorisation failed";
      break;
    }

    struct Dir {
      std::vector<Matrix> dX, dS;
      Vector dy;
      double dtau = 0, dkappa = 0;
    };
    auto direction = [&](double sigma) {
      const double eta = 1 - sigma;
      std::vector<Matrix> T(nb);
      for (size_t k = 0; k < nb; ++k) T[k] = sigma * mu * Sinv[k] - X[k] - eta * W[k] * rd[k] * W[k];
      const Vector q1 = -eta * rp - A_of(T);
      const double c0 = inner_all(P.C, T);
      const double q2 = -eta * rg + c0 + (sigma * mu - tau * kappa) / tau;
      const Vector u = ldlt.solve(q1);
      const Vector v = ldlt.solve(h + P.b);
      const Vector bh = P.b - h;
      Dir d;
      d.dtau = (q2 - bh.dot(u)) / (bh.dot(v) + gamma + kappa / tau);
      d.dy = u + v * d.dtau;
      const std::vector<Matrix> Atdy = At_of(d.dy);
      d.dX.resize(nb);
      d.dS.resize(nb);
      for (size_t k = 0; k < nb; ++k) {
        d.dS[k] = -Atdy[k] + P.C[k] * d.dtau + eta * rd[k];
        Matrix dx = T[k] + W[k] * Atdy[k] * W[k] - d.dtau * WCW[k];
        d.dX[k] = 0.5 * (dx + dx.transpose());
      }
      d.dkappa = (sigma * mu - tau * kappa - kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Dir& d) {
      double a = std::min(scalar_step(tau, d.dtau), scalar_step(kappa, d.dkappa));
      for (size_t k = 0; k < nb; ++k) {
        a = std::min(a, max_step(X[k], d.dX[k]));
        a = std::min(a, max_step(S[k], d.dS[k]));
      }
      return a;
    };

    const Dir pred = direction(0.0);
    const double a_aff = std::min(1.0, step_to_boundary(pred));
    double mu_aff = (tau + a_aff * pred.dtau) * (kappa + a_aff * pred.dkappa);
    for (size_t k = 0; k < nb; ++k) mu_aff += inner(X[k] + a_aff * pred.dX[k], S[k] + a_aff * pred.dS[k]);
    mu_aff /= (N + 1);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    const Dir d = direction(sigma);
    const double amax = step_to_boundary(d);
    const double alpha = std::min(1.0, opt.step_factor * amax);
    if (!(alpha > 1e-12)) {
      res.diagnostics = "step length collapsed";
      break;
    }
    for (size_t k = 0; k < nb; ++k) {
      X[k] += alpha * d.dX[k];
      S[k] += alpha * d.dS[k];
      S[k] = 0.5 * (S[k] + S[k].transpose());
    }
    y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }
  res.status = Status::Inaccurate;
  res.y = y / std::max(tau, 1e-300);
  res.X.resize(nb);
  for (size_t k = 0; k < nb; ++k) res.X[k] = X[k] / std::max(tau, 1e-300);
  if (res.diagnostics.empty()) res.diagnostics = "iteration limit reached";
  std::ostringstream os;
  os << res.diagnostics << " (tau=" << tau << ", kappa=" << kappa << ")";
  res.diagnostics = os.str();
  return res;
}

}  // namespace detail

namespace detail {

inline Solution solve_prepared(const Problem& p, const Options& opt) {
  const auto n = static_cast<Eigen::Index>(p.num_vars);
  if (p.blocks.empty()) throw StructuralError("SDP without blocks");
  for (const auto& b : p.blocks) {
    if (b.size() < 1 || b.constant.cols() != b.size()) throw StructuralError("SDP block must be square and nonempty");
    if (b.coeffs.size() != p.num_vars) throw StructuralError("SDP block coefficient count mismatch");
    for (const auto& c : b.coeffs)
      if (c.rows() != b.size() || c.cols() != b.size()) throw StructuralError("SDP block coefficient size mismatch");
  }
  if (p.total_dimension() > opt.max_dimension)
    throw CapacityError("total PSD dimension " + std::to_string(p.total_dimension()) + " exceeds " +
                        std::to_string(opt.max_dimension));
  if (p.eq_matrix.size() > 0 && (p.eq_matrix.cols() != n || p.eq_matrix.rows() != p.eq_rhs.size()))
    throw StructuralError("equality constraint shape mismatch");
  if (p.objective && p.objective->size() != n) throw StructuralError("objective length mismatch");

  Solution sol;
  const Vector g = p.objective ? *p.objective : Vector::Zero(n);

  // x = x0 + Z w eliminates the equalities
  Vector x0 = Vector::Zero(n);
  Matrix Z = Matrix::Identity(n, n);
  if (p.eq_matrix.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(p.eq_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const Eigen::Index rank = svd.rank();
    x0 = svd.solve(p.eq_rhs);
    if ((p.eq_matrix * x0 - p.eq_rhs).norm() > 1e-9 * (1 + p.eq_rhs.norm())) {
      sol.status = Status::Infeasible;
      sol.diagnostics = "inconsistent linear equalities";
      return sol;
    }
    Z = svd.matrixV().rightCols(n - rank);
  }

  // drop directions that do not move any block
  std::vector<Block> reduced(p.blocks.size());
  for (size_t k = 0; k < p.blocks.size(); ++k) reduced[k].constant = p.blocks[k].at(x0);
  const Eigen::Index r0 = Z.cols();
  std::vector<std::vector<Matrix>> zc(static_cast<size_t>(r0), std::vector<Matrix>(p.blocks.size()));
  for (Eigen::Index j = 0; j < r0; ++j)
    for (size_t k = 0; k < p.blocks.size(); ++k) {
      Matrix acc = Matrix::Zero(p.blocks[k].size(), p.blocks[k].size());
      for (Eigen::Index i = 0; i < n; ++i)
        if (Z(i, j) != 0.0) acc += Z(i, j) * p.blocks[k].coeffs[static_cast<size_t>(i)];
      zc[static_cast<size_t>(j)][k] = acc;
    }
  Matrix G = Matrix::Zero(r0, r0);
  for (Eigen::Index i = 0; i < r0; ++i)
    for (Eigen::Index j = i; j < r0; ++j) {
      double s = 0;
      for (size_t k = 0; k < p.blocks.size(); ++k) s += detail::inner(zc[i][k], zc[j][k]);
      G(i, j) = G(j, i) = s;
    }
  Matrix basis;  // r0 x r
  Matrix nullbasis;
  if (r0 > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < r0; ++i) (es.eigenvalues()(i) > 1e-12 * top ? keep : drop).push_back(i);
    basis.resize(r0, static_cast<Eigen::Index>(keep.size()));
    nullbasis.resize(r0, static_cast<Eigen::Index>(drop.size()));
    for (size_t i = 0; i < keep.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
    for (size_t i = 0; i < drop.size(); ++i) nullbasis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(drop[i]);
  } else {
    basis.resize(0, 0);
  }
  const Matrix T = Z * basis;  // x = x0 + T w
  const Eigen::Index r = T.cols();
  for (size_t k = 0; k < p.blocks.size(); ++k) {
    reduced[k].coeffs.resize(static_cast<size_t>(r));
    for (Eigen::Index j = 0; j < r; ++j) {
      Matrix acc = Matrix::Zero(p.blocks[k].size(), p.blocks[k].size());
      for (Eigen::Index i = 0; i < r0; ++i)
        if (basis(i, j) != 0.0) acc += basis(i, j) * zc[static_cast<size_t>(i)][k];
      reduced[k].coeffs[static_cast<size_t>(j)] = 0.5 * (acc + acc.transpose());
    }
  }
  const Vector gw = T.transpose() * g;
  const double offset = g.dot(x0);
  bool free_ray = false;
  Vector ray;
  if (nullbasis.cols() > 0) {
    Vector gn = (Z * nullbasis).transpose() * g;
    if (gn.norm() > 1e-9 * std::max(1.0, g.norm())) {
      free_ray = true;
      ray = Z * nullbasis * gn;
    }
  }

  detail::Conic conic;
  for (const auto& b : reduced) conic.C.push_back(0.5 * (b.constant + b.constant.transpose()));
  for (Eigen::Index j = 0; j < r; ++j) {
    std::vector<Matrix> aj;
    for (const auto& b : reduced) aj.push_back(-b.coeffs[static_cast<size_t>(j)]);
    conic.A.push_back(std::move(aj));
  }
  const double gscale = gw.norm();
  conic.b = (free_ray || gscale == 0.0) ? Vector::Zero(r) : Vector(gw / gscale);

  detail::HsdeResult h = detail::hsde(conic, opt);
  bool escaped = false;
  if (h.status == Status::Inaccurate && r > 0) {
    // Ill-posed instances (weakly infeasible or unbounded without an
    // improving ray) stall the embedding; retry inside the ball |w| <= R.
    constexpr double R = 1e4;
    detail::Conic ball = conic;
    const Eigen::Index r1 = r + 1;
    ball.C.push_back(R * Matrix::Identity(r1, r1));
    for (Eigen::Index j = 0; j < r; ++j) {
      Matrix e = Matrix::Zero(r1, r1);
      e(0, j + 1) = e(j + 1, 0) = -1;
      ball.A[static_cast<size_t>(j)].push_back(e);
    }
    detail::HsdeResult hb = detail::hsde(ball, opt);
    if (hb.status != Status::Inaccurate) {
      hb.X.resize(conic.nblocks());
      hb.iterations += h.iterations;
      escaped = hb.status == Status::Optimal && conic.b.norm() > 0 && hb.y.norm() > 0.5 * R;
      hb.diagnostics = escaped ? "optimum escapes every ball (unbounded without an improving ray)"
                               : "solved after bounding the variables";
      h = std::move(hb);
    }
  }
  sol.iterations = h.iterations;
  sol.diagnostics = h.diagnostics;
  if (escaped) {
    sol.status = Status::Unbounded;
    sol.x = T * h.y / h.y.norm();
    sol.objective = std::numeric_limits<double>::infinity();
    sol.dual_bound = sol.objective;
    return sol;
  }

  auto residual_at = [&](const Vector& x) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : p.blocks) lo = std::min(lo, min_eigenvalue(b.at(x)));
    return lo;
  };

  switch (h.status) {
    case Status::Optimal: {
      sol.x = x0 + T * h.y;
      sol.dual = h.X;
      if (free_ray) {
        sol.status = Status::Unbounded;
        sol.x = ray / ray.norm();
        sol.objective = std::numeric_limits<double>::infinity();
        sol.dual_bound = sol.objective;
        sol.diagnostics = "objective increases along a direction that leaves every block unchanged";
        return sol;
      }
      sol.objective = g.dot(sol.x);
      sol.dual_bound = (gscale == 0.0 ? 0.0 : h.pobj * gscale) + offset;
      sol.psd_residual = residual_at(sol.x);
      sol.gap = sol.dual_bound - sol.objective;
      // same yardstick as the dual residual in the stopping test
      double normC = 0;
      for (const auto& c : conic.C) normC += c.squaredNorm();
      if (sol.psd_residual < -10 * opt.feas_tol * (1 + std::sqrt(normC))) {
        sol.status = Status::Inaccurate;
        sol.diagnostics = "returned point violates PSD constraints";
      } else {
        sol.status = Status::Optimal;
      }
      return sol;
    }
    case Status::Infeasible:
      sol.status = Status::Infeasible;
      sol.dual = h.X;
      return sol;
    case Status::Unbounded:
      sol.status = Status::Unbounded;
      sol.x = T * h.y;
      sol.objective = std::numeric_limits<double>::infinity();
      sol.dual_bound = sol.objective;
      return sol;
    case Status::Inaccurate:
      sol.status = Status::Inaccurate;
      sol.x = x0 + T * h.y;
      sol.psd_residual = residual_at(sol.x);
      return sol;
  }
  return sol;
}

}  // namespace detail

/// Solves a small dense block SDP.
inline Solution solve(const Problem& p, const Options& opt = {}) {
  // unit column scaling: moment coordinates of badly scaled ring elements
  // differ by many orders of magnitude and would fool the null-direction test
  const auto n = static_cast<Eigen::Index>(p.num_vars);
  Vector d = Vector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0;
    for (const auto& b : p.blocks)
      if (static_cast<size_t>(i) < b.coeffs.size()) s += b.coeffs[static_cast<size_t>(i)].squaredNorm();
    if (p.eq_matrix.rows() > 0 && i < p.eq_matrix.cols()) s += p.eq_matrix.col(i).squaredNorm();
    if (s > 0) d[i] = 1.0 / std::sqrt(s);
  }
  Problem q = p;
  for (auto& b : q.blocks)
    for (size_t i = 0; i < b.coeffs.size() && static_cast<Eigen::Index>(i) < n; ++i) b.coeffs[i] *= d[static_cast<Eigen::Index>(i)];
  if (q.eq_matrix.rows() > 0 && q.eq_matrix.cols() == n) q.eq_matrix = q.eq_matrix * d.asDiagonal();
  if (q.objective && q.objective->size() == n) *q.objective = q.objective->cwiseProduct(d);
  Solution sol = detail::solve_prepared(q, opt);
  if (sol.x.size() == n) {
    sol.x = sol.x.cwiseProduct(d);
    if (sol.status == Status::Unbounded && sol.x.norm() > 0) sol.x /= sol.x.norm();
  }
  return sol;
}

}  // namespace curvehull::sdp
