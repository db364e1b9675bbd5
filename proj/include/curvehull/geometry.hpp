#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "curvehull/curve_ring.hpp"
#include "curvehull/relaxation.hpp"
#include "curvehull/sdp.hpp"

namespace curvehull {

/// Per-variable sampling interval, keyed by variable name.
using Box = std::map<std::string, std::pair<double, double>>;

/// Real roots of sum_i coeffs[i] t^i (ascending; leading coefficient nonzero),
/// sorted ascending.
inline std::vector<double> real_roots(const std::vector<double>& coeffs) {
  std::vector<double> c = coeffs;
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  if (c.size() <= 1) return {};
  const size_t d = c.size() - 1;
  auto value = [&](double t, double& deriv) {
    double v = 0;
    deriv = 0;
    for (size_t i = d + 1; i-- > 0;) {
      deriv = deriv * t + v;
      v = v * t + c[i];
    }
    return v;
  };
  std::vector<double> roots;
  if (d == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (size_t i = 1; i < d; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (size_t i = 0; i < d; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = -c[i] / c[d];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const auto z = es.eigenvalues()(i);
      if (std::abs(z.imag()) > 1e-8) continue;
      double t = z.real();
      double dv = 0;
      const double v = value(t, dv);
      if (dv != 0.0 && std::isfinite(v / dv)) {
        double polished = t - v / dv;
        double dv2 = 0;
        if (std::abs(value(polished, dv2)) <= std::abs(v)) t = polished;
      }
      roots.push_back(t);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Finite sample of phi(K) together with the curve points behind it.
struct SampleCloud {
  std::vector<std::vector<double>> points;  // images under phi
  std::vector<double> residuals;
  std::vector<size_t> component;
  std::vector<std::vector<double>> source;  // component coordinates

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  size_t dimension() const { return points.empty() ? 0 : points.front().size(); }

  void add(std::vector<double> image, double residual, size_t comp, std::vector<double> src) {
    points.push_back(std::move(image));
    residuals.push_back(residual);
    component.push_back(comp);
    source.push_back(std::move(src));
  }
};

inline void write_cloud_csv(std::ostream& os, const SampleCloud& cloud, const std::vector<std::string>& names) {
  for (const auto& n : names) os << n << ",";
  os << "residual\n";
  os.precision(17);
  for (size_t i = 0; i < cloud.size(); ++i) {
    for (double v : cloud.points[i]) os << v << ",";
    os << cloud.residuals[i] << "\n";
  }
}

namespace detail {

constexpr double feasibility_slack = 1e-9;

struct ComponentSampler {
  const CurveComponent& comp;
  size_t index;
  const std::vector<RingElement>& constraints;
  const std::vector<RingElement>& phi;
  std::vector<Poly> coeffs;  // relation as a polynomial in the dependent variable

  ComponentSampler(const CurveComponent& c, size_t k, const std::vector<RingElement>& h,
                   const std::vector<RingElement>& p)
      : comp(c), index(k), constraints(h), phi(p), coeffs(c.plane().relation.coefficients_in(1)) {}

  std::vector<double> roots_at(double x) const {
    std::vector<double> cs;
    const double pt[2] = {x, 0.0};
    for (const auto& q : coeffs) cs.push_back(q.evaluate<double>(std::span<const double>(pt, 2)));
    return real_roots(cs);
  }

  bool feasible(double x, double y) const {
    const double pt[2] = {x, y};
    for (const auto& h : constraints)
      if (value_at(h, index, std::span<const double>(pt, 2)) < -feasibility_slack) return false;
    return true;
  }

  void emit(SampleCloud& cloud, double x, double y) const {
    const double pt[2] = {x, y};
    std::span<const double> sp(pt, 2);
    std::vector<double> image;
    for (const auto& f : phi) image.push_back(value_at(f, index, sp));
    cloud.add(std::move(image), std::abs(comp.plane().relation.evaluate<double>(sp)), index, {x, y});
  }

  void run(SampleCloud& cloud, double lo, double hi, int grid) const {
    std::vector<double> xs(static_cast<size_t>(grid));
    for (int i = 0; i < grid; ++i) xs[static_cast<size_t>(i)] = lo + (hi - lo) * i / (grid - 1);
    std::vector<std::vector<double>> rs;
    for (double x : xs) rs.push_back(roots_at(x));
    for (size_t i = 0; i < xs.size(); ++i)
      for (double y : rs[i])
        if (feasible(xs[i], y)) emit(cloud, xs[i], y);
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      if (rs[i].size() != rs[i + 1].size()) {
        refine_count(cloud, xs[i], xs[i + 1], rs[i].size(), rs[i + 1].size());
      } else {
        for (size_t j = 0; j < rs[i].size(); ++j) {
          bool fa = feasible(xs[i], rs[i][j]), fb = feasible(xs[i + 1], rs[i + 1][j]);
          if (fa != fb) refine_branch(cloud, xs[i], xs[i + 1], j, rs[i].size(), fa);
        }
      }
    }
  }

  // root count changes inside (a, b): locate the branch endpoint
  void refine_count(SampleCloud& cloud, double a, double b, size_t na, size_t nb) const {
    const bool more_at_a = na > nb;
    const size_t hi_count = std::max(na, nb);
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      const size_t nm = roots_at(m).size();
      if ((nm >= hi_count) == more_at_a) a = m; else b = m;
    }
    const double x = more_at_a ? a : b;
    for (double y : roots_at(x))
      if (feasible(x, y)) emit(cloud, x, y);
  }

  // feasibility flips along branch j: locate the boundary
  void refine_branch(SampleCloud& cloud, double a, double b, size_t j, size_t count, bool feasible_at_a) const {
    double good = feasible_at_a ? a : b, bad = feasible_at_a ? b : a;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (good + bad);
      if (m == good || m == bad) break;
      auto r = roots_at(m);
      if (r.size() != count) return;
      (feasible(m, r[j]) ? good : bad) = m;
    }
    auto r = roots_at(good);
    if (r.size() == count && feasible(good, r[j])) emit(cloud, good, r[j]);
  }
};

}  // namespace detail

/// Samples phi(K) for K = {h_i >= 0} on every component. The independent
/// variable of each plane component is scanned over box[name] on a uniform
/// grid, refined by bisection at branch endpoints and constraint boundaries.
inline SampleCloud sample_curve(const CurveRing& ring, const std::vector<RingElement>& constraints,
                                const std::vector<RingElement>& phi, const Box& box, int grid) {
  if (grid < 2) throw StructuralError("sampling grid needs at least 2 points");
  SampleCloud cloud;
  for (size_t k = 0; k < ring.size(); ++k) {
    const auto& comp = ring.component(k);
    if (comp.kind() == ComponentKind::Point) {
      bool ok = true;
      for (const auto& h : constraints)
        if (h.scalar_part(k).get_d() < -detail::feasibility_slack) ok = false;
      if (!ok) continue;
      std::vector<double> image, src;
      for (const auto& f : phi) image.push_back(f.scalar_part(k).get_d());
      for (const auto& c : comp.point().coordinates) src.push_back(c.get_d());
      cloud.add(std::move(image), 0.0, k, std::move(src));
      continue;
    }
    const std::string& var = comp.plane().independent;
    auto it = box.find(var);
    if (it == box.end()) throw StructuralError("no sampling interval for variable '" + var + "'");
    detail::ComponentSampler(comp, k, constraints, phi).run(cloud, it->second.first, it->second.second, grid);
  }
  return cloud;
}

/// 64 uniform angles in the plane; otherwise the 2n signed axes followed by
/// 200 random unit vectors.
inline std::vector<std::vector<double>> direction_set(size_t n, unsigned seed = 2024) {
  std::vector<std::vector<double>> dirs;
  if (n == 0) return dirs;
  if (n == 1) return {{1.0}, {-1.0}};
  if (n == 2) {
    for (int k = 0; k < 64; ++k) {
      const double a = 2 * std::numbers::pi * k / 64;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  for (size_t i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      std::vector<double> d(n, 0.0);
      d[i] = s;
      dirs.push_back(d);
    }
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> d(n);
    double norm = 0;
    for (auto& v : d) {
      v = nd(rng);
      norm += v * v;
    }
    for (auto& v : d) v /= std::sqrt(norm);
    dirs.push_back(d);
  }
  return dirs;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> support_sampled(const SampleCloud& cloud, const std::vector<std::vector<double>>& dirs) {
  if (cloud.empty()) throw DomainError("support of an empty sample");
  std::vector<double> out;
  for (const auto& c : dirs) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points) best = std::max(best, dot(c, p));
    out.push_back(best);
  }
  return out;
}

/// Floating-point LMI view shared by MomentSDP and Pencil: variables z,
/// blocks F_k(z) >= 0, equalities, and the coordinates of z that are the
/// projected point.
struct Lmi {
  size_t num_vars = 0;
  std::vector<sdp::Block> blocks;
  sdp::Matrix eq_matrix;
  sdp::Vector eq_rhs;
  std::vector<size_t> projection;

  size_t dimension() const { return projection.size(); }
};

namespace detail {

inline sdp::Matrix to_dense(const RatMatrix& m) {
  sdp::Matrix d(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.n));
  for (size_t r = 0; r < m.n; ++r)
    for (size_t c = 0; c < m.n; ++c) d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c).get_d();
  return d;
}

}  // namespace detail

inline Lmi to_lmi(const MomentSDP& m) {
  Lmi l;
  const size_t u = m.U.dimension();
  l.num_vars = u;
  for (const auto& block : m.blocks) {
    const auto s = static_cast<Eigen::Index>(block.size());
    sdp::Block b{sdp::Matrix::Zero(s, s), std::vector<sdp::Matrix>(u, sdp::Matrix::Zero(s, s))};
    for (Eigen::Index r = 0; r < s; ++r)
      for (Eigen::Index c = 0; c < s; ++c) {
        const auto& f = block.entry(static_cast<size_t>(r), static_cast<size_t>(c));
        for (size_t j = 0; j < u; ++j)
          if (f[j] != 0) b.coeffs[j](r, c) = f[j].get_d();
      }
    l.blocks.push_back(std::move(b));
  }
  l.eq_matrix = sdp::Matrix::Zero(1, static_cast<Eigen::Index>(u));
  l.eq_matrix(0, 0) = 1;
  l.eq_rhs = sdp::Vector::Ones(1);
  for (size_t i = 0; i < m.dimension(); ++i) l.projection.push_back(m.coordinate_index(i));
  return l;
}

inline Lmi to_lmi(const Pencil& p) {
  p.validate();
  Lmi l;
  const size_t n = p.n(), k = p.k();
  l.num_vars = n + k;
  for (const auto& block : p.blocks) {
    sdp::Block b{detail::to_dense(block.constant), {}};
    for (const auto& m : block.x_coeffs) b.coeffs.push_back(detail::to_dense(m));
    for (const auto& m : block.y_coeffs) b.coeffs.push_back(detail::to_dense(m));
    l.blocks.push_back(std::move(b));
  }
  l.eq_matrix = sdp::Matrix::Zero(static_cast<Eigen::Index>(p.equalities.size()), static_cast<Eigen::Index>(n + k));
  l.eq_rhs = sdp::Vector::Zero(static_cast<Eigen::Index>(p.equalities.size()));
  for (size_t r = 0; r < p.equalities.size(); ++r) {
    const auto& e = p.equalities[r];
    const auto R = static_cast<Eigen::Index>(r);
    for (size_t i = 0; i < n; ++i) l.eq_matrix(R, static_cast<Eigen::Index>(i)) = e.x_coeffs[i].get_d();
    for (size_t j = 0; j < k; ++j) l.eq_matrix(R, static_cast<Eigen::Index>(n + j)) = e.y_coeffs[j].get_d();
    l.eq_rhs[R] = e.rhs.get_d();
  }
  for (size_t i = 0; i < n; ++i) l.projection.push_back(i);
  return l;
}

struct SupportValue {
  double value = 0.0;
  sdp::Status status = sdp::Status::Optimal;
  std::string diagnostics;
};

/// max <c, rho(z)> over the spectrahedron; +inf when unbounded, -inf when empty.
inline SupportValue support_relaxed(const Lmi& l, const std::vector<double>& c, const sdp::Options& opt = {}) {
  if (c.size() != l.dimension()) throw StructuralError("direction has the wrong dimension");
  sdp::Problem p;
  p.num_vars = l.num_vars;
  p.blocks = l.blocks;
  p.eq_matrix = l.eq_matrix;
  p.eq_rhs = l.eq_rhs;
  sdp::Vector g = sdp::Vector::Zero(static_cast<Eigen::Index>(l.num_vars));
  for (size_t i = 0; i < c.size(); ++i) g[static_cast<Eigen::Index>(l.projection[i])] = c[i];
  p.objective = g;
  auto s = sdp::solve(p, opt);
  SupportValue v{0.0, s.status, s.diagnostics};
  switch (s.status) {
    case sdp::Status::Optimal: v.value = s.objective; break;
    case sdp::Status::Unbounded: v.value = std::numeric_limits<double>::infinity(); break;
    case sdp::Status::Infeasible: v.value = -std::numeric_limits<double>::infinity(); break;
    case sdp::Status::Inaccurate: v.value = std::numeric_limits<double>::quiet_NaN(); break;
  }
  return v;
}

inline std::vector<SupportValue> support_relaxed(const Lmi& l, const std::vector<std::vector<double>>& dirs,
                                                 const sdp::Options& opt = {}) {
  std::vector<SupportValue> out;
  for (const auto& c : dirs) out.push_back(support_relaxed(l, c, opt));
  return out;
}

inline std::vector<SupportValue> support_relaxed(const MomentSDP& m, const std::vector<std::vector<double>>& dirs) {
  return support_relaxed(to_lmi(m), dirs);
}

struct GapReport {
  double gap = 0.0;             // max over directions of relaxed - sampled, clamped at 0
  double raw_gap = 0.0;         // the same without clamping
  bool containment_ok = true;   // relaxed >= sampled - 1e-6 everywhere
  std::vector<std::vector<double>> directions;
  std::vector<double> relaxed, sampled;
};

/// Compares support functions of K_W and the sample.
inline GapReport exactness_gap(const Lmi& l, const std::vector<std::vector<double>>& dirs, const SampleCloud& cloud) {
  GapReport r;
  r.directions = dirs;
  r.sampled = support_sampled(cloud, dirs);
  r.raw_gap = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < dirs.size(); ++i) {
    SupportValue v = support_relaxed(l, dirs[i]);
    if (v.status == sdp::Status::Unbounded)
      throw InconsistencyError("relaxation is unbounded in a direction although K is compact");
    if (v.status == sdp::Status::Infeasible)
      throw InconsistencyError("relaxation is empty although the sample is not");
    if (v.status == sdp::Status::Inaccurate) throw SolverError("support computation inaccurate: " + v.diagnostics);
    r.relaxed.push_back(v.value);
    const double d = v.value - r.sampled[i];
    if (d < -1e-6) r.containment_ok = false;
    r.raw_gap = std::max(r.raw_gap, d);
  }
  r.gap = std::max(0.0, r.raw_gap);
  return r;
}

inline GapReport exactness_gap(const RelaxationSpec& spec, const std::vector<std::vector<double>>& dirs,
                               const SampleCloud& cloud) {
  return exactness_gap(to_lmi(assemble_moment_sdp(spec)), dirs, cloud);
}

enum class MemberStatus { Inside, Outside, Indeterminate };

inline const char* to_string(MemberStatus s) {
  switch (s) {
    case MemberStatus::Inside: return "inside";
    case MemberStatus::Outside: return "outside";
    case MemberStatus::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct MembershipResult {
  MemberStatus status = MemberStatus::Indeterminate;
  double margin = 0.0;                // largest s with F(z) - s I >= 0 at the point
  std::vector<double> witness;        // z at the optimum
  double psd_residual = 0.0;          // min eigenvalue of F(witness)
  std::vector<double> direction;      // separating direction when Outside
  double direction_support = 0.0;     // support of K_W along direction
  std::string diagnostics;
};

/// Decides whether the point lies in the projection of the spectrahedron.
/// Solves max s subject to F_k(z) - s I >= 0, s <= 1, rho(z) = point.
inline MembershipResult membership(const std::vector<double>& point, const Lmi& l, double tol = 1e-6) {
  if (point.size() != l.dimension()) throw StructuralError("query point has the wrong dimension");
  const size_t N = l.num_vars;
  const auto Ne = static_cast<Eigen::Index>(N);
  sdp::Problem p;
  p.num_vars = N + 1;
  for (const auto& b : l.blocks) {
    sdp::Block nb{b.constant, b.coeffs};
    nb.coeffs.push_back(-sdp::Matrix::Identity(b.size(), b.size()));
    p.blocks.push_back(std::move(nb));
  }
  sdp::Block cap{sdp::Matrix::Ones(1, 1), std::vector<sdp::Matrix>(N, sdp::Matrix::Zero(1, 1))};
  cap.coeffs.push_back(-sdp::Matrix::Ones(1, 1));
  p.blocks.push_back(std::move(cap));
  const Eigen::Index me = l.eq_matrix.rows();
  const auto n = static_cast<Eigen::Index>(point.size());
  p.eq_matrix = sdp::Matrix::Zero(me + n, Ne + 1);
  p.eq_rhs = sdp::Vector::Zero(me + n);
  if (me > 0) {
    p.eq_matrix.topLeftCorner(me, Ne) = l.eq_matrix;
    p.eq_rhs.head(me) = l.eq_rhs;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    p.eq_matrix(me + i, static_cast<Eigen::Index>(l.projection[static_cast<size_t>(i)])) = 1;
    p.eq_rhs[me + i] = point[static_cast<size_t>(i)];
  }
  sdp::Vector g = sdp::Vector::Zero(Ne + 1);
  g[Ne] = 1;
  p.objective = g;

  const auto s = sdp::solve(p);
  MembershipResult r;
  r.diagnostics = s.diagnostics;
  if (s.status == sdp::Status::Infeasible) {
    r.status = MemberStatus::Outside;
    r.margin = -std::numeric_limits<double>::infinity();
    return r;
  }
  if (s.status != sdp::Status::Optimal) {
    r.status = MemberStatus::Indeterminate;
    return r;
  }
  r.margin = s.x[Ne];
  r.witness.assign(s.x.data(), s.x.data() + N);
  const sdp::Vector z = s.x.head(Ne);
  r.psd_residual = std::numeric_limits<double>::infinity();
  for (const auto& b : l.blocks) r.psd_residual = std::min(r.psd_residual, sdp::min_eigenvalue(b.at(z)));
  if (r.margin >= -tol) {
    r.status = MemberStatus::Inside;
    return r;
  }
  r.status = MemberStatus::Outside;

  // <F(z), X> >= 0 on the spectrahedron but < 0 at the point
  std::vector<double> c(point.size(), 0.0);
  if (s.dual.size() >= l.blocks.size()) {
    for (size_t i = 0; i < point.size(); ++i)
      for (size_t k = 0; k < l.blocks.size(); ++k)
        c[i] -= sdp::detail::inner(l.blocks[k].coeffs[l.projection[i]], s.dual[k]);
  }
  const double norm = std::sqrt(dot(c, c));
  auto separates = [&](const std::vector<double>& d, double& support) {
    SupportValue v = support_relaxed(l, d);
    support = v.value;
    return v.status == sdp::Status::Optimal && v.value < dot(d, point) - tol;
  };
  if (norm > 0) {
    for (auto& v : c) v /= norm;
    double sup = 0;
    if (separates(c, sup)) {
      r.direction = c;
      r.direction_support = sup;
      return r;
    }
  }
  for (const auto& d : direction_set(point.size())) {
    double sup = 0;
    if (separates(d, sup)) {
      r.direction = d;
      r.direction_support = sup;
      return r;
    }
  }
  r.diagnostics += "; no separating direction found in the scan";
  return r;
}

inline MembershipResult membership(const std::vector<double>& point, const MomentSDP& m, double tol = 1e-6) {
  return membership(point, to_lmi(m), tol);
}

inline MembershipResult membership(const std::vector<double>& point, const Pencil& p, double tol = 1e-6) {
  return membership(point, to_lmi(p), tol);
}

struct RecessionRay {
  std::vector<double> direction;  // unit vector
  double root = 0.0;              // slope s of the top-form root (x, y) ~ (1, s); inf for (0, 1)
  double confirmed_at = 0.0;      // norm of the confirming sample point
};

struct RecessionFan {
  std::vector<RecessionRay> rays;
  std::vector<std::vector<double>> candidates;
  double radius = 0.0;  // confirmation radius R0

  bool empty() const { return rays.empty(); }
};

/// Confirmation radius 10 (1 + box half-width).
inline double confirmation_radius(double box_half_width) { return 10.0 * (1.0 + box_half_width); }

/// Asymptotic directions of the plane curve f = 0 confirmed by the sample:
/// real projective roots of the top form, kept when some sample point of
/// norm >= R0 lies within 0.1 rad.
inline RecessionFan asymptotic_directions(const Poly& f, const SampleCloud& cloud, double R0) {
  if (f.is_zero()) throw StructuralError("asymptotic directions of the zero polynomial");
  if (f.variables().size() != 2) throw StructuralError("asymptotic directions need a plane curve");
  const Poly top = f.top_form();
  const int D = top.total_degree();
  RecessionFan fan;
  fan.radius = R0;
  std::vector<std::pair<std::vector<double>, double>> cands;
  // top(1, s) = sum_j c_j s^j
  std::vector<double> g(static_cast<size_t>(D) + 1, 0.0);
  for (const auto& [e, c] : top.terms()) g[static_cast<size_t>(e[1])] += c.get_d();
  for (double s : real_roots(g)) {
    const double nrm = std::hypot(1.0, s);
    // + 0.0 turns a signed zero into +0 so printed directions are stable
    cands.push_back({{1 / nrm, s / nrm + 0.0}, s});
    cands.push_back({{-1 / nrm, -s / nrm + 0.0}, s});
  }
  if (top.coefficient({0, D}) == 0) {
    cands.push_back({{0.0, 1.0}, std::numeric_limits<double>::infinity()});
    cands.push_back({{0.0, -1.0}, std::numeric_limits<double>::infinity()});
  }
  for (const auto& [dir, root] : cands) {
    bool dup = false;
    for (const auto& c : fan.candidates)
      if (std::hypot(c[0] - dir[0], c[1] - dir[1]) <= 1e-9) dup = true;
    if (dup) continue;
    fan.candidates.push_back(dir);
    double best = 0.0;
    for (const auto& p : cloud.points) {
      const double r = std::hypot(p[0], p[1]);
      if (r < R0) continue;
      const double cosang = std::clamp((p[0] * dir[0] + p[1] * dir[1]) / r, -1.0, 1.0);
      if (std::acos(cosang) <= 0.1) best = std::max(best, r);
    }
    if (best > 0) fan.rays.push_back({dir, root, best});
  }
  return fan;
}

/// One row per direction: c, h_relaxed(c), h_sampled(c) and their difference.
inline void write_support_csv(std::ostream& os, const std::vector<std::vector<double>>& dirs,
                              const std::vector<double>& relaxed, const std::vector<double>& sampled,
                              const std::vector<std::string>& names) {
  for (const auto& n : names) os << "c_" << n << ",";
  os << "relaxed,sampled,difference\n";
  os.precision(17);
  for (size_t i = 0; i < dirs.size() && i < relaxed.size() && i < sampled.size(); ++i) {
    for (double v : dirs[i]) os << v << ",";
    os << relaxed[i] << "," << sampled[i] << "," << relaxed[i] - sampled[i] << "\n";
  }
}

inline void write_fan_csv(std::ostream& os, const RecessionFan& fan) {
  os << "dx,dy,confirmed_at\n";
  os.precision(17);
  for (const auto& r : fan.rays) os << r.direction[0] << "," << r.direction[1] << "," << r.confirmed_at << "\n";
}

/// Cone over a compact K: t M0 + sum x_i M_i + sum y_j N_j >= 0 and t >= 0.
inline Pencil homogenize_pencil(const Pencil& p) {
  p.validate();
  Pencil h;
  std::string t = "t";
  while (std::find(p.x_names.begin(), p.x_names.end(), t) != p.x_names.end()) t += "_";
  h.x_names.push_back(t);
  for (const auto& n : p.x_names) h.x_names.push_back(n);
  h.y_names = p.y_names;
  h.y_labels = p.y_labels;
  for (const auto& b : p.blocks) {
    PencilBlock nb;
    nb.constant = RatMatrix::zero(b.size());
    nb.x_coeffs.push_back(b.constant);
    for (const auto& m : b.x_coeffs) nb.x_coeffs.push_back(m);
    nb.y_coeffs = b.y_coeffs;
    h.blocks.push_back(std::move(nb));
  }
  PencilBlock tb;
  tb.constant = RatMatrix::zero(1);
  tb.x_coeffs.assign(h.n(), RatMatrix::zero(1));
  tb.x_coeffs[0](0, 0) = 1;
  tb.y_coeffs.assign(h.k(), RatMatrix::zero(1));
  h.blocks.push_back(std::move(tb));
  for (const auto& e : p.equalities) {
    LinearEquality ne;
    ne.x_coeffs.push_back(-e.rhs);
    for (const auto& c : e.x_coeffs) ne.x_coeffs.push_back(c);
    ne.y_coeffs = e.y_coeffs;
    ne.rhs = 0;
    h.equalities.push_back(std::move(ne));
  }
  return h;
}

/// Slices a cone pencil with <x, w> = 1 after checking that w is positive
/// on the recession rays (0, r) and on the lifted sample points (1, xi), and
/// that the slice is bounded.
inline Pencil compactify_base(const Pencil& cone, const std::vector<Rational>& w,
                              const std::vector<std::vector<double>>& rays,
                              const std::vector<std::vector<double>>& samples, unsigned seed = 2024) {
  cone.validate();
  if (w.size() != cone.n()) throw StructuralError("slice functional has the wrong dimension");
  if (std::all_of(w.begin(), w.end(), [](const Rational& q) { return q == 0; }))
    throw DomainError("the zero functional is not interior to the dual cone; choose another w");
  std::vector<double> wd;
  for (const auto& q : w) wd.push_back(q.get_d());
  constexpr double margin = 1e-6;
  for (const auto& r : rays) {
    double v = 0;
    for (size_t i = 0; i < r.size(); ++i) v += wd[i + 1] * r[i];
    if (v < margin) throw DomainError("w is not positive on a recession ray; choose another w");
  }
  for (const auto& xi : samples) {
    double v = wd[0];
    for (size_t i = 0; i < xi.size(); ++i) v += wd[i + 1] * xi[i];
    if (v < margin) throw DomainError("w is not positive on a lifted sample point; choose another w");
  }
  Pencil s = cone;
  s.equalities.push_back({w, std::vector<Rational>(cone.k(), Rational(0)), Rational(1)});
  const Lmi l = to_lmi(s);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (size_t k = 0; k < 2 * cone.n(); ++k) {
    std::vector<double> c(cone.n());
    double nrm = 0;
    for (auto& v : c) {
      v = nd(rng);
      nrm += v * v;
    }
    for (auto& v : c) v /= std::sqrt(nrm);
    if (support_relaxed(l, c).status == sdp::Status::Unbounded)
      throw DomainError("the slice <x, w> = 1 is unbounded; choose another w");
  }
  return s;
}

}  // namespace curvehull
