#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curvehull/curve_ring.hpp"
#include "curvehull/geometry.hpp"
#include "curvehull/poly_parse.hpp"
#include "curvehull/relaxation.hpp"

namespace curvehull {

/// One irreducible component given by its normalization: a plane curve in
/// its own two variables and the images of the ambient coordinates.
struct NormalizationData {
  Poly relation;
  std::vector<Poly> phi;
};

/// Element of the product ring written component by component: a
/// polynomial in the component variables, or a number on a Point component.
using ElementText = std::vector<std::string>;

struct CurveJob {
  std::vector<std::string> variables;
  std::optional<Poly> curve;  // C0 in the ambient variables
  std::vector<NormalizationData> normalization;
  std::vector<std::vector<Rational>> isolated_points;
  std::vector<Poly> generators;  // h_1..h_r in the ambient variables
  std::optional<int> level;
  std::vector<std::vector<ElementText>> subspaces;  // explicit W_0..W_r
  int max_level = 4;
  double tol = 1e-3;
  Box box;
  int grid = 400;
  unsigned seed = 2024;
  std::optional<double> chart_delta;  // noncompact route: w = (1, delta * mean ray)
  std::vector<std::vector<double>> directions;  // empty: direction_set(n, seed)
};

struct Presentation {
  RingPtr ring;
  SubspaceBasis L;
  std::vector<RingElement> phi;
  std::vector<RingElement> generators;
  std::vector<std::string> names;
};

namespace detail {

inline RingElement compose(const RingPtr& ring, const std::vector<std::vector<Poly>>& phis,
                           const std::vector<std::vector<Rational>>& points, const Poly& h) {
  std::vector<RingElement::Part> parts;
  size_t plane = 0, point = 0;
  for (size_t k = 0; k < ring->size(); ++k) {
    if (ring->component(k).kind() == ComponentKind::PlaneQuotient)
      parts.emplace_back(h.substitute(phis[plane++]));
    else
      parts.emplace_back(h.evaluate<Rational>(points[point++]));
  }
  return RingElement(ring, std::move(parts));
}

}  // namespace detail

/// Product ring C'_0 x P_1 x ... x P_k with L = span(1, phi(x_1), ..., phi(x_n)).
inline Presentation augment_presentation(const CurveJob& job) {
  if (job.variables.empty()) throw StructuralError("job without ambient variables");
  std::vector<CurveComponent> comps;
  std::vector<std::vector<Poly>> phis;
  auto add_plane = [&](const Poly& relation, const std::vector<Poly>& phi) {
    if (phi.size() != job.variables.size())
      throw StructuralError("coordinate map needs one image per ambient variable");
    MonicPresentation mp = make_monic(relation);
    const auto& vars = mp.relation.variables();
    std::vector<Poly> back{Poly::variable(vars, vars[0]) + Poly::variable(vars, vars[1]) * Rational(mp.shear),
                           Poly::variable(vars, vars[1])};
    std::vector<Poly> composed;
    for (const auto& p : phi) composed.push_back(p.with_variables(vars).substitute(back));
    comps.push_back(CurveComponent::plane(mp.relation));
    phis.push_back(std::move(composed));
  };
  if (!job.normalization.empty()) {
    for (const auto& nd : job.normalization) add_plane(nd.relation, nd.phi);
  } else if (job.curve) {
    if (job.variables.size() != 2) throw StructuralError("a bare defining polynomial needs two ambient variables");
    std::vector<Poly> id;
    for (const auto& v : job.variables) id.push_back(Poly::variable(job.variables, v));
    add_plane(*job.curve, id);
  }
  for (const auto& p : job.isolated_points) {
    if (p.size() != job.variables.size()) throw StructuralError("isolated point has the wrong dimension");
    comps.push_back(CurveComponent::point(p));
  }
  if (comps.empty()) throw StructuralError("job describes an empty curve");

  Presentation pr;
  pr.ring = CurveRing::create(std::move(comps));
  pr.names = job.variables;
  std::vector<RingElement> l{pr.ring->one()};
  for (const auto& v : job.variables) {
    Poly coord = Poly::variable(job.variables, v);
    pr.phi.push_back(detail::compose(pr.ring, phis, job.isolated_points, coord));
    l.push_back(pr.phi.back());
  }
  try {
    pr.L = SubspaceBasis(std::move(l));
  } catch (const StructuralError&) {
    throw ConstructionError("affine hull of K is lower-dimensional; re-coordinate");
  }
  for (const auto& h : job.generators)
    pr.generators.push_back(detail::compose(pr.ring, phis, job.isolated_points, h.with_variables(job.variables)));
  return pr;
}

/// Parses an element given component by component.
inline RingElement parse_element(const Presentation& pr, const ElementText& text) {
  if (text.size() != pr.ring->size()) throw StructuralError("ring element needs one entry per component");
  std::vector<RingElement::Part> parts;
  for (size_t k = 0; k < text.size(); ++k) {
    const auto& comp = pr.ring->component(k);
    if (comp.kind() == ComponentKind::PlaneQuotient)
      parts.emplace_back(parse_poly(text[k], comp.plane().variables()));
    else
      parts.emplace_back(parse_rational(text[k]));
  }
  return RingElement(pr.ring, std::move(parts));
}

inline int ceil_half(int e) { return (e + 1) / 2; }

/// W_i = monomials of degree <= d - ceil(deg h_i / 2) plus Point idempotents;
/// generators with a negative budget are left out.
inline RelaxationSpec default_level_spec(const Presentation& pr, int d) {
  RelaxationSpec s;
  s.ring = pr.ring;
  s.L = pr.L;
  s.coordinate_names = pr.names;
  s.generators.push_back(pr.ring->one());
  s.W.push_back(SubspaceBasis(pr.ring->basis_up_to(d)));
  for (const auto& h : pr.generators) {
    const int budget = d - ceil_half(std::max(0, h.total_degree()));
    if (budget < 0) continue;
    s.generators.push_back(h);
    s.W.push_back(SubspaceBasis(pr.ring->basis_up_to(budget)));
  }
  return s;
}

inline RelaxationSpec explicit_spec(const Presentation& pr, const std::vector<std::vector<ElementText>>& subspaces) {
  if (subspaces.size() != pr.generators.size() + 1)
    throw StructuralError("explicit subspaces need one list per generator, starting with W_0");
  RelaxationSpec s;
  s.ring = pr.ring;
  s.L = pr.L;
  s.coordinate_names = pr.names;
  s.generators.push_back(pr.ring->one());
  for (const auto& h : pr.generators) s.generators.push_back(h);
  for (const auto& w : subspaces) {
    std::vector<RingElement> els;
    for (const auto& t : w) els.push_back(parse_element(pr, t));
    s.W.push_back(SubspaceBasis(std::move(els)));
  }
  return s;
}

inline Box scale_box(const Box& box, double factor) {
  Box out;
  for (const auto& [name, iv] : box) {
    const double c = 0.5 * (iv.first + iv.second), h = 0.5 * (iv.second - iv.first);
    out[name] = {c - factor * h, c + factor * h};
  }
  return out;
}

inline double box_half_width(const Box& box) {
  double h = 0;
  for (const auto& [name, iv] : box) h = std::max(h, 0.5 * (iv.second - iv.first));
  return h;
}

inline SampleCloud sample_job(const Presentation& pr, const Box& box, int grid) {
  return sample_curve(*pr.ring, pr.generators, pr.phi, box, grid);
}

inline double diameter(const SampleCloud& c) {
  double d = 0;
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = i + 1; j < c.size(); ++j) {
      double s = 0;
      for (size_t k = 0; k < c.points[i].size(); ++k) s += std::pow(c.points[i][k] - c.points[j][k], 2);
      d = std::max(d, s);
    }
  return std::sqrt(d);
}

/// Sampled diameter stays put when the box is doubled.
inline bool appears_compact(const Presentation& pr, const Box& box, int grid) {
  const int g = std::min(grid, 200);
  const double d1 = diameter(sample_job(pr, box, g));
  const double d2 = diameter(sample_job(pr, scale_box(box, 2.0), 2 * g));
  return d2 <= 1.05 * d1 + 1e-6;
}

/// Checks the job invariants against a sample of the plane components.
inline void validate_job(const CurveJob& job, const Presentation& pr, const SampleCloud& cloud) {
  if (job.curve) {
    const Poly f = job.curve->with_variables(job.variables);
    const int deg = f.total_degree();
    for (const auto& p : job.isolated_points) {
      std::vector<double> pd;
      for (const auto& q : p) pd.push_back(q.get_d());
      if (std::abs(f.evaluate<double>(pd)) > 1e-9) throw DomainError("isolated point is not on the curve");
    }
    for (size_t i = 0; i < cloud.size(); ++i) {
      if (pr.ring->component(cloud.component[i]).kind() == ComponentKind::Point) continue;
      const auto& p = cloud.points[i];
      double nrm = 0;
      for (double v : p) nrm += v * v;
      if (std::abs(f.evaluate<double>(p)) > 1e-6 * (1 + std::pow(std::sqrt(nrm), deg)))
        throw DomainError("coordinate map does not send the normalization onto the curve");
    }
  }
  for (size_t j = 0; j < job.isolated_points.size(); ++j) {
    for (size_t i = 0; i < cloud.size(); ++i) {
      if (pr.ring->component(cloud.component[i]).kind() == ComponentKind::Point) continue;
      double s = 0;
      for (size_t k = 0; k < cloud.points[i].size(); ++k)
        s += std::pow(cloud.points[i][k] - job.isolated_points[j][k].get_d(), 2);
      if (std::sqrt(s) < 1e-2) throw DomainError("listed point is not isolated: the curve passes nearby");
    }
  }
}

enum class CertStatus { Exact, Approximate, Failed };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Exact: return "exact";
    case CertStatus::Approximate: return "approximate";
    case CertStatus::Failed: return "failed";
  }
  return "?";
}

struct LevelRecord {
  int level = 0;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<size_t> block_sizes;
  std::string note;
};

struct CertReport {
  CertStatus status = CertStatus::Failed;
  std::string reason;
  double tol = 1e-3;
  int level = 0;
  std::vector<size_t> block_sizes;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<LevelRecord> levels;
  std::vector<std::vector<double>> directions;
  std::vector<double> relaxed, sampled;
  std::optional<Pencil> pencil;  // affine representation over the ambient coordinates
  std::vector<std::vector<std::string>> bases;
  std::vector<std::string> generators;
  RecessionFan fan;
  // noncompact route
  std::optional<Pencil> cone_pencil;
  std::optional<Pencil> slice_pencil;
  std::vector<Rational> w;
};

struct LevelOptions {
  bool stop_at_exact = true;
};

namespace detail {

inline void fill_from_spec(CertReport& r, const RelaxationSpec& spec) {
  r.bases.clear();
  for (const auto& w : spec.W) {
    std::vector<std::string> b;
    for (const auto& e : w.elements()) b.push_back(e.to_string());
    r.bases.push_back(std::move(b));
  }
  r.generators.clear();
  for (const auto& h : spec.generators) r.generators.push_back(h.to_string());
}

}  // namespace detail

/// Iterates d = 1..max_level (or the fixed level / explicit subspaces of the
/// job) and stops at the first level whose exactness gap is within tol.
inline CertReport level_search(const CurveJob& job, int max_level, double tol, LevelOptions opt = {}) {
  CertReport r;
  r.tol = tol;
  const Presentation pr = augment_presentation(job);
  const SampleCloud cloud = sample_job(pr, job.box, job.grid);
  if (cloud.empty()) {
    r.reason = "K is empty in the sampling box";
    return r;
  }
  validate_job(job, pr, cloud);
  if (!appears_compact(pr, job.box, job.grid)) {
    r.reason = "K appears noncompact (sampled diameter grows with the box); use the noncompact route";
    return r;
  }
  const auto dirs = job.directions.empty() ? direction_set(pr.names.size(), job.seed) : job.directions;
  for (const auto& d : dirs)
    if (d.size() != pr.names.size()) throw StructuralError("direction of wrong dimension");
  r.directions = dirs;

  std::vector<std::pair<int, RelaxationSpec>> specs;
  if (!job.subspaces.empty()) {
    specs.emplace_back(job.level.value_or(0), explicit_spec(pr, job.subspaces));
  } else if (job.level) {
    specs.emplace_back(*job.level, default_level_spec(pr, *job.level));
  } else {
    for (int d = 1; d <= max_level; ++d) specs.emplace_back(d, default_level_spec(pr, d));
  }

  bool have_best = false;
  for (auto& [d, spec] : specs) {
    LevelRecord rec;
    rec.level = d;
    std::optional<MomentSDP> msdp;
    try {
      msdp = assemble_moment_sdp(spec);
      for (const auto& b : msdp->blocks) rec.block_sizes.push_back(b.size());
      GapReport g = exactness_gap(to_lmi(*msdp), dirs, cloud);
      rec.gap = g.gap;
      if (!g.containment_ok) rec.note = "sampled support exceeds the relaxation by more than 1e-6";
      if (!have_best || rec.gap < r.gap) {
        have_best = true;
        r.level = d;
        r.gap = rec.gap;
        r.block_sizes = rec.block_sizes;
        r.relaxed = g.relaxed;
        r.sampled = g.sampled;
        r.pencil = export_pencil(*msdp);
        detail::fill_from_spec(r, spec);
      }
    } catch (const ConstructionError& e) {
      rec.note = e.what();
    } catch (const InconsistencyError& e) {
      rec.note = std::string("unbounded relaxation: ") + e.what();
      if (msdp && !have_best) {
        r.level = d;
        r.block_sizes = rec.block_sizes;
        r.pencil = export_pencil(*msdp);
        detail::fill_from_spec(r, spec);
      }
    }
    r.levels.push_back(rec);
    if (rec.gap <= tol && opt.stop_at_exact) break;
  }
  if (!r.pencil) {
    r.reason = "no level produced a relaxation";
    return r;
  }
  r.status = r.gap <= tol ? CertStatus::Exact : CertStatus::Approximate;
  if (r.status == CertStatus::Approximate) r.reason = "exactness gap above tolerance at every level";
  return r;
}

namespace detail {

/// t^k g(x / t) for a polynomial g of degree <= k, with t a polynomial.
inline Poly homogenize_with(const Poly& g, const Poly& t, int k) {
  Poly out(g.variables());
  for (const auto& [e, c] : g.terms()) {
    Poly term = Poly::monomial(g.variables(), e, c);
    out += term * t.pow(k - total_degree(e));
  }
  return out;
}

// Substitute t = 1 into a cone pencil over (t, x).
inline Pencil dehomogenize(const Pencil& cone) {
  Pencil a;
  a.x_names.assign(cone.x_names.begin() + 1, cone.x_names.end());
  a.y_names = cone.y_names;
  a.y_labels = cone.y_labels;
  for (const auto& b : cone.blocks) {
    PencilBlock nb;
    nb.constant = b.constant;
    for (size_t i = 0; i < b.constant.data.size(); ++i) nb.constant.data[i] += b.x_coeffs[0].data[i];
    nb.x_coeffs.assign(b.x_coeffs.begin() + 1, b.x_coeffs.end());
    nb.y_coeffs = b.y_coeffs;
    a.blocks.push_back(std::move(nb));
  }
  for (const auto& e : cone.equalities) {
    LinearEquality ne;
    ne.x_coeffs.assign(e.x_coeffs.begin() + 1, e.x_coeffs.end());
    ne.y_coeffs = e.y_coeffs;
    ne.rhs = e.rhs - e.x_coeffs[0];
    a.equalities.push_back(std::move(ne));
  }
  return a;
}

// Pencil over Xs rewritten over X = c + S Xs.
inline Pencil unscale(const Pencil& p, const std::vector<Rational>& c, const Rational& S) {
  Pencil q = p;
  for (auto& b : q.blocks)
    for (size_t i = 0; i < b.x_coeffs.size(); ++i)
      for (size_t k = 0; k < b.constant.data.size(); ++k) {
        b.x_coeffs[i].data[k] /= S;
        b.constant.data[k] -= c[i] * b.x_coeffs[i].data[k];
      }
  for (auto& e : q.equalities)
    for (size_t i = 0; i < e.x_coeffs.size(); ++i) {
      e.x_coeffs[i] /= S;
      e.rhs += c[i] * e.x_coeffs[i];
    }
  return q;
}

// Cone over the slice K1 = {<w, P> = 1} given by a pencil over the
// coordinates X = (P_1..P_n) of the slice (P_0 eliminated).
inline Pencil cone_over_slice(const Pencil& slice, const std::vector<Rational>& w) {
  const size_t n = slice.n();
  Pencil c;
  c.x_names.push_back("t");
  for (const auto& nme : slice.x_names) c.x_names.push_back(nme);
  c.y_names = slice.y_names;
  c.y_labels = slice.y_labels;
  auto scaled = [](const RatMatrix& m, const Rational& s) {
    RatMatrix r = m;
    for (auto& v : r.data) v *= s;
    return r;
  };
  for (const auto& b : slice.blocks) {
    PencilBlock nb;
    nb.constant = RatMatrix::zero(b.size());
    nb.x_coeffs.push_back(scaled(b.constant, w[0]));
    for (size_t i = 0; i < n; ++i) {
      RatMatrix m = scaled(b.constant, w[i + 1]);
      for (size_t q = 0; q < m.data.size(); ++q) m.data[q] += b.x_coeffs[i].data[q];
      nb.x_coeffs.push_back(m);
    }
    nb.y_coeffs = b.y_coeffs;
    c.blocks.push_back(std::move(nb));
  }
  PencilBlock sb;
  sb.constant = RatMatrix::zero(1);
  for (size_t i = 0; i <= n; ++i) sb.x_coeffs.push_back(RatMatrix{1, {w[i]}});
  sb.y_coeffs.assign(c.k(), RatMatrix::zero(1));
  c.blocks.push_back(std::move(sb));
  for (const auto& e : slice.equalities) {
    LinearEquality ne;
    ne.x_coeffs.push_back(-e.rhs * w[0]);
    for (size_t i = 0; i < n; ++i) ne.x_coeffs.push_back(e.x_coeffs[i] - e.rhs * w[i + 1]);
    ne.y_coeffs = e.y_coeffs;
    ne.rhs = 0;
    c.equalities.push_back(std::move(ne));
  }
  return c;
}

}  // namespace detail

// Sample out to a few confirmation radii, where the asymptotic directions show.
inline SampleCloud far_sample(const CurveJob& job) {
  const Presentation pr = augment_presentation(job);
  if (!job.curve || pr.names.size() != 2)
    throw StructuralError("the noncompact route needs a plane defining polynomial");
  const double R0 = confirmation_radius(box_half_width(job.box));
  const double reach = 4 * R0 + box_half_width(job.box);
  Box far;
  for (const auto& [name, iv] : job.box) {
    const double c = 0.5 * (iv.first + iv.second);
    far[name] = {c - reach, c + reach};
  }
  return sample_job(pr, far, std::max(801, job.grid));
}

inline RecessionFan recession_fan(const CurveJob& job) {
  return asymptotic_directions(job.curve->with_variables(job.variables), far_sample(job),
                               confirmation_radius(box_half_width(job.box)));
}

/// Bounded slice K1 = {<w, P> = 1} of K^h, written over X = P / <w, P> and
/// then over Xs with X = center + scale * Xs.
struct Chart {
  CurveJob job;
  std::vector<Rational> w;
  std::vector<Rational> center;
  Rational scale = 1;
  RecessionFan fan;
};

inline Chart noncompact_chart(const CurveJob& job, const RecessionFan& fan) {
  if (!job.normalization.empty())
    throw StructuralError("the noncompact route supports curves given by their defining polynomial only");
  if (fan.empty()) throw DomainError("no recession direction: K is compact");
  const Presentation pr = augment_presentation(job);
  const Poly f = job.curve->with_variables(job.variables);

  // w = (1, delta * mean ray). Small delta is the safe choice but flattens
  // K1 towards a pair of lines, so the largest delta that stays positive on
  // the sample and on the rays is used.
  std::vector<double> mean(2, 0.0);
  for (const auto& ray : fan.rays)
    for (size_t i = 0; i < 2; ++i) mean[i] += ray.direction[i];
  const double mn = std::hypot(mean[0], mean[1]);
  const SampleCloud probe = far_sample(job);
  const SampleCloud near = sample_job(pr, job.box, job.grid);
  Chart ch;
  ch.fan = fan;
  const std::vector<double> deltas = job.chart_delta ? std::vector<double>{*job.chart_delta}
                                                     : std::vector<double>{1.0, 1e-1, 1e-2};
  for (double delta : deltas) {
    std::vector<Rational> cand{Rational(1)};
    for (size_t i = 0; i < 2; ++i) cand.push_back(round_to(delta * mean[i] / mn, 1000000));
    const double w1 = cand[1].get_d(), w2 = cand[2].get_d();
    bool ok = true;
    for (const auto* c : {&probe, &near})
      for (const auto& p : c->points)
        if (1 + w1 * p[0] + w2 * p[1] < 1e-3 * (1 + std::hypot(p[0], p[1]))) ok = false;
    for (const auto& ray : fan.rays)
      if (w1 * ray.direction[0] + w2 * ray.direction[1] < 1e-3 * delta) ok = false;
    if (ok) {
      ch.w = cand;
      break;
    }
  }
  if (ch.w.empty()) throw DomainError("no chart functional is positive on K; choose w by hand");
  const auto& w = ch.w;

  // t = (1 - w1 X1 - w2 X2) / w0
  const auto& vars = job.variables;
  Poly t = Poly::constant(vars, Rational(1) / w[0]);
  for (size_t i = 0; i < 2; ++i) t -= Poly::variable(vars, vars[i]) * (w[i + 1] / w[0]);
  CurveJob k1;
  k1.variables = vars;
  k1.curve = detail::homogenize_with(f, t, f.total_degree());
  for (const auto& h : job.generators) {
    const Poly hh = h.with_variables(vars);
    k1.generators.push_back(detail::homogenize_with(hh, t, hh.total_degree()));  // sign kept since t >= 0
  }
  if (!t.is_constant()) k1.generators.push_back(t);
  auto ell = [&](const std::vector<double>& xi) { return w[0].get_d() + w[1].get_d() * xi[0] + w[2].get_d() * xi[1]; };
  for (const auto& p : job.isolated_points) {
    Rational l = w[0] + w[1] * p[0] + w[2] * p[1];
    if (l <= 0) throw DomainError("isolated point outside the chart; choose another w");
    k1.isolated_points.push_back({p[0] / l, p[1] / l});
  }
  k1.max_level = job.max_level;
  k1.tol = job.tol;
  k1.grid = job.grid;
  k1.seed = job.seed;
  k1.level = job.level;

  // K1 is located from the images of the sample and of the rays
  const SampleCloud cloud = sample_job(pr, job.box, job.grid);
  double extent = 0;
  for (const auto& p : cloud.points) {
    const double l = ell(p);
    if (l > 0) extent = std::max({extent, std::abs(p[0] / l), std::abs(p[1] / l)});
  }
  for (const auto& ray : fan.rays) {
    const double l = w[1].get_d() * ray.direction[0] + w[2].get_d() * ray.direction[1];
    extent = std::max({extent, std::abs(ray.direction[0] / l), std::abs(ray.direction[1] / l)});
  }
  const std::string& xname = vars[0];
  auto fit_box = [&](CurveJob& kj, double guess) {
    const MonicPresentation mp = make_monic(*kj.curve);
    const double reach = 4 * (1 + std::abs(mp.shear)) * guess + 1;
    kj.box = {{xname, {-reach, reach}}};
    const Presentation p1 = augment_presentation(kj);
    const SampleCloud wide = sample_job(p1, kj.box, 4001);
    const double inf = std::numeric_limits<double>::infinity();
    double lo = inf, hi = -inf;
    std::array<double, 4> bb{inf, -inf, inf, -inf};
    for (size_t i = 0; i < wide.size(); ++i) {
      for (size_t k = 0; k < 2; ++k) {
        bb[2 * k] = std::min(bb[2 * k], wide.points[i][k]);
        bb[2 * k + 1] = std::max(bb[2 * k + 1], wide.points[i][k]);
      }
      if (p1.ring->component(wide.component[i]).kind() == ComponentKind::Point) continue;
      lo = std::min(lo, wide.source[i][0]);
      hi = std::max(hi, wide.source[i][0]);
    }
    if (lo <= hi) {
      const double pad = 0.01 * (hi - lo) + 1e-6;
      kj.box = {{xname, {lo - pad, hi + pad}}};
    }
    return bb;
  };
  const auto bb = fit_box(k1, extent);
  if (!(bb[0] <= bb[1])) throw DomainError("the bounded slice K1 came out empty");

  // rescale so the SDPs see a set of unit size
  ch.center = {round_to(0.5 * (bb[0] + bb[1]), 1000), round_to(0.5 * (bb[2] + bb[3]), 1000)};
  ch.scale = round_to(0.5 * std::max(bb[1] - bb[0], bb[3] - bb[2]), 1000);
  if (ch.scale <= 0) ch.scale = 1;
  std::vector<Poly> to_chart;
  for (size_t i = 0; i < 2; ++i)
    to_chart.push_back(Poly::constant(vars, ch.center[i]) + Poly::variable(vars, vars[i]) * ch.scale);
  ch.job = k1;
  ch.job.curve = k1.curve->substitute(to_chart);
  for (auto& g : ch.job.generators) g = g.substitute(to_chart);
  for (auto& p : ch.job.isolated_points)
    for (size_t i = 0; i < 2; ++i) p[i] = (p[i] - ch.center[i]) / ch.scale;
  fit_box(ch.job, 2.0);
  return ch;
}

/// Closed convex hull of a noncompact K through a bounded slice of K^h.
inline CertReport closed_hull_noncompact(const CurveJob& job, int max_level, double tol, LevelOptions opt = {}) {
  const RecessionFan fan = recession_fan(job);
  for (size_t i = 0; i < fan.rays.size(); ++i)
    for (size_t j = i + 1; j < fan.rays.size(); ++j)
      if (dot(fan.rays[i].direction, fan.rays[j].direction) < -1 + 1e-9)
        throw ConstructionError("hull contains a line; project out");
  const Presentation pr = augment_presentation(job);
  const SampleCloud cloud = sample_job(pr, job.box, job.grid);

  if (fan.empty()) {
    CertReport r = level_search(job, max_level, tol, opt);
    r.fan = fan;
    if (r.pencil && std::isfinite(r.gap)) {
      r.w = {Rational(1), Rational(0), Rational(0)};
      r.cone_pencil = homogenize_pencil(*r.pencil);
      r.slice_pencil = compactify_base(*r.cone_pencil, r.w, {}, cloud.points, job.seed);
    }
    return r;
  }

  const Chart ch = noncompact_chart(job, fan);
  CertReport r = level_search(ch.job, max_level, tol, opt);
  r.fan = fan;
  r.w = ch.w;
  if (!r.pencil) return r;
  r.pencil = detail::unscale(*r.pencil, ch.center, ch.scale);
  r.cone_pencil = detail::cone_over_slice(*r.pencil, ch.w);
  r.pencil = detail::dehomogenize(*r.cone_pencil);
  if (std::isfinite(r.gap)) {
    std::vector<std::vector<double>> rays;
    for (const auto& ray : fan.rays) rays.push_back(ray.direction);
    r.slice_pencil = compactify_base(*r.cone_pencil, ch.w, rays, cloud.points, job.seed);
  }
  return r;
}

/// Level search, switching to the chart when the sample looks noncompact.
inline CertReport run_job(const CurveJob& job) {
  CertReport r = level_search(job, job.max_level, job.tol);
  if (r.status == CertStatus::Failed && r.reason.find("noncompact") != std::string::npos)
    r = closed_hull_noncompact(job, job.max_level, job.tol);
  return r;
}

struct WitnessResult {
  bool verified = false;
  double bound = 0.0;
  std::vector<double> sup_by_box;  // box factors 1, 2, 4
  std::string reason;
};

namespace detail {

inline WitnessResult witness(const CurveJob& job, const Presentation& pr, const RingElement& candidate) {
  WitnessResult r;
  if (candidate.ring() != pr.ring) throw StructuralError("candidate lives in a different ring");
  if (candidate.as_constant()) {
    r.reason = "candidate is constant on the curve (" + to_string(*candidate.as_constant()) + ")";
    return r;
  }
  for (double factor : {1.0, 2.0, 4.0}) {
    const SampleCloud c = sample_job(pr, scale_box(job.box, factor), job.grid);
    double sup = 0;
    for (size_t i = 0; i < c.size(); ++i) sup = std::max(sup, std::abs(value_at(candidate, c.component[i], c.source[i])));
    r.sup_by_box.push_back(sup);
  }
  r.bound = 1.05 * r.sup_by_box[0];
  for (size_t i = 1; i < r.sup_by_box.size(); ++i)
    if (r.sup_by_box[i] > r.bound) {
      std::ostringstream os;
      os << "candidate exceeds " << r.bound << " on the box scaled by " << (1 << i) << " (value " << r.sup_by_box[i]
         << ")";
      r.reason = os.str();
      return r;
    }
  r.verified = true;
  return r;
}

}  // namespace detail

/// A nonconstant regular function bounded on K, checked on growing boxes.
/// The candidate is a polynomial in the ambient coordinates, pulled back
/// along phi.
inline WitnessResult virtual_compactness_witness(const CurveJob& job, const Poly& candidate) {
  CurveJob j = job;
  j.generators.push_back(candidate);
  Presentation pr = augment_presentation(j);
  const RingElement g = pr.generators.back();
  pr.generators.pop_back();
  return detail::witness(job, pr, g);
}

// --- the worked example ----------------------------------------------------

inline CurveJob golden_job() {
  CurveJob job;
  job.variables = {"x", "y"};
  job.curve = parse_poly("y^2 + x^2*(x-1)*(x-2)", job.variables);
  const std::vector<std::string> xz{"x", "z"};
  job.normalization.push_back({parse_poly("z^2 + (x-1)*(x-2)", xz), {parse_poly("x", xz), parse_poly("x*z", xz)}});
  job.isolated_points = {{Rational(0), Rational(0)}};
  job.level = 1;
  job.subspaces = {{{"0", "1"}, {"1", "0"}, {"x", "0"}, {"z", "0"}}};  // 1 - e, e, u, v
  job.box = {{"x", {-1.0, 3.0}}};
  return job;
}

namespace detail {

// Exact inverse by Gauss-Jordan; throws if singular.
inline std::vector<std::vector<Rational>> invert(std::vector<std::vector<Rational>> a) {
  const size_t n = a.size();
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
  for (size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) throw ConstructionError("variable identification is not invertible");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const Rational piv = a[c][c];
    for (size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

}  // namespace detail

/// The printed 4x4 matrix over (xi, eta, a, b, c): coefficient matrices of
/// 1, xi, eta, a, b, c.
inline std::vector<RatMatrix> golden_printed_matrix() {
  std::vector<RatMatrix> m(6, RatMatrix::zero(4));
  auto set = [&](size_t which, size_t r, size_t c, int v) {
    m[which](r, c) += v;
    if (r != c) m[which](c, r) += v;
  };
  set(0, 0, 0, 1);
  set(5, 0, 0, -1);
  set(5, 1, 1, 1);
  set(1, 1, 2, 1);
  set(3, 1, 3, 1);
  set(4, 2, 2, 1);
  set(2, 2, 3, 1);
  set(1, 3, 3, 3);
  set(4, 3, 3, -1);
  set(5, 3, 3, -2);
  return m;
}

/// Rewrites the pencil of the worked example in the printed variables
/// xi = lambda(u), eta = lambda(uv), a = lambda(v), b = lambda(u^2), c = lambda(e)
/// and lists the entries that differ from the printed matrix.
inline std::vector<std::string> golden_mismatches(const MomentSDP& m, const Pencil& p) {
  const auto& ring = m.spec.ring;
  RingElement e = ring->idempotent(0);
  RingElement u = ring->lift(0, parse_poly("x", ring->component(0).plane().variables()));
  RingElement v = ring->lift(0, parse_poly("z", ring->component(0).plane().variables()));
  std::vector<RingElement> printed{u, u * v, v, u * u, e};
  const size_t N = p.n() + p.k();
  std::vector<std::string> out;
  if (N != printed.size() || p.blocks.size() != 1 || p.blocks[0].size() != 4) {
    out.push_back("pencil shape differs from the printed 4x4 matrix over five variables");
    return out;
  }
  // printed = A z + o over z = (x, y)
  std::vector<std::vector<Rational>> A(N, std::vector<Rational>(N, Rational(0)));
  std::vector<Rational> o(N, Rational(0));
  for (size_t i = 0; i < N; ++i) {
    LinearForm f = m.U.coordinates(printed[i]);
    o[i] = f[0];
    for (size_t j = 0; j < N; ++j) A[i][j] = f[j + 1];
  }
  const auto Ainv = detail::invert(A);
  const PencilBlock& b = p.blocks[0];
  auto coeff = [&](size_t j) -> const RatMatrix& { return j < p.n() ? b.x_coeffs[j] : b.y_coeffs[j - p.n()]; };
  // z = Ainv (printed - o)
  std::vector<RatMatrix> got(N + 1, RatMatrix::zero(4));
  got[0] = b.constant;
  for (size_t j = 0; j < N; ++j) {
    Rational shift = 0;
    for (size_t i = 0; i < N; ++i) shift += Ainv[j][i] * o[i];
    for (size_t q = 0; q < 16; ++q) {
      got[0].data[q] -= shift * coeff(j).data[q];
      for (size_t i = 0; i < N; ++i) got[i + 1].data[q] += Ainv[j][i] * coeff(j).data[q];
    }
  }
  const auto want = golden_printed_matrix();
  const char* names[] = {"1", "xi", "eta", "a", "b", "c"};
  for (size_t t = 0; t <= N; ++t)
    for (size_t r = 0; r < 4; ++r)
      for (size_t c = 0; c < 4; ++c)
        if (got[t](r, c) != want[t](r, c))
          out.push_back("entry (" + std::to_string(r) + "," + std::to_string(c) + ") coefficient of " + names[t] +
                        ": got " + to_string(got[t](r, c)) + ", expected " + to_string(want[t](r, c)));
  return out;
}

/// Builds the worked example, checks the exported pencil against the printed
/// matrix entry by entry and certifies exactness over 64 directions.
inline CertReport run_example_golden() {
  const CurveJob job = golden_job();
  CertReport r = level_search(job, 1, 1e-3);
  const Presentation pr = augment_presentation(job);
  const MomentSDP m = assemble_moment_sdp(explicit_spec(pr, job.subspaces));
  const auto diff = golden_mismatches(m, export_pencil(m));
  if (!diff.empty()) {
    r.status = CertStatus::Failed;
    r.reason = "golden pencil mismatch:";
    for (const auto& d : diff) r.reason += " " + d + ";";
  }
  return r;
}

}  // namespace curvehull
