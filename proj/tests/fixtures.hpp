#pragma once

#include "curvehull/geometry.hpp"
#include "curvehull/poly_parse.hpp"
#include "curvehull/relaxation.hpp"

namespace fixtures {

using namespace curvehull;

inline Poly P(const std::string& s, const std::vector<std::string>& vars) { return parse_poly(s, vars); }

struct Setup {
  RingPtr ring;
  RelaxationSpec spec;
  std::vector<RingElement> phi;  // coordinates of L besides 1
  std::vector<RingElement> constraints;
  Box box;
};

// y^2 + x^2 (x-1)(x-2) = 0 through its normalisation z^2 + (x-1)(x-2) and the
// isolated origin; W = (1 - e, e, u, v).
inline Setup golden() {
  const std::vector<std::string> XZ{"x", "z"};
  auto ring = CurveRing::create({CurveComponent::plane(P("z^2+(x-1)*(x-2)", XZ)),
                                 CurveComponent::point({Rational(0), Rational(0)})});
  RingElement e = ring->idempotent(0);
  RingElement u = ring->lift(0, P("x", XZ));
  RingElement v = ring->lift(0, P("z", XZ));
  Setup s;
  s.ring = ring;
  s.phi = {u, u * v};
  s.spec.ring = ring;
  s.spec.L = SubspaceBasis({ring->one(), u, u * v});
  s.spec.coordinate_names = {"x", "y"};
  s.spec.generators = {ring->one()};
  s.spec.W = {SubspaceBasis({ring->one() - e, e, u, v})};
  s.box = {{"x", {-1.0, 3.0}}};
  return s;
}

inline Setup circle() {
  const std::vector<std::string> XY{"x", "y"};
  auto ring = CurveRing::create({CurveComponent::plane(P("x^2+y^2-1", XY))});
  RingElement x = ring->lift(0, P("x", XY));
  RingElement y = ring->lift(0, P("y", XY));
  Setup s;
  s.ring = ring;
  s.phi = {x, y};
  s.spec.ring = ring;
  s.spec.L = SubspaceBasis({ring->one(), x, y});
  s.spec.coordinate_names = {"x", "y"};
  s.spec.generators = {ring->one()};
  s.spec.W = {SubspaceBasis({ring->one(), x, y})};
  s.box = {{"x", {-1.0, 1.0}}};
  return s;
}

// Oval of y^2 = x^3 - x selected by -x^2 - x >= 0, at level d.
inline Setup cubic_oval(int d) {
  const std::vector<std::string> XY{"x", "y"};
  auto ring = CurveRing::create({CurveComponent::plane(P("y^2-x^3+x", XY))});
  RingElement x = ring->lift(0, P("x", XY));
  RingElement y = ring->lift(0, P("y", XY));
  RingElement h = ring->lift(0, P("-x^2-x", XY));
  Setup s;
  s.ring = ring;
  s.phi = {x, y};
  s.constraints = {h};
  s.spec.ring = ring;
  s.spec.L = SubspaceBasis({ring->one(), x, y});
  s.spec.coordinate_names = {"x", "y"};
  s.spec.generators = {ring->one(), h};
  s.spec.W = {SubspaceBasis(ring->basis_up_to(d)), SubspaceBasis(ring->basis_up_to(d - 1))};
  s.box = {{"x", {-2.0, 2.0}}};
  return s;
}

inline SampleCloud cloud(const Setup& s, int grid = 400) {
  return sample_curve(*s.ring, s.constraints, s.phi, s.box, grid);
}

// [[1 + x, y], [y, 1 - x]] >= 0 describes the unit disk.
inline Pencil disk_pencil() {
  Pencil p;
  p.x_names = {"x", "y"};
  PencilBlock b;
  b.constant = RatMatrix{2, {Rational(1), Rational(0), Rational(0), Rational(1)}};
  b.x_coeffs = {RatMatrix{2, {Rational(1), Rational(0), Rational(0), Rational(-1)}},
                RatMatrix{2, {Rational(0), Rational(1), Rational(1), Rational(0)}}};
  p.blocks = {b};
  return p;
}

}  // namespace fixtures
