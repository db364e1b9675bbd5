#pragma once

#include <cmath>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "curvehull/errors.hpp"
#include "curvehull/poly.hpp"

namespace curvehull {

enum class ComponentKind { PlaneQuotient, Point };

/// Plane curve ring R[x,y]/(f) with f monic in the dependent variable.
struct PlaneQuotient {
  std::string independent;
  std::string dependent;
  Poly relation;  // over {independent, dependent}, monic in dependent
  int degree = 0;  // degree of relation in dependent

  std::vector<std::string> variables() const { return {independent, dependent}; }
};

/// A copy of R housing an isolated point; stores the point's image in R^n.
struct PointComponent {
  std::vector<Rational> coordinates;
};

/// True iff the relation, monic of degree d in its second variable, has no
/// repeated factor. The discriminant in y is a polynomial in x of degree at
/// most (2d-1)*deg_x(f); it vanishes identically iff gcd(f, f_y) is
/// nonconstant for every specialisation of x, and one nonconstant-free
/// specialisation among deg+1 distinct points decides it.
inline bool is_squarefree_in_dependent(const Poly& f) {
  int d = f.degree_in(1);
  if (d <= 1) return true;
  int dx = std::max(f.degree_in(0), 0);
  int bound = (2 * d - 1) * dx;
  Poly fy = f.derivative(1);
  for (int k = 0; k <= bound; ++k) {
    std::vector<Rational> at{Rational(k), Rational(0)};
    UniPoly g = specialize_to_univariate(f, 1, at);
    UniPoly gp = specialize_to_univariate(fy, 1, at);
    if (uni_gcd(g, gp).size() <= 1) return true;
  }
  return false;
}

class CurveComponent {
 public:
  /// Validates a plane relation: two variables, monic (after dividing by a
  /// constant leading coefficient) in the second variable, squarefree.
  static CurveComponent plane(const Poly& relation) {
    if (relation.num_vars() != 2) throw StructuralError("plane component needs exactly two variables");
    int d = relation.degree_in(1);
    if (d < 1) throw StructuralError("relation must have positive degree in '" + relation.variables()[1] + "'");
    Poly lead = relation.coefficients_in(1).back();
    if (!lead.is_constant())
      throw StructuralError("relation is not monic in '" + relation.variables()[1] + "'; apply make_monic first");
    Poly monic = relation * (Rational(1) / lead.constant_term());
    if (!is_squarefree_in_dependent(monic))
      throw StructuralError("relation '" + relation.to_string() + "' is not squarefree");
    CurveComponent c;
    c.data_ = PlaneQuotient{relation.variables()[0], relation.variables()[1], std::move(monic), d};
    return c;
  }

  static CurveComponent point(std::vector<Rational> coordinates) {
    for (auto& q : coordinates) q.canonicalize();
    CurveComponent c;
    c.data_ = PointComponent{std::move(coordinates)};
    return c;
  }

  ComponentKind kind() const {
    return std::holds_alternative<PlaneQuotient>(data_) ? ComponentKind::PlaneQuotient : ComponentKind::Point;
  }
  const PlaneQuotient& plane() const {
    if (auto* p = std::get_if<PlaneQuotient>(&data_)) return *p;
    throw StructuralError("component is not a plane quotient");
  }
  const PointComponent& point() const {
    if (auto* p = std::get_if<PointComponent>(&data_)) return *p;
    throw StructuralError("component is not a point");
  }

 private:
  std::variant<PlaneQuotient, PointComponent> data_;
};

/// Remainder of p modulo the monic relation, taken in the dependent variable.
inline Poly normal_form(const Poly& p, const PlaneQuotient& comp) {
  if (p.variables() != comp.relation.variables())
    throw StructuralError("polynomial variables do not match the component ring");
  const int d = comp.degree;
  if (p.degree_in(1) < d) return p;

  // dependent-variable coefficient table: rows[j] holds coefficients of y^j
  // as a univariate map in x.
  using Uni = std::map<int, Rational>;
  std::vector<Uni> rows(static_cast<size_t>(p.degree_in(1) + 1));
  for (const auto& [e, c] : p.terms()) rows[static_cast<size_t>(e[1])][e[0]] += c;

  // y^d == -(f_{d-1} y^{d-1} + ... + f_0)
  std::vector<Uni> tail(static_cast<size_t>(d));
  for (const auto& [e, c] : comp.relation.terms())
    if (e[1] < d) tail[static_cast<size_t>(e[1])][e[0]] -= c;

  for (size_t j = rows.size(); j-- > static_cast<size_t>(d);) {
    const Uni top = std::move(rows[j]);
    rows[j].clear();
    if (top.empty()) continue;
    size_t base = j - static_cast<size_t>(d);
    for (size_t k = 0; k < tail.size(); ++k) {
      for (const auto& [ea, ca] : top) {
        if (ca == 0) continue;
        for (const auto& [eb, cb] : tail[k]) rows[base + k][ea + eb] += ca * cb;
      }
    }
  }

  Poly r(p.variables());
  for (size_t j = 0; j < static_cast<size_t>(d); ++j)
    for (const auto& [ex, c] : rows[j]) r.add_term({ex, static_cast<int>(j)}, c);
  return r;
}

/// Result of presenting a plane relation monic in its second variable.
/// Original coordinates are recovered as x = x' + shear*y', y = y'.
struct MonicPresentation {
  Poly relation;
  int shear = 0;
};

/// Makes f monic in its second variable. When the leading coefficient is not
/// constant, substitutes x -> x + m*y for the smallest m = 1, 2, ... with the
/// top form nonvanishing at (m, 1); the new y-degree is the total degree.
inline MonicPresentation make_monic(const Poly& f) {
  if (f.num_vars() != 2) throw StructuralError("plane curve needs exactly two variables");
  if (f.is_zero()) throw StructuralError("zero polynomial does not define a curve");
  auto normalize = [](const Poly& g) -> std::optional<Poly> {
    if (g.degree_in(1) < 1) return std::nullopt;
    Poly lead = g.coefficients_in(1).back();
    if (!lead.is_constant()) return std::nullopt;
    return g * (Rational(1) / lead.constant_term());
  };
  if (auto g = normalize(f)) return {*g, 0};
  const auto& vars = f.variables();
  Poly x = Poly::variable(vars, vars[0]);
  Poly y = Poly::variable(vars, vars[1]);
  for (int m = 1; m <= f.total_degree() + 1; ++m) {
    std::vector<Poly> images{x + y * Rational(m), y};
    if (auto g = normalize(f.substitute(images))) return {*g, m};
  }
  throw StructuralError("no shear makes '" + f.to_string() + "' monic");
}

/// Coordinate key for the monomial basis of a product ring.
struct BasisKey {
  size_t component = 0;
  int degree = 0;
  Exponent exponent;

  auto operator<=>(const BasisKey&) const = default;
};

using SparseVector = std::map<BasisKey, Rational>;

class RingElement;

/// Product ring A_1 x ... x A_l x R x ... x R of prepared curve components.
class CurveRing : public std::enable_shared_from_this<CurveRing> {
 public:
  static std::shared_ptr<const CurveRing> create(std::vector<CurveComponent> components) {
    if (components.empty()) throw StructuralError("curve ring needs at least one component");
    return std::shared_ptr<const CurveRing>(new CurveRing(std::move(components)));
  }

  const std::vector<CurveComponent>& components() const { return components_; }
  size_t size() const { return components_.size(); }
  const CurveComponent& component(size_t i) const { return components_.at(i); }

  RingElement zero() const;
  RingElement one() const;
  /// Idempotent supported on a single component.
  RingElement idempotent(size_t component) const;
  /// x^i y^j on one plane component, zero elsewhere.
  RingElement monomial(size_t component, int i, int j) const;
  /// Element that is poly on one plane component and zero elsewhere.
  RingElement lift(size_t component, const Poly& poly) const;

  /// Monomial basis elements x^i y^j (j < d) of total degree <= max_degree on
  /// each plane component, plus the idempotent of each point component.
  std::vector<RingElement> basis_up_to(int max_degree) const;

 private:
  explicit CurveRing(std::vector<CurveComponent> components) : components_(std::move(components)) {}
  std::vector<CurveComponent> components_;
};

using RingPtr = std::shared_ptr<const CurveRing>;

/// Element of a CurveRing stored as per-component normal forms.
class RingElement {
 public:
  using Part = std::variant<Poly, Rational>;

  RingElement() = default;

  RingElement(RingPtr ring, std::vector<Part> parts) : ring_(std::move(ring)), parts_(std::move(parts)) {
    if (!ring_) throw StructuralError("ring element without a ring");
    if (parts_.size() != ring_->size()) throw StructuralError("ring element arity does not match ring");
    for (size_t k = 0; k < parts_.size(); ++k) {
      const auto& comp = ring_->component(k);
      if (comp.kind() == ComponentKind::PlaneQuotient) {
        auto* p = std::get_if<Poly>(&parts_[k]);
        if (!p) {
          // scalars on a plane component are constant functions
          Rational c = std::get<Rational>(parts_[k]);
          parts_[k] = Poly::constant(comp.plane().variables(), c);
        } else {
          parts_[k] = normal_form(*p, comp.plane());
        }
      } else if (!std::holds_alternative<Rational>(parts_[k])) {
        const Poly& p = std::get<Poly>(parts_[k]);
        if (!p.is_constant()) throw StructuralError("point component takes a scalar value");
        parts_[k] = p.constant_term();
      } else {
        std::get<Rational>(parts_[k]).canonicalize();
      }
    }
  }

  const RingPtr& ring() const { return ring_; }
  const std::vector<Part>& parts() const { return parts_; }
  const Poly& poly_part(size_t k) const { return std::get<Poly>(parts_.at(k)); }
  const Rational& scalar_part(size_t k) const { return std::get<Rational>(parts_.at(k)); }

  bool is_zero() const {
    for (const auto& part : parts_) {
      if (auto* p = std::get_if<Poly>(&part)) {
        if (!p->is_zero()) return false;
      } else if (std::get<Rational>(part) != 0) {
        return false;
      }
    }
    return true;
  }

  /// Value c if the element equals c * 1.
  std::optional<Rational> as_constant() const {
    std::optional<Rational> value;
    for (const auto& part : parts_) {
      Rational c;
      if (auto* p = std::get_if<Poly>(&part)) {
        if (!p->is_constant()) return std::nullopt;
        c = p->constant_term();
      } else {
        c = std::get<Rational>(part);
      }
      if (value && *value != c) return std::nullopt;
      value = c;
    }
    return value;
  }

  /// Largest total degree over plane components (0 if none).
  int total_degree() const {
    int d = 0;
    for (const auto& part : parts_)
      if (auto* p = std::get_if<Poly>(&part)) d = std::max(d, p->total_degree());
    return d;
  }

  SparseVector coordinates() const {
    SparseVector v;
    for (size_t k = 0; k < parts_.size(); ++k) {
      if (auto* p = std::get_if<Poly>(&parts_[k])) {
        for (const auto& [e, c] : p->terms()) v.emplace(BasisKey{k, curvehull::total_degree(e), e}, c);
      } else if (const Rational& c = std::get<Rational>(parts_[k]); c != 0) {
        v.emplace(BasisKey{k, 0, {}}, c);
      }
    }
    return v;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << "(";
    for (size_t k = 0; k < parts_.size(); ++k) {
      if (k) os << ", ";
      if (auto* p = std::get_if<Poly>(&parts_[k])) {
        os << p->to_string();
      } else {
        os << curvehull::to_string(std::get<Rational>(parts_[k]));
      }
    }
    os << ")";
    return os.str();
  }

  friend bool operator==(const RingElement& a, const RingElement& b) {
    return a.ring_ == b.ring_ && a.parts_ == b.parts_;
  }

  friend RingElement operator+(const RingElement& a, const RingElement& b) { return combine(a, b, Rational(1)); }
  friend RingElement operator-(const RingElement& a, const RingElement& b) { return combine(a, b, Rational(-1)); }
  friend RingElement operator*(const Rational& s, const RingElement& a) {
    std::vector<Part> parts = a.parts_;
    for (auto& part : parts) {
      if (auto* p = std::get_if<Poly>(&part)) {
        *p *= s;
      } else {
        std::get<Rational>(part) *= s;
      }
    }
    return RingElement(a.ring_, std::move(parts));
  }
  friend RingElement operator*(const RingElement& a, const RingElement& b);

 private:
  static void require_same_ring(const RingElement& a, const RingElement& b) {
    if (!a.ring_ || a.ring_ != b.ring_) throw StructuralError("ring elements belong to different rings");
  }

  static RingElement combine(const RingElement& a, const RingElement& b, const Rational& sign) {
    require_same_ring(a, b);
    std::vector<Part> parts = a.parts_;
    for (size_t k = 0; k < parts.size(); ++k) {
      if (auto* p = std::get_if<Poly>(&parts[k])) {
        *p += std::get<Poly>(b.parts_[k]) * sign;
      } else {
        std::get<Rational>(parts[k]) += sign * std::get<Rational>(b.parts_[k]);
      }
    }
    return RingElement(a.ring_, std::move(parts));
  }

  RingPtr ring_;
  std::vector<Part> parts_;
};

/// Componentwise product, reduced on each plane component.
inline RingElement ring_mul(const RingElement& a, const RingElement& b) {
  if (!a.ring() || a.ring() != b.ring()) throw StructuralError("ring elements belong to different rings");
  std::vector<RingElement::Part> parts;
  parts.reserve(a.parts().size());
  for (size_t k = 0; k < a.parts().size(); ++k) {
    if (auto* p = std::get_if<Poly>(&a.parts()[k])) {
      parts.emplace_back(*p * std::get<Poly>(b.parts()[k]));
    } else {
      parts.emplace_back(Rational(std::get<Rational>(a.parts()[k]) * std::get<Rational>(b.parts()[k])));
    }
  }
  return RingElement(a.ring(), std::move(parts));
}

inline RingElement operator*(const RingElement& a, const RingElement& b) { return ring_mul(a, b); }

inline RingElement element_from_coordinates(const RingPtr& ring, const SparseVector& v) {
  std::vector<RingElement::Part> parts;
  for (size_t k = 0; k < ring->size(); ++k) {
    if (ring->component(k).kind() == ComponentKind::PlaneQuotient)
      parts.emplace_back(Poly(ring->component(k).plane().variables()));
    else
      parts.emplace_back(Rational(0));
  }
  for (const auto& [key, c] : v) {
    if (auto* p = std::get_if<Poly>(&parts.at(key.component)))
      p->add_term(key.exponent, c);
    else
      std::get<Rational>(parts[key.component]) += c;
  }
  return RingElement(ring, std::move(parts));
}

inline RingElement CurveRing::zero() const {
  std::vector<RingElement::Part> parts(components_.size(), Rational(0));
  return RingElement(shared_from_this(), std::move(parts));
}

inline RingElement CurveRing::one() const {
  std::vector<RingElement::Part> parts(components_.size(), Rational(1));
  return RingElement(shared_from_this(), std::move(parts));
}

inline RingElement CurveRing::idempotent(size_t component) const {
  std::vector<RingElement::Part> parts(components_.size(), Rational(0));
  parts.at(component) = Rational(1);
  return RingElement(shared_from_this(), std::move(parts));
}

inline RingElement CurveRing::monomial(size_t component, int i, int j) const {
  const auto& comp = components_.at(component);
  return lift(component, Poly::monomial(comp.plane().variables(), {i, j}, Rational(1)));
}

inline RingElement CurveRing::lift(size_t component, const Poly& poly) const {
  std::vector<RingElement::Part> parts(components_.size(), Rational(0));
  parts.at(component) = poly;
  return RingElement(shared_from_this(), std::move(parts));
}

inline std::vector<RingElement> CurveRing::basis_up_to(int max_degree) const {
  std::vector<RingElement> out;
  if (max_degree < 0) return out;
  for (size_t k = 0; k < components_.size(); ++k) {
    const auto& comp = components_[k];
    if (comp.kind() == ComponentKind::Point) {
      out.push_back(idempotent(k));
      continue;
    }
    const int d = comp.plane().degree;
    for (int deg = 0; deg <= max_degree; ++deg)
      for (int j = std::min(deg, d - 1); j >= 0; --j) out.push_back(monomial(k, deg - j, j));
  }
  return out;
}

/// On-curve tolerance |f(p)| <= 1e-9 (1 + |p|^deg f).
inline double on_curve_tolerance(const PlaneQuotient& comp, std::span<const double> point) {
  double norm = std::hypot(point[0], point[1]);
  return 1e-9 * (1.0 + std::pow(norm, comp.relation.total_degree()));
}

/// Value of the representative without the on-curve check.
inline double value_at(const RingElement& a, size_t component, std::span<const double> point) {
  const auto& part = a.parts().at(component);
  if (auto* p = std::get_if<Poly>(&part)) return p->evaluate<double>(point);
  return std::get<Rational>(part).get_d();
}

/// Evaluates a at a point of one component. Point components ignore the
/// point argument and return the stored scalar.
inline double evaluate(const RingElement& a, size_t component, std::span<const double> point) {
  const auto& comp = a.ring()->component(component);
  if (comp.kind() == ComponentKind::PlaneQuotient) {
    if (point.size() != 2) throw StructuralError("plane component points have two coordinates");
    double residual = std::abs(comp.plane().relation.evaluate<double>(point));
    if (residual > on_curve_tolerance(comp.plane(), point)) {
      std::ostringstream os;
      os << "point is off the curve: residual " << residual;
      throw DomainError(os.str());
    }
  }
  return value_at(a, component, point);
}

inline Rational evaluate(const RingElement& a, size_t component, std::span<const Rational> point) {
  const auto& comp = a.ring()->component(component);
  const auto& part = a.parts().at(component);
  if (comp.kind() == ComponentKind::Point) return std::get<Rational>(part);
  if (point.size() != 2) throw StructuralError("plane component points have two coordinates");
  Rational residual = comp.plane().relation.evaluate<Rational>(point);
  if (residual != 0) {
    std::vector<double> approx{point[0].get_d(), point[1].get_d()};
    if (std::abs(residual.get_d()) > on_curve_tolerance(comp.plane(), approx))
      throw DomainError("point is off the curve: residual " + curvehull::to_string(residual));
  }
  return std::get<Poly>(part).evaluate<Rational>(point);
}

}  // namespace curvehull
