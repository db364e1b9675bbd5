#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "curvehull/errors.hpp"
#include "curvehull/rational.hpp"

namespace curvehull {

/// Exponent tuple, one entry per variable of the owning polynomial.
using Exponent = std::vector<int>;

inline int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// The variable list is part of the value: arithmetic between polynomials
/// over different variable lists is a structural error. No stored term has a
/// zero coefficient.
class Poly {
 public:
  using Terms = std::map<Exponent, Rational>;

  Poly() = default;
  explicit Poly(std::vector<std::string> variables) : vars_(std::move(variables)) {}

  static Poly constant(std::vector<std::string> variables, const Rational& c) {
    Poly p(std::move(variables));
    p.add_term(Exponent(p.vars_.size(), 0), c);
    return p;
  }

  static Poly variable(std::vector<std::string> variables, const std::string& name) {
    Poly p(std::move(variables));
    size_t idx = p.index_of(name);
    Exponent e(p.vars_.size(), 0);
    e[idx] = 1;
    p.add_term(e, Rational(1));
    return p;
  }

  static Poly monomial(std::vector<std::string> variables, Exponent e, const Rational& c) {
    Poly p(std::move(variables));
    if (e.size() != p.vars_.size()) throw StructuralError("exponent arity does not match variables");
    p.add_term(e, c);
    return p;
  }

  const std::vector<std::string>& variables() const { return vars_; }
  const Terms& terms() const { return terms_; }
  size_t num_vars() const { return vars_.size(); }

  size_t index_of(const std::string& name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw StructuralError("unknown variable '" + name + "'");
    return static_cast<size_t>(it - vars_.begin());
  }

  bool has_variable(const std::string& name) const {
    return std::find(vars_.begin(), vars_.end(), name) != vars_.end();
  }

  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && curvehull::total_degree(terms_.begin()->first) == 0);
  }

  Rational constant_term() const {
    auto it = terms_.find(Exponent(vars_.size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Total degree; -1 for the zero polynomial.
  int total_degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, curvehull::total_degree(e));
    return d;
  }

  /// Degree in one variable; -1 for the zero polynomial.
  int degree_in(size_t var) const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e.at(var));
    return d;
  }

  void add_term(const Exponent& e, const Rational& c) {
    if (e.size() != vars_.size()) throw StructuralError("exponent arity does not match variables");
    Rational cc = c;
    cc.canonicalize();
    if (cc == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, cc);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Poly operator-() const {
    Poly r(vars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
  }

  Poly& operator+=(const Poly& o) {
    require_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    require_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Poly& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Rational& s) { return a *= s; }
  friend Poly operator*(const Rational& s, Poly a) { return a *= s; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.require_same(b);
    Poly r(a.vars_);
    Exponent e(a.vars_.size());
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

  Poly pow(unsigned k) const {
    Poly result = constant(vars_, Rational(1));
    Poly base = *this;
    while (k > 0) {
      if (k & 1U) result = result * base;
      k >>= 1U;
      if (k > 0) base = base * base;
    }
    return result;
  }

  template <typename T>
  T evaluate(std::span<const T> point) const {
    if (point.size() != vars_.size()) throw StructuralError("evaluation point has wrong arity");
    T acc = T(0);
    for (const auto& [e, c] : terms_) {
      T term = coefficient_as<T>(c);
      for (size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) term *= point[i];
      acc += term;
    }
    return acc;
  }

  Poly derivative(size_t var) const {
    Poly r(vars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponent f = e;
      f[var] -= 1;
      r.add_term(f, c * e[var]);
    }
    return r;
  }

  /// Coefficients with respect to one variable: result[k] multiplies var^k.
  /// The coefficients keep the full variable list (with exponent 0 in var).
  std::vector<Poly> coefficients_in(size_t var) const {
    std::vector<Poly> out(static_cast<size_t>(std::max(degree_in(var), -1) + 1), Poly(vars_));
    for (const auto& [e, c] : terms_) {
      Exponent f = e;
      f[var] = 0;
      out[static_cast<size_t>(e[var])].add_term(f, c);
    }
    return out;
  }

  /// Homogeneous component of maximal total degree.
  Poly top_form() const {
    Poly r(vars_);
    int d = total_degree();
    for (const auto& [e, c] : terms_)
      if (curvehull::total_degree(e) == d) r.terms_.emplace(e, c);
    return r;
  }

  /// Substitutes images[i] for variable i; all images share one variable list.
  Poly substitute(std::span<const Poly> images) const {
    if (images.size() != vars_.size()) throw StructuralError("substitution arity mismatch");
    if (images.empty()) return *this;
    const auto& target = images.front().variables();
    for (const auto& im : images)
      if (im.variables() != target) throw StructuralError("substitution images over different variables");
    Poly r(target);
    std::vector<std::vector<Poly>> powers(vars_.size());
    for (const auto& [e, c] : terms_) {
      Poly term = constant(target, c);
      for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        auto& cache = powers[i];
        if (cache.empty()) cache.push_back(constant(target, Rational(1)));
        while (static_cast<int>(cache.size()) <= e[i]) cache.push_back(cache.back() * images[i]);
        term = term * cache[static_cast<size_t>(e[i])];
      }
      r += term;
    }
    return r;
  }

  /// Re-expresses the polynomial over another variable list (matched by name).
  Poly with_variables(const std::vector<std::string>& target) const {
    std::vector<size_t> where(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i) {
      auto it = std::find(target.begin(), target.end(), vars_[i]);
      if (it == target.end()) {
        if (degree_in(i) > 0) throw StructuralError("variable '" + vars_[i] + "' not available in target ring");
        where[i] = target.size();
      } else {
        where[i] = static_cast<size_t>(it - target.begin());
      }
    }
    Poly r(target);
    for (const auto& [e, c] : terms_) {
      Exponent f(target.size(), 0);
      for (size_t i = 0; i < e.size(); ++i)
        if (where[i] < target.size()) f[where[i]] += e[i];
      r.add_term(f, c);
    }
    return r;
  }

  /// Human-readable rendering, graded order with highest degree first.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Exponent, Rational>> sorted(terms_.begin(), terms_.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      int da = curvehull::total_degree(a.first), db = curvehull::total_degree(b.first);
      if (da != db) return da > db;
      return a.first > b.first;
    });
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : sorted) {
      Rational mag = abs(c);
      bool neg = c < 0;
      if (first) {
        if (neg) os << "-";
      } else {
        os << (neg ? " - " : " + ");
      }
      first = false;
      bool unit = curvehull::total_degree(e) == 0;
      bool printed = false;
      if (mag != 1 || unit) {
        os << curvehull::to_string(mag);
        printed = true;
      }
      for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (printed) os << "*";
        os << vars_[i];
        if (e[i] > 1) os << "^" << e[i];
        printed = true;
      }
    }
    return os.str();
  }

 private:
  template <typename T>
  static T coefficient_as(const Rational& c) {
    if constexpr (std::is_same_v<T, Rational>) {
      return c;
    } else {
      return static_cast<T>(c.get_d());
    }
  }

  void require_same(const Poly& o) const {
    if (vars_ != o.vars_) throw StructuralError("polynomials over different variable lists");
  }

  std::vector<std::string> vars_;
  Terms terms_;
};

/// Dense univariate polynomial over Q, low degree first, no trailing zeros.
using UniPoly = std::vector<Rational>;

inline void trim(UniPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline UniPoly uni_derivative(const UniPoly& p) {
  UniPoly d;
  for (size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<long>(k));
  trim(d);
  return d;
}

inline UniPoly uni_remainder(UniPoly a, const UniPoly& b) {
  if (b.empty()) throw DomainError("division by the zero polynomial");
  trim(a);
  while (a.size() >= b.size()) {
    Rational factor = a.back() / b.back();
    size_t shift = a.size() - b.size();
    for (size_t k = 0; k < b.size(); ++k) a[shift + k] -= factor * b[k];
    a.pop_back();
    trim(a);
  }
  return a;
}

inline UniPoly uni_gcd(UniPoly a, UniPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    UniPoly r = uni_remainder(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Rational lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

/// Specialises every variable except one at fixed rational values.
inline UniPoly specialize_to_univariate(const Poly& p, size_t keep, std::span<const Rational> values) {
  UniPoly out(static_cast<size_t>(std::max(p.degree_in(keep), 0) + 1), Rational(0));
  for (const auto& [e, c] : p.terms()) {
    Rational term = c;
    for (size_t i = 0; i < e.size(); ++i) {
      if (i == keep) continue;
      for (int k = 0; k < e[i]; ++k) term *= values[i];
    }
    out[static_cast<size_t>(e[keep])] += term;
  }
  trim(out);
  return out;
}

}  // namespace curvehull
