#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "curvehull/curve_ring.hpp"
#include "curvehull/errors.hpp"
#include "curvehull/exact_span.hpp"

namespace curvehull {

/// Ordered, linearly independent list of ring elements.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  explicit SubspaceBasis(std::vector<RingElement> elements) : elements_(std::move(elements)) {
    RationalSpan<BasisKey> span;
    for (const auto& e : elements_) {
      if (!elements_.empty() && e.ring() != elements_.front().ring())
        throw StructuralError("subspace basis mixes rings");
      if (!span.insert(e.coordinates()))
        throw StructuralError("subspace basis is linearly dependent at element " + e.to_string());
    }
  }

  const std::vector<RingElement>& elements() const { return elements_; }
  size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const RingElement& operator[](size_t i) const { return elements_[i]; }

  bool spans(const RingElement& e) const {
    RationalSpan<BasisKey> span;
    for (const auto& b : elements_) span.insert(b.coordinates());
    return span.contains(e.coordinates());
  }

 private:
  std::vector<RingElement> elements_;
};

/// Data (L, h_0..h_r, W_0..W_r) of one moment relaxation.
struct RelaxationSpec {
  RingPtr ring;
  SubspaceBasis L;                       // 1, x_1, ..., x_n
  std::vector<std::string> coordinate_names;  // names of x_1..x_n
  std::vector<RingElement> generators;   // h_0 = 1, h_1, ..., h_r
  std::vector<SubspaceBasis> W;          // one per generator

  size_t dimension() const { return L.size() - 1; }

  void validate() const {
    if (!ring) throw StructuralError("relaxation without a ring");
    if (L.empty() || L[0].as_constant() != Rational(1)) throw StructuralError("L must start with 1");
    if (coordinate_names.size() != dimension()) throw StructuralError("one name per coordinate of L required");
    if (generators.empty() || generators[0].as_constant() != Rational(1))
      throw StructuralError("the first generator must be 1");
    if (W.size() != generators.size()) throw StructuralError("one subspace W_i per generator required");
    for (size_t i = 0; i < W.size(); ++i)
      if (W[i].empty()) throw StructuralError("subspace W_" + std::to_string(i) + " is empty");
    if (!W[0].spans(ring->one())) throw StructuralError("W_0 must contain 1");
    for (const auto& e : L.elements())
      if (e.ring() != ring) throw StructuralError("L lives in a different ring");
    for (const auto& h : generators)
      if (h.ring() != ring) throw StructuralError("generator lives in a different ring");
  }
};

/// Coefficient vector over the USpace basis.
using LinearForm = std::vector<Rational>;

/// U = W_0 W_0 + h_1 W_1 W_1 + ... + h_r W_r W_r with an explicit basis.
///
/// The basis starts with the elements of L (so the first coordinate is
/// lambda(1) and the next n are lambda(x_i)) and continues with products in
/// generation order, reduced against the elements before them.
class USpace {
 public:
  USpace() = default;

  const std::vector<RingElement>& basis() const { return basis_; }
  size_t dimension() const { return basis_.size(); }
  size_t l_dimension() const { return l_dim_; }

  LinearForm coordinates(const RingElement& e) const {
    auto c = span_.coordinates(e.coordinates());
    if (!c) throw ConstructionError("element " + e.to_string() + " is not in U");
    return *c;
  }

  bool contains(const RingElement& e) const { return span_.contains(e.coordinates()); }

 private:
  friend USpace build_U(const RelaxationSpec& spec);
  std::vector<RingElement> basis_;
  RationalSpan<BasisKey> span_;
  size_t l_dim_ = 0;
};

inline USpace build_U(const RelaxationSpec& spec) {
  spec.validate();
  std::vector<RingElement> products;
  RationalSpan<BasisKey> full;
  for (size_t i = 0; i < spec.generators.size(); ++i) {
    const auto& w = spec.W[i].elements();
    for (size_t a = 0; a < w.size(); ++a)
      for (size_t b = a; b < w.size(); ++b) {
        RingElement prod = spec.generators[i] * w[a] * w[b];
        if (full.insert(prod.coordinates())) products.push_back(std::move(prod));
      }
  }
  for (const auto& e : spec.L.elements())
    if (!full.contains(e.coordinates()))
      throw ConstructionError("L is not contained in U: " + e.to_string() + " is missing");

  USpace u;
  for (const auto& e : spec.L.elements()) {
    u.span_.insert(e.coordinates());
    u.basis_.push_back(e);
  }
  u.l_dim_ = u.basis_.size();
  // keep what each product adds beyond the current span: same U, but the
  // moment coordinates stay comparable in size
  for (const auto& p : products) {
    SparseVector rest = u.span_.residual(p.coordinates());
    if (rest.empty()) continue;
    Rational big = 0;
    for (const auto& [k, c] : rest) big = std::max(big, Rational(abs(c)));
    for (auto& [k, c] : rest) c /= big;
    u.span_.insert(rest);
    u.basis_.push_back(element_from_coordinates(spec.ring, rest));
  }
  return u;
}

/// Symmetric matrix [lambda(h_i w w')] with each entry a linear form on U.
struct LocalizingMatrix {
  size_t generator = 0;
  std::vector<RingElement> basis;
  std::vector<LinearForm> entries;  // row-major, size() * size()

  size_t size() const { return basis.size(); }
  const LinearForm& entry(size_t r, size_t c) const { return entries[r * basis.size() + c]; }
};

/// Block-PSD description of M_W^* intersected with lambda(1) = 1.
struct MomentSDP {
  RelaxationSpec spec;
  USpace U;
  std::vector<LocalizingMatrix> blocks;

  size_t dimension() const { return spec.dimension(); }
  /// Indices into the U basis of lambda(x_1)..lambda(x_n).
  size_t coordinate_index(size_t i) const { return 1 + i; }
};

inline MomentSDP assemble_moment_sdp(const RelaxationSpec& spec) {
  MomentSDP m{spec, build_U(spec), {}};
  for (size_t i = 0; i < spec.generators.size(); ++i) {
    LocalizingMatrix block;
    block.generator = i;
    block.basis = spec.W[i].elements();
    const size_t s = block.basis.size();
    block.entries.resize(s * s);
    for (size_t a = 0; a < s; ++a)
      for (size_t b = a; b < s; ++b) {
        LinearForm f = m.U.coordinates(spec.generators[i] * block.basis[a] * block.basis[b]);
        block.entries[a * s + b] = f;
        block.entries[b * s + a] = std::move(f);
      }
    m.blocks.push_back(std::move(block));
  }
  return m;
}

/// Dense square matrix of rationals.
struct RatMatrix {
  size_t n = 0;
  std::vector<Rational> data;

  static RatMatrix zero(size_t n) { return RatMatrix{n, std::vector<Rational>(n * n, Rational(0))}; }

  Rational& operator()(size_t r, size_t c) { return data[r * n + c]; }
  const Rational& operator()(size_t r, size_t c) const { return data[r * n + c]; }

  bool is_zero() const {
    for (const auto& v : data)
      if (v != 0) return false;
    return true;
  }
  bool is_symmetric() const {
    for (size_t r = 0; r < n; ++r)
      for (size_t c = r + 1; c < n; ++c)
        if ((*this)(r, c) != (*this)(c, r)) return false;
    return true;
  }
  friend bool operator==(const RatMatrix&, const RatMatrix&) = default;
};

struct PencilBlock {
  RatMatrix constant;
  std::vector<RatMatrix> x_coeffs;
  std::vector<RatMatrix> y_coeffs;

  size_t size() const { return constant.n; }
  friend bool operator==(const PencilBlock&, const PencilBlock&) = default;
};

/// sum_i a_i x_i + sum_j b_j y_j = rhs
struct LinearEquality {
  std::vector<Rational> x_coeffs;
  std::vector<Rational> y_coeffs;
  Rational rhs;
  friend bool operator==(const LinearEquality&, const LinearEquality&) = default;
};

/// Block-diagonal symmetric pencil M_0 + sum x_i M_i + sum y_j N_j >= 0,
/// optionally with linear equalities on (x, y). The x are the projected
/// coordinates, the y are lifted variables.
struct Pencil {
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;
  std::vector<std::string> y_labels;  // informational, e.g. the U element behind y_j
  std::vector<PencilBlock> blocks;
  std::vector<LinearEquality> equalities;

  size_t n() const { return x_names.size(); }
  size_t k() const { return y_names.size(); }

  std::vector<size_t> block_sizes() const {
    std::vector<size_t> s;
    for (const auto& b : blocks) s.push_back(b.size());
    return s;
  }

  void validate() const {
    if (y_labels.size() != y_names.size()) throw StructuralError("pencil labels do not match lifted variables");
    for (const auto& b : blocks) {
      if (b.x_coeffs.size() != n() || b.y_coeffs.size() != k()) throw StructuralError("pencil block arity mismatch");
      auto check = [&](const RatMatrix& m) {
        if (m.n != b.size() || m.data.size() != m.n * m.n) throw StructuralError("pencil matrices differ in size");
        if (!m.is_symmetric()) throw StructuralError("pencil matrix is not symmetric");
      };
      check(b.constant);
      for (const auto& m : b.x_coeffs) check(m);
      for (const auto& m : b.y_coeffs) check(m);
    }
    for (const auto& e : equalities)
      if (e.x_coeffs.size() != n() || e.y_coeffs.size() != k()) throw StructuralError("pencil equality arity mismatch");
  }

  friend bool operator==(const Pencil&, const Pencil&) = default;
};

/// Pencil over (x, y) after substituting lambda(1) = 1, with
/// x_i = lambda(x_i) and y_j the remaining U coordinates.
inline Pencil export_pencil(const MomentSDP& m) {
  Pencil p;
  const size_t n = m.dimension();
  const size_t u = m.U.dimension();
  p.x_names = m.spec.coordinate_names;
  for (size_t j = n + 1; j < u; ++j) {
    p.y_names.push_back("y" + std::to_string(j - n));
    p.y_labels.push_back(m.U.basis()[j].to_string());
  }
  for (const auto& block : m.blocks) {
    const size_t s = block.size();
    PencilBlock pb{RatMatrix::zero(s), std::vector<RatMatrix>(n, RatMatrix::zero(s)),
                   std::vector<RatMatrix>(u - n - 1, RatMatrix::zero(s)), };
    for (size_t r = 0; r < s; ++r)
      for (size_t c = 0; c < s; ++c) {
        const LinearForm& f = block.entry(r, c);
        pb.constant(r, c) = f[0];
        for (size_t i = 0; i < n; ++i) pb.x_coeffs[i](r, c) = f[1 + i];
        for (size_t j = n + 1; j < u; ++j) pb.y_coeffs[j - n - 1](r, c) = f[j];
      }
    p.blocks.push_back(std::move(pb));
  }
  return p;
}

namespace detail {

inline void write_matrix(std::ostream& os, const RatMatrix& m) {
  for (size_t r = 0; r < m.n; ++r) {
    for (size_t c = 0; c < m.n; ++c) os << (c ? " " : "") << m(r, c).get_str();
    os << "\n";
  }
}

}  // namespace detail

/// Text serialisation; one section per block, matrices row-major with
/// exact rationals as p/q. Zero coefficient matrices are written too, so the
/// output depends only on the pencil.
inline void write_pencil(std::ostream& os, const Pencil& p) {
  p.validate();
  os << "curvehull-pencil 1\n";
  os << "x " << p.n();
  for (const auto& name : p.x_names) os << " " << name;
  os << "\n";
  os << "y " << p.k();
  for (const auto& name : p.y_names) os << " " << name;
  os << "\n";
  for (size_t j = 0; j < p.k(); ++j) os << "label " << p.y_names[j] << " " << p.y_labels[j] << "\n";
  os << "equalities " << p.equalities.size() << "\n";
  for (const auto& e : p.equalities) {
    os << "eq";
    for (const auto& c : e.x_coeffs) os << " " << c.get_str();
    os << " |";
    for (const auto& c : e.y_coeffs) os << " " << c.get_str();
    os << " = " << e.rhs.get_str() << "\n";
  }
  os << "blocks " << p.blocks.size() << "\n";
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& block = p.blocks[b];
    os << "block " << b << " size " << block.size() << "\n";
    os << "M0\n";
    detail::write_matrix(os, block.constant);
    for (size_t i = 0; i < p.n(); ++i) {
      os << "M " << p.x_names[i] << "\n";
      detail::write_matrix(os, block.x_coeffs[i]);
    }
    for (size_t j = 0; j < p.k(); ++j) {
      os << "N " << p.y_names[j] << "\n";
      detail::write_matrix(os, block.y_coeffs[j]);
    }
  }
  os << "end\n";
}

inline std::string pencil_to_string(const Pencil& p) {
  std::ostringstream os;
  write_pencil(os, p);
  return os.str();
}

inline Pencil read_pencil(std::istream& is) {
  auto fail = [](const std::string& what) -> void { throw StructuralError("pencil file: " + what); };
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) fail("expected '" + word + "', got '" + got + "'");
  };
  auto read_rat = [&]() {
    std::string tok;
    if (!(is >> tok)) fail("unexpected end of file");
    return parse_rational(tok);
  };
  auto read_count = [&]() {
    long v = -1;
    if (!(is >> v) || v < 0) fail("expected a count");
    return static_cast<size_t>(v);
  };

  Pencil p;
  expect("curvehull-pencil");
  expect("1");
  expect("x");
  p.x_names.resize(read_count());
  for (auto& name : p.x_names) is >> name;
  expect("y");
  p.y_names.resize(read_count());
  for (auto& name : p.y_names) is >> name;
  p.y_labels.resize(p.k());
  for (size_t j = 0; j < p.k(); ++j) {
    expect("label");
    std::string name;
    is >> name;
    if (name != p.y_names[j]) fail("label for unknown variable '" + name + "'");
    std::getline(is, p.y_labels[j]);
    if (!p.y_labels[j].empty() && p.y_labels[j].front() == ' ') p.y_labels[j].erase(0, 1);
  }
  expect("equalities");
  p.equalities.resize(read_count());
  for (auto& e : p.equalities) {
    expect("eq");
    e.x_coeffs.resize(p.n());
    for (auto& c : e.x_coeffs) c = read_rat();
    expect("|");
    e.y_coeffs.resize(p.k());
    for (auto& c : e.y_coeffs) c = read_rat();
    expect("=");
    e.rhs = read_rat();
  }
  expect("blocks");
  p.blocks.resize(read_count());
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    expect("block");
    if (read_count() != b) fail("blocks out of order");
    expect("size");
    const size_t s = read_count();
    auto read_matrix = [&]() {
      RatMatrix m = RatMatrix::zero(s);
      for (auto& v : m.data) v = read_rat();
      return m;
    };
    auto& block = p.blocks[b];
    expect("M0");
    block.constant = read_matrix();
    for (size_t i = 0; i < p.n(); ++i) {
      expect("M");
      std::string name;
      is >> name;
      block.x_coeffs.push_back(read_matrix());
    }
    for (size_t j = 0; j < p.k(); ++j) {
      expect("N");
      std::string name;
      is >> name;
      block.y_coeffs.push_back(read_matrix());
    }
  }
  expect("end");
  p.validate();
  return p;
}

}  // namespace curvehull
