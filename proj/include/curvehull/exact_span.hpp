#pragma once

#include <map>
#include <optional>
#include <vector>

#include "curvehull/rational.hpp"

namespace curvehull {

/// Incrementally built span of sparse rational vectors.
///
/// Keeps a reduced row echelon form of the inserted vectors together with
/// the combination of original vectors producing each row, so membership
/// and coordinates with respect to the inserted (original) vectors are exact.
template <typename Key>
class RationalSpan {
 public:
  using Vector = std::map<Key, Rational>;

  /// Inserts v if it is independent of what is already spanned.
  bool insert(const Vector& v) {
    auto [rest, combo] = reduce(v);
    if (rest.empty()) return false;
    const size_t index = originals_++;
    for (auto& row : rows_) row.combo.resize(originals_, Rational(0));
    combo.resize(originals_, Rational(0));
    combo[index] += 1;

    // largest entry as pivot keeps the residuals of later vectors well scaled
    auto best = rest.begin();
    for (auto it = rest.begin(); it != rest.end(); ++it)
      if (abs(it->second) > abs(best->second)) best = it;
    Key pivot = best->first;
    Rational lead = best->second;
    for (auto& [k, c] : rest) c /= lead;
    for (auto& c : combo) c /= lead;
    Row fresh{std::move(rest), pivot, std::move(combo)};

    for (auto& row : rows_) {
      auto it = row.vec.find(pivot);
      if (it == row.vec.end()) continue;
      Rational factor = it->second;
      axpy(row.vec, fresh.vec, -factor);
      for (size_t i = 0; i < row.combo.size(); ++i) row.combo[i] -= factor * fresh.combo[i];
    }
    rows_.push_back(std::move(fresh));
    return true;
  }

  bool contains(const Vector& v) const { return reduce(v).first.empty(); }

  /// v with its components along the current pivots removed.
  Vector residual(const Vector& v) const { return reduce(v).first; }

  /// Coefficients c with v = sum_i c_i * original_i, if v lies in the span.
  std::optional<std::vector<Rational>> coordinates(const Vector& v) const {
    auto [rest, combo] = reduce(v);
    if (!rest.empty()) return std::nullopt;
    combo.resize(originals_, Rational(0));
    for (auto& c : combo) c = -c;
    return combo;
  }

  size_t dimension() const { return rows_.size(); }

 private:
  struct Row {
    Vector vec;
    Key pivot;
    std::vector<Rational> combo;
  };

  static void axpy(Vector& y, const Vector& x, const Rational& a) {
    for (const auto& [k, c] : x) {
      auto [it, inserted] = y.try_emplace(k, a * c);
      if (!inserted) {
        it->second += a * c;
        if (it->second == 0) y.erase(it);
      }
    }
  }

  // Returns v - sum(c_r * row_r) and minus the combination over originals.
  std::pair<Vector, std::vector<Rational>> reduce(const Vector& v) const {
    Vector rest = v;
    std::vector<Rational> combo(originals_, Rational(0));
    for (const auto& row : rows_) {
      auto it = rest.find(row.pivot);
      if (it == rest.end()) continue;
      Rational factor = it->second;
      axpy(rest, row.vec, -factor);
      for (size_t i = 0; i < row.combo.size(); ++i) combo[i] -= factor * row.combo[i];
    }
    return {std::move(rest), std::move(combo)};
  }

  std::vector<Row> rows_;
  size_t originals_ = 0;
};

}  // namespace curvehull
