#pragma once

// Colorings (cell partitions), the balanced predicate, quotient networks and
// enumeration of balanced colorings.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ffn/network.hpp"

namespace ffn {

/// A partition of {0, ..., n-1}, always held in canonical form: classes sorted
/// by least member, members ascending. Singletons are stored explicitly.
class Coloring {
 public:
  Coloring() = default;

  static Coloring identity(std::size_t n) {
    std::vector<std::size_t> labels(n);
    std::iota(labels.begin(), labels.end(), std::size_t{0});
    return from_labels(labels);
  }

  /// Any labelling; cells with equal labels share a class.
  static Coloring from_labels(std::span<const std::size_t> labels) {
    Coloring col;
    const std::size_t n = labels.size();
    col.class_of_.assign(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> first_seen;  // label -> class
    for (std::size_t c = 0; c < n; ++c) {
      auto it = std::find_if(first_seen.begin(), first_seen.end(),
                             [&](const auto& p) { return p.first == labels[c]; });
      std::size_t cls;
      if (it == first_seen.end()) {
        cls = col.classes_.size();
        first_seen.push_back({labels[c], cls});
        col.classes_.push_back({});
      } else {
        cls = it->second;
      }
      col.classes_[cls].push_back(c);
      col.class_of_[c] = cls;
    }
    return col;
  }

  /// Classes given explicitly; cells not mentioned become singletons.
  static Coloring from_classes(std::size_t n, const std::vector<std::vector<CellIndex>>& classes) {
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> labels(n, kNone);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k].empty()) throw PreconditionError("coloring has an empty class");
      for (CellIndex c : classes[k]) {
        if (c >= n) throw PreconditionError("coloring mentions a cell outside the network");
        if (labels[c] != kNone) throw PreconditionError("coloring classes are not disjoint");
        labels[c] = k;
      }
    }
    for (std::size_t c = 0; c < n; ++c)
      if (labels[c] == kNone) labels[c] = classes.size() + c;
    return from_labels(labels);
  }

  std::size_t cell_count() const noexcept { return class_of_.size(); }
  std::size_t class_count() const noexcept { return classes_.size(); }
  const std::vector<std::vector<CellIndex>>& classes() const noexcept { return classes_; }
  std::size_t class_of(CellIndex c) const { return class_of_.at(c); }
  bool same_class(CellIndex a, CellIndex b) const { return class_of_.at(a) == class_of_.at(b); }
  bool is_identity() const noexcept { return classes_.size() == class_of_.size(); }

  /// Classes with more than one member.
  std::vector<std::vector<CellIndex>> nontrivial_classes() const {
    std::vector<std::vector<CellIndex>> out;
    for (const auto& cls : classes_)
      if (cls.size() > 1) out.push_back(cls);
    return out;
  }

  auto operator<=>(const Coloring& other) const { return classes_ <=> other.classes_; }
  bool operator==(const Coloring& other) const { return classes_ == other.classes_; }

 private:
  std::vector<std::vector<CellIndex>> classes_;
  std::vector<std::size_t> class_of_;
};

inline void require_same_cells(const Network& n, const Coloring& col) {
  if (col.cell_count() != n.size())
    throw PreconditionError("coloring covers " + std::to_string(col.cell_count()) + " cells, network has " +
                            std::to_string(n.size()));
}

// ---------------------------------------------------------------------------
// Serialization: arrays of arrays of cell ids, canonical order.

inline nlohmann::json coloring_to_json(const Network& n, const Coloring& col) {
  auto out = nlohmann::json::array();
  for (const auto& cls : col.classes()) {
    auto jc = nlohmann::json::array();
    for (CellIndex c : cls) jc.push_back(n.name(c));
    out.push_back(std::move(jc));
  }
  return out;
}

inline Coloring coloring_from_json(const Network& n, const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("coloring must be an array of arrays of cell ids");
  std::vector<std::vector<CellIndex>> classes;
  for (const auto& jc : doc) {
    if (!jc.is_array()) throw ParseError("coloring must be an array of arrays of cell ids");
    std::vector<CellIndex> cls;
    for (const auto& id : jc) {
      if (!id.is_string()) throw ParseError("coloring entries must be cell id strings");
      auto c = n.find(id.get<std::string>());
      if (!c) throw ParseError("coloring mentions unknown cell '" + id.get<std::string>() + "'");
      cls.push_back(*c);
    }
    classes.push_back(std::move(cls));
  }
  return Coloring::from_classes(n.size(), classes);
}

/// Human-readable form listing only the nontrivial classes, e.g. "{3,4}".
inline std::string describe(const Network& n, const Coloring& col) {
  std::string out;
  for (const auto& cls : col.nontrivial_classes()) {
    if (!out.empty()) out += " ";
    out += "{";
    for (std::size_t i = 0; i < cls.size(); ++i) out += (i ? "," : "") + n.name(cls[i]);
    out += "}";
  }
  return out.empty() ? "identity" : out;
}

// ---------------------------------------------------------------------------
// Balanced predicate and quotient

struct BalanceVerdict {
  bool balanced = true;
  // (c, c', type) with c ~ c' but sigma_type(c) !~ sigma_type(c').
  std::optional<std::tuple<CellIndex, CellIndex, std::size_t>> counterexample;

  explicit operator bool() const noexcept { return balanced; }
};

inline BalanceVerdict is_balanced(const Network& n, const Coloring& col) {
  require_same_cells(n, col);
  for (const auto& cls : col.classes()) {
    const CellIndex head = cls.front();
    for (std::size_t m = 1; m < cls.size(); ++m) {
      for (std::size_t t = 0; t < n.edge_types(); ++t) {
        if (!col.same_class(n.source(t, head), n.source(t, cls[m])))
          return {false, std::make_tuple(head, cls[m], t)};
      }
    }
  }
  return {};
}

struct Quotient {
  Network network;
  std::vector<CellIndex> projection;  // cell of n -> cell of the quotient
};

/// Class ids join member ids with "|"; singleton classes keep their id.
inline Quotient quotient(const Network& n, const Coloring& col) {
  auto bal = is_balanced(n, col);
  if (!bal) {
    auto [c, d, t] = *bal.counterexample;
    throw PreconditionError("coloring is not balanced: " + n.name(c) + " and " + n.name(d) +
                            " have unrelated type-" + std::to_string(t + 1) + " inputs");
  }
  std::vector<std::string> names;
  std::set<std::string> used;
  for (const auto& cls : col.classes()) {
    std::string id;
    for (std::size_t i = 0; i < cls.size(); ++i) id += (i ? "|" : "") + n.name(cls[i]);
    std::string unique = id;
    for (int dup = 2; used.count(unique); ++dup) unique = id + "#" + std::to_string(dup);
    used.insert(unique);
    names.push_back(std::move(unique));
  }
  std::vector<std::vector<CellIndex>> sigma(n.edge_types(), std::vector<CellIndex>(col.class_count()));
  for (std::size_t t = 0; t < n.edge_types(); ++t) {
    for (std::size_t k = 0; k < col.class_count(); ++k) {
      const auto& cls = col.classes()[k];
      sigma[t][k] = col.class_of(n.source(t, cls.front()));
    }
  }
  std::vector<CellIndex> proj(n.size());
  for (CellIndex c = 0; c < n.size(); ++c) proj[c] = col.class_of(c);
  return {Network(std::move(names), std::move(sigma)), std::move(proj)};
}

inline bool refines(const Coloring& finer, const Coloring& coarser) {
  if (finer.cell_count() != coarser.cell_count())
    throw PreconditionError("colorings are over different cell sets");
  for (const auto& cls : finer.classes()) {
    for (CellIndex c : cls)
      if (!coarser.same_class(cls.front(), c)) return false;
  }
  return true;
}

/// Coloring induced on quotient(n, finer) by a coarser coloring of n.
inline Coloring induced_coloring(const Coloring& finer, const Coloring& coarser) {
  if (!refines(finer, coarser)) throw PreconditionError("coloring does not refine the target coloring");
  std::vector<std::size_t> labels(finer.class_count());
  for (std::size_t k = 0; k < finer.class_count(); ++k) labels[k] = coarser.class_of(finer.classes()[k].front());
  return Coloring::from_labels(labels);
}

inline bool lies_in_synchrony(const Coloring& col, std::span<const double> x, double tol) {
  if (x.size() != col.cell_count()) throw PreconditionError("state vector does not match the coloring");
  for (const auto& cls : col.classes()) {
    for (CellIndex c : cls)
      if (std::abs(x[c] - x[cls.front()]) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Enumeration

/// Finest balanced coloring coarser than the given labelling.
inline Coloring balanced_closure(const Network& n, std::span<const std::size_t> labels) {
  std::vector<std::size_t> parent(n.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  };
  for (CellIndex c = 0; c < n.size(); ++c) {
    for (CellIndex d = 0; d < c; ++d)
      if (labels[d] == labels[c]) {
        unite(c, d);
        break;
      }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (CellIndex c = 0; c < n.size(); ++c) {
      const CellIndex r = find(c);
      for (std::size_t t = 0; t < n.edge_types(); ++t)
        changed = unite(n.source(t, c), n.source(t, r)) || changed;
    }
  }
  std::vector<std::size_t> roots(n.size());
  for (CellIndex c = 0; c < n.size(); ++c) roots[c] = find(c);
  return Coloring::from_labels(roots);
}

inline constexpr std::size_t kDefaultColoringBound = 12;

/// All balanced colorings, in canonical order, including the identity.
///
/// Every balanced coloring is reached from the identity by a chain of
/// closures of two-class merges, so a breadth-first search over those
/// closures is complete.
inline std::vector<Coloring> enumerate_balanced_colorings(const Network& n,
                                                          std::size_t bound = kDefaultColoringBound) {
  if (n.size() > bound)
    throw PreconditionError("network has " + std::to_string(n.size()) + " cells; coloring enumeration is bounded at " +
                            std::to_string(bound));
  std::set<Coloring> seen{Coloring::identity(n.size())};
  std::deque<Coloring> todo{*seen.begin()};
  while (!todo.empty()) {
    Coloring col = std::move(todo.front());
    todo.pop_front();
    const std::size_t q = col.class_count();
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t b = a + 1; b < q; ++b) {
        std::vector<std::size_t> labels(n.size());
        for (CellIndex c = 0; c < n.size(); ++c) {
          std::size_t k = col.class_of(c);
          labels[c] = k == b ? a : k;
        }
        Coloring next = balanced_closure(n, labels);
        if (seen.insert(next).second) todo.push_back(std::move(next));
      }
    }
  }
  return {seen.begin(), seen.end()};
}

/// Balanced colorings of `l` whose quotient equals `n`.
inline std::vector<Coloring> find_colorings_with_quotient(const Network& l, const Network& n,
                                                          std::size_t bound = kDefaultColoringBound) {
  std::vector<Coloring> out;
  if (n.size() > l.size() || n.edge_types() != l.edge_types()) return out;
  for (auto& col : enumerate_balanced_colorings(l, bound)) {
    if (col.class_count() != n.size()) continue;
    if (networks_equal(quotient(l, col).network, n)) out.push_back(std::move(col));
  }
  return out;
}

}  // namespace ffn
