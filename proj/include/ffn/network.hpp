#pragma once

// Coupled cell networks given by their input maps sigma_1..sigma_k, the
// feed-forward layer structure, and structural predicates on networks.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ffn/error.hpp"

namespace ffn {

using CellIndex = std::size_t;
using IntMatrix = std::vector<std::vector<int>>;

/// A network with one input edge of each of k types per cell.
///
/// Cells carry opaque string identifiers and dense indices assigned in
/// declaration order. Edge types are 0-based internally; type t here is
/// sigma_{t+1} in the usual 1-based notation, and the jet coefficient f_{t+1}
/// multiplies the input arriving along it.
class Network {
 public:
  Network(std::vector<std::string> cells, std::vector<std::vector<CellIndex>> sigma)
      : cells_(std::move(cells)), sigma_(std::move(sigma)) {
    if (cells_.empty()) throw PreconditionError("network has no cells");
    if (sigma_.empty()) throw PreconditionError("network needs at least one edge type");
    for (CellIndex c = 0; c < cells_.size(); ++c) {
      if (!index_.emplace(cells_[c], c).second)
        throw PreconditionError("duplicate cell id '" + cells_[c] + "'");
    }
    for (std::size_t t = 0; t < sigma_.size(); ++t) {
      if (sigma_[t].size() != cells_.size())
        throw PreconditionError("sigma map " + std::to_string(t + 1) + " is not total");
      for (CellIndex src : sigma_[t]) {
        if (src >= cells_.size())
          throw PreconditionError("sigma map " + std::to_string(t + 1) + " points outside the cell set");
      }
    }
  }

  /// Builds a network from id-keyed input maps, one map per edge type.
  static Network from_named(std::vector<std::string> cells,
                            const std::vector<std::map<std::string, std::string>>& sigma) {
    std::unordered_map<std::string, CellIndex> idx;
    for (CellIndex c = 0; c < cells.size(); ++c) idx.emplace(cells[c], c);
    std::vector<std::vector<CellIndex>> maps;
    for (std::size_t t = 0; t < sigma.size(); ++t) {
      std::vector<CellIndex> m(cells.size());
      for (CellIndex c = 0; c < cells.size(); ++c) {
        auto it = sigma[t].find(cells[c]);
        if (it == sigma[t].end())
          throw PreconditionError("sigma map " + std::to_string(t + 1) + " has no entry for cell '" + cells[c] + "'");
        auto src = idx.find(it->second);
        if (src == idx.end())
          throw PreconditionError("sigma map " + std::to_string(t + 1) + " references unknown cell '" + it->second + "'");
        m[c] = src->second;
      }
      for (const auto& [target, source] : sigma[t]) {
        if (!idx.count(target))
          throw PreconditionError("sigma map " + std::to_string(t + 1) + " has an entry for unknown cell '" + target + "'");
      }
      maps.push_back(std::move(m));
    }
    return Network(std::move(cells), std::move(maps));
  }

  std::size_t size() const noexcept { return cells_.size(); }
  std::size_t edge_types() const noexcept { return sigma_.size(); }
  const std::vector<std::string>& cells() const noexcept { return cells_; }
  const std::string& name(CellIndex c) const { return cells_.at(c); }

  std::optional<CellIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  CellIndex index_of(std::string_view id) const {
    auto c = find(id);
    if (!c) throw PreconditionError("unknown cell '" + std::string(id) + "'");
    return *c;
  }

  /// Source of the type-`type` edge targeting `c`.
  CellIndex source(std::size_t type, CellIndex c) const { return sigma_[type][c]; }
  std::span<const CellIndex> sigma(std::size_t type) const { return sigma_.at(type); }

  friend bool operator==(const Network& a, const Network& b) {
    return a.cells_ == b.cells_ && a.sigma_ == b.sigma_;
  }

 private:
  std::vector<std::string> cells_;
  std::vector<std::vector<CellIndex>> sigma_;
  std::unordered_map<std::string, CellIndex> index_;
};

// ---------------------------------------------------------------------------
// File format

inline Network network_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");
  for (const char* key : {"cells", "edge_types", "sigma"}) {
    if (!doc.contains(key)) throw ParseError(std::string("network document lacks key '") + key + "'");
  }
  const auto& jc = doc["cells"];
  if (!jc.is_array() || jc.empty()) throw ParseError("'cells' must be a nonempty array of strings");
  std::vector<std::string> cells;
  for (const auto& c : jc) {
    if (!c.is_string()) throw ParseError("'cells' must contain only strings");
    cells.push_back(c.get<std::string>());
  }
  const auto& jk = doc["edge_types"];
  if (!jk.is_number_integer() || jk.get<long long>() < 1)
    throw ParseError("'edge_types' must be an integer >= 1");
  const auto k = static_cast<std::size_t>(jk.get<long long>());
  const auto& js = doc["sigma"];
  if (!js.is_array() || js.size() != k)
    throw ParseError("'sigma' must be an array of " + std::to_string(k) + " objects");
  std::vector<std::map<std::string, std::string>> sigma;
  for (const auto& m : js) {
    if (!m.is_object()) throw ParseError("each 'sigma' entry must be an object mapping cell ids to cell ids");
    std::map<std::string, std::string> named;
    for (auto it = m.begin(); it != m.end(); ++it) {
      if (!it.value().is_string()) throw ParseError("sigma values must be cell id strings");
      named.emplace(it.key(), it.value().get<std::string>());
    }
    sigma.push_back(std::move(named));
  }
  try {
    return Network::from_named(std::move(cells), sigma);
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

/// Parses the JSON network schema: {"cells": [...], "edge_types": k,
/// "sigma": [{target: source, ...}, ...]}.
inline Network parse_network(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed network document at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  return network_from_json(doc);
}

inline nlohmann::ordered_json network_to_json(const Network& n) {
  nlohmann::ordered_json doc;
  doc["cells"] = n.cells();
  doc["edge_types"] = n.edge_types();
  auto sigma = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < n.edge_types(); ++t) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (CellIndex c = 0; c < n.size(); ++c) m[n.name(c)] = n.name(n.source(t, c));
    sigma.push_back(std::move(m));
  }
  doc["sigma"] = std::move(sigma);
  return doc;
}

inline std::string serialize_network(const Network& n) { return network_to_json(n).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Linear-algebraic view

/// Row index = target cell, column index = source cell.
inline std::vector<IntMatrix> adjacency_matrices(const Network& n) {
  std::vector<IntMatrix> out;
  out.reserve(n.edge_types());
  for (std::size_t t = 0; t < n.edge_types(); ++t) {
    IntMatrix a(n.size(), std::vector<int>(n.size(), 0));
    for (CellIndex c = 0; c < n.size(); ++c) a[c][n.source(t, c)] = 1;
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feed-forward structure

struct FeedForwardStructure {
  std::vector<std::vector<CellIndex>> layers;  // C_0, ..., C_m
  std::vector<std::size_t> layer_of;           // indexed by cell

  /// Index m of the last layer.
  std::size_t depth() const noexcept { return layers.size() - 1; }
  std::size_t layer_size(std::size_t j) const { return layers.at(j).size(); }
  std::vector<std::size_t> profile() const {
    std::vector<std::size_t> p;
    for (const auto& l : layers) p.push_back(l.size());
    return p;
  }
};

struct LayerDetection {
  std::optional<FeedForwardStructure> structure;
  std::optional<CellIndex> witness;  // a cell violating the layer conditions
  std::string reason;

  explicit operator bool() const noexcept { return structure.has_value(); }
};

/// Finds the layer partition C_0..C_m if the network is feed-forward.
///
/// C_0 is the set of cells fixed by every sigma_i; any other cell sits one
/// layer above the highest of its inputs. The partition is then checked
/// against the uniform-layer and next-layer-source conditions.
inline LayerDetection detect_layers(const Network& n) {
  const std::size_t N = n.size(), k = n.edge_types();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> layer(N, kUnset);
  for (CellIndex c = 0; c < N; ++c) {
    bool fixed = true;
    for (std::size_t t = 0; t < k; ++t) fixed = fixed && n.source(t, c) == c;
    if (fixed) layer[c] = 0;
  }
  if (std::none_of(layer.begin(), layer.end(), [](std::size_t l) { return l == 0; }))
    return {std::nullopt, CellIndex{0}, "no cell is fixed by every input map"};

  // Depth-first layer assignment; state 1 marks cells on the current path.
  std::vector<int> state(N, 0);
  for (CellIndex c = 0; c < N; ++c)
    if (layer[c] == 0) state[c] = 2;
  std::optional<CellIndex> cycle;
  std::vector<std::pair<CellIndex, std::size_t>> stack;
  for (CellIndex root = 0; root < N && !cycle; ++root) {
    if (state[root] == 2) continue;
    stack.push_back({root, 0});
    state[root] = 1;
    while (!stack.empty() && !cycle) {
      auto& [c, t] = stack.back();
      if (t < k) {
        CellIndex s = n.source(t++, c);
        if (state[s] == 1) {
          cycle = s;
        } else if (state[s] == 0) {
          state[s] = 1;
          stack.push_back({s, 0});
        }
        continue;
      }
      std::size_t best = 0;
      for (std::size_t u = 0; u < k; ++u) best = std::max(best, layer[n.source(u, c)]);
      layer[c] = best + 1;
      state[c] = 2;
      stack.pop_back();
    }
  }
  if (cycle) return {std::nullopt, *cycle, "cell lies on a directed cycle outside the first layer"};

  FeedForwardStructure ffs;
  ffs.layer_of = layer;
  const std::size_t m = *std::max_element(layer.begin(), layer.end());
  ffs.layers.assign(m + 1, {});
  for (CellIndex c = 0; c < N; ++c) ffs.layers[layer[c]].push_back(c);

  for (CellIndex c = 0; c < N; ++c) {
    if (layer[c] == 0) continue;
    for (std::size_t t = 0; t < k; ++t) {
      if (layer[n.source(t, c)] + 1 != layer[c])
        return {std::nullopt, c, "inputs of cell '" + n.name(c) + "' come from more than one layer"};
    }
  }
  std::vector<bool> feeds_next(N, false);
  for (CellIndex c = 0; c < N; ++c) {
    if (layer[c] == 0) continue;
    for (std::size_t t = 0; t < k; ++t) feeds_next[n.source(t, c)] = true;
  }
  for (CellIndex c = 0; c < N; ++c) {
    if (layer[c] < m && !feeds_next[c])
      return {std::nullopt, c, "cell '" + n.name(c) + "' is not the source of any edge into the next layer"};
  }
  return {std::move(ffs), std::nullopt, {}};
}

inline FeedForwardStructure require_layers(const Network& n, std::string_view what = "network") {
  auto d = detect_layers(n);
  if (!d) throw PreconditionError(std::string(what) + " is not feed-forward: " + d.reason);
  return *d.structure;
}

// ---------------------------------------------------------------------------
// Connectivity

struct BackwardConnectivity {
  bool connected = false;
  std::optional<CellIndex> witness;
};

/// True iff some cell is reachable from every other cell along edge direction.
inline BackwardConnectivity is_backward_connected(const Network& n) {
  const std::size_t N = n.size();
  for (CellIndex target = 0; target < N; ++target) {
    std::vector<bool> reaches(N, false);
    std::vector<CellIndex> todo{target};
    reaches[target] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
      CellIndex c = todo.back();
      todo.pop_back();
      for (std::size_t t = 0; t < n.edge_types(); ++t) {
        CellIndex s = n.source(t, c);
        if (!reaches[s]) {
          reaches[s] = true;
          ++count;
          todo.push_back(s);
        }
      }
    }
    if (count == N) return {true, target};
  }
  return {false, std::nullopt};
}

/// Connectedness of the underlying undirected graph.
inline bool is_connected(const Network& n) {
  const std::size_t N = n.size();
  std::vector<std::vector<CellIndex>> adj(N);
  for (std::size_t t = 0; t < n.edge_types(); ++t) {
    for (CellIndex c = 0; c < N; ++c) {
      adj[c].push_back(n.source(t, c));
      adj[n.source(t, c)].push_back(c);
    }
  }
  std::vector<bool> seen(N, false);
  std::vector<CellIndex> todo{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    CellIndex c = todo.back();
    todo.pop_back();
    for (CellIndex d : adj[c]) {
      if (!seen[d]) {
        seen[d] = true;
        ++count;
        todo.push_back(d);
      }
    }
  }
  return count == N;
}

// ---------------------------------------------------------------------------
// Equality up to relabeling

namespace detail {

// Colour refinement on the disjoint union of two networks so that the
// resulting labels are comparable across them.
inline std::vector<long> joint_refinement(const Network& a, const Network& b) {
  const std::size_t na = a.size(), N = a.size() + b.size(), k = a.edge_types();
  auto src = [&](std::size_t t, std::size_t c) -> std::size_t {
    return c < na ? a.source(t, c) : na + b.source(t, c - na);
  };
  std::vector<std::vector<std::vector<std::size_t>>> preimages(k, std::vector<std::vector<std::size_t>>(N));
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t c = 0; c < N; ++c) preimages[t][src(t, c)].push_back(c);

  std::vector<long> colour(N, 0);
  std::size_t classes = 1;
  for (std::size_t round = 0; round <= N; ++round) {
    std::map<std::vector<long>, long> dict;
    std::vector<long> next(N);
    for (std::size_t c = 0; c < N; ++c) {
      std::vector<long> key{colour[c]};
      for (std::size_t t = 0; t < k; ++t) {
        key.push_back(src(t, c) == c ? -1 : colour[src(t, c)]);
        std::vector<long> pre;
        for (std::size_t d : preimages[t][c]) pre.push_back(colour[d]);
        std::sort(pre.begin(), pre.end());
        key.push_back(static_cast<long>(pre.size()));
        key.insert(key.end(), pre.begin(), pre.end());
      }
      next[c] = dict.emplace(std::move(key), static_cast<long>(dict.size())).first->second;
    }
    colour = std::move(next);
    if (dict.size() == classes) break;
    classes = dict.size();
  }
  return colour;
}

}  // namespace detail

/// Returns a bijection phi (indexed by cells of `a`) with
/// phi(sigma_i(c)) = sigma'_i(phi(c)), or nothing if the networks differ.
inline std::optional<std::vector<CellIndex>> networks_equal(const Network& a, const Network& b) {
  if (a.size() != b.size() || a.edge_types() != b.edge_types()) return std::nullopt;
  const std::size_t N = a.size(), k = a.edge_types();
  const auto colour = detail::joint_refinement(a, b);
  {
    std::vector<long> ca(colour.begin(), colour.begin() + N), cb(colour.begin() + N, colour.end());
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb) return std::nullopt;
  }
  constexpr CellIndex kFree = static_cast<CellIndex>(-1);
  std::vector<CellIndex> phi(N, kFree), inv(N, kFree);

  // Assigns c -> d and every image forced by the input maps; records the
  // assigned cells so the caller can undo on failure.
  auto assign = [&](CellIndex c, CellIndex d, std::vector<CellIndex>& trail) {
    std::vector<std::pair<CellIndex, CellIndex>> todo{{c, d}};
    while (!todo.empty()) {
      auto [x, y] = todo.back();
      todo.pop_back();
      if (phi[x] != kFree) {
        if (phi[x] != y) return false;
        continue;
      }
      if (inv[y] != kFree || colour[x] != colour[N + y]) return false;
      phi[x] = y;
      inv[y] = x;
      trail.push_back(x);
      for (std::size_t t = 0; t < k; ++t) todo.push_back({a.source(t, x), b.source(t, y)});
    }
    return true;
  };
  auto undo = [&](const std::vector<CellIndex>& trail) {
    for (CellIndex x : trail) {
      inv[phi[x]] = kFree;
      phi[x] = kFree;
    }
  };

  auto search = [&](auto& self) -> bool {
    CellIndex c = 0;
    while (c < N && phi[c] != kFree) ++c;
    if (c == N) return true;
    for (CellIndex d = 0; d < N; ++d) {
      if (inv[d] != kFree || colour[c] != colour[N + d]) continue;
      std::vector<CellIndex> trail;
      if (assign(c, d, trail) && self(self)) return true;
      undo(trail);
    }
    return false;
  };
  if (!search(search)) return std::nullopt;
  return phi;
}

}  // namespace ffn
