#pragma once

// Exhaustive search for a chain of basic lifts N = Q_0 -> Q_1 -> ... -> Q_r = L.
// Every Q_i in such a chain is a quotient of L, so the nodes are the quotients
// of L up to isomorphism and the edges are lifts classified as basic.

#include <cstddef>
#include <queue>
#include <vector>

#include "ffn/ffn.hpp"

namespace ffn::testing {

struct ChainSearch {
  bool found = false;
  std::size_t nodes = 0;  // distinct intermediates examined
  std::vector<LiftClassification> steps;
};

inline bool is_basic(const LiftClassification& c) {
  return c.kind == LiftClassification::Kind::InsideLayer || c.kind == LiftClassification::Kind::CreatesNewLayers;
}

inline ChainSearch search_basic_chain(const Network& n, const Network& l, std::size_t max_cells = 6) {
  std::vector<Network> nodes;
  auto add = [&](const Network& q) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].size() == q.size() && networks_equal(nodes[i], q)) return i;
    nodes.push_back(q);
    return nodes.size() - 1;
  };
  const std::size_t src = add(n);
  for (const auto& col : enumerate_balanced_colorings(l)) {
    const auto q = quotient(l, col).network;
    if (q.size() > n.size() && q.size() < l.size() && q.size() <= max_cells && detect_layers(q) &&
        !find_colorings_with_quotient(q, n).empty())
      add(q);
  }
  const std::size_t dst = add(l);

  ChainSearch out;
  out.nodes = nodes.size();
  std::vector<std::optional<std::pair<std::size_t, LiftClassification>>> prev(nodes.size());
  std::vector<bool> seen(nodes.size(), false);
  std::queue<std::size_t> bfs;
  bfs.push(src);
  seen[src] = true;
  while (!bfs.empty()) {
    const std::size_t a = bfs.front();
    bfs.pop();
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (seen[b] || nodes[b].size() <= nodes[a].size()) continue;
      if (find_colorings_with_quotient(nodes[b], nodes[a]).empty()) continue;
      const auto cls = classify_lift(nodes[a], nodes[b]);
      if (!is_basic(cls)) continue;
      seen[b] = true;
      prev[b] = std::make_pair(a, cls);
      bfs.push(b);
    }
  }
  if (!seen[dst]) return out;
  out.found = true;
  for (std::size_t v = dst; v != src; v = prev[v]->first) out.steps.insert(out.steps.begin(), prev[v]->second);
  return out;
}

}  // namespace ffn::testing
