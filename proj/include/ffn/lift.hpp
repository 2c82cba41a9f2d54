#pragma once

// Feed-forward lifts: splits, restriction of colorings, classification into
// basic lifts and decomposition of backward-connected lifts.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ffn/coloring.hpp"
#include "ffn/network.hpp"

namespace ffn {

// ---------------------------------------------------------------------------
// Splits

struct EdgeReassignment {
  std::string target;     // cell whose input edge pointed at the split cell
  std::size_t type = 0;   // 0-based edge type
  std::size_t new_index;  // which of new_cells becomes the source
};

/// Replaces `cell` by `new_cells`. Edges that pointed at `cell` are redirected
/// per `edge_reassignment` (unlisted edges go to new_cells[0]);
/// sigma_images[a][t] is the type-t source of new_cells[a] in the result.
struct SplitSpec {
  std::string cell;
  std::vector<std::string> new_cells;
  std::vector<EdgeReassignment> edge_reassignment;
  std::vector<std::vector<std::string>> sigma_images;
};

inline nlohmann::json split_to_json(const SplitSpec& s) {
  nlohmann::json j;
  j["cell"] = s.cell;
  j["new_cells"] = s.new_cells;
  auto re = nlohmann::json::array();
  for (const auto& e : s.edge_reassignment)
    re.push_back({{"target", e.target}, {"type", e.type + 1}, {"new_cell", s.new_cells.at(e.new_index)}});
  j["edge_reassignment"] = re;
  j["sigma_images"] = s.sigma_images;
  return j;
}

inline SplitSpec split_from_json(const nlohmann::json& j) {
  try {
    SplitSpec s;
    s.cell = j.at("cell").get<std::string>();
    s.new_cells = j.at("new_cells").get<std::vector<std::string>>();
    for (const auto& e : j.value("edge_reassignment", nlohmann::json::array())) {
      auto target = e.at("new_cell").get<std::string>();
      auto it = std::find(s.new_cells.begin(), s.new_cells.end(), target);
      if (it == s.new_cells.end()) throw ParseError("edge reassignment names unknown new cell '" + target + "'");
      auto type = e.at("type").get<long long>();
      if (type < 1) throw ParseError("edge types are numbered from 1");
      s.edge_reassignment.push_back({e.at("target").get<std::string>(), static_cast<std::size_t>(type - 1),
                                     static_cast<std::size_t>(it - s.new_cells.begin())});
    }
    s.sigma_images = j.at("sigma_images").get<std::vector<std::vector<std::string>>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed split spec: ") + e.what());
  }
}

/// The network after splitting; the merging coloring of the new cells is
/// checked to be balanced with quotient equal to `n`.
inline Network split_cell(const Network& n, const SplitSpec& spec) {
  const CellIndex c = n.index_of(spec.cell);
  const std::size_t l = spec.new_cells.size(), k = n.edge_types();
  if (l == 0) throw PreconditionError("split needs at least one new cell");
  if (spec.sigma_images.size() != l) throw PreconditionError("split needs sigma images for every new cell");

  std::vector<std::string> names;
  std::vector<CellIndex> old_to_new(n.size());
  std::size_t first_new = 0;
  for (CellIndex d = 0; d < n.size(); ++d) {
    if (d == c) {
      first_new = names.size();
      for (const auto& id : spec.new_cells) names.push_back(id);
      old_to_new[d] = first_new;
    } else {
      old_to_new[d] = names.size();
      names.push_back(n.name(d));
    }
  }
  std::map<std::string, CellIndex> idx;
  for (CellIndex a = 0; a < names.size(); ++a)
    if (!idx.emplace(names[a], a).second) throw PreconditionError("split produces duplicate cell id '" + names[a] + "'");

  std::map<std::pair<CellIndex, std::size_t>, std::size_t> choice;
  for (const auto& e : spec.edge_reassignment) {
    CellIndex d = n.index_of(e.target);
    if (d == c || e.type >= k || n.source(e.type, d) != c || e.new_index >= l)
      throw PreconditionError("edge reassignment for '" + e.target + "' does not name an edge into the split cell");
    choice[{d, e.type}] = e.new_index;
  }

  std::vector<std::vector<CellIndex>> sigma(k, std::vector<CellIndex>(names.size()));
  for (std::size_t t = 0; t < k; ++t) {
    for (CellIndex d = 0; d < n.size(); ++d) {
      if (d == c) continue;
      CellIndex s = n.source(t, d);
      if (s == c) {
        auto it = choice.find({d, t});
        sigma[t][old_to_new[d]] = first_new + (it == choice.end() ? 0 : it->second);
      } else {
        sigma[t][old_to_new[d]] = old_to_new[s];
      }
    }
    for (std::size_t a = 0; a < l; ++a) {
      if (spec.sigma_images[a].size() != k) throw PreconditionError("sigma images must list one source per edge type");
      auto it = idx.find(spec.sigma_images[a][t]);
      if (it == idx.end()) throw PreconditionError("sigma image '" + spec.sigma_images[a][t] + "' is not a cell of the split network");
      sigma[t][first_new + a] = it->second;
    }
  }
  Network out(std::move(names), std::move(sigma));

  std::vector<CellIndex> merged(l);
  for (std::size_t a = 0; a < l; ++a) merged[a] = first_new + a;
  auto col = Coloring::from_classes(out.size(), {merged});
  if (!is_balanced(out, col))
    throw PreconditionError("split of '" + spec.cell + "' does not give a balanced merging coloring");
  if (!networks_equal(quotient(out, col).network, n))
    throw PreconditionError("split of '" + spec.cell + "' does not project back onto the original network");
  // A split cell that fed other cells must keep doing so in every copy.
  bool feeds = false;
  for (std::size_t t = 0; t < k; ++t)
    for (CellIndex d = 0; d < n.size(); ++d) feeds = feeds || (d != c && n.source(t, d) == c);
  if (feeds) {
    for (std::size_t a = 0; a < l; ++a) {
      bool used = false;
      for (std::size_t t = 0; t < k; ++t)
        for (CellIndex d = 0; d < out.size(); ++d) used = used || (d != first_new + a && out.source(t, d) == first_new + a);
      if (!used) throw PreconditionError("new cell '" + spec.new_cells[a] + "' is not the source of any edge");
    }
  }
  return out;
}

/// Keeps the classes of `col` inside the sigma-closed set `s`; cells outside
/// become singletons.
inline Coloring restrict_coloring(const Network& l, const Coloring& col, const std::vector<CellIndex>& s) {
  require_same_cells(l, col);
  std::vector<bool> in(l.size(), false);
  for (CellIndex c : s) in.at(c) = true;
  for (CellIndex c : s)
    for (std::size_t t = 0; t < l.edge_types(); ++t)
      if (!in[l.source(t, c)]) throw PreconditionError("cell subset is not closed under the input maps");
  std::vector<std::size_t> labels(l.size());
  for (CellIndex c = 0; c < l.size(); ++c) labels[c] = in[c] ? col.class_of(c) : col.class_count() + c;
  return Coloring::from_labels(labels);
}

// ---------------------------------------------------------------------------
// Classification

struct LiftClassification {
  enum class Kind { CreatesNewLayers, InsideLayer, Composite, NotRecognized };
  Kind kind = Kind::NotRecognized;
  std::size_t value = 0;  // new-layer count or layer index
  std::vector<LiftClassification> steps;
  std::string reason;

  static LiftClassification creates_new_layers(std::size_t count) { return {Kind::CreatesNewLayers, count, {}, {}}; }
  static LiftClassification inside_layer(std::size_t j) { return {Kind::InsideLayer, j, {}, {}}; }
  static LiftClassification composite(std::vector<LiftClassification> s) { return {Kind::Composite, 0, std::move(s), {}}; }
  static LiftClassification not_recognized(std::string why) { return {Kind::NotRecognized, 0, {}, std::move(why)}; }

  bool operator==(const LiftClassification& o) const {
    return kind == o.kind && value == o.value && steps == o.steps;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::CreatesNewLayers: return "CreatesNewLayers(" + std::to_string(value) + ")";
      case Kind::InsideLayer: return "InsideLayer(" + std::to_string(value) + ")";
      case Kind::NotRecognized: return "NotRecognized";
      case Kind::Composite: {
        std::string out = "Composite[";
        for (std::size_t i = 0; i < steps.size(); ++i) out += (i ? ", " : "") + steps[i].to_string();
        return out + "]";
      }
    }
    return {};
  }
};

/// Checks that the layers of `l` project onto the layers of `n` as for a
/// backward-connected lift: the first n-m+1 layers onto C_0, then layer
/// n-m+j onto C_j.
inline bool verify_layer_alignment(const Network& n, const Network& l, const Coloring& col) {
  const auto fn = require_layers(n, "quotient network");
  const auto fl = require_layers(l, "lift network");
  auto q = quotient(l, col);
  if (!networks_equal(q.network, n)) throw PreconditionError("coloring does not give the quotient network");
  const auto fq = require_layers(q.network, "quotient network");
  if (fl.depth() < fn.depth()) return false;
  const std::size_t shift = fl.depth() - fn.depth();
  for (std::size_t j = 0; j <= fl.depth(); ++j) {
    const std::size_t target = j <= shift ? 0 : j - shift;
    std::set<CellIndex> image;
    for (CellIndex c : fl.layers[j]) {
      if (fq.layer_of[q.projection[c]] != target) return false;
      image.insert(q.projection[c]);
    }
    if (image.size() != fq.layers[target].size()) return false;
  }
  return true;
}

namespace detail {

inline bool classes_within(const Coloring& col, const std::vector<CellIndex>& layer) {
  std::set<CellIndex> in(layer.begin(), layer.end());
  for (const auto& cls : col.nontrivial_classes())
    for (CellIndex c : cls)
      if (!in.count(c)) return false;
  return true;
}

inline std::optional<std::size_t> inside_layer_index(const FeedForwardStructure& fn, const FeedForwardStructure& fl) {
  if (fn.depth() != fl.depth()) return std::nullopt;
  std::optional<std::size_t> j;
  for (std::size_t i = 0; i <= fn.depth(); ++i) {
    if (fn.layer_size(i) != fl.layer_size(i)) {
      if (j) return std::nullopt;
      j = i;
    }
  }
  return j;
}

inline bool creates_layers_profile(const FeedForwardStructure& fn, const FeedForwardStructure& fl) {
  if (fl.depth() <= fn.depth()) return false;
  const std::size_t shift = fl.depth() - fn.depth();
  for (std::size_t j = 0; j <= fl.depth(); ++j) {
    const std::size_t target = j <= shift ? 0 : j - shift;
    if (fl.layer_size(j) != fn.layer_size(target)) return false;
  }
  return true;
}

}  // namespace detail

/// Replicates C_0 of `n` into `count` new layers directly above it; copy j of
/// cell x is named "x~j".
inline Network create_new_layers(const Network& n, std::size_t count) {
  const auto fn = require_layers(n);
  const std::size_t k = n.edge_types();
  std::vector<std::string> names;
  std::map<std::pair<CellIndex, std::size_t>, CellIndex> copy;  // (C_0 cell, level) -> index
  for (std::size_t lvl = 0; lvl <= count; ++lvl) {
    for (CellIndex x : fn.layers[0]) {
      copy[{x, lvl}] = names.size();
      names.push_back(lvl == 0 ? n.name(x) : n.name(x) + "~" + std::to_string(lvl));
    }
  }
  std::vector<CellIndex> upper(n.size());
  for (CellIndex d = 0; d < n.size(); ++d) {
    if (fn.layer_of[d] == 0) continue;
    upper[d] = names.size();
    names.push_back(n.name(d));
  }
  std::vector<std::vector<CellIndex>> sigma(k, std::vector<CellIndex>(names.size()));
  for (std::size_t t = 0; t < k; ++t) {
    for (CellIndex x : fn.layers[0])
      for (std::size_t lvl = 0; lvl <= count; ++lvl) sigma[t][copy[{x, lvl}]] = copy[{x, lvl == 0 ? 0 : lvl - 1}];
    for (CellIndex d = 0; d < n.size(); ++d) {
      if (fn.layer_of[d] == 0) continue;
      CellIndex s = n.source(t, d);
      sigma[t][upper[d]] = fn.layer_of[s] == 0 ? copy[{s, count}] : upper[s];
    }
  }
  return Network(std::move(names), std::move(sigma));
}

struct LiftStep {
  LiftClassification kind;
  Network network;               // network after this step
  std::optional<SplitSpec> split;  // set for the 2-cell splits
  Coloring coloring;             // coloring of L whose quotient is `network`
};

namespace detail {

// Decomposition along one coloring; throws PreconditionError if some step fails.
inline std::vector<LiftStep> decompose_along(const Network& n, const Network& l, const FeedForwardStructure& fn,
                                             const FeedForwardStructure& fl, const Coloring& full) {
  // Same-layer part of the coloring.
  std::vector<std::size_t> labels(l.size());
  for (CellIndex c = 0; c < l.size(); ++c) labels[c] = full.class_of(c) * (fl.depth() + 1) + fl.layer_of[c];
  const Coloring same_layer = Coloring::from_labels(labels);

  std::vector<LiftStep> chain;
  // Current network and the name of each same_layer-class (by class index of
  // the running coloring) inside it.
  Network current = n;
  Coloring running = same_layer;
  std::vector<std::string> name_of_class(running.class_count());

  auto q1 = quotient(l, same_layer);
  if (fl.depth() > fn.depth()) {
    current = create_new_layers(n, fl.depth() - fn.depth());
    chain.push_back({LiftClassification::creates_new_layers(fl.depth() - fn.depth()), current, std::nullopt, same_layer});
  }
  auto phi = networks_equal(q1.network, current);
  if (!phi) throw PreconditionError("same-layer quotient does not match the materialized network");
  for (std::size_t k = 0; k < running.class_count(); ++k) name_of_class[k] = current.name((*phi)[k]);

  std::set<std::string> taken(current.cells().begin(), current.cells().end());
  auto fresh = [&](std::string id) {
    while (taken.count(id)) id += "'";
    taken.insert(id);
    return id;
  };

  for (std::size_t layer = fl.depth() + 1; layer-- > 0;) {
    for (;;) {
      // Next class to split in this layer: the first nontrivial one.
      std::optional<std::size_t> target;
      for (std::size_t k = 0; k < running.class_count() && !target; ++k) {
        const auto& cls = running.classes()[k];
        if (cls.size() > 1 && fl.layer_of[cls.front()] == layer) target = k;
      }
      if (!target) break;
      const auto cls = running.classes()[*target];
      const CellIndex detached = cls.back();

      std::vector<std::size_t> next_labels(l.size());
      for (CellIndex c = 0; c < l.size(); ++c) next_labels[c] = c == detached ? running.class_count() : running.class_of(c);
      const Coloring next = Coloring::from_labels(next_labels);
      if (!is_balanced(l, next)) throw PreconditionError("intermediate coloring is not balanced");

      const std::size_t k_keep = next.class_of(cls.front()), k_new = next.class_of(detached);
      auto qnext = quotient(l, next);
      std::vector<std::string> next_names(next.class_count());
      for (std::size_t k = 0; k < next.class_count(); ++k) {
        if (k == k_keep || k == k_new) continue;
        next_names[k] = name_of_class[running.class_of(next.classes()[k].front())];
      }
      SplitSpec spec;
      spec.cell = name_of_class[*target];
      taken.erase(spec.cell);
      next_names[k_keep] = fresh(qnext.network.name(k_keep));
      next_names[k_new] = fresh(qnext.network.name(k_new));
      spec.new_cells = {next_names[k_keep], next_names[k_new]};
      for (std::size_t t = 0; t < l.edge_types(); ++t) {
        for (std::size_t k = 0; k < next.class_count(); ++k) {
          if (k == k_keep || k == k_new) continue;
          CellIndex src = qnext.network.source(t, k);
          if (src == k_new) spec.edge_reassignment.push_back({next_names[k], t, 1});
          else if (src == k_keep) spec.edge_reassignment.push_back({next_names[k], t, 0});
        }
      }
      for (std::size_t k : {k_keep, k_new}) {
        std::vector<std::string> images;
        for (std::size_t t = 0; t < l.edge_types(); ++t) images.push_back(next_names[qnext.network.source(t, k)]);
        spec.sigma_images.push_back(std::move(images));
      }
      current = split_cell(current, spec);
      if (!networks_equal(current, qnext.network)) throw PreconditionError("split does not reproduce the quotient");
      chain.push_back({LiftClassification::inside_layer(layer), current, spec, next});
      running = next;
      name_of_class = std::move(next_names);
    }
  }
  return chain;
}

}  // namespace detail

/// Chain n -> Q_1 -> ... -> l of basic lifts: at most one CreatesNewLayers
/// step followed by 2-cell splits, ordered from the last layer to the first.
/// Backward-connected lifts always decompose along their unique coloring;
/// otherwise every coloring is tried and each step is checked.
inline std::vector<LiftStep> decompose_lift(const Network& n, const Network& l) {
  const auto fn = require_layers(n, "quotient network");
  const auto fl = require_layers(l, "lift network");
  auto cols = find_colorings_with_quotient(l, n);
  if (cols.empty()) throw PreconditionError("second network is not a lift of the first");
  if (is_backward_connected(l).connected) {
    if (cols.size() != 1) throw PreconditionError("backward-connected lift with several colorings");
    return detail::decompose_along(n, l, fn, fl, cols.front());
  }
  for (const auto& col : cols) {
    try {
      return detail::decompose_along(n, l, fn, fl, col);
    } catch (const PreconditionError&) {
    }
  }
  throw PreconditionError(
      "lift network is not backward connected and no coloring yields a chain of basic lifts");
}

inline LiftClassification classify_lift(const Network& n, const Network& l) {
  const auto fn = require_layers(n, "quotient network");
  const auto fl = require_layers(l, "lift network");
  auto cols = find_colorings_with_quotient(l, n);
  if (cols.empty()) throw PreconditionError("second network is not a lift of the first");
  if (n.size() == l.size()) return LiftClassification::composite({});

  if (auto j = detail::inside_layer_index(fn, fl)) {
    for (const auto& col : cols)
      if (detail::classes_within(col, fl.layers[*j])) return LiftClassification::inside_layer(*j);
  }
  if (detail::creates_layers_profile(fn, fl)) {
    for (const auto& col : cols) {
      if (!verify_layer_alignment(n, l, col)) continue;
      bool flat = true;  // classes only merge copies of the first layer
      for (const auto& cls : col.nontrivial_classes())
        for (CellIndex c : cls) flat = flat && fl.layer_of[c] <= fl.depth() - fn.depth();
      if (flat) return LiftClassification::creates_new_layers(fl.depth() - fn.depth());
    }
  }
  if (is_backward_connected(l).connected) {
    std::vector<LiftClassification> steps;
    for (const auto& step : decompose_lift(n, l)) steps.push_back(step.kind);
    return LiftClassification::composite(std::move(steps));
  }
  return LiftClassification::not_recognized(
      "layer sizes or colorings match no basic lift and the lift network is not backward connected");
}

struct UniqueColoringCheck {
  bool applies = false;  // lift network is a backward-connected FFN
  std::size_t count = 0;
  std::optional<Coloring> coloring;
  bool holds() const noexcept { return !applies || count <= 1; }
};

inline UniqueColoringCheck unique_coloring_check(const Network& n, const Network& l) {
  UniqueColoringCheck out;
  out.applies = detect_layers(l) && is_backward_connected(l).connected;
  auto cols = find_colorings_with_quotient(l, n);
  out.count = cols.size();
  if (cols.size() == 1) out.coloring = cols.front();
  return out;
}

}  // namespace ffn
