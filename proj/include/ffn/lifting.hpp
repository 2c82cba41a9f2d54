#pragma once

// Whether every bifurcation branch on a lift L is lifted from the quotient N:
// exhaustively via signatures, and via sufficient structural conditions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ffn/branches.hpp"
#include "ffn/coloring.hpp"
#include "ffn/jet.hpp"
#include "ffn/lift.hpp"

namespace ffn {

enum class Verdict { AllLifted, ExistsNotLifted, Undetermined };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::AllLifted: return "AllLifted";
    case Verdict::ExistsNotLifted: return "ExistsNotLifted";
    case Verdict::Undetermined: return "Undetermined";
  }
  return {};
}

struct RuleStatus {
  enum class Status { Applied, HypothesisFailed, NotApplicable };
  std::string tag;
  Status status = Status::NotApplicable;
  Verdict conclusion = Verdict::Undetermined;  // meaningful when Applied
  std::string detail;
};

inline std::string to_string(RuleStatus::Status s) {
  switch (s) {
    case RuleStatus::Status::Applied: return "applied";
    case RuleStatus::Status::HypothesisFailed: return "not satisfied";
    case RuleStatus::Status::NotApplicable: return "not applicable";
  }
  return {};
}

struct LiftingVerdict {
  Verdict verdict = Verdict::Undetermined;
  std::string rule;  // deciding rule tag, or "exhaustive"
  std::optional<BranchSignature> witness;
  std::optional<ValencyBranchPattern> valency_witness;
  std::optional<Coloring> coloring_used;
  std::vector<RuleStatus> rules;  // every rule considered, in priority order

  const RuleStatus* find_rule(const std::string& tag) const {
    for (const auto& r : rules)
      if (r.tag == tag) return &r;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Signature-level membership in a synchrony subspace

inline bool slopes_match(double a, double b, double rel_tol = 1e-9) {
  return std::abs(a - b) <= rel_tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

/// True iff orders and slopes are constant on every class of `col`.
inline bool signature_in_synchrony(const BranchSignature& sig, const Coloring& col) {
  for (const auto& cls : col.classes()) {
    for (CellIndex c : cls) {
      if (sig.orders[c] != sig.orders[cls.front()]) return false;
      if (!slopes_match(sig.slopes[c], sig.slopes[cls.front()])) return false;
    }
  }
  return true;
}

/// True iff some class of `col` carries two different orders.
inline bool order_mismatch(const BranchSignature& sig, const Coloring& col) {
  for (const auto& cls : col.classes())
    for (CellIndex c : cls)
      if (sig.orders[c] != sig.orders[cls.front()]) return true;
  return false;
}

struct LiftedCheck {
  bool lifted = false;
  std::optional<Coloring> coloring;
  explicit operator bool() const noexcept { return lifted; }
};

inline LiftedCheck is_lifted(const BranchSignature& sig, const std::vector<Coloring>& colorings) {
  if (colorings.empty()) throw PreconditionError("no coloring relates the lift to the quotient");
  for (const auto& col : colorings)
    if (signature_in_synchrony(sig, col)) return {true, col};
  return {};
}

/// A valency branch on L is fixed by its first-layer pattern; it lies in the
/// synchrony subspace iff the pattern is constant on classes within C'_0.
inline LiftedCheck is_lifted(const ValencyBranchPattern& pat, const FeedForwardStructure& fl,
                             const std::vector<Coloring>& colorings) {
  if (colorings.empty()) throw PreconditionError("no coloring relates the lift to the quotient");
  std::vector<bool> on(fl.layer_of.size(), false);
  for (CellIndex c : pat.support) on[c] = true;
  for (const auto& col : colorings) {
    bool ok = true;
    for (const auto& cls : col.classes()) {
      std::optional<bool> v;
      for (CellIndex c : cls) {
        if (fl.layer_of[c] != 0) continue;
        if (v && *v != on[c]) ok = false;
        v = on[c];
      }
    }
    if (ok) return {true, col};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Exhaustive decision

inline LiftingVerdict decide_exhaustive(const Network& n, const Network& l, const JetCoefficients& jet) {
  require_layers(n, "quotient network");
  const auto fl = require_layers(l, "lift network");
  require_arity(l, jet);
  const auto cols = find_colorings_with_quotient(l, n);
  if (cols.empty()) throw PreconditionError("second network is not a lift of the first");

  LiftingVerdict v;
  v.rule = "exhaustive";
  if (jet.type == BifurcationType::Valency) {
    for (const auto& pat : enumerate_branches_valency(l, jet)) {
      if (!is_lifted(pat, fl, cols)) {
        v.verdict = Verdict::ExistsNotLifted;
        v.valency_witness = pat;
        return v;
      }
    }
    v.verdict = Verdict::AllLifted;
    return v;
  }
  const auto sigs = enumerate_branches_internal(l, jet);
  std::optional<BranchSignature> slope_only;
  for (const auto& sig : sigs) {
    if (is_lifted(sig, cols)) continue;
    // Prefer witnesses whose orders already differ within a class for every coloring.
    bool orders_differ = std::all_of(cols.begin(), cols.end(), [&](const Coloring& c) { return order_mismatch(sig, c); });
    if (orders_differ) {
      v.verdict = Verdict::ExistsNotLifted;
      v.witness = sig;
      return v;
    }
    if (!slope_only) slope_only = sig;
  }
  if (slope_only) {
    v.verdict = Verdict::ExistsNotLifted;
    v.witness = slope_only;
    return v;
  }
  v.verdict = Verdict::AllLifted;
  return v;
}

// ---------------------------------------------------------------------------
// Sufficient conditions

namespace detail {

// The two cells of a coloring whose only nontrivial class is a pair in `layer`.
inline std::optional<std::pair<CellIndex, CellIndex>> single_pair_split(const Coloring& col,
                                                                       const FeedForwardStructure& fl,
                                                                       std::size_t layer) {
  auto nt = col.nontrivial_classes();
  if (nt.size() != 1 || nt[0].size() != 2) return std::nullopt;
  if (fl.layer_of[nt[0][0]] != layer || fl.layer_of[nt[0][1]] != layer) return std::nullopt;
  return std::make_pair(nt[0][0], nt[0][1]);
}

// Sum of f_i over the edge types of d whose source satisfies `pred`.
template <class Pred>
double weight(const Network& l, const JetCoefficients& jet, CellIndex d, Pred pred) {
  double w = 0;
  for (std::size_t t = 0; t < l.edge_types(); ++t)
    if (pred(l.source(t, d))) w += jet.f(t + 1);
  return w;
}

inline bool seclay_condition(const Network& l, const JetCoefficients& jet, const FeedForwardStructure& fl,
                             CellIndex c1, CellIndex c2) {
  std::vector<CellIndex> rest;
  for (CellIndex c : fl.layers[1])
    if (c != c1 && c != c2) rest.push_back(c);
  if (rest.size() > 20) throw PreconditionError("layer too large for subset enumeration");
  const auto& next = fl.layers[2];
  for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
    std::vector<bool> in_i(l.size(), false);
    for (std::size_t b = 0; b < rest.size(); ++b)
      if (mask >> b & 1) in_i[rest[b]] = true;
    bool found = false;
    for (std::size_t a = 0; a < next.size() && !found; ++a) {
      for (std::size_t b = a + 1; b < next.size() && !found; ++b) {
        auto wi = [&](CellIndex d) { return weight(l, jet, d, [&](CellIndex s) { return in_i[s]; }); };
        auto w1 = [&](CellIndex d) { return weight(l, jet, d, [&](CellIndex s) { return s == c1; }); };
        auto w2 = [&](CellIndex d) { return weight(l, jet, d, [&](CellIndex s) { return s == c2; }); };
        const CellIndex d1 = next[a], d2 = next[b];
        found = (wi(d1) + w1(d1)) * (wi(d2) + w1(d2)) < 0 && (wi(d1) + w2(d1)) * (wi(d2) + w2(d2)) < 0;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline bool intermediate_condition(const Network& l, const JetCoefficients& jet, const FeedForwardStructure& fl,
                                   std::size_t j, CellIndex c1, CellIndex c2) {
  std::vector<CellIndex> fed;  // next-layer cells with every input in {c1, c2}
  for (CellIndex d : fl.layers[j + 1]) {
    bool only = true;
    for (std::size_t t = 0; t < l.edge_types(); ++t) only = only && (l.source(t, d) == c1 || l.source(t, d) == c2);
    if (only) fed.push_back(d);
  }
  for (std::size_t a = 0; a < fed.size(); ++a) {
    for (std::size_t b = a + 1; b < fed.size(); ++b) {
      auto w1 = [&](CellIndex d) { return weight(l, jet, d, [&](CellIndex s) { return s == c1; }); };
      auto w2 = [&](CellIndex d) { return weight(l, jet, d, [&](CellIndex s) { return s == c2; }); };
      const double a1 = w1(fed[a]), b1 = w1(fed[b]), a2 = w2(fed[a]), b2 = w2(fed[b]);
      if (a1 * b1 < 0 && a2 * b2 < 0 && a1 * b1 + a2 * b2 < a1 * b2 + b1 * a2) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Applies the structural rules in fixed priority; every rule that was
/// considered is listed, the first applied one decides.
inline LiftingVerdict predict_via_theorems(const Network& n, const Network& l, const JetCoefficients& jet) {
  using S = RuleStatus::Status;
  const auto fn = require_layers(n, "quotient network");
  const auto fl = require_layers(l, "lift network");
  require_arity(l, jet);
  validate_jet(jet);
  const auto cols = find_colorings_with_quotient(l, n);
  if (cols.empty()) throw PreconditionError("second network is not a lift of the first");
  const auto cls = classify_lift(n, l);
  const bool bc = is_backward_connected(l).connected;
  using K = LiftClassification::Kind;
  const bool inside = cls.kind == K::InsideLayer, creates = cls.kind == K::CreatesNewLayers;
  const std::size_t j = cls.value, m = fn.depth();

  LiftingVerdict v;
  auto add = [&](std::string tag, S status, Verdict concl, std::string detail) {
    v.rules.push_back({std::move(tag), status, concl, std::move(detail)});
  };

  const auto dn = center_subspace_dim(fn, jet.type), dl = center_subspace_dim(fl, jet.type);
  add("cor-eigspainv", dn == dl ? S::Applied : S::HypothesisFailed, Verdict::AllLifted,
      "center subspace dimensions " + std::to_string(dn) + " and " + std::to_string(dl));

  const std::string basic = inside || creates ? cls.to_string() : "lift is " + cls.to_string();
  const char* internal_tags[] = {"prop-lbpintdynfirstnew", "prop-lbpintdynextonecell",
                                 "prop-liftbifbrainliftinsidelayerusingbalcol", "prop-genkerincnonewbifseclay",
                                 "prop-genkerincnonewbif"};
  if (jet.type == BifurcationType::Valency) {
    if (!(inside || creates)) {
      add("prop-lbpval", S::NotApplicable, Verdict::Undetermined, basic);
    } else if (!bc) {
      add("prop-lbpval", S::HypothesisFailed, Verdict::Undetermined, basic + "; lift is not backward connected");
    } else {
      add("prop-lbpval", S::Applied, inside && j == 0 ? Verdict::ExistsNotLifted : Verdict::AllLifted,
          basic + "; lift is backward connected");
    }
    for (const char* tag : internal_tags) add(tag, S::NotApplicable, Verdict::Undetermined, "valency jet");
  } else {
    add("prop-lbpval", S::NotApplicable, Verdict::Undetermined, "internal-dynamics jet");
    if (inside && j == 0) add("prop-lbpintdynfirstnew", S::Applied, Verdict::AllLifted, basic);
    else if (creates) add("prop-lbpintdynfirstnew", S::Applied, Verdict::ExistsNotLifted, basic);
    else add("prop-lbpintdynfirstnew", S::NotApplicable, Verdict::Undetermined, basic);

    if (inside && j > 0 && j < m) {
      const std::size_t next = fn.layer_size(j + 1);
      add("prop-lbpintdynextonecell", next == 1 ? S::Applied : S::HypothesisFailed, Verdict::ExistsNotLifted,
          "next layer of the quotient has " + std::to_string(next) + " cell(s)");
    } else {
      add("prop-lbpintdynextonecell", S::NotApplicable, Verdict::Undetermined, basic);
    }

    if (inside && j > 0 && j + 1 < m) {
      bool pos = true, neg = true;
      for (std::size_t i = 1; i <= jet.k; ++i) pos = pos && jet.f(i) > 0, neg = neg && jet.f(i) < 0;
      std::string why;
      if (!bc) why = "lift is not backward connected";
      else if (!pos && !neg) why = "input coefficients f_i have mixed signs";
      add("prop-liftbifbrainliftinsidelayerusingbalcol", why.empty() ? S::Applied : S::HypothesisFailed,
          Verdict::ExistsNotLifted, why.empty() ? "backward connected, all f_i of one sign" : why);
    } else {
      add("prop-liftbifbrainliftinsidelayerusingbalcol", S::NotApplicable, Verdict::Undetermined, basic);
    }

    if (inside && j == 1 && m >= 2) {
      bool any_split = false, ok = false;
      for (const auto& col : cols) {
        auto pr = detail::single_pair_split(col, fl, 1);
        if (!pr) continue;
        any_split = true;
        if (detail::seclay_condition(l, jet, fl, pr->first, pr->second)) {
          ok = true;
          v.coloring_used = col;
          break;
        }
      }
      if (!any_split) add("prop-genkerincnonewbifseclay", S::NotApplicable, Verdict::Undetermined, "not a single two-cell split");
      else add("prop-genkerincnonewbifseclay", ok ? S::Applied : S::HypothesisFailed, Verdict::AllLifted,
               ok ? "sign condition holds for every subset" : "sign condition fails for some subset");
    } else {
      add("prop-genkerincnonewbifseclay", S::NotApplicable, Verdict::Undetermined, basic);
    }

    if (inside && j > 1 && j + 1 <= m) {
      bool any_split = false, ok = false;
      for (const auto& col : cols) {
        auto pr = detail::single_pair_split(col, fl, j);
        if (!pr) continue;
        any_split = true;
        if (detail::intermediate_condition(l, jet, fl, j, pr->first, pr->second)) {
          ok = true;
          if (!v.coloring_used) v.coloring_used = col;
          break;
        }
      }
      if (!any_split) add("prop-genkerincnonewbif", S::NotApplicable, Verdict::Undetermined, "not a single two-cell split");
      else add("prop-genkerincnonewbif", ok ? S::Applied : S::HypothesisFailed, Verdict::AllLifted,
               ok ? "two next-layer cells satisfy the sign condition" : "no pair of next-layer cells satisfies the sign condition");
    } else {
      add("prop-genkerincnonewbif", S::NotApplicable, Verdict::Undetermined, basic);
    }
  }

  for (const auto& r : v.rules) {
    if (r.status == S::Applied) {
      v.verdict = r.conclusion;
      v.rule = r.tag;
      break;
    }
  }
  if (v.rule.empty()) {
    v.rule = "none";
    v.coloring_used.reset();
  } else if (!v.coloring_used && cols.size() == 1) {
    v.coloring_used = cols.front();
  }
  return v;
}

struct CrossCheckReport {
  LiftingVerdict theorem;
  LiftingVerdict exhaustive;
  bool consistent = true;  // false means a rule contradicted the exhaustive decider
};

inline CrossCheckReport cross_check(const Network& n, const Network& l, const JetCoefficients& jet) {
  CrossCheckReport r{predict_via_theorems(n, l, jet), decide_exhaustive(n, l, jet), true};
  r.consistent = r.theorem.verdict == Verdict::Undetermined || r.theorem.verdict == r.exhaustive.verdict;
  return r;
}

}  // namespace ffn
