#pragma once

// Steady-state bifurcation branches of feed-forward systems: valency branch
// patterns and the (delta, order, slope) signatures of internal-dynamics
// branches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ffn/jet.hpp"
#include "ffn/network.hpp"

namespace ffn {

/// Domain side, square-root-order and slope of a branch at every cell.
/// Order -1 means the coordinate vanishes identically.
struct BranchSignature {
  int delta = 0;
  std::vector<int> orders;
  std::vector<double> slopes;
  std::vector<std::string> templates;  // symbolic origin of each slope

  bool is_trivial() const {
    return std::all_of(orders.begin(), orders.end(), [](int p) { return p == -1; });
  }
  int max_order() const { return orders.empty() ? -1 : *std::max_element(orders.begin(), orders.end()); }

  auto key() const { return std::tie(delta, orders, slopes); }
  bool operator==(const BranchSignature& o) const { return key() == o.key(); }
};

/// Canonical order: by maximal order, then side, orders and slopes.
inline bool canonical_less(const BranchSignature& a, const BranchSignature& b) {
  const int ma = a.max_order(), mb = b.max_order();
  if (ma != mb) return ma < mb;
  return a.key() < b.key();
}

inline nlohmann::ordered_json signature_to_json(const Network& n, const BranchSignature& sig) {
  nlohmann::ordered_json orders = nlohmann::ordered_json::object(), slopes = nlohmann::ordered_json::object(),
                         tmpl = nlohmann::ordered_json::object();
  for (CellIndex c = 0; c < n.size(); ++c) {
    orders[n.name(c)] = sig.orders[c];
    slopes[n.name(c)] = sig.slopes[c];
    tmpl[n.name(c)] = c < sig.templates.size() ? sig.templates[c] : std::string{};
  }
  nlohmann::ordered_json j;
  j["delta"] = sig.delta;
  j["orders"] = orders;
  j["slopes"] = slopes;
  j["slope_templates"] = tmpl;
  return j;
}

// ---------------------------------------------------------------------------
// Closed forms

/// Slope -2 f_0lambda / f_00 of an order-0 coordinate.
inline double order_zero_slope(const JetCoefficients& jet) { return -2.0 * jet.f0l() / jet.f00(); }

inline int sign_of(double v) { return (v > 0) - (v < 0); }

struct ChainSlope {
  int order;     // p~_j = j - 1
  double slope;  // s~_j
  int delta;     // sign(f_0lambda * sum f_i)
};

/// Order and slope of the j-th nonzero cell (j >= 1) along a one-cell-per-layer chain.
inline ChainSlope canonical_chain_slopes(const JetCoefficients& jet, int j) {
  if (j < 1) throw PreconditionError("chain position must be at least 1");
  const double e = std::ldexp(1.0, -(j - 1));
  const double fl = jet.f0l(), sum = jet.input_sum();
  const double s = -sign_of(fl) * 2.0 * std::pow(std::abs(fl), e) / jet.f00() * std::pow(std::abs(sum), 1.0 - e);
  return {j - 1, s, sign_of(fl * sum)};
}

// ---------------------------------------------------------------------------
// Valency

struct ValencyBranchPattern {
  std::vector<CellIndex> support;  // first-layer cells on the nonzero germ
  double slope = 0;                // common first-layer slope

  bool operator==(const ValencyBranchPattern& o) const { return support == o.support && slope == o.slope; }
};

inline double valency_slope(const JetCoefficients& jet) {
  return -2.0 * jet.mixed_lambda_sum() / jet.second_order_sum();
}

inline std::vector<ValencyBranchPattern> enumerate_branches_valency(const Network& n, const JetCoefficients& jet,
                                                                    double eps = 0.0) {
  require_arity(n, jet);
  if (jet.type != BifurcationType::Valency) throw PreconditionError("jet is not of valency type");
  validate_jet(jet, eps);
  const auto ffs = require_layers(n);
  const auto& c0 = ffs.layers[0];
  if (c0.size() > 20) throw PreconditionError("first layer too large for pattern enumeration");
  const double slope = valency_slope(jet);
  std::vector<ValencyBranchPattern> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << c0.size()); ++mask) {
    ValencyBranchPattern p;
    for (std::size_t b = 0; b < c0.size(); ++b)
      if (mask >> b & 1) p.support.push_back(c0[b]);
    p.slope = slope;
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.support.size(), a.support) < std::make_pair(b.support.size(), b.support);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Internal dynamics

struct EnumerationOptions {
  double radicand_eps = 0.0;  // |R| <= eps * (sum of |terms|) counts as vanishing
};

namespace detail {

inline std::string fmt_cell(const Network& n, CellIndex c) { return "s[" + n.name(c) + "]"; }

// Inputs of c at the maximal input order and the Omega.6 radicand.
struct Radicand {
  int input_order = -1;
  double value = 0;
  double scale = 0;  // sum of absolute contributions, for diagnostics
  std::string expr;
};

inline Radicand radicand_at(const Network& n, const JetCoefficients& jet, int delta, CellIndex c,
                            const std::vector<int>& p, const std::vector<double>& s) {
  Radicand r;
  for (std::size_t t = 0; t < n.edge_types(); ++t) r.input_order = std::max(r.input_order, p[n.source(t, c)]);
  if (r.input_order < 0) return r;
  double sum = 0;
  std::string terms;
  for (std::size_t t = 0; t < n.edge_types(); ++t) {
    CellIndex src = n.source(t, c);
    if (p[src] != r.input_order) continue;
    sum += jet.f(t + 1) * s[src];
    r.scale += std::abs(jet.f(t + 1) * s[src]);
    terms += (terms.empty() ? "" : "+") + std::string("f") + std::to_string(t + 1) + "*" + fmt_cell(n, src);
  }
  r.value = -(2.0 * delta / jet.f00()) * sum;
  r.scale *= 2.0 / std::abs(jet.f00());
  r.expr = "-2*(" + std::to_string(delta) + ")/f00*(" + terms + ")";
  return r;
}

}  // namespace detail

/// All signatures satisfying the Omega conditions, in canonical order.
///
/// Cells are visited in layer order. A cell with all inputs at order -1
/// chooses between the zero germ and the order-0 germ; otherwise its order is
/// one above its highest input and its slope is one of the two Omega.6 roots.
/// A negative radicand prunes the branch; a vanishing one is non-generic.
inline std::vector<BranchSignature> enumerate_branches_internal(const Network& n, const JetCoefficients& jet,
                                                                EnumerationOptions opt = {}) {
  require_arity(n, jet);
  if (jet.type != BifurcationType::Internal) throw PreconditionError("jet is not of internal-dynamics type");
  validate_jet(jet);
  const auto ffs = require_layers(n);
  std::vector<CellIndex> order;
  for (const auto& layer : ffs.layers) order.insert(order.end(), layer.begin(), layer.end());

  const double s0 = order_zero_slope(jet);
  std::vector<BranchSignature> out;
  std::vector<int> p(n.size(), -1);
  std::vector<double> s(n.size(), 0.0);
  std::vector<std::string> tmpl(n.size(), "0");

  for (int delta : {0, 1, -1}) {
    auto dfs = [&](auto& self, std::size_t pos) -> void {
      if (pos == order.size()) {
        const int top = *std::max_element(p.begin(), p.end());
        if (delta != 0 && top < 1) return;  // same germ as the two-sided signature
        out.push_back({delta, p, s, tmpl});
        return;
      }
      const CellIndex c = order[pos];
      if (ffs.layer_of[c] == 0) {
        p[c] = -1, s[c] = 0, tmpl[c] = "0";
        self(self, pos + 1);
        return;
      }
      auto r = detail::radicand_at(n, jet, delta, c, p, s);
      if (r.input_order < 0) {
        p[c] = -1, s[c] = 0, tmpl[c] = "0";
        self(self, pos + 1);
        p[c] = 0, s[c] = s0, tmpl[c] = "s0";
        self(self, pos + 1);
        p[c] = -1, s[c] = 0, tmpl[c] = "0";
        return;
      }
      if (delta == 0) return;  // two-sided branches stay at order <= 0
      if (std::abs(r.value) <= opt.radicand_eps * r.scale)
        throw GenericityError("genericity violated: the radicand " + r.expr + " at cell '" + n.name(c) +
                              "' vanishes");
      if (r.value < 0) return;
      const double root = std::sqrt(r.value);
      for (int sg : {1, -1}) {
        p[c] = r.input_order + 1;
        s[c] = sg * root;
        tmpl[c] = std::string(sg > 0 ? "+" : "-") + "sqrt(" + r.expr + ")";
        self(self, pos + 1);
      }
      p[c] = -1, s[c] = 0, tmpl[c] = "0";
    };
    dfs(dfs, 0);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Independent validation

struct OmegaCheck {
  bool ok = true;
  std::string violation;
  explicit operator bool() const noexcept { return ok; }
};

/// Re-checks conditions Omega.1 - Omega.6 and the side-consistency rule.
inline OmegaCheck check_omega(const Network& n, const JetCoefficients& jet, const BranchSignature& sig,
                              double rel_tol = 1e-9) {
  auto fail = [](std::string why) { return OmegaCheck{false, std::move(why)}; };
  if (sig.orders.size() != n.size() || sig.slopes.size() != n.size()) return fail("signature size mismatch");
  if (sig.delta < -1 || sig.delta > 1) return fail("delta outside {-1, 0, 1}");
  auto close = [&](double a, double b) { return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)}); };
  bool any_positive = false;
  for (CellIndex c = 0; c < n.size(); ++c) {
    const int pc = sig.orders[c];
    const double sc = sig.slopes[c];
    if (pc < -1) return fail("order below -1 at " + n.name(c));
    any_positive = any_positive || pc >= 1;
    if (sig.delta == 0 && pc > 0) return fail("Omega.1 fails at " + n.name(c));
    int top = -1;
    for (std::size_t t = 0; t < n.edge_types(); ++t) top = std::max(top, sig.orders[n.source(t, c)]);
    if (pc == -1 && top != -1) return fail("Omega.2 fails at " + n.name(c));
    if (pc > -1 && top != pc - 1) return fail("Omega.3 fails at " + n.name(c));
    if ((pc == -1) != (sc == 0.0)) return fail("Omega.4 fails at " + n.name(c));
    if (pc == 0 && !close(sc, order_zero_slope(jet))) return fail("Omega.5 fails at " + n.name(c));
    if (pc > 0) {
      double sum = 0;
      for (std::size_t t = 0; t < n.edge_types(); ++t) {
        CellIndex src = n.source(t, c);
        if (sig.orders[src] == pc - 1) sum += jet.f(t + 1) * sig.slopes[src];
      }
      const double rad = -(2.0 * sig.delta / jet.f00()) * sum;
      if (!(rad > 0)) return fail("Omega.6 radicand not positive at " + n.name(c));
      if (!close(std::abs(sc), std::sqrt(rad))) return fail("Omega.6 fails at " + n.name(c));
    }
  }
  if (sig.delta != 0 && !any_positive) return fail("one-sided signature without a positive order");
  return {};
}

/// The layer r where a nonzero signature first becomes nonzero, after checking
/// that layer r + l has maximal order exactly l and lower layers vanish.
/// Returns nothing for the trivial signature.
inline std::optional<std::size_t> layer_order_profile(const BranchSignature& sig, const FeedForwardStructure& ffs) {
  if (sig.is_trivial()) return std::nullopt;
  std::optional<std::size_t> r;
  for (std::size_t j = 0; j <= ffs.depth(); ++j) {
    int top = -1;
    for (CellIndex c : ffs.layers[j]) top = std::max(top, sig.orders.at(c));
    if (!r) {
      if (top == -1) continue;
      if (j == 0 || top != 0) throw PreconditionError("signature violates the layer order profile at layer " + std::to_string(j));
      r = j;
      continue;
    }
    if (top != static_cast<int>(j - *r))
      throw PreconditionError("signature violates the layer order profile at layer " + std::to_string(j));
  }
  return r;
}

}  // namespace ffn
