#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "decomposition_search.hpp"
#include "fig2_templates.hpp"
#include "test_util.hpp"

using namespace ffn;
using namespace ffn::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) o.require(secs < budget_s, "runtime over " + std::to_string(budget_s) + " s");
  failures += !o.pass;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << std::fixed << std::setprecision(2) << secs
            << " s)" << o.detail.str() << std::endl;
}

// Template rows for the ten-cell network, instantiated at one jet, against the enumerator.
void fig2_rows(Outcome& o) {
  const auto n = corpus("fig2");
  const auto jet = internal_jet({1.3, -0.6, 0.45}, 2.0, 1.0);
  const auto e = expand_templates(n, jet);
  for (const auto& p : e.problems) o.require(false, p);
  std::string held, dropped;
  for (std::size_t r = 0; r < e.row_holds.size(); ++r) (e.row_holds[r] ? held : dropped) += " " + std::to_string(r + 1);
  o.detail << " rows holding:" << held << "; dropped:" << dropped;
  std::vector<BranchSignature> oracle;
  for (const auto& i : e.instances) oracle.push_back(i.sig);
  const auto sigs = enumerate_branches_internal(n, jet);
  o.require(same_signature_set(oracle, nontrivial(sigs)), "signature set differs from the table rows");
  o.detail << "; " << sigs.size() << " signatures";
}

void chains(Outcome& o) {
  const auto jet = internal_jet({1.0});
  for (std::size_t m = 1; m <= 6; ++m) {
    const auto sigs = enumerate_branches_internal(chain(m), jet);
    o.require(sigs.size() == 2 * m, "chain m=" + std::to_string(m) + " has " + std::to_string(sigs.size()));
    for (const auto& s : sigs) {
      if (s.is_trivial()) continue;
      std::size_t r = 0;
      while (s.orders[r] == -1) ++r;
      for (std::size_t l = 0; r + l <= m; ++l) {
        const auto want = canonical_chain_slopes(jet, static_cast<int>(l + 1));
        const double got = r + l < m ? s.slopes[r + l] : std::abs(s.slopes[r + l]);
        const double ref = r + l < m ? want.slope : std::abs(want.slope);
        o.require(s.orders[r + l] == want.order && std::abs(got - ref) <= 1e-12, "chain template");
      }
    }
  }
  o.detail << " counts 2,4,...,12";
}

void valency(Outcome& o) {
  for (const char* name : {"fig1", "fig3", "fig5_left", "fig5_right"}) {
    const auto n = corpus(name);
    const std::size_t want = std::size_t{1} << require_layers(n).layer_size(0);
    const auto jet = valency_jet(std::vector<double>(n.edge_types(), 1.0));
    o.require(enumerate_branches_valency(n, jet).size() == want, std::string(name) + " pattern count");
    const PolynomialCellFunction f(jet);
    for (double lambda : {1e-3, -1e-3}) {
      std::size_t near = 0;
      for (const auto& eq : all_equilibria_at(n, f, lambda)) near += inf_norm(eq.state) < 1e-2;
      o.require(near == want, std::string(name) + " numeric count " + std::to_string(near));
    }
    o.detail << " " << name << "=" << want;
  }
}

void order_slope(Outcome& o) {
  const auto n = corpus("chain3");
  const auto rep = verify_numeric(n, internal_jet({1.0}));
  o.require(rep.match.perfect(), "matching not perfect");
  double worst_e = 0, worst_s = 0;
  for (const auto& bm : rep.match.branches) {
    if (!bm.signature) continue;
    const auto& sig = rep.signatures[*bm.signature];
    o.require(std::abs(rep.branches[bm.branch].lambdas.back()) <= 1e-4, "last lambda above 1e-4");
    for (CellIndex c = 0; c < n.size(); ++c) {
      if (sig.orders[c] < 0) continue;
      const double e = std::ldexp(1.0, -sig.orders[c]);
      worst_e = std::max(worst_e, std::abs(bm.estimates[c].exponent - e) / e);
      worst_s = std::max(worst_s, std::abs(bm.estimates[c].slope - sig.slopes[c]) / std::abs(sig.slopes[c]));
    }
  }
  o.require(worst_e <= 0.05 && worst_s <= 0.02, "estimate outside tolerance");
  o.detail << " " << rep.match.branches.size() << " branches, worst exponent error " << std::setprecision(4) << worst_e
           << ", worst slope error " << worst_s;
}

void lifting(Outcome& o) {
  {
    const auto v = decide_exhaustive(corpus("fig3"), corpus("fig1"), internal_jet({1.0, 0.7}));
    o.require(v.verdict == Verdict::AllLifted, "(a) " + to_string(v.verdict));
  }
  {
    const auto l = corpus("fig6");
    const auto v = decide_exhaustive(corpus("fig6_quotient"), l, internal_jet({1.0, 0.7}));
    o.require(v.verdict == Verdict::ExistsNotLifted && v.witness &&
                  v.witness->orders[l.index_of("5")] != v.witness->orders[l.index_of("6")],
              "(b) " + to_string(v.verdict));
  }
  {
    const auto cc = cross_check(corpus("fig5_left"), corpus("fig5_right"), internal_jet({1.0, 0.7}));
    const auto* r = cc.theorem.find_rule("prop-lbpintdynfirstnew");
    o.require(cc.consistent && cc.exhaustive.verdict == Verdict::AllLifted && r &&
                  r->status == RuleStatus::Status::Applied && r->conclusion == Verdict::AllLifted,
              "(c)");
  }
  {
    const auto n = corpus("valency_pair_left"), l = corpus("valency_pair_right");
    const auto cc = cross_check(n, l, valency_jet(std::vector<double>(n.edge_types(), 1.0)));
    o.require(is_backward_connected(l).connected && cc.consistent && cc.theorem.verdict == Verdict::ExistsNotLifted &&
                  cc.theorem.rule == "prop-lbpval" && cc.exhaustive.verdict == Verdict::ExistsNotLifted,
              "(d) " + cc.theorem.rule);
  }
  {
    const auto cc = cross_check(corpus("fig2_q23"), corpus("fig2"), internal_jet({2.0, -1.0, 0.5}));
    const auto* r = cc.theorem.find_rule("prop-genkerincnonewbifseclay");
    o.require(cc.consistent && cc.exhaustive.verdict == Verdict::AllLifted && r &&
                  to_string(r->status) == "not satisfied",
              "(e)");
  }
  o.detail << " (a)-(e) checked";
}

void decomposition(Outcome& o) {
  const auto n = corpus("fig3"), l = corpus("fig1");
  const auto steps = decompose_lift(n, l);
  o.require(steps.size() == 1 && steps[0].kind.to_string() == "InsideLayer(1)" && steps[0].split.has_value(),
            "fig3 -> fig1 is not a single InsideLayer(1) split");
  if (!steps.empty() && steps[0].split)
    o.require(static_cast<bool>(networks_equal(split_cell(n, split_from_json(split_to_json(*steps[0].split))), l)),
              "split does not round-trip");
  const auto s = search_basic_chain(corpus("fig4_left"), corpus("fig4_right"));
  o.require(!s.found, "fig4 pair has a basic chain");
  o.detail << " fig4 search visited " << s.nodes << " intermediates, no chain";
}

void colorings(Outcome& o) {
  const auto c5 = find_colorings_with_quotient(corpus("fig5_right"), corpus("fig5_left")).size();
  const auto c1 = find_colorings_with_quotient(corpus("fig1"), corpus("fig3")).size();
  o.require(c5 == 3 && c1 == 3, "corpus counts");
  std::mt19937 rng(2024);
  int tested = 0, worst = 0;
  for (int attempt = 0; attempt < 20000 && tested < 200; ++attempt) {
    auto rl = random_backward_connected_lift(rng, 9, 3, 4);
    if (!rl) continue;
    ++tested;
    worst = std::max(worst, static_cast<int>(find_colorings_with_quotient(rl->lift, rl->quotient).size()));
  }
  o.require(tested == 200 && worst <= 1, "uniqueness property");
  o.detail << " fig5=" << c5 << " fig1/fig3=" << c1 << "; " << tested << " random lifts, max colorings " << worst;
}

// A failed numeric run counts as window-limited when every unmatched branch
// failed inside the estimator and each such branch accounts for one missing
// signature.
bool window_limited(const VerifyReport& rep) {
  std::size_t unlocked = 0;
  for (const auto& b : rep.match.branches) {
    if (b.signature) continue;
    if (b.note.rfind("cell ", 0) != 0) return false;
    ++unlocked;
  }
  return unlocked == rep.match.unmatched_signatures.size();
}

void property_suite(Outcome& o) {
  std::mt19937 rng(31337);
  int networks = 0, skipped = 0, signatures = 0, lifts = 0, perfect = 0, window = 0;
  while (networks < 100) {
    const auto n = random_ffn(rng, 10, 3, 3);
    const auto jet = random_internal_jet(rng, n.edge_types());
    std::vector<BranchSignature> sigs;
    try {
      sigs = enumerate_branches_internal(n, jet);
    } catch (const GenericityError&) {
      ++skipped;
      continue;
    }
    ++networks;
    const auto ffs = require_layers(n);
    for (const auto& s : sigs) {
      ++signatures;
      const auto chk = check_omega(n, jet, s);
      o.require(static_cast<bool>(chk), "validator: " + chk.violation);
      try {
        o.require(s.is_trivial() || layer_order_profile(s, ffs).has_value(), "layer profile");
      } catch (const PreconditionError& e) {
        o.require(false, e.what());
      }
    }
    for (const auto& c : enumerate_balanced_colorings(n)) {
      if (c.is_identity()) continue;
      const auto q = quotient(n, c).network;
      if (!detect_layers(q)) continue;
      const auto cc = cross_check(q, n, jet);
      ++lifts;
      o.require(cc.consistent, "theorem " + cc.theorem.rule + " contradicts the exhaustive verdict");
      break;
    }
    const auto rep = verify_numeric(n, jet);
    if (rep.match.perfect()) {
      ++perfect;
    } else {
      const bool w = window_limited(rep);
      window += w;
      o.require(w, "numeric failure not explained by the window");
      std::cerr << "window-limited run " << networks << ": " << network_to_json(n).dump();
      for (const auto& b : rep.match.branches)
        if (!b.signature) std::cerr << "; " << b.note;
      std::cerr << "\n";
    }
  }
  o.require(perfect >= 95, "perfect matching in fewer than 95 runs");
  o.detail << " " << networks << " networks (" << skipped << " non-generic draws skipped), " << signatures
           << " signatures validated, " << lifts << " lifts cross-checked, numeric perfect " << perfect << "/100"
           << " (" << window << " window-limited)";
}

}  // namespace

int main() {
  criterion(1, 5, fig2_rows);
  criterion(2, 1, chains);
  criterion(3, 0, valency);
  criterion(4, 10, order_slope);
  criterion(5, 0, lifting);
  criterion(6, 30, decomposition);
  criterion(7, 0, colorings);
  criterion(8, 300, property_suite);
  return failures == 0 ? 0 : 1;
}
