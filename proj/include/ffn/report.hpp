#pragma once

// Report builders shared by the command-line tool and the tests. Each one
// returns the same result as versioned JSON, aligned text and CSV.

#include <cstddef>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffn/branches.hpp"
#include "ffn/coloring.hpp"
#include "ffn/jet.hpp"
#include "ffn/lift.hpp"
#include "ffn/lifting.hpp"
#include "ffn/network.hpp"
#include "ffn/numeric.hpp"

namespace ffn {

inline constexpr const char* kReportSchema = "ffn-report/1";

struct Report {
  nlohmann::ordered_json json;
  std::string table;
  std::string csv;
  bool mismatch = false;  // verification found disagreements
};

namespace detail {

inline nlohmann::ordered_json report_header(const std::string& command) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  return j;
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline nlohmann::ordered_json ids(const Network& n, const std::vector<CellIndex>& cells) {
  auto a = nlohmann::ordered_json::array();
  for (CellIndex c : cells) a.push_back(n.name(c));
  return a;
}

inline nlohmann::ordered_json classes_json(const Network& n, const Coloring& col) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& cls : col.classes()) a.push_back(ids(n, cls));
  return a;
}

inline nlohmann::ordered_json to_ordered(const nlohmann::json& j) { return nlohmann::ordered_json::parse(j.dump()); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline std::string analyze_summary(const Network& n) {
  const auto det = detect_layers(n);
  if (!det) return "not a feed-forward network: " + det.reason;
  const std::size_t layers = det.structure->layers.size();
  std::string s = std::to_string(layers) + (layers == 1 ? " layer; " : " layers; ");
  const auto bc = is_backward_connected(n);
  if (!bc.connected) return s + "not backward connected";
  s += "backward connected";
  if (n.size() > 1 && bc.witness) s += " (cell " + n.name(*bc.witness) + ")";
  return s;
}

inline Report analyze_report(const Network& n) {
  Report r;
  auto& j = r.json = detail::report_header("analyze");
  j["cells"] = n.cells();
  j["edge_types"] = n.edge_types();
  const auto det = detect_layers(n);
  j["feed_forward"] = static_cast<bool>(det);
  if (det) {
    auto layers = nlohmann::ordered_json::array();
    for (const auto& layer : det.structure->layers) layers.push_back(detail::ids(n, layer));
    j["layers"] = layers;
    j["depth"] = det.structure->depth();
  } else {
    j["layers"] = nullptr;
    j["reason"] = det.reason;
  }
  const auto bc = is_backward_connected(n);
  j["backward_connected"] = bc.connected;
  j["witness"] = bc.witness ? nlohmann::ordered_json(n.name(*bc.witness)) : nlohmann::ordered_json(nullptr);
  j["connected"] = is_connected(n);
  bool rows_ok = true;
  for (const auto& m : adjacency_matrices(n))
    for (const auto& row : m) {
      long sum = 0;
      for (long v : row) sum += v;
      rows_ok = rows_ok && sum == 1;
    }
  j["adjacency_row_sums_ok"] = rows_ok;
  j["summary"] = analyze_summary(n);

  std::ostringstream t;
  t << j["summary"].get<std::string>() << "\n";
  if (det)
    for (std::size_t i = 0; i < det.structure->layers.size(); ++i) {
      t << "  C_" << i << ":";
      for (CellIndex c : det.structure->layers[i]) t << " " << n.name(c);
      t << "\n";
    }
  t << "  connected: " << (j["connected"].get<bool>() ? "yes" : "no")
    << ", adjacency rows sum to 1: " << (rows_ok ? "yes" : "no") << "\n";
  r.table = t.str();

  std::ostringstream c;
  c << "cell,layer\n";
  for (CellIndex x = 0; x < n.size(); ++x)
    c << detail::csv_field(n.name(x)) << "," << (det ? std::to_string(det.structure->layer_of[x]) : "") << "\n";
  r.csv = c.str();
  return r;
}

inline Report quotients_report(const Network& n, const std::optional<Network>& target,
                               std::size_t bound = kDefaultColoringBound) {
  Report r;
  auto& j = r.json = detail::report_header("quotients");
  const auto cols = target ? find_colorings_with_quotient(n, *target, bound) : enumerate_balanced_colorings(n, bound);
  j["count"] = cols.size();
  if (target) j["quotient_cells"] = target->cells();
  auto arr = nlohmann::ordered_json::array();
  std::ostringstream t, c;
  t << cols.size() << (cols.size() == 1 ? " coloring" : " colorings") << (target ? " with the given quotient" : "")
    << "\n";
  c << "index,classes,quotient_size\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    nlohmann::ordered_json e;
    e["classes"] = detail::classes_json(n, cols[i]);
    e["nontrivial"] = describe(n, cols[i]);
    e["quotient_size"] = cols[i].class_count();
    arr.push_back(e);
    t << "  " << describe(n, cols[i]) << "  (" << cols[i].class_count() << " cells)\n";
    c << i << "," << detail::csv_field(describe(n, cols[i])) << "," << cols[i].class_count() << "\n";
  }
  j["colorings"] = arr;
  r.table = t.str();
  r.csv = c.str();
  return r;
}

inline Report lifts_report(const Network& n, const Network& l) {
  Report r;
  auto& j = r.json = detail::report_header("lifts");
  const auto cls = classify_lift(n, l);
  const auto cols = find_colorings_with_quotient(l, n);
  const auto uc = unique_coloring_check(n, l);
  j["classification"] = cls.to_string();
  if (!cls.reason.empty()) j["reason"] = cls.reason;
  auto carr = nlohmann::ordered_json::array();
  for (const auto& col : cols) carr.push_back(detail::classes_json(l, col));
  j["colorings"] = carr;
  j["unique_coloring"] = {{"applies", uc.applies}, {"count", uc.count}, {"holds", uc.holds()}};

  std::ostringstream t, c;
  t << cls.to_string() << "\n";
  if (!cls.reason.empty()) t << "  " << cls.reason << "\n";
  t << "  colorings: " << cols.size() << "\n";
  c << "step,kind,cells,split_cell,new_cells\n";
  try {
    const auto steps = decompose_lift(n, l);
    auto sarr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < steps.size(); ++i) {
      nlohmann::ordered_json s;
      s["kind"] = steps[i].kind.to_string();
      s["cells"] = steps[i].network.size();
      s["split"] = steps[i].split ? detail::to_ordered(split_to_json(*steps[i].split)) : nlohmann::ordered_json(nullptr);
      sarr.push_back(s);
      t << "  step " << i + 1 << ": " << steps[i].kind.to_string();
      std::string nc;
      if (steps[i].split) {
        for (const auto& x : steps[i].split->new_cells) nc += (nc.empty() ? "" : " ") + x;
        t << ", split " << steps[i].split->cell << " into " << nc;
      }
      t << " (" << steps[i].network.size() << " cells)\n";
      c << i + 1 << "," << steps[i].kind.to_string() << "," << steps[i].network.size() << ","
        << (steps[i].split ? detail::csv_field(steps[i].split->cell) : "") << "," << detail::csv_field(nc) << "\n";
    }
    j["decomposition"] = sarr;
  } catch (const PreconditionError& e) {
    j["decomposition"] = nullptr;
    j["decomposition_error"] = e.what();
    t << "  no decomposition: " << e.what() << "\n";
  }
  r.table = t.str();
  r.csv = c.str();
  return r;
}

inline std::string signature_line(const Network& n, const BranchSignature& sig) {
  std::ostringstream os;
  os << "delta=" << std::showpos << sig.delta << std::noshowpos << " ";
  for (CellIndex c = 0; c < n.size(); ++c) {
    os << " " << n.name(c) << ":" << sig.orders[c];
    if (sig.orders[c] >= 0) os << "(" << detail::fmt_double(sig.slopes[c]) << ")";
  }
  return os.str();
}

inline Report branches_report(const Network& n, const JetCoefficients& jet) {
  Report r;
  auto& j = r.json = detail::report_header("branches");
  j["type"] = to_string(jet.type);
  std::ostringstream t, c;
  if (jet.type == BifurcationType::Internal) {
    const auto sigs = enumerate_branches_internal(n, jet);
    j["count"] = sigs.size();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : sigs) arr.push_back(signature_to_json(n, s));
    j["signatures"] = arr;
    t << sigs.size() << (sigs.size() == 1 ? " signature" : " signatures") << "\n";
    c << "signature,delta";
    for (CellIndex x = 0; x < n.size(); ++x)
      c << "," << detail::csv_field(n.name(x) + ".order") << "," << detail::csv_field(n.name(x) + ".slope");
    c << "\n";
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      t << "  " << signature_line(n, sigs[i]) << "\n";
      c << i << "," << sigs[i].delta;
      for (CellIndex x = 0; x < n.size(); ++x) c << "," << sigs[i].orders[x] << "," << detail::fmt_double(sigs[i].slopes[x]);
      c << "\n";
    }
  } else {
    const auto pats = enumerate_branches_valency(n, jet);
    j["count"] = pats.size();
    auto arr = nlohmann::ordered_json::array();
    t << pats.size() << (pats.size() == 1 ? " branch pattern" : " branch patterns") << "\n";
    c << "pattern,support,slope\n";
    for (std::size_t i = 0; i < pats.size(); ++i) {
      arr.push_back({{"support", detail::ids(n, pats[i].support)}, {"slope", pats[i].slope}});
      std::string sup;
      for (CellIndex x : pats[i].support) sup += (sup.empty() ? "" : " ") + n.name(x);
      t << "  {" << sup << "} slope " << detail::fmt_double(pats[i].slope) << "\n";
      c << i << "," << detail::csv_field(sup) << "," << detail::fmt_double(pats[i].slope) << "\n";
    }
    j["patterns"] = arr;
  }
  r.table = t.str();
  r.csv = c.str();
  return r;
}

inline nlohmann::ordered_json verdict_json(const Network& l, const LiftingVerdict& v) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(v.verdict);
  j["rule"] = v.rule;
  if (v.witness) j["witness"] = signature_to_json(l, *v.witness);
  if (v.valency_witness)
    j["witness"] = {{"support", detail::ids(l, v.valency_witness->support)}, {"slope", v.valency_witness->slope}};
  if (v.coloring_used) j["coloring"] = detail::classes_json(l, *v.coloring_used);
  if (!v.rules.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rs : v.rules)
      arr.push_back({{"rule", rs.tag}, {"status", to_string(rs.status)},
                     {"conclusion", rs.status == RuleStatus::Status::Applied ? to_string(rs.conclusion) : "none"},
                     {"detail", rs.detail}});
    j["rules"] = arr;
  }
  return j;
}

inline std::string lifting_summary(const CrossCheckReport& cc) {
  return to_string(cc.exhaustive.verdict) + " (exhaustive); theorems: " + to_string(cc.theorem.verdict) +
         (cc.theorem.verdict == Verdict::Undetermined ? "" : " via " + cc.theorem.rule);
}

inline Report lifting_report(const Network& n, const Network& l, const JetCoefficients& jet) {
  Report r;
  auto& j = r.json = detail::report_header("lifting");
  const auto cc = cross_check(n, l, jet);
  j["type"] = to_string(jet.type);
  j["classification"] = classify_lift(n, l).to_string();
  j["exhaustive"] = verdict_json(l, cc.exhaustive);
  j["theorems"] = verdict_json(l, cc.theorem);
  j["consistent"] = cc.consistent;
  j["summary"] = lifting_summary(cc);
  r.mismatch = !cc.consistent;

  std::ostringstream t, c;
  t << lifting_summary(cc) << "\n";
  if (cc.exhaustive.witness) t << "  witness: " << signature_line(l, *cc.exhaustive.witness) << "\n";
  if (cc.exhaustive.valency_witness) {
    std::string sup;
    for (CellIndex x : cc.exhaustive.valency_witness->support) sup += (sup.empty() ? "" : " ") + l.name(x);
    t << "  witness: first-layer support {" << sup << "}\n";
  }
  c << "rule,status,conclusion,detail\n";
  for (const auto& rs : cc.theorem.rules) {
    t << "  " << std::left << std::setw(46) << rs.tag << std::setw(15) << to_string(rs.status) << rs.detail << "\n";
    c << rs.tag << "," << to_string(rs.status) << ","
      << (rs.status == RuleStatus::Status::Applied ? to_string(rs.conclusion) : "none") << ","
      << detail::csv_field(rs.detail) << "\n";
  }
  if (!cc.consistent) t << "  INCONSISTENT: theorem verdict contradicts the exhaustive decision\n";
  r.table = t.str();
  r.csv = c.str();
  return r;
}

inline Report verify_report(const Network& n, const JetCoefficients& jet, const TraceOptions& topt = {},
                            const EstimatorOptions& eopt = {}) {
  Report r;
  auto& j = r.json = detail::report_header("verify");
  const auto v = verify_numeric(n, jet, topt, eopt);
  j["type"] = to_string(jet.type);
  j["numeric_branches"] = v.branches.size();
  j["symbolic"] = jet.type == BifurcationType::Internal ? v.signatures.size() : v.patterns.size();
  j["perfect"] = v.match.perfect();
  auto un = nlohmann::ordered_json::array();
  for (const auto& [side, idx] : v.match.unmatched_signatures) un.push_back({{"side", side}, {"index", idx}});
  j["unmatched_symbolic"] = un;
  j["branches"] = estimates_to_json(n, v.branches, v.match);
  j["log"] = v.log;
  r.mismatch = !v.match.perfect();

  std::ostringstream t;
  std::size_t matched = 0;
  for (const auto& b : v.match.branches) matched += b.signature.has_value();
  t << (v.match.perfect() ? "match" : "MISMATCH") << ": " << matched << " of " << v.branches.size()
    << " numeric branches matched, " << v.match.unmatched_signatures.size() << " symbolic items unmatched\n";
  for (const auto& b : v.match.branches)
    if (!b.signature)
      t << "  side " << (b.side > 0 ? "+" : "-") << " branch " << label_text(v.branches[b.branch].label) << ": " << b.note
        << "\n";
  for (const auto& [side, idx] : v.match.unmatched_signatures) {
    t << "  side " << (side > 0 ? "+" : "-") << " unmatched: ";
    if (jet.type == BifurcationType::Internal) t << signature_line(n, v.signatures[idx]) << "\n";
    else t << "pattern " << idx << "\n";
  }
  r.table = t.str();
  r.csv = continuation_csv(n, v.branches);
  return r;
}

}  // namespace ffn
