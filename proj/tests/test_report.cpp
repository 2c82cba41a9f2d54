#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace ffn;
using namespace ffn::testing;

namespace {

void expect_keys(const nlohmann::ordered_json& j, std::initializer_list<const char*> keys) {
  EXPECT_EQ(j.at("schema"), kReportSchema);
  for (const char* k : keys) EXPECT_TRUE(j.contains(k)) << "missing key " << k << " in " << j.at("command");
}

}  // namespace

TEST(Report, AnalyzeSchema) {
  const auto r = analyze_report(corpus("fig2"));
  expect_keys(r.json, {"command", "cells", "edge_types", "feed_forward", "layers", "depth", "backward_connected",
                       "witness", "connected", "adjacency_row_sums_ok", "summary"});
  EXPECT_EQ(r.json["summary"], "5 layers; backward connected (cell 10)");
  EXPECT_EQ(r.json["witness"], "10");
  EXPECT_EQ(r.table.substr(0, r.table.find('\n')), "5 layers; backward connected (cell 10)");
}

TEST(Report, AnalyzeReportsNonFeedForward) {
  Network cyc({"a", "b"}, {{1, 0}});
  const auto r = analyze_report(cyc);
  EXPECT_FALSE(r.json["feed_forward"].get<bool>());
  EXPECT_NE(r.table.find("not a feed-forward network"), std::string::npos) << r.table;
}

TEST(Report, QuotientsSchema) {
  const auto r = quotients_report(corpus("fig5_right"), corpus("fig5_left"));
  expect_keys(r.json, {"count", "quotient_cells", "colorings"});
  EXPECT_EQ(r.json["count"], 3);
  for (const auto& c : r.json["colorings"]) {
    EXPECT_TRUE(c.contains("classes"));
    EXPECT_EQ(c["quotient_size"], 5);
  }
  EXPECT_EQ(r.table.substr(0, r.table.find('\n')), "3 colorings with the given quotient");
}

TEST(Report, LiftsSchema) {
  const auto r = lifts_report(corpus("fig3"), corpus("fig1"));
  expect_keys(r.json, {"classification", "colorings", "unique_coloring", "decomposition"});
  EXPECT_EQ(r.json["classification"], "InsideLayer(1)");
  ASSERT_EQ(r.json["decomposition"].size(), 1u);
  const auto& step = r.json["decomposition"][0];
  EXPECT_EQ(step["kind"], "InsideLayer(1)");
  const auto split = split_from_json(nlohmann::json::parse(step["split"].dump()));
  EXPECT_TRUE(networks_equal(split_cell(corpus("fig3"), split), corpus("fig1")));
}

TEST(Report, LiftsOfUndecomposablePair) {
  const auto r = lifts_report(corpus("fig4_left"), corpus("fig4_right"));
  EXPECT_EQ(r.json["classification"].get<std::string>().rfind("NotRecognized", 0), 0u);
  EXPECT_TRUE(r.json["decomposition"].is_null() || r.json["decomposition"].empty());
}

TEST(Report, BranchesSchemaAndCsv) {
  const auto r = branches_report(corpus("chain3"), internal_jet({1.0}));
  expect_keys(r.json, {"type", "count", "signatures"});
  EXPECT_EQ(r.json["count"], 4);
  for (const auto& s : r.json["signatures"])
    for (const char* k : {"delta", "orders", "slopes", "slope_templates"}) EXPECT_TRUE(s.contains(k));
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "signature,delta,a.order,a.slope,b.order,b.slope,c.order,c.slope");
  EXPECT_EQ(std::count(r.csv.begin(), r.csv.end(), '\n'), 5);
}

TEST(Report, LiftingSummaryMatchesExample) {
  const auto r = lifting_report(corpus("fig3"), corpus("fig1"), internal_jet({1.0, 1.0}));
  expect_keys(r.json, {"type", "classification", "exhaustive", "theorems", "consistent", "summary"});
  EXPECT_EQ(r.json["summary"], "AllLifted (exhaustive); theorems: Undetermined");
  EXPECT_FALSE(r.mismatch);
  EXPECT_EQ(r.json["theorems"]["rules"].size(), 7u);
}

TEST(Report, LiftingNamesDecidingRule) {
  const auto r = lifting_report(corpus("single"), corpus("chain3"), internal_jet({1.0}));
  EXPECT_EQ(r.json["summary"], "ExistsNotLifted (exhaustive); theorems: ExistsNotLifted via prop-lbpintdynfirstnew");
}

TEST(Report, VerifySchema) {
  const auto r = verify_report(corpus("chain3"), internal_jet({1.0}));
  expect_keys(r.json, {"type", "numeric_branches", "symbolic", "perfect", "unmatched_symbolic", "branches", "log"});
  EXPECT_TRUE(r.json["perfect"].get<bool>());
  EXPECT_FALSE(r.mismatch);
  for (const auto& b : r.json["branches"])
    for (const char* k : {"branch_id", "side", "label", "samples", "cells", "matched"}) EXPECT_TRUE(b.contains(k));
  EXPECT_EQ(r.csv.find("-0,"), std::string::npos);
}

TEST(Report, VerifyFlagsMismatch) {
  const auto r = verify_report(corpus("fig2"), internal_jet({1.0, 0.7, 0.4}));
  EXPECT_TRUE(r.mismatch);
  EXPECT_FALSE(r.json["perfect"].get<bool>());
}

TEST(Report, OutputIsDeterministic) {
  const auto a = lifting_report(corpus("fig6_quotient"), corpus("fig6"), internal_jet({1.0, 0.7}));
  const auto b = lifting_report(corpus("fig6_quotient"), corpus("fig6"), internal_jet({1.0, 0.7}));
  EXPECT_EQ(a.json.dump(), b.json.dump());
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(a.csv, b.csv);
  const auto v1 = verify_report(corpus("fig3"), internal_jet({1.0, 0.7}));
  const auto v2 = verify_report(corpus("fig3"), internal_jet({1.0, 0.7}));
  EXPECT_EQ(v1.json.dump(), v2.json.dump());
}
