#include <gtest/gtest.h>

#include <random>

#include "decomposition_search.hpp"
#include "test_util.hpp"

using namespace ffn;
using namespace ffn::testing;

TEST(Lift, ClassifiesCorpusExamples) {
  EXPECT_EQ(classify_lift(corpus("fig3"), corpus("fig1")).to_string(), "InsideLayer(1)");
  EXPECT_EQ(classify_lift(corpus("fig5_left"), corpus("fig5_right")).to_string(), "InsideLayer(0)");
  EXPECT_EQ(classify_lift(corpus("fig6_quotient"), corpus("fig6")).to_string(), "InsideLayer(2)");
  EXPECT_EQ(classify_lift(corpus("fig2_q23"), corpus("fig2")).to_string(), "InsideLayer(1)");
  EXPECT_EQ(classify_lift(corpus("fig4_left"), corpus("fig4_right")).kind, LiftClassification::Kind::NotRecognized);
  EXPECT_EQ(classify_lift(corpus("single"), chain(1)).to_string(), "CreatesNewLayers(1)");
  EXPECT_EQ(classify_lift(corpus("single"), corpus("chain3")).to_string(), "CreatesNewLayers(2)");
  EXPECT_EQ(classify_lift(corpus("fig3"), corpus("fig3")).to_string(), "Composite[]");
}

TEST(Lift, RejectsNonLifts) {
  EXPECT_THROW(classify_lift(corpus("fig2"), corpus("fig1")), PreconditionError);
  EXPECT_THROW(decompose_lift(corpus("fig2"), corpus("fig1")), PreconditionError);
}

TEST(Lift, CreateNewLayersReplicatesFirstLayer) {
  const auto n = corpus("fig3");
  const auto m = create_new_layers(n, 2);
  const auto fn = require_layers(n), fm = require_layers(m);
  EXPECT_EQ(fm.depth(), fn.depth() + 2);
  EXPECT_FALSE(find_colorings_with_quotient(m, n).empty());
  EXPECT_EQ(classify_lift(n, m).to_string(), "CreatesNewLayers(2)");
}

TEST(Lift, DecomposesFig3ToFig1InOneSplit) {
  const auto n = corpus("fig3"), l = corpus("fig1");
  const auto steps = decompose_lift(n, l);
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].kind.to_string(), "InsideLayer(1)");
  ASSERT_TRUE(steps[0].split);
  const auto again = split_cell(n, split_from_json(split_to_json(*steps[0].split)));
  EXPECT_TRUE(networks_equal(again, l));
}

TEST(Lift, Fig6SplitsCellFiveSix) {
  const auto steps = decompose_lift(corpus("fig6_quotient"), corpus("fig6"));
  ASSERT_EQ(steps.size(), 1u);
  ASSERT_TRUE(steps[0].split);
  EXPECT_EQ(steps[0].split->cell, "5|6");
  EXPECT_TRUE(networks_equal(steps.back().network, corpus("fig6")));
}

TEST(Lift, Fig4HasNoDecomposition) {
  const auto n = corpus("fig4_left"), l = corpus("fig4_right");
  EXPECT_THROW(decompose_lift(n, l), PreconditionError);
  const auto s = search_basic_chain(n, l);
  EXPECT_FALSE(s.found);
}

TEST(Lift, ChainSearchFindsKnownDecompositions) {
  EXPECT_TRUE(search_basic_chain(corpus("fig3"), corpus("fig1")).found);
  EXPECT_TRUE(search_basic_chain(corpus("single"), corpus("chain3")).found);
}

TEST(Lift, SplitValidation) {
  const auto n = corpus("fig6_quotient");
  SplitSpec bad;
  bad.cell = "5|6";
  bad.new_cells = {"5", "6"};
  bad.sigma_images = {{"3", "3"}};  // one entry for two new cells
  EXPECT_THROW(split_cell(n, bad), PreconditionError);
}

TEST(Lift, RestrictColoringNeedsClosedSubset) {
  const auto l = corpus("fig6");
  const auto col = find_colorings_with_quotient(l, corpus("fig6_quotient")).front();
  // the last cell alone is not closed under the input maps
  const auto ffs = require_layers(l);
  EXPECT_THROW(restrict_coloring(l, col, {ffs.layers.back().front()}), PreconditionError);
  std::vector<CellIndex> all(l.size());
  for (CellIndex c = 0; c < l.size(); ++c) all[c] = c;
  EXPECT_EQ(restrict_coloring(l, col, all), col);
}

TEST(Lift, RandomBackwardConnectedLiftsDecompose) {
  std::mt19937 rng(99);
  int tested = 0;
  for (int attempt = 0; attempt < 20000 && tested < 200; ++attempt) {
    auto rl = random_backward_connected_lift(rng, 9, 3, 4);
    if (!rl) continue;
    ++tested;
    const auto steps = decompose_lift(rl->quotient, rl->lift);
    ASSERT_FALSE(steps.empty());
    Network running = rl->quotient;
    for (const auto& st : steps) {
      if (st.split) {
        running = split_cell(running, split_from_json(split_to_json(*st.split)));
        EXPECT_TRUE(networks_equal(running, st.network));
      } else {
        running = st.network;
      }
      EXPECT_TRUE(networks_equal(quotient(rl->lift, st.coloring).network, st.network));
    }
    EXPECT_TRUE(networks_equal(running, rl->lift)) << serialize_network(rl->lift);
    const auto cls = classify_lift(rl->quotient, rl->lift);
    EXPECT_NE(cls.kind, LiftClassification::Kind::NotRecognized);
  }
  EXPECT_EQ(tested, 200);
}
