#include <gtest/gtest.h>

#include <sstream>

#include "disco/dependency.hpp"
#include "disco/encoding.hpp"
#include "disco/generator.hpp"
#include "disco/head_rules.hpp"
#include "disco/random.hpp"

namespace disco {
namespace {

const char* kGapTree = "(VROOT (S (NP 0=Es/PPER (NP 2=nichts/PIAT 3=Interessantes/NN)) 1=kam/VVFIN) 4=./$.)";

HeadRuleSet sample_rules() { return load_head_rules(std::string(DISCO_DATA_DIR) + "/negra_sample.headrules"); }

ConstituentTree gap_tree() { return assign_heads(parse_discbracket(kGapTree), sample_rules()); }

AugmentedLabel L(const char* text) { return parse_label(text); }

TEST(Labels, ParseAndPrint) {
  EXPECT_EQ(L("NP#2"), (AugmentedLabel{"NP", 2}));
  EXPECT_EQ(L("root"), AugmentedLabel::root());
  EXPECT_EQ(L("A#B#3").nonterminal, "A#B");
  EXPECT_EQ((AugmentedLabel{"VROOT", 2}).str(), "VROOT#2");
  EXPECT_EQ(AugmentedLabel::root().str(), "root");
  for (const char* bad : {"NP", "NP#0", "NP#", "#1", "NP#x", "NP#-1"}) {
    EXPECT_THROW(parse_label(bad), FormatError) << bad;
  }
}

TEST(Encode, GapExampleArcs) {
  AugmentedDependencyTree dep = encode(gap_tree());
  // Words: Es=1 kam=2 nichts=3 Interessantes=4 .=5
  EXPECT_EQ(dep.heads, (std::vector<int>{4, 0, 4, 2, 2}));
  EXPECT_EQ(dep.labels, (std::vector<AugmentedLabel>{L("NP#2"), L("root"), L("NP#1"), L("S#1"), L("VROOT#2")}));
  EXPECT_FALSE(is_projective(dep));
}

TEST(Encode, SingleTerminal) {
  AugmentedDependencyTree dep = encode(strip_unaries(parse_discbracket("(S 0=a)")));
  EXPECT_EQ(dep.heads, std::vector<int>{0});
  EXPECT_EQ(dep.labels, std::vector<AugmentedLabel>{AugmentedLabel::root()});
}

TEST(Encode, GappedExample) {
  // Leftmost-child fallback: A and S headed by x, B by y.
  ConstituentTree t = assign_heads(parse_discbracket("(S (A 0=x 2=z) (B 1=y))"), HeadRuleSet{});
  AugmentedDependencyTree dep = encode(t);
  EXPECT_EQ(dep.heads, (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(dep.labels, (std::vector<AugmentedLabel>{AugmentedLabel::root(), L("S#2"), L("A#1")}));
}

TEST(Encode, UnheadedTreeIsRejected) {
  EXPECT_THROW(encode(parse_discbracket("(S 0=a 1=b)")), StructureError);
}

TEST(Decode, GapExample) {
  ConstituentTree t = gap_tree();
  EXPECT_EQ(decode(encode(t)), t);
  EXPECT_EQ(emit_discbracket(decode(encode(t))), kGapTree);
}

TEST(Decode, SingleRootArc) {
  AugmentedDependencyTree dep{{Token{0, "a", "NN"}}, {0}, {AugmentedLabel::root()}};
  ConstituentTree t = decode(dep);
  EXPECT_TRUE(t.root.is_terminal());
  EXPECT_EQ(t.size(), 1u);
}

TEST(Decode, StructuralViolations) {
  std::vector<Token> toks{Token{0, "a"}, Token{1, "b"}};
  std::vector<AugmentedLabel> labels{L("X#1"), L("X#1")};
  EXPECT_THROW(decode({toks, {2, 1}, labels}), StructureError);   // cycle, no root
  EXPECT_THROW(decode({toks, {0, 0}, labels}), StructureError);   // two roots
  EXPECT_THROW(decode({toks, {0, 3}, labels}), StructureError);   // out of range
  EXPECT_THROW(decode({toks, {0}, labels}), StructureError);      // length mismatch
}

TEST(Repair, CompressesOrderGaps) {
  std::vector<Token> toks{Token{0, "h"}, Token{1, "a"}, Token{2, "b"}};
  AugmentedDependencyTree dep{toks, {0, 1, 1}, {AugmentedLabel::root(), L("X#1"), L("Y#3")}};
  auto fixed = repair_labels(dep);
  EXPECT_EQ(fixed.labels[1], L("X#1"));
  EXPECT_EQ(fixed.labels[2], L("Y#2"));

  AugmentedDependencyTree single{{Token{0, "h"}, Token{1, "a"}}, {0, 1}, {AugmentedLabel::root(), L("X#2")}};
  EXPECT_EQ(repair_labels(single).labels[1], L("X#1"));
}

TEST(Repair, LeftmostDependentNonterminalWins) {
  std::vector<Token> toks{Token{0, "d1"}, Token{1, "h"}, Token{2, "d2"}};
  AugmentedDependencyTree dep{toks, {2, 0, 2}, {L("X#1"), AugmentedLabel::root(), L("Y#1")}};
  auto fixed = repair_labels(dep);
  EXPECT_EQ(fixed.labels[0], L("X#1"));
  EXPECT_EQ(fixed.labels[2], L("X#1"));
}

TEST(Repair, MisplacedRootLabels) {
  std::vector<Token> toks{Token{0, "a"}, Token{1, "b"}, Token{2, "c"}};
  // root label on a word arc joins the head's top level; X#p on the root arc becomes root.
  AugmentedDependencyTree dep{toks, {0, 1, 1}, {L("Z#4"), L("X#1"), AugmentedLabel::root()}};
  auto fixed = repair_labels(dep);
  EXPECT_EQ(fixed.labels[0], AugmentedLabel::root());
  EXPECT_EQ(fixed.labels[1], L("X#1"));
  EXPECT_EQ(fixed.labels[2], L("X#1"));

  AugmentedDependencyTree lone{{Token{0, "a"}, Token{1, "b"}}, {0, 1}, {AugmentedLabel::root(), AugmentedLabel::root()}};
  EXPECT_EQ(repair_labels(lone).labels[1], (AugmentedLabel{kFallbackNonterminal, 1}));
}

TEST(Repair, IdentityOnEncodedTrees) {
  AugmentedDependencyTree dep = encode(gap_tree());
  EXPECT_EQ(repair_labels(dep), dep);
}

TEST(Projectivity, DiscontinuityWithoutCrossingArcs) {
  // The gap word b is dominated by a, which heads the discontinuous NP.
  ConstituentTree t = assign_heads(parse_discbracket("(S (NP 0=a 2=c) 1=b)"), HeadRuleSet{});
  EXPECT_TRUE(has_discontinuity(t));
  EXPECT_TRUE(is_projective(encode(t)));
}

TEST(DependencyFile, RoundTripAndErrors) {
  AugmentedDependencyTree dep = encode(gap_tree());
  std::ostringstream out;
  write_dependency_file(out, {dep, dep});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "1\tEs\tPPER\t4\tNP#2");
  std::istringstream in(out.str());
  auto back = read_dependency_file(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], dep);

  std::istringstream bad("1\ta\tNN\t0\troot\n3\tb\tNN\t1\tX#1\n");
  EXPECT_THROW(read_dependency_file(bad), FormatError);
  std::istringstream badlabel("1\ta\tNN\t0\troot\n2\tb\tNN\t1\tX\n");
  try {
    read_dependency_file(badlabel);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

// Random heads + random labels; decode must succeed after repair.
TEST(EncodingProperties, RepairMakesAnyLabellingDecodable) {
  Rng rng(11);
  const std::vector<std::string> nts{"NP", "VP", "S"};
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(12));
    AugmentedDependencyTree dep;
    // Random tree: attach each word in a random order to an already attached node.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
    rng.shuffle(order);
    dep.heads.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 1; k < order.size(); ++k) {
      dep.heads[static_cast<std::size_t>(order[k] - 1)] = order[rng.index(k)];
    }
    for (int i = 0; i < n; ++i) {
      dep.tokens.push_back(Token{i, "w" + std::to_string(i)});
      if (rng.bernoulli(0.1)) dep.labels.push_back(AugmentedLabel::root());
      else dep.labels.push_back({nts[rng.index(nts.size())], 1 + static_cast<int>(rng.index(5))});
    }
    ConstituentTree t;
    ASSERT_NO_THROW(t = decode(dep));
    ASSERT_NO_THROW(validate(t));
    EXPECT_EQ(count_unaries(t), 0u);
    // Repaired labels are a fixed point and survive the round trip.
    AugmentedDependencyTree fixed = repair_labels(dep);
    EXPECT_EQ(repair_labels(fixed), fixed);
    EXPECT_EQ(encode(t), fixed);
  }
}

TEST(EncodingProperties, RoundTripOverGeneratedTrees) {
  HeadRuleSet rules = sample_rules();
  std::size_t discontinuous = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = 1 + static_cast<int>(seed % 20);
    ConstituentTree t = assign_heads(generate_random_tree(n, 0.3, seed), rules);
    AugmentedDependencyTree dep = encode(t);
    ASSERT_EQ(dep.size(), t.size());
    ASSERT_NO_THROW(check_structure(dep));
    ASSERT_EQ(decode(dep), t) << emit_discbracket(t);

    // Orders used by each head are exactly 1..spine length.
    auto spines = extract_spines(t);
    for (int h = 1; h <= n; ++h) {
      std::set<int> orders;
      for (int i = 0; i < n; ++i) {
        if (dep.heads[static_cast<std::size_t>(i)] == h) orders.insert(dep.labels[static_cast<std::size_t>(i)].order);
      }
      std::set<int> expected;
      for (std::size_t p = 1; p <= spines[static_cast<std::size_t>(h - 1)].levels.size(); ++p) expected.insert(static_cast<int>(p));
      EXPECT_EQ(orders, expected);
    }
    // Crossing arcs only arise from discontinuous constituents.
    if (!is_projective(dep)) {
      EXPECT_TRUE(has_discontinuity(t));
    }
    discontinuous += has_discontinuity(t);
  }
  EXPECT_GT(discontinuous, 100u);
}

}  // namespace
}  // namespace disco
