#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "disco/generator.hpp"
#include "disco/head_rules.hpp"
#include "disco/trees.hpp"

namespace disco {
namespace {

const char* kGapTree = "(VROOT (S (NP 0=Es/PPER (NP 2=nichts/PIAT 3=Interessantes/NN)) 1=kam/VVFIN) 4=./$.)";

const Node& child(const Node& n, std::size_t i) { return n.children.at(i); }

HeadRuleSet gap_rules() {
  return parse_head_rules(
      "VROOT left S\n"
      "S left VVFIN\n"
      "NP right NN\n"
      "NP right NP\n");
}

TEST(Discbracket, ParsesGapExampleTree) {
  ConstituentTree t = parse_discbracket("(VROOT (S (NP 0=Es (NP 2=nichts 3=Interessantes)) 1=kam) 4=.)");
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t.tokens[1].form, "kam");
  EXPECT_EQ(t.tokens[1].pos, kNoPos);
  EXPECT_EQ(t.root.label, "VROOT");
  const Node& s = child(t.root, 0);
  const Node& np = child(s, 0);
  EXPECT_EQ(np.label, "NP");
  EXPECT_EQ(yield(np), (std::vector<int>{0, 2, 3}));
  EXPECT_TRUE(is_discontinuous(np));
  EXPECT_EQ(yield(child(np, 1)), (std::vector<int>{2, 3}));
  EXPECT_FALSE(is_discontinuous(child(np, 1)));
  validate(t);
}

TEST(Discbracket, SingleTerminal) {
  ConstituentTree t = parse_discbracket("(S 0=a)");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(yield(t.root), std::vector<int>{0});
  EXPECT_EQ(emit_discbracket(t), "(S 0=a)");
}

TEST(Discbracket, GappedYields) {
  ConstituentTree t = parse_discbracket("(S (A 0=x 2=z) (B 1=y))");
  EXPECT_EQ(yield(child(t.root, 0)), (std::vector<int>{0, 2}));
  EXPECT_EQ(yield(child(t.root, 1)), std::vector<int>{1});
  EXPECT_TRUE(is_discontinuous(child(t.root, 0)));
}

TEST(Discbracket, ChildrenAreCanonicallyOrdered) {
  ConstituentTree a = parse_discbracket("(S (B 1=y) (A 2=z 0=x))");
  ConstituentTree b = parse_discbracket("(S (A 0=x 2=z) (B 1=y))");
  EXPECT_EQ(a, b);
  EXPECT_EQ(emit_discbracket(a), "(S (A 0=x 2=z) (B 1=y))");
}

TEST(Discbracket, PosAndEscaping) {
  ConstituentTree t = parse_discbracket("(S 0=-LRB-/$-LRB- 1=und/oder/KON 2=/ 3=a/b/_)");
  EXPECT_EQ(t.tokens[0].form, "(");
  EXPECT_EQ(t.tokens[0].pos, "$(");
  EXPECT_EQ(t.tokens[1].form, "und/oder");
  EXPECT_EQ(t.tokens[1].pos, "KON");
  EXPECT_EQ(t.tokens[2].form, "/");
  EXPECT_EQ(t.tokens[3].form, "a/b");
  EXPECT_EQ(parse_discbracket(emit_discbracket(t)), t);
}

TEST(Discbracket, Errors) {
  EXPECT_THROW(parse_discbracket("(S 0=a"), FormatError);
  EXPECT_THROW(parse_discbracket("(S 0=a))"), FormatError);
  EXPECT_THROW(parse_discbracket("(S 0=a 0=b)"), FormatError);
  EXPECT_THROW(parse_discbracket("(S 0=a 2=b)"), FormatError);
  EXPECT_THROW(parse_discbracket("(S (NP) 0=a)"), FormatError);
  EXPECT_THROW(parse_discbracket("(S x)"), FormatError);
  EXPECT_THROW(parse_discbracket(""), FormatError);
  try {
    parse_discbracket("(S 0=a (NP ) 1=b)");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("position 7"), std::string::npos) << e.what();
  }
}

TEST(Treebank, ReadsLinesAndReportsLineNumbers) {
  std::istringstream in(std::string(kGapTree) + "\n\n(S 0=a 1=b)\n");
  auto trees = read_treebank(in);
  ASSERT_EQ(trees.size(), 2u);
  std::istringstream bad("(S 0=a)\n(S 0=a\n");
  try {
    read_treebank(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Discontinuity, MatchesSpanFormula) {
  Node n;
  n.label = "X";
  for (int i : {2, 3}) n.children.push_back(Node::leaf(i));
  EXPECT_FALSE(is_discontinuous(n));
  n.children = {Node::leaf(5)};
  EXPECT_FALSE(is_discontinuous(n));
}

TEST(StripUnaries, DeletesParentKeepsChild) {
  EXPECT_EQ(strip_unaries(parse_discbracket("(S (NP 0=a) 1=b)")), parse_discbracket("(S 0=a 1=b)"));
  EXPECT_EQ(strip_unaries(parse_discbracket("(A (B (C 0=x 1=y)))")), parse_discbracket("(C 0=x 1=y)"));
  ConstituentTree fixed = parse_discbracket(kGapTree);
  EXPECT_EQ(strip_unaries(fixed), fixed);
  EXPECT_EQ(count_unaries(parse_discbracket("(A (B (C 0=x 1=y)))")), 2u);
}

TEST(StripUnaries, SingleWordBecomesBareTerminal) {
  ConstituentTree t = strip_unaries(parse_discbracket("(S 0=a/NN)"));
  EXPECT_TRUE(t.root.is_terminal());
  EXPECT_EQ(emit_discbracket(t), "0=a/NN");
  EXPECT_EQ(parse_discbracket(emit_discbracket(t)), t);
}

TEST(HeadRules, FileFormat) {
  HeadRuleSet rules = parse_head_rules(
      "# comment\n"
      "* right\n"
      "NP right NN NE  # trailing comment\n"
      "NP left ART\n"
      "\n");
  ASSERT_EQ(rules.rules.at("NP").size(), 2u);
  EXPECT_EQ(rules.rules.at("NP")[0].categories, (std::vector<std::string>{"NN", "NE"}));
  EXPECT_EQ(rules.rules.at("NP")[1].direction, Direction::left);
  EXPECT_EQ(rules.default_direction, Direction::right);
  EXPECT_EQ(rules.lookup("VP").front().direction, Direction::right);
  EXPECT_TRUE(rules.lookup("VP").front().categories.empty());
  EXPECT_THROW(parse_head_rules("NP sideways NN\n"), FormatError);
  EXPECT_THROW(parse_head_rules("NP\n"), FormatError);
}

TEST(HeadRules, GapExampleHeads) {
  ConstituentTree t = assign_heads(parse_discbracket(kGapTree), gap_rules());
  EXPECT_EQ(t.root.head, 1);               // VROOT -> kam
  EXPECT_EQ(child(t.root, 0).head, 1);     // S -> kam
  const Node& np = child(child(t.root, 0), 0);
  EXPECT_EQ(np.head, 3);                   // NP -> Interessantes
  EXPECT_EQ(child(np, 1).head, 3);
}

TEST(HeadRules, BundledSampleSelectsGapExampleHeads) {
  HeadRuleSet rules = load_head_rules(std::string(DISCO_DATA_DIR) + "/negra_sample.headrules");
  EXPECT_EQ(assign_heads(parse_discbracket(kGapTree), rules), assign_heads(parse_discbracket(kGapTree), gap_rules()));
}

TEST(HeadRules, FallbackDirection) {
  ConstituentTree t = parse_discbracket("(S 0=a 1=b)");
  HeadRuleSet left;
  EXPECT_EQ(assign_heads(t, left).root.head, 0);
  HeadRuleSet right;
  right.default_direction = Direction::right;
  EXPECT_EQ(assign_heads(t, right).root.head, 1);
  // A rule whose categories never match falls back to its own direction.
  EXPECT_EQ(assign_heads(t, parse_head_rules("S right XX\n")).root.head, 1);
}

TEST(Spines, GapExample) {
  auto spines = extract_spines(assign_heads(parse_discbracket(kGapTree), gap_rules()));
  ASSERT_EQ(spines.size(), 5u);
  EXPECT_TRUE(spines[0].levels.empty());
  EXPECT_EQ(spines[1].levels, (std::vector<std::string>{"S", "VROOT"}));
  EXPECT_TRUE(spines[2].levels.empty());
  EXPECT_EQ(spines[3].levels, (std::vector<std::string>{"NP", "NP"}));
  EXPECT_TRUE(spines[4].levels.empty());
}

TEST(Spines, SingleTerminalAndGappedExample) {
  auto one = extract_spines(strip_unaries(parse_discbracket("(S 0=a)")));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].levels.empty());

  // x heads A and S, y heads B.
  auto spines = extract_spines(assign_heads(parse_discbracket("(S (A 0=x 2=z) (B 1=y))"), HeadRuleSet{}));
  EXPECT_EQ(spines[0].levels, (std::vector<std::string>{"A", "S"}));
  EXPECT_EQ(spines[1].levels, std::vector<std::string>{"B"});
  EXPECT_TRUE(spines[2].levels.empty());
}

TEST(Spines, InconsistentHeadsAreRejected) {
  ConstituentTree t = assign_heads(parse_discbracket("(S (A 0=x 2=z) (B 1=y 3=w))"), HeadRuleSet{});
  t.root.head = 2;  // z is not the head of any child of S
  EXPECT_THROW(extract_spines(t), StructureError);
  t.root.head.reset();
  EXPECT_THROW(extract_spines(t), StructureError);
}

TEST(Generator, Basics) {
  ConstituentTree one = generate_random_tree(1, 0.5, 7);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_TRUE(one.root.is_terminal());
  EXPECT_THROW(generate_random_tree(0, 0.3, 1), std::invalid_argument);

  ConstituentTree cont = generate_random_tree(8, 0.0, 1);
  for_each_constituent(cont.root, [](const Node& n) { EXPECT_FALSE(is_discontinuous(n)); });
}

TEST(Generator, GoldenTree) {
  // Recorded once from the generator; guards seed portability.
  EXPECT_EQ(emit_discbracket(generate_random_tree(8, 0.3, 1)),
            "(VROOT (S 0=Peter/NE 1=Frau/NN) (CNP (PP 2=viele/PIAT 6=das/ART) 3=Jahr/NN "
            "(PP 4=in/APPR 5=gefunden/VVPP 7=./$.)))");
}

TEST(Generator, DiscontinuityRateIsMonotone) {
  auto rate = [](double r) {
    std::size_t disc = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      ConstituentTree t = generate_random_tree(12, r, seed);
      for_each_constituent(t.root, [&](const Node& n) {
        ++total;
        disc += is_discontinuous(n);
      });
    }
    return static_cast<double>(disc) / static_cast<double>(total);
  };
  double low = rate(0.0), mid = rate(0.3), high = rate(0.6);
  EXPECT_EQ(low, 0.0);
  EXPECT_GT(mid, 0.1);
  EXPECT_GT(high, mid);
}

// Property sweep over generated trees.
TEST(TreeProperties, RandomCorpus) {
  HeadRuleSet rules = load_head_rules(std::string(DISCO_DATA_DIR) + "/negra_sample.headrules");
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int n = 1 + static_cast<int>(seed % 20);
    ConstituentTree t = generate_random_tree(n, 0.3, seed);
    ASSERT_NO_THROW(validate(t));
    EXPECT_EQ(count_unaries(t), 0u);
    const std::string text = emit_discbracket(t);
    ASSERT_EQ(parse_discbracket(text), t) << text;
    EXPECT_EQ(emit_discbracket(parse_discbracket(text)), text);
    EXPECT_EQ(strip_unaries(strip_unaries(t)), strip_unaries(t));

    for_each_constituent(t.root, [](const Node& node) {
      std::vector<int> y = yield(node);
      EXPECT_EQ(is_discontinuous(node), y.back() - y.front() + 1 != static_cast<int>(y.size()));
    });

    ConstituentTree headed = assign_heads(t, rules);
    std::map<std::string, int> spine_labels, node_labels;
    for (const Spine& s : extract_spines(headed)) {
      for (const auto& l : s.levels) ++spine_labels[l];
    }
    for_each_constituent(headed.root, [&](const Node& node) { ++node_labels[node.label]; });
    EXPECT_EQ(spine_labels, node_labels);
  }
}

}  // namespace
}  // namespace disco
