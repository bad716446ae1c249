#ifndef DISCO_ENCODING_HPP
#define DISCO_ENCODING_HPP

// Reduction between head-annotated unaryless constituent trees and
// augmented non-projective dependency trees.
//
// For a constituent X at level p of the spine of its head word h, every
// non-head child whose head word is d becomes the arc (h, d, X#p). The word
// heading the whole tree attaches to the dummy root with label `root`.
// Decoding regroups each head's outgoing arcs by p and rebuilds the spine
// bottom-up.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "disco/dependency.hpp"
#include "disco/error.hpp"
#include "disco/head_rules.hpp"
#include "disco/trees.hpp"

namespace disco {

// Arcs sharing head word, attachment order and non-terminal.
struct LevelGroup {
  int head_word = 0;  // 1-based
  int order = 0;
  std::string nonterminal;
  std::vector<int> dependents;  // 1-based, ascending
};

namespace detail {

// Returns the spine level of `node` on its head's spine.
inline int encode_node(const Node& node, AugmentedDependencyTree& dep) {
  if (node.is_terminal()) return 0;
  std::size_t head_child = head_child_index(node);
  int level = 0;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    int child_level = encode_node(node.children[c], dep);
    if (c == head_child) level = child_level + 1;
  }
  const int h = *node.head + 1;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    if (c == head_child) continue;
    const int d = *head_of(node.children[c]);
    dep.heads[static_cast<std::size_t>(d)] = h;
    dep.labels[static_cast<std::size_t>(d)] = AugmentedLabel{node.label, level};
  }
  return level;
}

}  // namespace detail

inline AugmentedDependencyTree encode(const ConstituentTree& tree) {
  AugmentedDependencyTree dep;
  dep.tokens = tree.tokens;
  dep.heads.assign(tree.size(), -1);
  dep.labels.assign(tree.size(), AugmentedLabel::root());
  detail::encode_node(tree.root, dep);
  const std::optional<int> top = head_of(tree.root);
  if (!top) throw StructureError("encode: root constituent has no head");
  dep.heads[static_cast<std::size_t>(*top)] = 0;
  dep.labels[static_cast<std::size_t>(*top)] = AugmentedLabel::root();
  for (std::size_t i = 0; i < dep.heads.size(); ++i) {
    if (dep.heads[i] < 0) throw StructureError("encode: word " + std::to_string(i) + " received no arc");
  }
  return dep;
}

// Level groups of every head word, ordered by head then order.
inline std::vector<LevelGroup> level_groups(const AugmentedDependencyTree& dep) {
  std::map<std::pair<int, int>, LevelGroup> groups;
  for (std::size_t i = 0; i < dep.size(); ++i) {
    const AugmentedLabel& l = dep.labels[i];
    if (l.is_root()) continue;
    LevelGroup& g = groups[{dep.heads[i], l.order}];
    g.head_word = dep.heads[i];
    g.order = l.order;
    if (g.dependents.empty()) g.nonterminal = l.nonterminal;
    g.dependents.push_back(static_cast<int>(i) + 1);
  }
  std::vector<LevelGroup> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

inline constexpr const char* kFallbackNonterminal = "VROOT";

// Makes any labelling of a structurally valid tree decodable:
//  - the arc into w0 gets `root`; a `root` label elsewhere joins the head's
//    topmost level (order 1 with label VROOT if the head has no other arcs);
//  - each head's orders are compressed to 1..k keeping their relative order;
//  - within a level, the leftmost dependent's non-terminal wins.
inline AugmentedDependencyTree repair_labels(const AugmentedDependencyTree& dep) {
  check_structure(dep);
  AugmentedDependencyTree out = dep;
  const int n = static_cast<int>(dep.size());
  for (int i = 0; i < n; ++i) {
    if (out.heads[static_cast<std::size_t>(i)] == 0) out.labels[static_cast<std::size_t>(i)] = AugmentedLabel::root();
  }
  for (int h = 1; h <= n; ++h) {
    std::vector<std::size_t> arcs;
    for (int i = 0; i < n; ++i) {
      if (out.heads[static_cast<std::size_t>(i)] == h) arcs.push_back(static_cast<std::size_t>(i));
    }
    if (arcs.empty()) continue;
    int top = 0;
    for (std::size_t a : arcs) top = std::max(top, out.labels[a].order);
    std::string top_label = kFallbackNonterminal;
    for (std::size_t a : arcs) {
      if (out.labels[a].order == top && top > 0) {
        top_label = out.labels[a].nonterminal;
        break;
      }
    }
    for (std::size_t a : arcs) {
      if (out.labels[a].is_root()) out.labels[a] = AugmentedLabel{top_label, std::max(top, 1)};
    }
    std::set<int> orders;
    for (std::size_t a : arcs) orders.insert(out.labels[a].order);
    std::map<int, int> rank;
    for (int o : orders) rank.emplace(o, static_cast<int>(rank.size()) + 1);
    std::map<int, std::string> winner;  // arcs are scanned left to right
    for (std::size_t a : arcs) {
      AugmentedLabel& l = out.labels[a];
      l.order = rank.at(l.order);
      winner.emplace(l.order, l.nonterminal);
      l.nonterminal = winner.at(l.order);
    }
  }
  return out;
}

// Inverse of encode. Labels are repaired first, so any structurally valid
// tree decodes; structural violations throw StructureError.
inline ConstituentTree decode(const AugmentedDependencyTree& input) {
  const AugmentedDependencyTree dep = repair_labels(input);
  const int n = static_cast<int>(dep.size());
  ConstituentTree tree;
  tree.tokens = dep.tokens;
  for (int i = 0; i < n; ++i) tree.tokens[static_cast<std::size_t>(i)].index = i;
  if (n == 0) throw StructureError("decode: empty sentence");

  std::vector<std::vector<LevelGroup>> by_head(static_cast<std::size_t>(n) + 1);
  for (LevelGroup& g : level_groups(dep)) by_head[static_cast<std::size_t>(g.head_word)].push_back(std::move(g));

  std::function<Node(int)> build = [&](int word) {
    Node below = Node::leaf(word - 1);
    for (const LevelGroup& g : by_head[static_cast<std::size_t>(word)]) {
      Node node;
      node.label = g.nonterminal;
      node.head = word - 1;
      node.children.push_back(std::move(below));
      for (int d : g.dependents) node.children.push_back(build(d));
      canonicalize(node);
      below = std::move(node);
    }
    return below;
  };

  int root_word = 0;
  for (int i = 0; i < n; ++i) {
    if (dep.heads[static_cast<std::size_t>(i)] == 0) root_word = i + 1;
  }
  tree.root = build(root_word);
  return tree;
}

}  // namespace disco

#endif  // DISCO_ENCODING_HPP
