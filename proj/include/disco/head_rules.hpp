#ifndef DISCO_HEAD_RULES_HPP
#define DISCO_HEAD_RULES_HPP

// Head-rule files, one rule per line:
//
//   NONTERM left|right CAT1 CAT2 ...
//
// Several lines for the same NONTERM form priority groups in file order.
// `#` starts a comment. The pseudo rule `* left|right` sets the direction
// used for non-terminals without rules.

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "disco/error.hpp"
#include "disco/trees.hpp"

namespace disco {

enum class Direction { left, right };

struct HeadRule {
  Direction direction = Direction::left;
  std::vector<std::string> categories;
};

struct HeadRuleSet {
  std::map<std::string, std::vector<HeadRule>> rules;
  Direction default_direction = Direction::left;

  // Priority groups for `label`; unknown labels get one empty group in the
  // default direction.
  std::vector<HeadRule> lookup(const std::string& label) const {
    auto it = rules.find(label);
    if (it == rules.end() || it->second.empty()) return {HeadRule{default_direction, {}}};
    return it->second;
  }
};

inline Direction parse_direction(const std::string& word) {
  if (word == "left") return Direction::left;
  if (word == "right") return Direction::right;
  throw FormatError("expected 'left' or 'right', got '" + word + "'");
}

inline HeadRuleSet parse_head_rules(std::istream& in) {
  HeadRuleSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string nonterm, dir;
    if (!(fields >> nonterm)) continue;
    if (!(fields >> dir)) {
      throw FormatError("head rules line " + std::to_string(lineno) + ": missing direction");
    }
    Direction direction;
    try {
      direction = parse_direction(dir);
    } catch (const FormatError& e) {
      throw FormatError("head rules line " + std::to_string(lineno) + ": " + e.what());
    }
    if (nonterm == "*") {
      set.default_direction = direction;
      continue;
    }
    HeadRule rule{direction, {}};
    for (std::string cat; fields >> cat;) rule.categories.push_back(cat);
    set.rules[nonterm].push_back(std::move(rule));
  }
  return set;
}

inline HeadRuleSet parse_head_rules(const std::string& text) {
  std::istringstream in(text);
  return parse_head_rules(in);
}

inline HeadRuleSet load_head_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open head rules '" + path + "'");
  return parse_head_rules(in);
}

namespace detail {

inline const std::string& child_category(const ConstituentTree& tree, const Node& child) {
  if (child.is_terminal()) return tree.tokens[static_cast<std::size_t>(child.terminal)].pos;
  return child.label;
}

inline std::size_t select_head_child(const ConstituentTree& tree, const Node& node, const HeadRuleSet& rules) {
  const std::size_t n = node.children.size();
  auto position = [n](Direction d, std::size_t k) { return d == Direction::left ? k : n - 1 - k; };
  const std::vector<HeadRule> groups = rules.lookup(node.label);
  for (const HeadRule& group : groups) {
    for (const std::string& cat : group.categories) {
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t c = position(group.direction, k);
        if (child_category(tree, node.children[c]) == cat) return c;
      }
    }
  }
  return position(groups.front().direction, 0);
}

inline void assign(const ConstituentTree& tree, Node& node, const HeadRuleSet& rules) {
  if (node.is_terminal()) return;
  for (Node& c : node.children) assign(tree, c, rules);
  node.head = head_of(node.children[select_head_child(tree, node, rules)]);
}

}  // namespace detail

// Sets `head` on every constituent. Children are scanned per priority group
// in the group's direction, category by category; without any match the
// first child in the first group's direction wins.
inline ConstituentTree assign_heads(const ConstituentTree& tree, const HeadRuleSet& rules) {
  ConstituentTree out = tree;
  detail::assign(out, out.root, rules);
  return out;
}

struct Spine {
  int word = 0;
  std::vector<std::string> levels;  // levels[0] is the lowest constituent

  friend bool operator==(const Spine&, const Spine&) = default;
};

namespace detail {

// Index of the unique child carrying the node's head; throws otherwise.
inline std::size_t head_child_index(const Node& node) {
  if (!node.head) throw StructureError("constituent '" + node.label + "' has no head");
  std::size_t found = node.children.size();
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    if (head_of(node.children[c]) == node.head) {
      if (found != node.children.size()) {
        throw StructureError("constituent '" + node.label + "': head " + std::to_string(*node.head) +
                             " carried by more than one child");
      }
      found = c;
    }
  }
  if (found == node.children.size()) {
    throw StructureError("constituent '" + node.label + "': head " + std::to_string(*node.head) +
                         " is not the head of any child");
  }
  return found;
}

}  // namespace detail

// One spine per word: the labels of the constituents it heads, bottom-up.
inline std::vector<Spine> extract_spines(const ConstituentTree& tree) {
  std::vector<Spine> spines(tree.tokens.size());
  for (std::size_t i = 0; i < spines.size(); ++i) spines[i].word = static_cast<int>(i);
  std::function<void(const Node&)> walk = [&](const Node& node) {
    if (node.is_terminal()) return;
    detail::head_child_index(node);
    for (const Node& c : node.children) walk(c);
    spines[static_cast<std::size_t>(*node.head)].levels.push_back(node.label);
  };
  walk(tree.root);
  return spines;
}

}  // namespace disco

#endif  // DISCO_HEAD_RULES_HPP
