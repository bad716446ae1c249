#ifndef DISCO_TREES_HPP
#define DISCO_TREES_HPP

// Discontinuous constituent trees and the indexed-bracket ("discbracket")
// text format:
//
//   (VROOT (S (NP 0=Es/PPER (NP 2=nichts/PIAT 3=Interessantes/NN)) 1=kam/VVFIN) 4=./$.)
//
// Terminals are written `index=form/pos`; the `/pos` part is optional.
// Children are kept sorted by the smallest terminal index they dominate,
// which makes the emitted form canonical.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "disco/error.hpp"

namespace disco {

// POS value used when a token carries no tag.
inline constexpr std::string_view kNoPos = "_";

struct Token {
  int index = 0;
  std::string form;
  std::string pos{kNoPos};

  friend bool operator==(const Token&, const Token&) = default;
};

// A constituent (label + children) or, when `terminal >= 0`, a leaf.
struct Node {
  std::string label;
  int terminal = -1;
  std::optional<int> head;  // head terminal, set by assign_heads / decode
  std::vector<Node> children;

  bool is_terminal() const { return terminal >= 0; }

  static Node leaf(int index) {
    Node n;
    n.terminal = index;
    return n;
  }

  friend bool operator==(const Node&, const Node&) = default;
};

struct ConstituentTree {
  std::vector<Token> tokens;
  Node root;

  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const ConstituentTree&, const ConstituentTree&) = default;
};

// Head word of a child: the terminal itself, or the constituent's head.
inline std::optional<int> head_of(const Node& node) {
  if (node.is_terminal()) return node.terminal;
  return node.head;
}

namespace detail {

inline void collect_yield(const Node& node, std::vector<int>& out) {
  if (node.is_terminal()) {
    out.push_back(node.terminal);
    return;
  }
  for (const Node& c : node.children) collect_yield(c, out);
}

inline int min_terminal(const Node& node) {
  if (node.is_terminal()) return node.terminal;
  int best = -1;
  for (const Node& c : node.children) {
    int m = min_terminal(c);
    if (best < 0 || m < best) best = m;
  }
  return best;
}

}  // namespace detail

// Sorted terminal indices dominated by `node`.
inline std::vector<int> yield(const Node& node) {
  std::vector<int> out;
  detail::collect_yield(node, out);
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_contiguous(const std::vector<int>& sorted_yield) {
  if (sorted_yield.empty()) return true;
  return sorted_yield.back() - sorted_yield.front() + 1 == static_cast<int>(sorted_yield.size());
}

inline bool is_discontinuous(const Node& node) { return !is_contiguous(yield(node)); }

// Sorts children by smallest dominated terminal, recursively.
inline void canonicalize(Node& node) {
  for (Node& c : node.children) canonicalize(c);
  std::stable_sort(node.children.begin(), node.children.end(), [](const Node& a, const Node& b) {
    return detail::min_terminal(a) < detail::min_terminal(b);
  });
}

// Pre-order visit of every internal node.
inline void for_each_constituent(const Node& node, const std::function<void(const Node&)>& fn) {
  if (node.is_terminal()) return;
  fn(node);
  for (const Node& c : node.children) for_each_constituent(c, fn);
}

inline std::size_t count_constituents(const ConstituentTree& tree) {
  std::size_t n = 0;
  for_each_constituent(tree.root, [&](const Node&) { ++n; });
  return n;
}

inline bool has_discontinuity(const ConstituentTree& tree) {
  bool found = false;
  for_each_constituent(tree.root, [&](const Node& n) { found = found || is_discontinuous(n); });
  return found;
}

// Checks token numbering, non-empty constituents, and that the children of
// every node partition its yield and the root covers all terminals.
inline void validate(const ConstituentTree& tree) {
  const int n = static_cast<int>(tree.tokens.size());
  for (int i = 0; i < n; ++i) {
    if (tree.tokens[i].index != i) {
      throw StructureError("token " + std::to_string(i) + " carries index " +
                           std::to_string(tree.tokens[i].index));
    }
  }
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::function<void(const Node&)> walk = [&](const Node& node) {
    if (node.is_terminal()) {
      if (node.terminal >= n) {
        throw StructureError("terminal index " + std::to_string(node.terminal) + " out of range");
      }
      if (seen[static_cast<std::size_t>(node.terminal)]++) {
        throw StructureError("terminal " + std::to_string(node.terminal) + " dominated twice");
      }
      return;
    }
    if (node.children.empty()) throw StructureError("constituent '" + node.label + "' has no children");
    for (const Node& c : node.children) walk(c);
  };
  walk(tree.root);
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw StructureError("terminal " + std::to_string(i) + " not covered by the root");
    }
  }
}

// ---------------------------------------------------------------------------
// discbracket I/O

namespace detail {

inline std::string escape_form(std::string_view form) {
  std::string out;
  for (char ch : form) {
    if (ch == '(') out += "-LRB-";
    else if (ch == ')') out += "-RRB-";
    else out += ch;
  }
  return out;
}

inline std::string unescape_form(std::string_view form) {
  std::string out(form);
  for (auto [from, to] : {std::pair<std::string_view, std::string_view>{"-LRB-", "("}, {"-RRB-", ")"}}) {
    std::size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  }
  return out;
}

// Splits `form/pos` at the last slash; a leading slash belongs to the form.
inline std::pair<std::string, std::string> split_form_pos(std::string_view text) {
  std::size_t slash = text.rfind('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == text.size()) {
    return {std::string(text), std::string(kNoPos)};
  }
  return {std::string(text.substr(0, slash)), std::string(text.substr(slash + 1))};
}

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  ConstituentTree read() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty tree");
    Node root = text_[pos_] == '(' ? read_node() : read_terminal(read_atom());
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after tree");

    ConstituentTree tree;
    const int n = static_cast<int>(terminals_.size());
    tree.tokens.resize(terminals_.size());
    std::vector<bool> filled(terminals_.size(), false);
    for (auto& [tok, at] : terminals_) {
      if (tok.index < 0 || tok.index >= n) {
        pos_ = at;
        fail("terminal index " + std::to_string(tok.index) + " outside 0.." + std::to_string(n - 1));
      }
      if (filled[static_cast<std::size_t>(tok.index)]) {
        pos_ = at;
        fail("duplicate terminal index " + std::to_string(tok.index));
      }
      filled[static_cast<std::size_t>(tok.index)] = true;
      tree.tokens[static_cast<std::size_t>(tok.index)] = std::move(tok);
    }
    canonicalize(root);
    tree.root = std::move(root);
    return tree;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("discbracket: " + what + " at position " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view read_atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '(' || ch == ')' || std::isspace(static_cast<unsigned char>(ch))) break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a label or terminal");
    return text_.substr(start, pos_ - start);
  }

  Node read_terminal(std::string_view atom) {
    std::size_t at = pos_ - atom.size();
    std::size_t eq = atom.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      pos_ = at;
      fail("terminal '" + std::string(atom) + "' is not of the form index=form");
    }
    int index = 0;
    for (char ch : atom.substr(0, eq)) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        pos_ = at;
        fail("terminal '" + std::string(atom) + "' has a non-numeric index");
      }
      index = index * 10 + (ch - '0');
      if (index > 1'000'000) {
        pos_ = at;
        fail("terminal index too large");
      }
    }
    std::string_view rest = atom.substr(eq + 1);
    if (rest.empty()) {
      pos_ = at;
      fail("terminal '" + std::string(atom) + "' has an empty form");
    }
    auto [form, pos] = split_form_pos(rest);
    Token tok{index, unescape_form(form), unescape_form(pos)};
    terminals_.emplace_back(std::move(tok), at);
    return Node::leaf(index);
  }

  Node read_node() {
    std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] == '(' || text_[pos_] == ')') fail("missing constituent label");
    Node node;
    node.label = std::string(read_atom());
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        pos_ = open;
        fail("unbalanced bracket opened");
      }
      char ch = text_[pos_];
      if (ch == ')') {
        ++pos_;
        break;
      }
      if (ch == '(') node.children.push_back(read_node());
      else node.children.push_back(read_terminal(read_atom()));
    }
    if (node.children.empty()) {
      pos_ = open;
      fail("empty constituent '" + node.label + "'");
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::pair<Token, std::size_t>> terminals_;
};

inline void emit_node(const ConstituentTree& tree, const Node& node, std::string& out) {
  if (node.is_terminal()) {
    const Token& tok = tree.tokens[static_cast<std::size_t>(node.terminal)];
    out += std::to_string(node.terminal);
    out += '=';
    out += escape_form(tok.form);
    // The slash can only be dropped when re-parsing would not split the form.
    bool ambiguous = split_form_pos(tok.form).second != kNoPos;
    if (tok.pos != kNoPos || ambiguous) {
      out += '/';
      out += escape_form(tok.pos);
    }
    return;
  }
  std::vector<const Node*> kids;
  for (const Node& c : node.children) kids.push_back(&c);
  std::stable_sort(kids.begin(), kids.end(), [](const Node* a, const Node* b) {
    return min_terminal(*a) < min_terminal(*b);
  });
  out += '(';
  out += node.label;
  for (const Node* c : kids) {
    out += ' ';
    emit_node(tree, *c, out);
  }
  out += ')';
}

}  // namespace detail

inline ConstituentTree parse_discbracket(std::string_view line) { return detail::BracketReader(line).read(); }

inline std::string emit_discbracket(const ConstituentTree& tree) {
  std::string out;
  detail::emit_node(tree, tree.root, out);
  return out;
}

// One tree per line; blank lines are skipped. Errors carry the line number.
inline std::vector<ConstituentTree> read_treebank(std::istream& in) {
  std::vector<ConstituentTree> trees;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      trees.push_back(parse_discbracket(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trees;
}

inline void write_treebank(std::ostream& out, const std::vector<ConstituentTree>& trees) {
  for (const ConstituentTree& t : trees) out << emit_discbracket(t) << '\n';
}

// ---------------------------------------------------------------------------
// Unary handling

namespace detail {

inline Node strip(Node node) {
  if (node.is_terminal()) return node;
  for (Node& c : node.children) c = strip(std::move(c));
  if (node.children.size() == 1) return std::move(node.children.front());
  return node;
}

}  // namespace detail

inline std::size_t count_unaries(const ConstituentTree& tree) {
  std::size_t n = 0;
  for_each_constituent(tree.root, [&](const Node& node) { n += node.children.size() == 1; });
  return n;
}

// Deletes every constituent with exactly one child, promoting the child.
// A one-word sentence ends up with a bare terminal as its root.
inline ConstituentTree strip_unaries(const ConstituentTree& tree) {
  ConstituentTree out{tree.tokens, detail::strip(tree.root)};
  return out;
}

}  // namespace disco

#endif  // DISCO_TREES_HPP
