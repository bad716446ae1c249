#ifndef DISCO_DEPENDENCY_HPP
#define DISCO_DEPENDENCY_HPP

// Augmented dependency trees: every word has one head (0 = dummy root,
// words shifted to 1..n) and a label `X#p` naming the constituent X formed
// at level p of the head's spine, or `root` for the attachment to w0.
//
// File format: one token per line, tab-separated `ID FORM POS HEAD LABEL`
// (ID 1-based), blank line between sentences.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "disco/error.hpp"
#include "disco/trees.hpp"

namespace disco {

struct AugmentedLabel {
  std::string nonterminal;
  int order = 0;  // 0 only for the root label

  static AugmentedLabel root() { return {}; }

  bool is_root() const { return order == 0; }

  std::string str() const { return is_root() ? std::string("root") : nonterminal + "#" + std::to_string(order); }

  friend bool operator==(const AugmentedLabel&, const AugmentedLabel&) = default;
};

// Parses `root` or `X#p` (split at the last '#', p >= 1).
inline AugmentedLabel parse_label(std::string_view text) {
  if (text == "root") return AugmentedLabel::root();
  std::size_t hash = text.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == text.size()) {
    throw FormatError("label '" + std::string(text) + "' is not 'root' or X#p");
  }
  int order = 0;
  std::string_view digits = text.substr(hash + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), order);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || order < 1) {
    throw FormatError("label '" + std::string(text) + "' has an invalid order");
  }
  return {std::string(text.substr(0, hash)), order};
}

struct AugmentedDependencyTree {
  std::vector<Token> tokens;
  std::vector<int> heads;                // heads[i] is the head of word i+1; 0 = root
  std::vector<AugmentedLabel> labels;    // labels[i] labels the arc into word i+1

  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const AugmentedDependencyTree&, const AugmentedDependencyTree&) = default;
};

// Sizes match, heads in range, exactly one word attached to w0, no cycles.
inline void check_structure(const AugmentedDependencyTree& dep) {
  const int n = static_cast<int>(dep.tokens.size());
  if (dep.heads.size() != dep.tokens.size() || dep.labels.size() != dep.tokens.size()) {
    throw StructureError("dependency tree: heads/labels/tokens length mismatch");
  }
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    int h = dep.heads[static_cast<std::size_t>(i)];
    if (h < 0 || h > n) throw StructureError("word " + std::to_string(i + 1) + " has out-of-range head " + std::to_string(h));
    if (h == i + 1) throw StructureError("word " + std::to_string(i + 1) + " heads itself");
    roots += h == 0;
  }
  if (n > 0 && roots != 1) throw StructureError("dependency tree has " + std::to_string(roots) + " root attachments");
  for (int i = 1; i <= n; ++i) {
    int k = i;
    for (int steps = 0; k != 0; ++steps) {
      if (steps > n) throw StructureError("dependency tree has a cycle through word " + std::to_string(i));
      k = dep.heads[static_cast<std::size_t>(k - 1)];
    }
  }
}

// True iff every word strictly between the ends of each arc is dominated
// by the arc's head. The dummy root dominates everything.
inline bool is_projective(const AugmentedDependencyTree& dep) {
  const int n = static_cast<int>(dep.size());
  auto dominates = [&](int h, int k) {
    for (int steps = 0; k != 0 && steps <= n; ++steps) {
      if (k == h) return true;
      k = dep.heads[static_cast<std::size_t>(k - 1)];
    }
    return h == 0;
  };
  for (int d = 1; d <= n; ++d) {
    int h = dep.heads[static_cast<std::size_t>(d - 1)];
    if (h == 0) continue;
    for (int k = std::min(h, d) + 1; k < std::max(h, d); ++k) {
      if (!dominates(h, k)) return false;
    }
  }
  return true;
}

inline void write_dependencies(std::ostream& out, const AugmentedDependencyTree& dep) {
  for (std::size_t i = 0; i < dep.size(); ++i) {
    out << (i + 1) << '\t' << dep.tokens[i].form << '\t' << dep.tokens[i].pos << '\t' << dep.heads[i] << '\t'
        << dep.labels[i].str() << '\n';
  }
  out << '\n';
}

inline void write_dependency_file(std::ostream& out, const std::vector<AugmentedDependencyTree>& deps) {
  for (const auto& d : deps) write_dependencies(out, d);
}

inline std::vector<AugmentedDependencyTree> read_dependency_file(std::istream& in) {
  std::vector<AugmentedDependencyTree> out;
  AugmentedDependencyTree cur;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!cur.tokens.empty()) out.push_back(std::move(cur));
    cur = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    auto fail = [&](const std::string& what) {
      throw FormatError("dependency file line " + std::to_string(lineno) + ": " + what);
    };
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) fail("expected 5 tab-separated columns, got " + std::to_string(cols.size()));
    int id = 0, head = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(cols[0], &used);
      if (used != cols[0].size()) fail("bad ID '" + cols[0] + "'");
      head = std::stoi(cols[3], &used);
      if (used != cols[3].size()) fail("bad HEAD '" + cols[3] + "'");
    } catch (const std::logic_error&) {
      fail("non-numeric ID or HEAD");
    }
    if (id != static_cast<int>(cur.tokens.size()) + 1) fail("expected ID " + std::to_string(cur.tokens.size() + 1));
    if (cols[1].empty()) fail("empty FORM");
    try {
      cur.labels.push_back(parse_label(cols[4]));
    } catch (const FormatError& e) {
      fail(e.what());
    }
    cur.tokens.push_back(Token{id - 1, cols[1], cols[2].empty() ? std::string(kNoPos) : cols[2]});
    cur.heads.push_back(head);
  }
  flush();
  return out;
}

}  // namespace disco

#endif  // DISCO_DEPENDENCY_HPP
