#ifndef DISCO_GENERATOR_HPP
#define DISCO_GENERATOR_HPP

// Seeded generator of unaryless, possibly discontinuous constituent trees
// over a toy German-like lexicon. Used as a stand-in treebank for property
// tests and desk-scale training.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disco/random.hpp"
#include "disco/trees.hpp"

namespace disco {

namespace detail {

struct LexicalClass {
  std::string_view pos;
  std::vector<std::string_view> words;
};

inline const std::vector<LexicalClass>& toy_lexicon() {
  static const std::vector<LexicalClass> lexicon = {
      {"NN", {"Haus", "Zeit", "Stadt", "Buch", "Frau", "Kind", "Jahr", "Weg", "Tag", "Welt", "Hund", "Tisch"}},
      {"NE", {"Berlin", "Anna", "Peter", "Europa", "Bonn", "Maria"}},
      {"ART", {"der", "die", "das", "ein", "eine", "dem"}},
      {"ADJA", {"neue", "alte", "große", "kleine", "gute", "schnelle", "rote"}},
      {"VVFIN", {"kam", "sieht", "liest", "baut", "findet", "gibt", "nimmt", "sagt"}},
      {"VAFIN", {"hat", "ist", "wird", "sind"}},
      {"VVPP", {"gesehen", "gebaut", "gelesen", "gefunden"}},
      {"APPR", {"in", "mit", "auf", "nach", "von", "zu"}},
      {"ADV", {"nicht", "heute", "auch", "schon", "sehr", "oft"}},
      {"PPER", {"er", "sie", "es", "wir", "ihr"}},
      {"PIAT", {"nichts", "viele", "einige", "kein"}},
      {"KON", {"und", "oder", "aber"}},
  };
  return lexicon;
}

inline const std::vector<std::string_view>& toy_nonterminals() {
  static const std::vector<std::string_view> labels = {"S", "NP", "VP", "PP", "AP", "AVP", "CNP", "CS"};
  return labels;
}

struct Fragment {
  Node node;
  std::vector<int> yield;  // sorted
};

inline std::vector<int> merged_yield(const std::vector<const Fragment*>& parts) {
  std::vector<int> out;
  for (const Fragment* f : parts) out.insert(out.end(), f->yield.begin(), f->yield.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

struct GeneratorOptions {
  double ternary_rate = 0.25;      // chance a new constituent gets three children
  double punctuation_rate = 0.5;   // chance the sentence ends in "."
};

// Builds a tree bottom-up by repeatedly merging two or three current
// fragments into a new constituent. Each merge is discontinuous with
// probability `discontinuity_rate` when such a merge exists, contiguous
// otherwise; the final merge covers the whole sentence and is labelled VROOT.
inline ConstituentTree generate_random_tree(int n, double discontinuity_rate, std::uint64_t seed,
                                            const GeneratorOptions& options = {}) {
  if (n < 1) throw std::invalid_argument("generate_random_tree: n must be >= 1");
  Rng rng(seed);
  const auto& lexicon = detail::toy_lexicon();
  const auto& labels = detail::toy_nonterminals();

  ConstituentTree tree;
  const bool final_punct = n > 1 && rng.bernoulli(options.punctuation_rate);
  for (int i = 0; i < n; ++i) {
    Token tok;
    tok.index = i;
    if (final_punct && i == n - 1) {
      tok.form = ".";
      tok.pos = "$.";
    } else {
      const auto& cls = lexicon[rng.index(lexicon.size())];
      tok.pos = std::string(cls.pos);
      tok.form = std::string(cls.words[rng.index(cls.words.size())]);
    }
    tree.tokens.push_back(std::move(tok));
  }
  if (n == 1) {
    tree.root = Node::leaf(0);
    return tree;
  }

  std::vector<detail::Fragment> items;
  for (int i = 0; i < n; ++i) items.push_back({Node::leaf(i), {i}});

  while (items.size() > 1) {
    std::vector<std::vector<std::size_t>> contiguous, gapped;
    const bool want_ternary = items.size() >= 3 && rng.bernoulli(options.ternary_rate);
    auto consider = [&](std::vector<std::size_t> group) {
      std::vector<const detail::Fragment*> parts;
      for (std::size_t g : group) parts.push_back(&items[g]);
      (is_contiguous(detail::merged_yield(parts)) ? contiguous : gapped).push_back(std::move(group));
    };
    // Items stay sorted by their first terminal.
    if (want_ternary) {
      for (std::size_t a = 0; a + 2 < items.size(); ++a) consider({a, a + 1, a + 2});
      for (std::size_t a = 0; a + 3 < items.size(); ++a) consider({a, a + 1, a + 3});
    } else {
      for (std::size_t a = 0; a < items.size(); ++a) {
        for (std::size_t b = a + 1; b < items.size(); ++b) consider({a, b});
      }
    }
    std::vector<std::size_t> group;
    if (!gapped.empty() && rng.bernoulli(discontinuity_rate)) {
      group = gapped[rng.index(gapped.size())];
    } else if (!contiguous.empty()) {
      group = contiguous[rng.index(contiguous.size())];
    } else {
      group.resize(items.size());
      for (std::size_t k = 0; k < items.size(); ++k) group[k] = k;
    }

    detail::Fragment merged;
    merged.node.label = std::string(labels[rng.index(labels.size())]);
    std::vector<const detail::Fragment*> parts;
    for (std::size_t g : group) parts.push_back(&items[g]);
    merged.yield = detail::merged_yield(parts);
    for (std::size_t g : group) merged.node.children.push_back(std::move(items[g].node));

    std::vector<detail::Fragment> rest;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (std::find(group.begin(), group.end(), k) == group.end()) rest.push_back(std::move(items[k]));
    }
    rest.push_back(std::move(merged));
    std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.yield.front() < b.yield.front(); });
    items = std::move(rest);
  }

  tree.root = std::move(items.front().node);
  tree.root.label = "VROOT";
  canonicalize(tree.root);
  return tree;
}

// `count` trees with lengths drawn uniformly from [min_length, max_length].
inline std::vector<ConstituentTree> generate_corpus(int count, int min_length, int max_length, double discontinuity_rate,
                                                    std::uint64_t seed, const GeneratorOptions& options = {}) {
  if (count < 0 || min_length < 1 || max_length < min_length) {
    throw std::invalid_argument("generate_corpus: need count >= 0 and 1 <= min_length <= max_length");
  }
  Rng rng(seed);
  std::vector<ConstituentTree> out;
  for (int k = 0; k < count; ++k) {
    const int n = rng.range(min_length, max_length);
    out.push_back(generate_random_tree(n, discontinuity_rate, rng.next(), options));
  }
  return out;
}

}  // namespace disco

#endif  // DISCO_GENERATOR_HPP
