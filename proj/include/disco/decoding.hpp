#ifndef DISCO_DECODING_HPP
#define DISCO_DECODING_HPP

// Left-to-right pointer decoding. Word i picks its head among 0..n; a
// candidate that would close a cycle is skipped in favour of the next best.
// The decoder input r_i depends only on encoder states, never on earlier
// pointer choices, so the attention distributions of a sentence are computed
// once and the searches below work on the resulting log-probability matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "disco/dependency.hpp"
#include "disco/encoding.hpp"
#include "disco/model.hpp"
#include "disco/tensor.hpp"

namespace disco {

// Row i-1 holds log P(head(i) = j) for j = 0..n.
using ScoreMatrix = std::vector<std::vector<double>>;

// heads[k] is the head of word k (index 0 unused), -1 while unassigned.
inline bool creates_cycle(const std::vector<int>& heads, int i, int j) {
  if (j == 0) return false;
  if (j == i) return true;
  const std::size_t limit = heads.size();
  for (std::size_t steps = 0; j > 0 && steps < limit; ++steps) {
    if (j == i) return true;
    j = heads[static_cast<std::size_t>(j)];
  }
  return false;
}

namespace detail {

// Candidates for word i that keep the prefix acyclic, in index order.
inline std::vector<int> legal_candidates(std::size_t width, const std::vector<int>& heads, int i) {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(width); ++j) {
    if (!creates_cycle(heads, i, j)) out.push_back(j);
  }
  return out;
}

// log of the total probability of the legal candidates.
inline double legal_mass(const std::vector<double>& row, const std::vector<int>& legal) {
  double top = -std::numeric_limits<double>::infinity();
  for (int j : legal) top = std::max(top, row[static_cast<std::size_t>(j)]);
  double s = 0.0;
  for (int j : legal) s += std::exp(row[static_cast<std::size_t>(j)] - top);
  return top + std::log(s);
}

}  // namespace detail

// Log-probability of a full assignment under the sequential model: each step
// renormalizes over the candidates that are legal given the prefix.
// Returns -inf if some choice is illegal.
inline double sequence_log_prob(const ScoreMatrix& lp, const std::vector<int>& heads) {
  const int n = static_cast<int>(lp.size());
  std::vector<int> prefix(static_cast<std::size_t>(n) + 1, -1);
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const int j = heads.at(static_cast<std::size_t>(i));
    if (j < 0 || j > n || creates_cycle(prefix, i, j)) return -std::numeric_limits<double>::infinity();
    const auto& row = lp[static_cast<std::size_t>(i - 1)];
    total += row[static_cast<std::size_t>(j)] - detail::legal_mass(row, detail::legal_candidates(row.size(), prefix, i));
    prefix[static_cast<std::size_t>(i)] = j;
  }
  return total;
}

inline std::vector<int> greedy_heads(const ScoreMatrix& lp) {
  const int n = static_cast<int>(lp.size());
  std::vector<int> heads(static_cast<std::size_t>(n) + 1, -1);
  for (int i = 1; i <= n; ++i) {
    const auto& row = lp[static_cast<std::size_t>(i - 1)];
    int best = -1;
    for (int j = 0; j <= n; ++j) {
      if (creates_cycle(heads, i, j)) continue;
      if (best < 0 || row[static_cast<std::size_t>(j)] > row[static_cast<std::size_t>(best)]) best = j;
    }
    heads[static_cast<std::size_t>(i)] = best;  // j = 0 is always legal
  }
  return heads;
}

// The decoder state is not stored: it does not depend on the prefix.
struct BeamItem {
  std::vector<int> heads;
  double log_prob = 0.0;
};

// Top-k search over acyclic prefixes. The greedy path also competes at the
// end, so the result never scores below greedy decoding.
inline BeamItem beam_search(const ScoreMatrix& lp, int k) {
  if (k < 1) throw UsageError("beam width must be at least 1");
  const int n = static_cast<int>(lp.size());
  std::vector<BeamItem> beam{{std::vector<int>(static_cast<std::size_t>(n) + 1, -1), 0.0}};
  struct Candidate {
    double score;
    std::size_t parent;
    int head;
  };
  for (int i = 1; i <= n; ++i) {
    const auto& row = lp[static_cast<std::size_t>(i - 1)];
    std::vector<Candidate> cands;
    for (std::size_t b = 0; b < beam.size(); ++b) {
      std::vector<int> legal = detail::legal_candidates(row.size(), beam[b].heads, i);
      const double mass = detail::legal_mass(row, legal);
      // Best first, lower index on ties: with k = 1 this is the greedy choice.
      std::stable_sort(legal.begin(), legal.end(), [&](int a, int c) {
        return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(c)];
      });
      for (int j : legal) cands.push_back({beam[b].log_prob + (row[static_cast<std::size_t>(j)] - mass), b, j});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    if (cands.size() > static_cast<std::size_t>(k)) cands.resize(static_cast<std::size_t>(k));
    std::vector<BeamItem> next;
    for (const Candidate& c : cands) {
      BeamItem item = beam[c.parent];
      item.heads[static_cast<std::size_t>(i)] = c.head;
      item.log_prob = c.score;
      next.push_back(std::move(item));
    }
    beam = std::move(next);
  }
  BeamItem best = beam.front();
  BeamItem greedy{greedy_heads(lp), 0.0};
  greedy.log_prob = sequence_log_prob(lp, greedy.heads);
  if (greedy.log_prob > best.log_prob) best = std::move(greedy);
  return best;
}

// Re-points every extra root attachment to the first root word.
inline std::vector<int> single_root(std::vector<int> heads) {
  int first = 0;
  for (std::size_t i = 1; i < heads.size(); ++i) {
    if (heads[i] != 0) continue;
    if (first == 0) first = static_cast<int>(i);
    else heads[i] = first;
  }
  return heads;
}

// ---------------------------------------------------------------------------
// Model-driven parsing

inline ScoreMatrix arc_log_probs(const Model& model, const SentenceGraph& g) {
  ScoreMatrix lp;
  for (std::size_t i = 1; i <= g.words(); ++i) {
    ad::Tensor p = ad::log_softmax(model.attention_scores(g, i));
    lp.emplace_back(p.data().begin(), p.data().end());
  }
  return lp;
}

struct ParseResult {
  AugmentedDependencyTree dep;  // repaired
  ConstituentTree tree;
  std::vector<int> heads;       // search output before the single-root repair
  double log_prob = 0.0;
};

namespace detail {

inline ParseResult finish_parse(const Model& model, const SentenceGraph& g, const std::vector<Token>& tokens,
                                const BeamItem& item) {
  ParseResult r;
  r.heads = item.heads;
  r.log_prob = item.log_prob;
  const std::vector<int> heads = single_root(item.heads);
  AugmentedDependencyTree dep;
  dep.tokens = tokens;
  for (std::size_t i = 1; i < heads.size(); ++i) {
    dep.heads.push_back(heads[i]);
    if (heads[i] == 0) {
      dep.labels.push_back(AugmentedLabel::root());
      continue;
    }
    ad::Tensor scores = model.label_scores(g, i, static_cast<std::size_t>(heads[i]));
    std::size_t best = 0;
    for (std::size_t l = 1; l < scores.size(); ++l) {
      if (best == 0 || scores[l] > scores[best]) best = l;  // id 0 is `root`
    }
    dep.labels.push_back(best == 0 ? AugmentedLabel::root() : parse_label(model.vocab().labels.item(static_cast<int>(best))));
  }
  r.dep = repair_labels(dep);
  r.tree = decode(r.dep);
  return r;
}

inline std::vector<Token> reindexed(std::vector<Token> tokens) {
  if (tokens.empty()) throw UsageError("parse: empty sentence");
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].index = static_cast<int>(i);
  return tokens;
}

}  // namespace detail

inline ParseResult greedy_parse(const Model& model, const std::vector<Token>& sentence) {
  ad::NoGradGuard no_grad;
  const std::vector<Token> tokens = detail::reindexed(sentence);
  SentenceGraph g = model.run(tokens);
  const ScoreMatrix lp = arc_log_probs(model, g);
  BeamItem item{greedy_heads(lp), 0.0};
  item.log_prob = sequence_log_prob(lp, item.heads);
  return detail::finish_parse(model, g, tokens, item);
}

inline ParseResult beam_parse(const Model& model, const std::vector<Token>& sentence, int k) {
  ad::NoGradGuard no_grad;
  const std::vector<Token> tokens = detail::reindexed(sentence);
  SentenceGraph g = model.run(tokens);
  return detail::finish_parse(model, g, tokens, beam_search(arc_log_probs(model, g), k));
}

inline ConstituentTree parse_to_constituents(const Model& model, const std::vector<Token>& sentence, int k) {
  return beam_parse(model, sentence, k).tree;
}

}  // namespace disco

#endif  // DISCO_DECODING_HPP
