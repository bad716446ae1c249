#ifndef DISCO_EVALUATION_HPP
#define DISCO_EVALUATION_HPP

// Labeled bracket scoring in the evalb style for discontinuous trees.
// Brackets are (label, yield-set) pairs matched as multisets; punctuation is
// removed from every yield and root symbols are ignored. A bracket counts as
// discontinuous when its yield, re-indexed over the non-punctuation tokens,
// has a gap. LAS / UAS on augmented dependency trees drive model selection.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "disco/dependency.hpp"
#include "disco/error.hpp"
#include "disco/trees.hpp"

namespace disco {

struct EvalOptions {
  std::set<std::string> punct_pos{"$.", "$,", "$("};
  std::set<std::string> root_labels{"VROOT", "ROOT", "TOP"};
};

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double f1() const {
    const long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 100.0 * static_cast<double>(2 * tp) / static_cast<double>(denom);
  }
  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct EvalReport {
  Counts brackets;
  Counts disc;
  long words = 0;
  long heads_correct = 0;
  long labeled_correct = 0;
  std::size_t sentences = 0;

  double f1() const { return brackets.f1(); }
  double precision() const { return brackets.precision(); }
  double recall() const { return brackets.recall(); }
  double disc_f1() const { return disc.f1(); }
  double disc_precision() const { return disc.precision(); }
  double disc_recall() const { return disc.recall(); }
  double uas() const { return words == 0 ? 0.0 : 100.0 * static_cast<double>(heads_correct) / static_cast<double>(words); }
  double las() const { return words == 0 ? 0.0 : 100.0 * static_cast<double>(labeled_correct) / static_cast<double>(words); }
};

struct Bracket {
  std::string label;
  std::vector<int> yield;  // sorted, original token indices
  bool discontinuous = false;
  auto operator<=>(const Bracket&) const = default;
};

inline bool is_punctuation(const Token& t, const EvalOptions& opt) {
  if (t.pos != kNoPos) return opt.punct_pos.count(t.pos) != 0;
  return !t.form.empty() &&
         std::all_of(t.form.begin(), t.form.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; });
}

// `punct` is indexed by token position and decided on the gold side.
inline std::vector<Bracket> brackets_of(const ConstituentTree& tree, const std::vector<bool>& punct, const EvalOptions& opt) {
  std::vector<int> dense(punct.size(), -1);  // position among non-punctuation tokens
  int next = 0;
  for (std::size_t i = 0; i < punct.size(); ++i) {
    if (!punct[i]) dense[i] = next++;
  }
  std::vector<Bracket> out;
  for_each_constituent(tree.root, [&](const Node& node) {
    if (opt.root_labels.count(node.label)) return;
    Bracket b{node.label, {}, false};
    std::vector<int> compact;
    for (int i : yield(node)) {
      if (punct.at(static_cast<std::size_t>(i))) continue;
      b.yield.push_back(i);
      compact.push_back(dense[static_cast<std::size_t>(i)]);
    }
    if (b.yield.empty()) return;
    b.discontinuous = !is_contiguous(compact);
    out.push_back(std::move(b));
  });
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline void require_aligned(const std::vector<Token>& gold, const std::vector<Token>& pred, std::size_t sentence) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("sentence " + std::to_string(sentence + 1) + ": gold has " + std::to_string(gold.size()) +
                         " tokens, prediction has " + std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].form != pred[i].form) {
      throw AlignmentError("sentence " + std::to_string(sentence + 1) + ", token " + std::to_string(i) + ": '" +
                           gold[i].form + "' vs '" + pred[i].form + "'");
    }
  }
}

// Multiset intersection of two sorted bracket lists.
inline Counts match(const std::vector<Bracket>& gold, const std::vector<Bracket>& pred) {
  Counts c;
  std::size_t g = 0, p = 0;
  while (g < gold.size() && p < pred.size()) {
    if (gold[g] < pred[p]) {
      ++g;
    } else if (pred[p] < gold[g]) {
      ++p;
    } else {
      ++c.tp;
      ++g;
      ++p;
    }
  }
  c.fp = static_cast<long>(pred.size()) - c.tp;
  c.fn = static_cast<long>(gold.size()) - c.tp;
  return c;
}

}  // namespace detail

inline void score_trees(const ConstituentTree& gold, const ConstituentTree& pred, const EvalOptions& opt, EvalReport& report) {
  detail::require_aligned(gold.tokens, pred.tokens, report.sentences);
  std::vector<bool> punct;
  for (const Token& t : gold.tokens) punct.push_back(is_punctuation(t, opt));
  const std::vector<Bracket> g = brackets_of(gold, punct, opt);
  const std::vector<Bracket> p = brackets_of(pred, punct, opt);
  report.brackets += detail::match(g, p);
  std::vector<Bracket> gd, pd;
  std::copy_if(g.begin(), g.end(), std::back_inserter(gd), [](const Bracket& b) { return b.discontinuous; });
  std::copy_if(p.begin(), p.end(), std::back_inserter(pd), [](const Bracket& b) { return b.discontinuous; });
  report.disc += detail::match(gd, pd);
  ++report.sentences;
}

// Bracket F1 and discontinuous-only F1 (micro-averaged).
inline EvalReport bracket_f1(const std::vector<ConstituentTree>& gold, const std::vector<ConstituentTree>& pred,
                             const EvalOptions& opt = {}) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                         std::to_string(pred.size()));
  }
  EvalReport report;
  for (std::size_t k = 0; k < gold.size(); ++k) score_trees(gold[k], pred[k], opt, report);
  return report;
}

inline void score_dependencies(const AugmentedDependencyTree& gold, const AugmentedDependencyTree& pred,
                               EvalReport& report, std::size_t sentence = 0) {
  detail::require_aligned(gold.tokens, pred.tokens, sentence);
  if (gold.heads.size() != gold.tokens.size() || pred.heads.size() != pred.tokens.size()) {
    throw AlignmentError("sentence " + std::to_string(sentence + 1) + ": head count differs from token count");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++report.words;
    if (gold.heads[i] != pred.heads[i]) continue;
    ++report.heads_correct;
    if (gold.labels[i] == pred.labels[i]) ++report.labeled_correct;
  }
}

// LAS / UAS over all words, punctuation included.
inline EvalReport las_uas(const std::vector<AugmentedDependencyTree>& gold, const std::vector<AugmentedDependencyTree>& pred) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                         std::to_string(pred.size()));
  }
  EvalReport report;
  for (std::size_t k = 0; k < gold.size(); ++k) score_dependencies(gold[k], pred[k], report, k);
  report.sentences = gold.size();
  return report;
}

inline std::string format_report(const EvalReport& r, bool with_dependencies = false) {
  char buf[160];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-10s %9s %9s %9s %8s %8s %8s\n", "", "precision", "recall", "f1", "tp", "fp", "fn");
  out << buf;
  auto line = [&](const char* name, const Counts& c) {
    std::snprintf(buf, sizeof buf, "%-10s %9.2f %9.2f %9.2f %8ld %8ld %8ld\n", name, c.precision(), c.recall(), c.f1(), c.tp,
                  c.fp, c.fn);
    out << buf;
  };
  line("all", r.brackets);
  line("disc", r.disc);
  if (with_dependencies) {
    std::snprintf(buf, sizeof buf, "%-10s %9.2f\n%-10s %9.2f\n", "las", r.las(), "uas", r.uas());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-10s %9zu\n", "sentences", r.sentences);
  out << buf;
  return out.str();
}

// Keys: sentences, f1, precision, recall, disc_f1, disc_precision,
// disc_recall, counts.{all,disc}.{tp,fp,fn}, and las / uas when dependency
// scores were collected.
inline nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json j;
  j["sentences"] = r.sentences;
  j["f1"] = r.f1();
  j["precision"] = r.precision();
  j["recall"] = r.recall();
  j["disc_f1"] = r.disc_f1();
  j["disc_precision"] = r.disc_precision();
  j["disc_recall"] = r.disc_recall();
  auto counts = [](const Counts& c) { return nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; };
  j["counts"] = {{"all", counts(r.brackets)}, {"disc", counts(r.disc)}};
  if (r.words > 0) {
    j["las"] = r.las();
    j["uas"] = r.uas();
  }
  return j;
}

}  // namespace disco

#endif  // DISCO_EVALUATION_HPP
