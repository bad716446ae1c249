#ifndef DISCO_TRAINING_HPP
#define DISCO_TRAINING_HPP

// Joint training of pointer and labeler: per sentence the loss is
//   sum_i -log P(gold head of i) + sum_i -log P(gold label | gold arc)
// with gold heads throughout (the decoder never reads predicted heads).
// Adam with step decay and global-norm clipping; the dev epoch with the best
// LAS is kept.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "disco/config.hpp"
#include "disco/decoding.hpp"
#include "disco/encoding.hpp"
#include "disco/error.hpp"
#include "disco/evaluation.hpp"
#include "disco/head_rules.hpp"
#include "disco/model.hpp"
#include "disco/random.hpp"
#include "disco/tensor.hpp"

namespace disco {

struct Example {
  ConstituentTree tree;  // unaryless, head-annotated
  AugmentedDependencyTree dep;
};

inline Example make_example(const ConstituentTree& tree, const HeadRuleSet& rules) {
  Example ex;
  ex.tree = assign_heads(strip_unaries(tree), rules);
  ex.dep = encode(ex.tree);
  return ex;
}

inline std::vector<Example> make_examples(const std::vector<ConstituentTree>& trees, const HeadRuleSet& rules) {
  std::vector<Example> out;
  for (const ConstituentTree& t : trees) out.push_back(make_example(t, rules));
  return out;
}

inline Vocabulary build_vocabulary(const std::vector<Example>& corpus) {
  std::vector<AugmentedDependencyTree> deps;
  for (const Example& e : corpus) deps.push_back(e.dep);
  return Vocabulary::build(deps);
}

// ---------------------------------------------------------------------------
// Losses

struct JointLoss {
  ad::Tensor arc;
  ad::Tensor label;
  ad::Tensor total() const { return ad::add(arc, label); }
};

inline JointLoss joint_loss(const Model& model, const AugmentedDependencyTree& gold, const Pass& pass = {}) {
  if (gold.size() == 0) throw UsageError("joint_loss: empty sentence");
  SentenceGraph g = model.run(gold.tokens, pass);
  std::vector<ad::Tensor> arc_terms, label_terms;
  for (std::size_t i = 1; i <= gold.size(); ++i) {
    const auto head = static_cast<std::size_t>(gold.heads[i - 1]);
    arc_terms.push_back(ad::pick(ad::log_softmax(model.attention_scores(g, i)), head));
    const int label = model.vocab().label_id(gold.labels[i - 1]);
    if (label < 0) throw UsageError("joint_loss: label " + gold.labels[i - 1].str() + " is not in the inventory");
    label_terms.push_back(ad::pick(ad::log_softmax(model.label_scores(g, i, head)), static_cast<std::size_t>(label)));
  }
  return {ad::scale(ad::add_n(arc_terms), -1.0), ad::scale(ad::add_n(label_terms), -1.0)};
}

inline double arc_loss(const Model& model, const AugmentedDependencyTree& gold) {
  ad::NoGradGuard no_grad;
  return joint_loss(model, gold).arc.item();
}

inline double label_loss(const Model& model, const AugmentedDependencyTree& gold) {
  ad::NoGradGuard no_grad;
  return joint_loss(model, gold).label.item();
}

// ---------------------------------------------------------------------------
// Optimizer

class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, const TrainConfig& cfg) : params_(std::move(params)), cfg_(cfg) {
    for (const ad::Tensor& p : params_) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }

  long steps() const { return step_; }

  // Rate for the next update: decays by decay_rate every decay_steps updates.
  double learning_rate() const {
    return cfg_.learning_rate * std::pow(cfg_.decay_rate, static_cast<double>(step_ / cfg_.decay_steps));
  }

  double gradient_norm() const {
    double sq = 0.0;
    for (const ad::Tensor& p : params_) {
      for (double g : p.grad()) sq += g * g;
    }
    return std::sqrt(sq);
  }

  // Rescales all gradients to norm `clip` when above it; returns the norm
  // before clipping.
  double clip_gradients() {
    const double norm = gradient_norm();
    if (norm > cfg_.clip) {
      const double s = cfg_.clip / norm;
      for (ad::Tensor& p : params_) {
        for (double& g : p.mutable_grad()) g *= s;
      }
    }
    return norm;
  }

  void step() {
    const double lr = learning_rate();
    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto value = params_[k].mutable_data();
      auto grad = params_[k].grad();
      if (grad.size() != value.size()) continue;  // never touched by backward
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      }
    }
  }

  void zero_grad() {
    for (ad::Tensor& p : params_) p.zero_grad();
  }

 private:
  std::vector<ad::Tensor> params_;
  TrainConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long step_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop

// Length-bucketed batches: shuffle, sort by length (stable), cut, shuffle the
// batch order.
inline std::vector<std::vector<std::size_t>> make_batches(const std::vector<Example>& corpus, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpus[a].dep.size() < corpus[b].dep.size(); });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  rng.shuffle(batches);
  return batches;
}

struct StepResult {
  double arc_loss = 0.0;
  double label_loss = 0.0;
  double grad_norm = 0.0;  // before clipping
};

// One update on the summed joint loss of a batch.
inline StepResult joint_step(const Model& model, Adam& adam, const std::vector<const Example*>& batch, Rng& rng) {
  Pass pass{true, &rng};
  std::vector<ad::Tensor> terms;
  StepResult r;
  for (const Example* ex : batch) {
    JointLoss l = joint_loss(model, ex->dep, pass);
    r.arc_loss += l.arc.item();
    r.label_loss += l.label.item();
    terms.push_back(l.total());
  }
  if (!std::isfinite(r.arc_loss) || !std::isfinite(r.label_loss)) {
    throw NumericError("non-finite loss at step " + std::to_string(adam.steps() + 1) + " (arc " +
                       std::to_string(r.arc_loss) + ", label " + std::to_string(r.label_loss) + ")");
  }
  adam.zero_grad();
  ad::add_n(terms).backward();
  r.grad_norm = adam.clip_gradients();
  if (!std::isfinite(r.grad_norm)) throw NumericError("non-finite gradient at step " + std::to_string(adam.steps() + 1));
  adam.step();
  return r;
}

struct EpochRecord {
  int epoch = 0;
  double arc_loss = 0.0;    // mean per sentence
  double label_loss = 0.0;  // mean per sentence
  double dev_las = 0.0;
  double dev_uas = 0.0;
  double dev_f1 = 0.0;
  double dev_disc_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based, 0 = none
  double best_las = -1.0;
  std::uint64_t seed = 0;
  bool stopped_early = false;

  const EpochRecord* best() const {
    return best_epoch > 0 ? &epochs.at(static_cast<std::size_t>(best_epoch - 1)) : nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["best_epoch"] = best_epoch;
    j["best_las"] = best_las;
    j["stopped_early"] = stopped_early;
    j["epochs"] = nlohmann::json::array();
    for (const EpochRecord& e : epochs) {
      j["epochs"].push_back({{"epoch", e.epoch},
                             {"arc_loss", e.arc_loss},
                             {"label_loss", e.label_loss},
                             {"dev_las", e.dev_las},
                             {"dev_uas", e.dev_uas},
                             {"dev_f1", e.dev_f1},
                             {"dev_disc_f1", e.dev_disc_f1},
                             {"seconds", e.seconds}});
    }
    return j;
  }
};

// Parses every dev sentence with beam width `beam` and scores both views.
inline EvalReport evaluate_model(const Model& model, const std::vector<Example>& dev, int beam, const EvalOptions& opt = {}) {
  EvalReport report;
  for (std::size_t k = 0; k < dev.size(); ++k) {
    ParseResult r = beam_parse(model, dev[k].dep.tokens, beam);
    score_trees(dev[k].tree, r.tree, opt, report);
    score_dependencies(dev[k].dep, r.dep, report, k);
  }
  return report;
}

struct TrainOptions {
  std::ostream* log = nullptr;
  // Stop as soon as dev reaches both targets (used by fixed-budget runs).
  std::optional<double> target_f1;
  std::optional<double> target_las;
  // Skip dev decoding (loss-only runs); model selection then keeps the last epoch.
  bool evaluate = true;
  EvalOptions eval;
};

namespace detail {

inline std::vector<std::vector<double>> snapshot(const Model& model) {
  std::vector<std::vector<double>> out;
  for (const auto& [name, t] : model.named_parameters()) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

inline void restore(Model& model, const std::vector<std::vector<double>>& values) {
  std::size_t k = 0;
  for (auto [name, t] : model.named_parameters()) {
    std::copy(values[k].begin(), values[k].end(), t.mutable_data().begin());
    ++k;
  }
}

}  // namespace detail

// Trains in place and leaves the model at its best dev-LAS epoch.
inline TrainReport train(Model& model, const std::vector<Example>& corpus, const std::vector<Example>& dev,
                         const TrainConfig& cfg, const TrainOptions& opt = {}) {
  cfg.validate();
  if (corpus.empty()) throw UsageError("train: empty training corpus");
  if (opt.evaluate && dev.empty()) throw UsageError("train: empty dev corpus");
  Rng rng(cfg.seed);
  Adam adam(model.parameters(), cfg);
  TrainReport report;
  report.seed = cfg.seed;
  std::vector<std::vector<double>> best;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    for (const auto& batch : make_batches(corpus, cfg.batch_size, rng)) {
      std::vector<const Example*> items;
      for (std::size_t i : batch) items.push_back(&corpus[i]);
      StepResult s = joint_step(model, adam, items, rng);
      rec.arc_loss += s.arc_loss;
      rec.label_loss += s.label_loss;
    }
    rec.arc_loss /= static_cast<double>(corpus.size());
    rec.label_loss /= static_cast<double>(corpus.size());
    bool improved = !opt.evaluate;
    if (opt.evaluate) {
      EvalReport r = evaluate_model(model, dev, cfg.beam, opt.eval);
      rec.dev_las = r.las();
      rec.dev_uas = r.uas();
      rec.dev_f1 = r.f1();
      rec.dev_disc_f1 = r.disc_f1();
      improved = rec.dev_las > report.best_las;
    }
    const bool on_target = opt.evaluate && opt.target_f1 && opt.target_las && rec.dev_f1 >= *opt.target_f1 &&
                           rec.dev_las >= *opt.target_las;
    // A run that stops on target keeps the epoch that hit it (LAS ties the best at worst).
    if (on_target && rec.dev_las >= report.best_las) improved = true;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (improved) {
      report.best_epoch = epoch;
      report.best_las = rec.dev_las;
      best = detail::snapshot(model);
      since_best = 0;
    } else {
      ++since_best;
    }
    if (opt.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "epoch %4d  arc %.4f  label %.4f  dev las %6.2f uas %6.2f f1 %6.2f disc %6.2f  %.1fs%s\n",
                    epoch, rec.arc_loss, rec.label_loss, rec.dev_las, rec.dev_uas, rec.dev_f1, rec.dev_disc_f1, rec.seconds,
                    improved ? "  *" : "");
      *opt.log << buf << std::flush;
    }
    if (on_target) {
      report.stopped_early = epoch < cfg.epochs;
      break;
    }
    if (opt.evaluate && since_best >= cfg.patience) {
      report.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  if (!best.empty()) detail::restore(model, best);
  return report;
}

}  // namespace disco

#endif  // DISCO_TRAINING_HPP
