#ifndef DISCO_TESTS_SUPPORT_HPP
#define DISCO_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "disco/config.hpp"
#include "disco/generator.hpp"
#include "disco/head_rules.hpp"
#include "disco/model.hpp"
#include "disco/training.hpp"

namespace disco::testing {

inline const HeadRuleSet& sample_rules() {
  static const HeadRuleSet rules = load_head_rules(std::string(DISCO_DATA_DIR) + "/negra_sample.headrules");
  return rules;
}

inline std::vector<Example> generated_examples(int count, int min_len, int max_len, std::uint64_t seed, double rate = 0.3) {
  return make_examples(generate_corpus(count, min_len, max_len, rate, seed), sample_rules());
}

// Small sizes for fast forward / backward checks.
inline ModelConfig small_config(int dim = 8) {
  ModelConfig c;
  c.cnn_filters = dim;
  c.char_dim = dim;
  c.word_dim = dim;
  c.pos_dim = dim;
  c.encoder_layers = 1;
  c.encoder_size = dim;
  c.decoder_size = dim;
  c.arc_mlp_size = dim;
  c.label_mlp_size = dim;
  c.dropout = 0.0;
  return c;
}

inline Model make_model(const ModelConfig& config, const std::vector<Example>& corpus, std::uint64_t seed) {
  Rng rng(seed);
  return Model(config, build_vocabulary(corpus), rng);
}

inline std::vector<double> values(const ad::Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace disco::testing

#endif  // DISCO_TESTS_SUPPORT_HPP
