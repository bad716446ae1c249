#ifndef DISCO_MODEL_HPP
#define DISCO_MODEL_HPP

// Pointer-network parser. Words are embedded as char-CNN ++ word ++ POS
// vectors, encoded by a stacked BiLSTM (with a learned root vector x_0 in
// front), and decoded left to right: the decoder reads
// r_i = h_{i-1} + h_i + h_{i+1} and its state s_i points at a head through a
// biaffine attention over h_0..h_n. A biaffine labeler scores (s_i, h_j).
// Arc and label scorers each get their own head-side and dependent-side MLP.

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "disco/checkpoint.hpp"
#include "disco/config.hpp"
#include "disco/error.hpp"
#include "disco/random.hpp"
#include "disco/tensor.hpp"
#include "disco/trees.hpp"
#include "disco/vocab.hpp"

namespace disco {

// Dropout is active only for training passes that carry a generator.
struct Pass {
  bool training = false;
  Rng* rng = nullptr;
};

struct EncodedSentence {
  std::vector<ad::Tensor> x;  // x_0..x_n
  std::vector<ad::Tensor> h;  // h_0..h_n, 2 * encoder_size each
  std::size_t words() const { return h.size() - 1; }
};

struct DecoderState {
  std::vector<ad::LstmState> layers;
};

// Everything needed to score arcs and labels of one sentence.
struct SentenceGraph {
  EncodedSentence enc;
  std::vector<ad::Tensor> s;           // s_1..s_n at index 0..n-1
  ad::Tensor arc_heads;                // [n+1, arc_mlp_size]
  ad::Tensor label_heads;              // [n+1, label_mlp_size]
  std::vector<ad::Tensor> arc_deps;    // [arc_mlp_size] per word
  std::vector<ad::Tensor> label_deps;  // [label_mlp_size] per word
  std::size_t words() const { return s.size(); }
};

struct Mlp {
  std::vector<ad::Tensor> weights;  // [in, out]
  std::vector<ad::Tensor> biases;

  // Works on a vector [in] or a row batch [m, in].
  ad::Tensor operator()(ad::Tensor x) const {
    for (std::size_t k = 0; k < weights.size(); ++k) x = ad::elu(ad::add_broadcast(ad::matmul(x, weights[k]), biases[k]));
    return x;
  }
};

struct ArcBiaffine {
  ad::Tensor W;  // [A, A]
  ad::Tensor U;  // [A], dependent side
  ad::Tensor V;  // [A], head side
  ad::Tensor b;  // [1]

  // dep [A], heads [m, A] -> [m]: h_j W s + U s + V h_j + b.
  ad::Tensor operator()(const ad::Tensor& dep, const ad::Tensor& heads) const {
    ad::Tensor per_head = ad::add(ad::matmul(heads, ad::matmul(W, dep)), ad::matmul(heads, V));
    return ad::add_broadcast(per_head, ad::add(ad::matmul(U, dep), b));
  }
};

struct LabelBiaffine {
  ad::Tensor W;  // [L*M, M], block l is W_l
  ad::Tensor U;  // [L, M], dependent side
  ad::Tensor V;  // [L, M], head side
  ad::Tensor b;  // [L]

  std::size_t labels() const { return b.size(); }

  // dep [M], head [M] -> [L].
  ad::Tensor operator()(const ad::Tensor& dep, const ad::Tensor& head) const {
    const std::size_t M = dep.size();
    ad::Tensor bilinear = ad::matmul(ad::reshape(ad::matmul(W, dep), {labels(), M}), head);
    return ad::add_n({bilinear, ad::matmul(U, dep), ad::matmul(V, head), b});
  }
};

namespace detail {

inline ad::Tensor uniform_param(ad::Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

}  // namespace detail

class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab, Rng& rng) : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    if (vocab_.labels.size() == 0) throw UsageError("model: empty label inventory");
    build(rng);
  }

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ad::NamedTensors& named_parameters() const { return params_; }

  std::vector<ad::Tensor> parameters() const {
    std::vector<ad::Tensor> out;
    for (const auto& [name, t] : params_) out.push_back(t);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
  }

  const LabelBiaffine& labeler() const { return label_; }
  const ArcBiaffine& pointer() const { return arc_; }

  // ---- embeddings -------------------------------------------------------

  ad::Tensor embed_token(const Token& token) const {
    const std::size_t w = static_cast<std::size_t>(config_.cnn_window);
    const std::size_t left = (w - 1) / 2;
    std::vector<ad::Tensor> rows;
    for (std::size_t k = 0; k < left; ++k) rows.push_back(ad::row(char_emb_, Index::kPad));
    for (const std::string& c : utf8_chars(token.form)) {
      rows.push_back(ad::row(char_emb_, static_cast<std::size_t>(vocab_.chars.lookup(c))));
    }
    if (rows.size() == left) rows.push_back(ad::row(char_emb_, Index::kUnknown));
    for (std::size_t k = 0; k < w - 1 - left; ++k) rows.push_back(ad::row(char_emb_, Index::kPad));
    ad::Tensor chars = ad::tanh(ad::add(ad::conv1d_maxpool(ad::stack(rows), char_conv_, w), char_conv_bias_));
    std::vector<ad::Tensor> parts{chars, ad::row(word_emb_, static_cast<std::size_t>(vocab_.word_id(token.form)))};
    if (config_.use_pos) parts.push_back(ad::row(pos_emb_, static_cast<std::size_t>(vocab_.pos.lookup(token.pos))));
    return ad::concat(parts);
  }

  // x_0..x_n; x_0 is the learned root vector.
  std::vector<ad::Tensor> embed(const std::vector<Token>& tokens, const Pass& pass = {}) const {
    std::vector<ad::Tensor> x{drop(root_x_, pass)};
    for (const Token& t : tokens) x.push_back(drop(embed_token(t), pass));
    return x;
  }

  // ---- encoder ----------------------------------------------------------

  EncodedSentence encode_sentence(std::vector<ad::Tensor> x, const Pass& pass = {}) const {
    if (x.size() < 2) throw UsageError("encode_sentence: need the root and at least one word");
    const std::size_t H = static_cast<std::size_t>(config_.encoder_size);
    EncodedSentence enc;
    enc.x = x;
    std::vector<ad::Tensor> input = std::move(x);
    for (std::size_t layer = 0; layer < encoder_.size(); ++layer) {
      const std::size_t m = input.size();
      std::vector<ad::Tensor> fw(m), bw(m);
      ad::LstmState st{ad::Tensor::zeros({H}), ad::Tensor::zeros({H})};
      for (std::size_t i = 0; i < m; ++i) fw[i] = (st = ad::lstm_cell(input[i], st, encoder_[layer].first)).h;
      st = {ad::Tensor::zeros({H}), ad::Tensor::zeros({H})};
      for (std::size_t i = m; i-- > 0;) bw[i] = (st = ad::lstm_cell(input[i], st, encoder_[layer].second)).h;
      std::vector<ad::Tensor> out(m);
      for (std::size_t i = 0; i < m; ++i) out[i] = ad::concat({fw[i], bw[i]});
      if (layer + 1 < encoder_.size()) {
        for (ad::Tensor& t : out) t = drop(t, pass);
      }
      input = std::move(out);
    }
    enc.h = std::move(input);
    return enc;
  }

  // ---- decoder ----------------------------------------------------------

  DecoderState initial_decoder_state() const {
    const std::size_t D = static_cast<std::size_t>(config_.decoder_size);
    DecoderState s;
    for (std::size_t l = 0; l < decoder_.size(); ++l) s.layers.push_back({ad::Tensor::zeros({D}), ad::Tensor::zeros({D})});
    return s;
  }

  // r_i = h_{i-1} + h_i + h_{i+1}, with h_{n+1} = 0.
  ad::Tensor decoder_input(const EncodedSentence& enc, std::size_t i) const {
    const std::size_t n = enc.words();
    if (i < 1 || i > n) throw UsageError("decoder_step: position " + std::to_string(i) + " outside 1.." + std::to_string(n));
    std::vector<ad::Tensor> terms{enc.h[i - 1], enc.h[i]};
    if (i < n) terms.push_back(enc.h[i + 1]);
    return ad::add_n(terms);
  }

  std::pair<ad::Tensor, DecoderState> decoder_step(const EncodedSentence& enc, std::size_t i, const DecoderState& state,
                                                   const Pass& pass = {}) const {
    ad::Tensor input = decoder_input(enc, i);
    DecoderState next;
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
      if (l > 0) input = drop(input, pass);
      next.layers.push_back(ad::lstm_cell(input, state.layers.at(l), decoder_[l]));
      input = next.layers.back().h;
    }
    return {input, next};
  }

  // ---- scoring ----------------------------------------------------------

  SentenceGraph run(const std::vector<Token>& tokens, const Pass& pass = {}) const {
    SentenceGraph g;
    g.enc = encode_sentence(embed(tokens, pass), pass);
    std::vector<ad::Tensor> h;
    for (const ad::Tensor& t : g.enc.h) h.push_back(drop(t, pass));
    ad::Tensor heads = ad::stack(h);
    g.arc_heads = arc_head_mlp_(heads);
    g.label_heads = label_head_mlp_(heads);
    DecoderState state = initial_decoder_state();
    for (std::size_t i = 1; i <= g.enc.words(); ++i) {
      auto [s, next] = decoder_step(g.enc, i, state, pass);
      state = std::move(next);
      g.s.push_back(s);
      ad::Tensor sd = drop(s, pass);
      g.arc_deps.push_back(arc_dep_mlp_(sd));
      g.label_deps.push_back(label_dep_mlp_(sd));
    }
    return g;
  }

  // v^t over candidate heads 0..n for word i (1-based).
  ad::Tensor attention_scores(const SentenceGraph& g, std::size_t i) const { return arc_(g.arc_deps.at(i - 1), g.arc_heads); }

  ad::Tensor label_scores(const SentenceGraph& g, std::size_t i, std::size_t j) const {
    return label_(g.label_deps.at(i - 1), ad::row(g.label_heads, j));
  }

  // Unbatched forms on raw decoder / encoder states.
  ad::Tensor attention_scores(const ad::Tensor& s_t, const EncodedSentence& enc) const {
    return arc_(arc_dep_mlp_(s_t), arc_head_mlp_(ad::stack(enc.h)));
  }

  ad::Tensor label_scores(const ad::Tensor& s_t, const ad::Tensor& h_j) const {
    return label_(label_dep_mlp_(s_t), label_head_mlp_(h_j));
  }

  // ---- pretrained vectors ---------------------------------------------

  // Overwrites word rows with the given vectors (keys are lowercased forms).
  // Returns the number of rows set.
  std::size_t set_word_vectors(const std::unordered_map<std::string, std::vector<double>>& vectors) {
    const std::size_t d = static_cast<std::size_t>(config_.word_dim);
    std::size_t set = 0;
    auto data = word_emb_.mutable_data();
    for (const auto& [word, vec] : vectors) {
      if (vec.size() != d) {
        throw FormatError("embeddings: '" + word + "' has " + std::to_string(vec.size()) + " values, expected " +
                          std::to_string(d));
      }
      if (!vocab_.words.contains(word)) continue;
      const auto id = static_cast<std::size_t>(vocab_.words.lookup(word));
      std::copy(vec.begin(), vec.end(), data.begin() + static_cast<std::ptrdiff_t>(id * d));
      ++set;
    }
    return set;
  }

  // ---- checkpoints ------------------------------------------------------

  void save(std::ostream& out) const {
    out << "disco-model 1\nconfig\n" << model_settings_text(config_) << "end-config\n";
    auto write_index = [&](const char* name, const Index& idx) {
      out << "vocab " << name << ' ' << idx.size() << '\n';
      for (const std::string& s : idx.items()) out << s << '\n';
    };
    write_index("words", vocab_.words);
    write_index("chars", vocab_.chars);
    write_index("pos", vocab_.pos);
    write_index("labels", vocab_.labels);
    ad::write_tensors(out, params_);
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
    save(out);
  }

  static Model load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "disco-model 1") throw FormatError("checkpoint: bad magic line");
    if (!std::getline(in, line) || line != "config") throw FormatError("checkpoint: missing config block");
    std::ostringstream settings;
    while (std::getline(in, line) && line != "end-config") settings << line << '\n';
    RunSettings rs;
    std::istringstream settings_in(settings.str());
    read_settings(settings_in, rs);
    Vocabulary vocab;
    auto read_index = [&](const char* name, bool reserved) {
      std::string tag, got;
      std::size_t count = 0;
      if (!std::getline(in, line)) throw FormatError(std::string("checkpoint: missing vocabulary ") + name);
      std::istringstream head(line);
      if (!(head >> tag >> got >> count) || tag != "vocab" || got != name) {
        throw FormatError(std::string("checkpoint: expected vocabulary ") + name);
      }
      std::vector<std::string> items(count);
      for (std::string& s : items) {
        if (!std::getline(in, s)) throw FormatError(std::string("checkpoint: truncated vocabulary ") + name);
      }
      return Index::from_items(items, reserved);
    };
    vocab.words = read_index("words", true);
    vocab.chars = read_index("chars", true);
    vocab.pos = read_index("pos", true);
    vocab.labels = read_index("labels", false);
    Rng unused(0);
    Model model(rs.model, std::move(vocab), unused);
    ad::NamedTensors stored = ad::read_tensors(in);
    if (stored.size() != model.params_.size()) throw FormatError("checkpoint: parameter count mismatch");
    for (std::size_t k = 0; k < stored.size(); ++k) {
      auto& [name, target] = model.params_[k];
      const auto& [stored_name, value] = stored[k];
      if (stored_name != name || value.shape() != target.shape()) {
        throw FormatError("checkpoint: parameter '" + stored_name + "' " + ad::shape_str(value.shape()) +
                          " does not match '" + name + "' " + ad::shape_str(target.shape()));
      }
      std::copy(value.data().begin(), value.data().end(), target.mutable_data().begin());
    }
    return model;
  }

  static Model load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
    return load(in);
  }

 private:
  ad::Tensor drop(const ad::Tensor& t, const Pass& pass) const {
    if (!pass.training || pass.rng == nullptr || config_.dropout == 0.0) return t;
    return ad::dropout(t, config_.dropout, true, *pass.rng);
  }

  ad::Tensor add_param(const std::string& name, ad::Tensor t) {
    params_.emplace_back(name, t);
    return t;
  }

  Mlp make_mlp(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    Mlp m;
    for (int k = 0; k < config_.mlp_layers; ++k) {
      const std::size_t from = k == 0 ? in : out;
      m.weights.push_back(add_param(name + std::to_string(k) + ".w", detail::uniform_param({from, out}, from, out, rng)));
      m.biases.push_back(add_param(name + std::to_string(k) + ".b", ad::parameter_zeros({out})));
    }
    return m;
  }

  ad::LstmWeights make_lstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng) {
    return {add_param(name + ".w", detail::uniform_param({4 * hidden, in + hidden}, in + hidden, 4 * hidden, rng)),
            add_param(name + ".b", ad::parameter_zeros({4 * hidden}))};
  }

  void build(Rng& rng) {
    const auto sz = [](int v) { return static_cast<std::size_t>(v); };
    const std::size_t C = sz(config_.char_dim), F = sz(config_.cnn_filters), w = sz(config_.cnn_window);
    const std::size_t H = sz(config_.encoder_size), D = sz(config_.decoder_size);
    const std::size_t A = sz(config_.arc_mlp_size), M = sz(config_.label_mlp_size), L = vocab_.labels.size();
    const std::size_t input = sz(config_.input_dim());

    char_emb_ = add_param("char_emb", detail::uniform_param({vocab_.chars.size(), C}, vocab_.chars.size(), C, rng));
    char_conv_ = add_param("char_conv.w", detail::uniform_param({F, w * C}, w * C, F, rng));
    char_conv_bias_ = add_param("char_conv.b", ad::parameter_zeros({F}));
    word_emb_ = add_param("word_emb", detail::uniform_param({vocab_.words.size(), sz(config_.word_dim)},
                                                            vocab_.words.size(), sz(config_.word_dim), rng));
    if (config_.use_pos) {
      pos_emb_ = add_param("pos_emb", detail::uniform_param({vocab_.pos.size(), sz(config_.pos_dim)}, vocab_.pos.size(),
                                                            sz(config_.pos_dim), rng));
    }
    root_x_ = add_param("root_x", detail::uniform_param({input}, input, 1, rng));
    for (int l = 0; l < config_.encoder_layers; ++l) {
      const std::size_t in = l == 0 ? input : 2 * H;
      auto fw = make_lstm("encoder" + std::to_string(l) + ".fw", in, H, rng);
      auto bw = make_lstm("encoder" + std::to_string(l) + ".bw", in, H, rng);
      encoder_.emplace_back(fw, bw);
    }
    for (int l = 0; l < config_.decoder_layers; ++l) {
      decoder_.push_back(make_lstm("decoder" + std::to_string(l), l == 0 ? 2 * H : D, D, rng));
    }
    arc_head_mlp_ = make_mlp("arc_head_mlp", 2 * H, A, rng);
    arc_dep_mlp_ = make_mlp("arc_dep_mlp", D, A, rng);
    label_head_mlp_ = make_mlp("label_head_mlp", 2 * H, M, rng);
    label_dep_mlp_ = make_mlp("label_dep_mlp", D, M, rng);
    arc_.W = add_param("arc.W", detail::uniform_param({A, A}, A, A, rng));
    arc_.U = add_param("arc.U", detail::uniform_param({A}, A, 1, rng));
    arc_.V = add_param("arc.V", detail::uniform_param({A}, A, 1, rng));
    arc_.b = add_param("arc.b", ad::parameter_zeros({1}));
    label_.W = add_param("label.W", detail::uniform_param({L * M, M}, M, M, rng));
    label_.U = add_param("label.U", detail::uniform_param({L, M}, M, L, rng));
    label_.V = add_param("label.V", detail::uniform_param({L, M}, M, L, rng));
    label_.b = add_param("label.b", ad::parameter_zeros({L}));
  }

  ModelConfig config_;
  Vocabulary vocab_;
  ad::NamedTensors params_;
  ad::Tensor char_emb_, char_conv_, char_conv_bias_, word_emb_, pos_emb_, root_x_;
  std::vector<std::pair<ad::LstmWeights, ad::LstmWeights>> encoder_;
  std::vector<ad::LstmWeights> decoder_;
  Mlp arc_head_mlp_, arc_dep_mlp_, label_head_mlp_, label_dep_mlp_;
  ArcBiaffine arc_;
  LabelBiaffine label_;
};

// Whitespace-separated `word v1 ... vd` lines. Words are lowercased.
inline std::unordered_map<std::string, std::vector<double>> read_word_vectors(std::istream& in) {
  std::unordered_map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t lineno = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> v;
    std::string tok;
    while (fields >> tok) {
      char* end = nullptr;
      v.push_back(std::strtod(tok.c_str(), &end));
      if (end != tok.c_str() + tok.size()) throw FormatError("embeddings line " + std::to_string(lineno) + ": bad value '" + tok + "'");
    }
    if (v.empty()) throw FormatError("embeddings line " + std::to_string(lineno) + ": no values");
    if (dim == 0) dim = v.size();
    if (v.size() != dim) throw FormatError("embeddings line " + std::to_string(lineno) + ": inconsistent dimension");
    out.emplace(lowercase(word), std::move(v));
  }
  return out;
}

inline std::unordered_map<std::string, std::vector<double>> load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embeddings '" + path + "'");
  return read_word_vectors(in);
}

}  // namespace disco

#endif  // DISCO_MODEL_HPP
