#ifndef DISCO_CONFIG_HPP
#define DISCO_CONFIG_HPP

// Model / training hyper-parameters and the `key = value` config format.
// Defaults follow the reference architecture; the `tiny` profile is the
// desk-scale setting used for tests and the bundled mini-treebank.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "disco/error.hpp"

namespace disco {

struct ModelConfig {
  int cnn_window = 3;
  int cnn_filters = 50;
  int char_dim = 100;
  int word_dim = 100;
  int pos_dim = 100;
  int encoder_layers = 3;
  int encoder_size = 512;
  int decoder_layers = 1;
  int decoder_size = 512;
  double dropout = 0.33;
  int mlp_layers = 1;
  std::string mlp_activation = "elu";
  int arc_mlp_size = 512;
  int label_mlp_size = 128;
  bool use_pos = true;
  bool use_pretrained = false;

  int input_dim() const { return cnn_filters + word_dim + (use_pos ? pos_dim : 0); }

  void validate() const {
    for (auto [name, v] : {std::pair<const char*, int>{"cnn_window", cnn_window}, {"cnn_filters", cnn_filters},
                           {"char_dim", char_dim}, {"word_dim", word_dim}, {"pos_dim", pos_dim},
                           {"encoder_layers", encoder_layers}, {"encoder_size", encoder_size},
                           {"decoder_layers", decoder_layers}, {"decoder_size", decoder_size},
                           {"mlp_layers", mlp_layers}, {"arc_mlp_size", arc_mlp_size},
                           {"label_mlp_size", label_mlp_size}}) {
      if (v <= 0) throw FormatError(std::string("config: ") + name + " must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw FormatError("config: dropout must be in [0, 1)");
    if (mlp_activation != "elu") throw FormatError("config: only mlp_activation = elu is supported");
  }
};

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  double decay_rate = 0.75;
  int decay_steps = 5000;
  double clip = 5.0;
  int batch_size = 32;
  int epochs = 100;
  int patience = 20;
  int beam = 10;
  std::uint64_t seed = 1;

  void validate() const {
    if (learning_rate <= 0) throw FormatError("config: learning_rate must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) throw FormatError("config: betas must be in [0, 1)");
    if (decay_steps <= 0 || batch_size <= 0 || epochs <= 0 || patience <= 0 || beam <= 0) {
      throw FormatError("config: decay_steps, batch_size, epochs, patience and beam must be positive");
    }
    if (clip <= 0) throw FormatError("config: clip must be positive");
  }
};

// Desk-scale sizes: trains on a 50-sentence corpus in minutes.
inline ModelConfig tiny_model_config() {
  ModelConfig c;
  c.cnn_filters = 16;
  c.char_dim = 16;
  c.word_dim = 32;
  c.pos_dim = 16;
  c.encoder_layers = 1;
  c.encoder_size = 64;
  c.decoder_size = 64;
  c.dropout = 0.0;
  c.arc_mlp_size = 64;
  c.label_mlp_size = 32;
  return c;
}

struct RunSettings {
  ModelConfig model;
  TrainConfig train;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw FormatError("config: " + key + " expects a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) throw FormatError("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

}  // namespace detail

// Applies one `key = value` setting; unknown keys are errors.
inline void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  ModelConfig& m = s.model;
  TrainConfig& t = s.train;
  const std::map<std::string, int*> ints = {
      {"cnn_window", &m.cnn_window},       {"cnn_filters", &m.cnn_filters},     {"char_dim", &m.char_dim},
      {"word_dim", &m.word_dim},           {"pos_dim", &m.pos_dim},             {"encoder_layers", &m.encoder_layers},
      {"encoder_size", &m.encoder_size},   {"decoder_layers", &m.decoder_layers}, {"decoder_size", &m.decoder_size},
      {"mlp_layers", &m.mlp_layers},       {"arc_mlp_size", &m.arc_mlp_size},   {"label_mlp_size", &m.label_mlp_size},
      {"decay_steps", &t.decay_steps},     {"batch_size", &t.batch_size},       {"epochs", &t.epochs},
      {"patience", &t.patience},           {"beam", &t.beam}};
  const std::map<std::string, double*> reals = {
      {"dropout", &m.dropout},     {"learning_rate", &t.learning_rate}, {"beta1", &t.beta1},
      {"beta2", &t.beta2},         {"epsilon", &t.epsilon},             {"decay_rate", &t.decay_rate},
      {"clip", &t.clip}};
  if (auto it = ints.find(key); it != ints.end()) {
    *it->second = parse_number<int>(key, value);
  } else if (auto jt = reals.find(key); jt != reals.end()) {
    *jt->second = parse_number<double>(key, value);
  } else if (key == "embed_dim") {
    m.char_dim = m.word_dim = m.pos_dim = parse_number<int>(key, value);
  } else if (key == "mlp_activation") {
    m.mlp_activation = value;
  } else if (key == "use_pos") {
    m.use_pos = parse_bool(key, value);
  } else if (key == "use_pretrained") {
    m.use_pretrained = parse_bool(key, value);
  } else if (key == "seed") {
    t.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "profile") {
    if (value == "tiny") m = tiny_model_config();
    else if (value != "default") throw FormatError("config: unknown profile '" + value + "'");
  } else {
    throw FormatError("config: unknown key '" + key + "'");
  }
}

// `key = value` lines, `#` comments. A `profile` line resets the model
// sizes, so it should come first.
inline void read_settings(std::istream& in, RunSettings& s) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return x.substr(b, x.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const FormatError& e) {
      throw FormatError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline RunSettings load_settings(const std::string& path, RunSettings base = {}) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config '" + path + "'");
  read_settings(in, base);
  return base;
}

// Model settings as `key = value` lines (the checkpoint header).
inline std::string model_settings_text(const ModelConfig& m) {
  std::ostringstream out;
  out << "cnn_window = " << m.cnn_window << "\ncnn_filters = " << m.cnn_filters << "\nchar_dim = " << m.char_dim
      << "\nword_dim = " << m.word_dim << "\npos_dim = " << m.pos_dim << "\nencoder_layers = " << m.encoder_layers
      << "\nencoder_size = " << m.encoder_size << "\ndecoder_layers = " << m.decoder_layers
      << "\ndecoder_size = " << m.decoder_size << "\ndropout = " << m.dropout << "\nmlp_layers = " << m.mlp_layers
      << "\nmlp_activation = " << m.mlp_activation << "\narc_mlp_size = " << m.arc_mlp_size
      << "\nlabel_mlp_size = " << m.label_mlp_size << "\nuse_pos = " << (m.use_pos ? "true" : "false")
      << "\nuse_pretrained = " << (m.use_pretrained ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace disco

#endif  // DISCO_CONFIG_HPP
