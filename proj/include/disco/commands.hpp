#ifndef DISCO_COMMANDS_HPP
#define DISCO_COMMANDS_HPP

// Batch commands behind the `disco` executable. Each takes explicit options
// and streams so it can be driven from tests without a process boundary.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "disco/config.hpp"
#include "disco/decoding.hpp"
#include "disco/dependency.hpp"
#include "disco/encoding.hpp"
#include "disco/error.hpp"
#include "disco/evaluation.hpp"
#include "disco/generator.hpp"
#include "disco/head_rules.hpp"
#include "disco/model.hpp"
#include "disco/training.hpp"
#include "disco/trees.hpp"

namespace disco::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kOtherFailure = 1,
  kFormatFailure = 2,
  kAlignmentFailure = 3,
  kNumericFailure = 4,
  kStructureFailure = 5,
};

// Existence check for inputs, run before any work starts.
inline void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw UsageError(std::string(what) + " '" + path + "' is not a readable file");
}

// Output paths must sit in an existing directory.
inline void require_writable(const std::string& path, const char* what) {
  if (path.empty() || path == "-") return;
  auto dir = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!dir.empty() && !std::filesystem::is_directory(dir, ec)) {
    throw UsageError(std::string(what) + " '" + path + "': directory does not exist");
  }
}

inline std::vector<ConstituentTree> read_treebank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open treebank '" + path + "'");
  try {
    return read_treebank(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline std::vector<AugmentedDependencyTree> read_dependency_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dependency file '" + path + "'");
  try {
    return read_dependency_file(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// "-" or empty means stdout.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      out_ = &fallback;
    } else {
      file_.open(path);
      if (!file_) throw FormatError("cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

// ---- convert ----------------------------------------------------------------

enum class Direction { ToDependencies, ToConstituents };

struct ConvertOptions {
  std::string input;
  std::string output;
  std::string rules;  // needed for ToDependencies
  Direction direction = Direction::ToDependencies;
};

struct ConvertSummary {
  std::size_t sentences = 0;
  std::size_t unaries_removed = 0;
  std::size_t labels_repaired = 0;
};

inline ConvertSummary convert(const ConvertOptions& o, std::ostream& out, std::ostream& log) {
  require_file(o.input, "input");
  require_writable(o.output, "output");
  ConvertSummary s;
  Output sink(o.output, out);
  if (o.direction == Direction::ToDependencies) {
    require_file(o.rules, "head rules");
    HeadRuleSet rules = load_head_rules(o.rules);
    for (const ConstituentTree& t : read_treebank_file(o.input)) {
      s.unaries_removed += count_unaries(t);
      write_dependencies(*sink, make_example(t, rules).dep);
      ++s.sentences;
    }
  } else {
    for (const AugmentedDependencyTree& d : read_dependency_path(o.input)) {
      AugmentedDependencyTree fixed = repair_labels(d);
      for (std::size_t k = 0; k < d.size(); ++k) s.labels_repaired += !(fixed.labels[k] == d.labels[k]);
      *sink << emit_discbracket(decode(fixed)) << '\n';
      ++s.sentences;
    }
  }
  log << "sentences: " << s.sentences << "\n";
  if (o.direction == Direction::ToDependencies) log << "unary nodes removed: " << s.unaries_removed << "\n";
  else log << "labels repaired: " << s.labels_repaired << "\n";
  return s;
}

// ---- gen --------------------------------------------------------------------

struct GenOptions {
  int count = 100;
  int min_length = 1;
  int max_length = 10;
  double rate = 0.3;
  std::uint64_t seed = 1;
  std::string output;
};

inline void gen(const GenOptions& o, std::ostream& out, std::ostream& log) {
  require_writable(o.output, "output");
  log << "seed: " << o.seed << "\n";
  Output sink(o.output, out);
  write_treebank(*sink, generate_corpus(o.count, o.min_length, o.max_length, o.rate, o.seed));
}

// ---- roundtrip --------------------------------------------------------------

struct RoundtripOptions {
  std::string input;
  std::string rules;
};

struct RoundtripSummary {
  std::size_t sentences = 0;
  std::size_t failures = 0;
  std::size_t unaries_removed = 0;
};

// decode(encode(t)) against the unaryless, head-annotated input.
inline RoundtripSummary roundtrip(const RoundtripOptions& o, std::ostream& log) {
  require_file(o.input, "input");
  require_file(o.rules, "head rules");
  HeadRuleSet rules = load_head_rules(o.rules);
  RoundtripSummary s;
  std::size_t line = 0;
  for (const ConstituentTree& t : read_treebank_file(o.input)) {
    ++line;
    s.unaries_removed += count_unaries(t);
    Example ex = make_example(t, rules);
    const std::string want = emit_discbracket(ex.tree);
    const std::string got = emit_discbracket(decode(ex.dep));
    ++s.sentences;
    if (got != want) {
      ++s.failures;
      log << "mismatch in sentence " << line << "\n  want " << want << "\n  got  " << got << "\n";
    }
  }
  log << "sentences: " << s.sentences << "  failures: " << s.failures << "  unary nodes removed: " << s.unaries_removed
      << "\n";
  return s;
}

// ---- eval -------------------------------------------------------------------

struct EvalCommandOptions {
  std::string gold;
  std::string pred;
  std::string json;   // optional machine-readable report
  std::string rules;  // when set, LAS / UAS are scored too
  EvalOptions eval;
};

inline EvalReport eval(const EvalCommandOptions& o, std::ostream& out) {
  require_file(o.gold, "gold treebank");
  require_file(o.pred, "predicted treebank");
  require_writable(o.json, "json report");
  if (!o.rules.empty()) require_file(o.rules, "head rules");
  std::vector<ConstituentTree> gold = read_treebank_file(o.gold);
  std::vector<ConstituentTree> pred = read_treebank_file(o.pred);
  EvalReport r = bracket_f1(gold, pred, o.eval);
  if (!o.rules.empty()) {
    HeadRuleSet rules = load_head_rules(o.rules);
    std::vector<AugmentedDependencyTree> gd, pd;
    for (const auto& t : gold) gd.push_back(make_example(t, rules).dep);
    for (const auto& t : pred) pd.push_back(make_example(t, rules).dep);
    EvalReport deps = las_uas(gd, pd);
    r.words = deps.words;
    r.heads_correct = deps.heads_correct;
    r.labeled_correct = deps.labeled_correct;
  }
  out << format_report(r, !o.rules.empty());
  if (!o.json.empty()) {
    std::ofstream j(o.json);
    if (!j) throw FormatError("cannot write '" + o.json + "'");
    j << report_json(r).dump(2) << '\n';
  }
  return r;
}

// ---- train ------------------------------------------------------------------

struct TrainCommandOptions {
  std::string train;
  std::string dev;  // defaults to the training file
  std::string rules;
  std::string model;
  std::string config;
  std::string report;  // JSON summary
  std::string embeddings;
  std::optional<std::uint64_t> seed;
  std::optional<int> beam;
  std::optional<int> epochs;
  std::optional<double> target_f1;
  std::optional<double> target_las;
  bool no_pos = false;
};

// Adds every pretrained word to the vocabulary so the vectors are reachable
// from the start; words absent from the file keep their random rows.
inline std::size_t extend_with_vectors(Vocabulary& vocab,
                                       const std::unordered_map<std::string, std::vector<double>>& vectors) {
  std::vector<std::string> words;
  for (const auto& [w, v] : vectors) words.push_back(w);
  std::sort(words.begin(), words.end());  // map order is unspecified
  std::size_t added = 0;
  for (const std::string& w : words) {
    if (!vocab.words.contains(w)) {
      vocab.words.add(w);
      ++added;
    }
  }
  return added;
}

inline TrainReport train_command(const TrainCommandOptions& o, std::ostream& log) {
  require_file(o.train, "training treebank");
  if (!o.dev.empty()) require_file(o.dev, "dev treebank");
  require_file(o.rules, "head rules");
  if (!o.config.empty()) require_file(o.config, "config");
  if (!o.embeddings.empty()) require_file(o.embeddings, "embeddings");
  if (o.model.empty()) throw UsageError("train: a model output path is required");
  require_writable(o.model, "model");
  require_writable(o.report, "report");

  RunSettings settings;
  if (!o.config.empty()) settings = load_settings(o.config, settings);
  if (o.seed) settings.train.seed = *o.seed;
  if (o.beam) settings.train.beam = *o.beam;
  if (o.epochs) settings.train.epochs = *o.epochs;
  if (o.no_pos) settings.model.use_pos = false;
  if (!o.embeddings.empty()) settings.model.use_pretrained = true;
  settings.model.validate();
  settings.train.validate();
  log << "seed: " << settings.train.seed << "\n";

  HeadRuleSet rules = load_head_rules(o.rules);
  std::vector<Example> corpus = make_examples(read_treebank_file(o.train), rules);
  std::vector<Example> dev = o.dev.empty() ? corpus : make_examples(read_treebank_file(o.dev), rules);
  Vocabulary vocab = build_vocabulary(corpus);
  std::unordered_map<std::string, std::vector<double>> vectors;
  if (!o.embeddings.empty()) {
    vectors = load_word_vectors(o.embeddings);
    const std::size_t added = extend_with_vectors(vocab, vectors);
    log << "embeddings: " << vectors.size() << " vectors, " << added << " new words\n";
  }

  Rng init(settings.train.seed);
  Model model(settings.model, std::move(vocab), init);
  if (!vectors.empty()) model.set_word_vectors(vectors);
  log << "sentences: " << corpus.size() << " train, " << dev.size() << " dev; parameters: " << model.parameter_count()
      << "; labels: " << model.vocab().labels.size() << "\n";

  TrainOptions topt;
  topt.log = &log;
  topt.target_f1 = o.target_f1;
  topt.target_las = o.target_las;
  TrainReport report = train(model, corpus, dev, settings.train, topt);
  model.save_file(o.model);
  if (const EpochRecord* b = report.best()) {
    log << "best epoch " << b->epoch << ": las " << b->dev_las << " f1 " << b->dev_f1 << "\n";
  }
  if (!o.report.empty()) {
    std::ofstream j(o.report);
    if (!j) throw FormatError("cannot write '" + o.report + "'");
    j << report.to_json().dump(2) << '\n';
  }
  return report;
}

// ---- parse ------------------------------------------------------------------

enum class InputFormat { Auto, Text, Treebank };

struct ParseCommandOptions {
  std::string input;
  std::string output;
  std::string model;
  int beam = 10;
  InputFormat format = InputFormat::Auto;
  bool no_pos = false;  // drop any tags found in the input
};

// One sentence per line; tokens are `form` or `form/pos`.
inline std::vector<std::vector<Token>> read_sentences(std::istream& in) {
  std::vector<std::vector<Token>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<Token> sent;
    std::string w;
    while (words >> w) {
      auto [form, pos] = detail::split_form_pos(w);
      sent.push_back({static_cast<int>(sent.size()), form, pos});
    }
    if (!sent.empty()) out.push_back(std::move(sent));
  }
  return out;
}

inline std::size_t parse_command(const ParseCommandOptions& o, std::ostream& out, std::ostream& log) {
  require_file(o.input, "input");
  require_file(o.model, "model");
  require_writable(o.output, "output");
  if (o.beam < 1) throw UsageError("parse: beam width must be at least 1");
  Model model = Model::load_file(o.model);

  InputFormat format = o.format;
  if (format == InputFormat::Auto) {
    std::ifstream peek(o.input);
    std::string line;
    while (std::getline(peek, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
    }
    const auto first = line.find_first_not_of(" \t");
    format = first != std::string::npos && line[first] == '(' ? InputFormat::Treebank : InputFormat::Text;
  }
  std::vector<std::vector<Token>> sentences;
  if (format == InputFormat::Treebank) {
    for (const ConstituentTree& t : read_treebank_file(o.input)) sentences.push_back(t.tokens);
  } else {
    std::ifstream in(o.input);
    sentences = read_sentences(in);
  }
  Output sink(o.output, out);
  for (std::vector<Token>& s : sentences) {
    if (o.no_pos) {
      for (Token& t : s) t.pos = std::string(kNoPos);
    }
    *sink << emit_discbracket(beam_parse(model, s, o.beam).tree) << '\n';
  }
  log << "parsed " << sentences.size() << " sentences (beam " << o.beam << ")\n";
  return sentences.size();
}

// Runs `body` and maps library errors onto exit codes.
template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kFormatFailure;
  } catch (const AlignmentError& e) {
    err << "alignment error: " << e.what() << "\n";
    return kAlignmentFailure;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const StructureError& e) {
    err << "structure error: " << e.what() << "\n";
    return kStructureFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kOtherFailure;
  }
}

}  // namespace disco::cli

#endif  // DISCO_COMMANDS_HPP
