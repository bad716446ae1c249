// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every line passes. Usage: acceptance <data dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "disco/commands.hpp"

using namespace disco;

namespace {

// Pinned tolerances and budgets.
constexpr double kGoldenSeconds = 1.0;
constexpr int kRoundTripTrees = 1000;
constexpr int kRoundTripMaxLength = 20;
constexpr double kRoundTripSeconds = 30.0;
constexpr double kGradTolerance = 1e-3;
constexpr double kGradSeconds = 300.0;
constexpr std::size_t kGradCoordsPerParam = 48;
constexpr double kLearnTarget = 98.0;
constexpr int kLearnEpochs = 500;
constexpr double kLearnSeconds = 900.0;
constexpr int kFuzzSentences = 500;
constexpr int kBeamSentences = 100;
constexpr int kExhaustiveItems = 50;
constexpr double kExhaustiveAgreement = 0.95;
constexpr double kScoreTie = 1e-12;
constexpr double kArithmeticTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs a criterion; an escaping exception counts as a failure.
void criterion(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(ok, name, detail);
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

std::string data_dir;
HeadRuleSet rules() { return load_head_rules(data_dir + "/negra_sample.headrules"); }

Model random_model(const ModelConfig& config, const std::vector<Example>& corpus, std::uint64_t seed) {
  Rng rng(seed);
  return Model(config, build_vocabulary(corpus), rng);
}

// Acyclic iff following heads from every word reaches 0 within n steps.
bool acyclic(const std::vector<int>& heads) {
  const std::size_t n = heads.size() - 1;
  for (std::size_t i = 1; i <= n; ++i) {
    int k = static_cast<int>(i);
    for (std::size_t steps = 0; k != 0 && steps <= n; ++steps) k = heads[static_cast<std::size_t>(k)];
    if (k != 0) return false;
  }
  return true;
}

// Best sequence log-probability over every acyclic head assignment.
double exhaustive_best(const ScoreMatrix& lp) {
  const int n = static_cast<int>(lp.size());
  std::vector<int> heads(static_cast<std::size_t>(n) + 1, 0);
  heads[0] = -1;
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(int)> rec = [&](int i) {
    if (i > n) {
      if (acyclic(heads)) best = std::max(best, sequence_log_prob(lp, heads));
      return;
    }
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      heads[static_cast<std::size_t>(i)] = j;
      rec(i + 1);
    }
  };
  rec(1);
  return best;
}

bool well_formed(const ParseResult& r, std::size_t n) {
  try {
    check_structure(r.dep);
    validate(r.tree);
  } catch (const std::exception&) {
    return false;
  }
  std::vector<int> heads{-1};
  heads.insert(heads.end(), r.dep.heads.begin(), r.dep.heads.end());
  return r.dep.size() == n && acyclic(heads) && std::count(r.dep.heads.begin(), r.dep.heads.end(), 0) == 1 &&
         yield(r.tree.root).size() == n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <data dir>\n", argv[0]);
    return 2;
  }
  data_dir = argv[1];

  criterion("gap-example-golden", [] {
    const auto start = Clock::now();
    std::ifstream in(data_dir + "/gap_example.discbracket");
    ConstituentTree tree = assign_heads(read_treebank(in).at(0), rules());
    AugmentedDependencyTree dep = encode(tree);
    const std::vector<int> want_heads{4, 0, 4, 2, 2};
    const std::vector<std::string> want_labels{"NP#2", "root", "NP#1", "S#1", "VROOT#2"};
    std::vector<std::string> labels;
    for (const AugmentedLabel& l : dep.labels) labels.push_back(l.str());
    const bool arcs = dep.heads == want_heads && labels == want_labels;
    const bool back = decode(dep) == tree && emit_discbracket(decode(dep)) == emit_discbracket(tree);
    const double s = seconds_since(start);
    return std::pair{arcs && back && s < kGoldenSeconds,
                     fmt("arcs %s, decode %s, %.3fs", arcs ? "exact" : "WRONG", back ? "exact" : "WRONG", s)};
  });

  criterion("round-trip-1000", [] {
    const auto start = Clock::now();
    HeadRuleSet r = rules();
    int bad = 0;
    for (const ConstituentTree& t : generate_corpus(kRoundTripTrees, 1, kRoundTripMaxLength, 0.3, 1001)) {
      Example ex = make_example(t, r);
      bad += !(decode(ex.dep) == ex.tree);
    }
    const double s = seconds_since(start);
    return std::pair{bad == 0 && s < kRoundTripSeconds, fmt("%d/%d failures, %.2fs", bad, kRoundTripTrees, s)};
  });

  criterion("oracle-ceiling", [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "disco_acceptance_oracle";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    cli::gen({1000, 1, kRoundTripMaxLength, 0.3, 1002, (dir / "gold.txt").string()}, sink, sink);
    cli::convert({(dir / "gold.txt").string(), (dir / "deps.txt").string(), data_dir + "/negra_sample.headrules",
                  cli::Direction::ToDependencies},
                 sink, sink);
    cli::convert({(dir / "deps.txt").string(), (dir / "back.txt").string(), "", cli::Direction::ToConstituents}, sink,
                 sink);
    EvalReport e = bracket_f1(cli::read_treebank_file((dir / "gold.txt").string()),
                              cli::read_treebank_file((dir / "back.txt").string()));
    fs::remove_all(dir);
    return std::pair{e.f1() == 100.0 && e.disc_f1() == 100.0 && e.disc.tp > 0,
                     fmt("F1 %.2f, Disc-F1 %.2f over %ld brackets (%ld discontinuous)", e.f1(), e.disc_f1(),
                         e.brackets.tp + e.brackets.fn, e.disc.tp + e.disc.fn)};
  });

  criterion("grad-check-64", [] {
    const auto start = Clock::now();
    std::vector<Example> three = make_examples(generate_corpus(3, 3, 8, 0.3, 1003), rules());
    ModelConfig c;
    c.cnn_filters = c.char_dim = c.word_dim = c.pos_dim = 64;
    c.encoder_layers = c.decoder_layers = 1;
    c.encoder_size = c.decoder_size = c.arc_mlp_size = c.label_mlp_size = 64;
    c.dropout = 0.0;
    Model m = random_model(c, three, 1004);
    auto loss = [&] {
      std::vector<ad::Tensor> terms;
      for (const Example& ex : three) terms.push_back(joint_loss(m, ex.dep).total());
      return ad::add_n(terms);
    };
    ad::GradCheckOptions opt;
    opt.max_coords_per_param = kGradCoordsPerParam;
    opt.seed = 1005;
    const double err = ad::grad_check(loss, m.parameters(), opt);
    const double s = seconds_since(start);
    return std::pair{err < kGradTolerance && s < kGradSeconds,
                     fmt("max rel err %.2e (< %.0e), %zu tensors x %zu coords, %.1fs", err, kGradTolerance,
                         m.parameters().size(), kGradCoordsPerParam, s)};
  });

  criterion("learnability-mini-treebank", [] {
    const auto start = Clock::now();
    RunSettings settings = load_settings(data_dir + "/tiny.conf");
    settings.train.epochs = std::min(settings.train.epochs, kLearnEpochs);
    std::vector<Example> corpus = make_examples(cli::read_treebank_file(data_dir + "/mini_treebank.discbracket"), rules());
    Rng init(settings.train.seed);
    Model m(settings.model, build_vocabulary(corpus), init);
    TrainOptions opt;
    opt.target_f1 = kLearnTarget;
    opt.target_las = kLearnTarget;
    TrainReport r = train(m, corpus, corpus, settings.train, opt);
    EvalReport e = evaluate_model(m, corpus, settings.train.beam);
    const double s = seconds_since(start);
    return std::pair{e.f1() >= kLearnTarget && e.las() >= kLearnTarget && s < kLearnSeconds,
                     fmt("F1 %.2f, LAS %.2f at epoch %d of %d, %.0fs", e.f1(), e.las(), r.best_epoch,
                         settings.train.epochs, s)};
  });

  criterion("decoder-fuzz-500", [] {
    std::vector<Example> sentences = make_examples(generate_corpus(kFuzzSentences, 1, 20, 0.3, 1006), rules());
    Model m = random_model(tiny_model_config(), sentences, 1007);
    int ok = 0;
    for (const Example& ex : sentences) ok += well_formed(beam_parse(m, ex.dep.tokens, 10), ex.dep.size());
    return std::pair{ok == kFuzzSentences, fmt("%d/%d well-formed", ok, kFuzzSentences)};
  });

  criterion("beam-dominance", [] {
    std::vector<Example> sentences = make_examples(generate_corpus(kBeamSentences, 1, 20, 0.3, 1008), rules());
    Model m = random_model(tiny_model_config(), sentences, 1009);
    int dominated = 0, identical = 0;
    for (const Example& ex : sentences) {
      ParseResult g = greedy_parse(m, ex.dep.tokens);
      ParseResult b = beam_parse(m, ex.dep.tokens, 10);
      ParseResult one = beam_parse(m, ex.dep.tokens, 1);
      dominated += b.log_prob >= g.log_prob;
      identical += one.dep == g.dep && one.tree == g.tree;
    }
    return std::pair{dominated == kBeamSentences && identical == kBeamSentences,
                     fmt("k=10 >= greedy on %d/%d, k=1 == greedy on %d/%d", dominated, kBeamSentences, identical,
                         kBeamSentences)};
  });

  criterion("exhaustive-agreement", [] {
    std::vector<Example> sentences = make_examples(generate_corpus(kExhaustiveItems, 1, 4, 0.3, 1010), rules());
    Model m = random_model(tiny_model_config(), sentences, 1011);
    int matches = 0, exceeded = 0;
    for (const Example& ex : sentences) {
      ScoreMatrix lp;
      {
        ad::NoGradGuard no_grad;
        lp = arc_log_probs(m, m.run(ex.dep.tokens));
      }
      const double best = exhaustive_best(lp);
      const double beam = beam_search(lp, 10).log_prob;
      exceeded += beam > best + kScoreTie;
      matches += std::abs(beam - best) <= kScoreTie;
    }
    const double rate = static_cast<double>(matches) / kExhaustiveItems;
    return std::pair{exceeded == 0 && rate >= kExhaustiveAgreement,
                     fmt("matches %d/%d (%.0f%%), exceeds optimum %d times", matches, kExhaustiveItems, 100 * rate,
                         exceeded)};
  });

  criterion("evaluation-arithmetic", [] {
    auto one = [](const char* g, const char* p) { return bracket_f1({parse_discbracket(g)}, {parse_discbracket(p)}); };
    const char* gap = "(VROOT (S (NP 0=Es/PPER (NP 2=nichts/PIAT 3=Interessantes/NN)) 1=kam/VVFIN) 4=./$.)";
    const double f1 = one(gap, "(VROOT (S (NP 0=Es/PPER 2=nichts/PIAT 3=Interessantes/NN) 1=kam/VVFIN) 4=./$.)").f1();
    const double disc =
        one("(VROOT (A 0=a 2=c) (B 1=b 3=d) 4=e 5=f)", "(VROOT (A 0=a 2=c) (C 1=b 4=e) (D 3=d 5=f))").disc_f1();
    AugmentedDependencyTree gold = encode(assign_heads(parse_discbracket(gap), rules()));
    AugmentedDependencyTree moved = gold;
    moved.heads[2] = 2;  // nichts attached to kam
    const double uas = las_uas({gold}, {moved}).uas();
    const bool ok = std::abs(f1 - 80.0) < kArithmeticTolerance && std::abs(disc - 40.0) < kArithmeticTolerance &&
                    std::abs(uas - 80.0) < kArithmeticTolerance;
    return std::pair{ok, fmt("F1 %.4f, Disc-F1 %.4f, UAS %.4f", f1, disc, uas)};
  });

  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
