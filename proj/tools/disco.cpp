#include <iostream>

#include <CLI11.hpp>

#include "disco/commands.hpp"

using namespace disco;

int main(int argc, char** argv) {
  CLI::App app{"Discontinuous constituency parsing via augmented dependencies"};
  app.require_subcommand(1);

  // convert
  cli::ConvertOptions conv;
  std::string direction = "deps";
  auto* c = app.add_subcommand("convert", "Convert between discbracket trees and augmented dependency files");
  c->add_option("input", conv.input, "Input file")->required();
  c->add_option("-o,--output", conv.output, "Output file (default stdout)");
  c->add_option("--rules", conv.rules, "Head-rule file (trees to dependencies)");
  c->add_option("--to", direction, "Target format")->check(CLI::IsMember({"deps", "trees"}));

  // gen
  cli::GenOptions g;
  auto* gn = app.add_subcommand("gen", "Write a synthetic discontinuous treebank");
  gn->add_option("-n,--count", g.count, "Number of sentences")->check(CLI::NonNegativeNumber);
  gn->add_option("--size", g.max_length, "Maximum sentence length")->check(CLI::PositiveNumber);
  gn->add_option("--min-length", g.min_length, "Minimum sentence length")->check(CLI::PositiveNumber);
  gn->add_option("--rate", g.rate, "Chance of making a constituent discontinuous")->check(CLI::Range(0.0, 1.0));
  gn->add_option("--seed", g.seed, "Random seed");
  gn->add_option("-o,--output", g.output, "Output file (default stdout)");

  // roundtrip
  cli::RoundtripOptions rt;
  auto* r = app.add_subcommand("roundtrip", "Check decode(encode(t)) == t over a treebank");
  r->add_option("input", rt.input, "Treebank")->required();
  r->add_option("--rules", rt.rules, "Head-rule file")->required();

  // eval
  cli::EvalCommandOptions ev;
  std::vector<std::string> punct, roots;
  auto* e = app.add_subcommand("eval", "Score predicted trees against gold trees");
  e->add_option("gold", ev.gold, "Gold treebank")->required();
  e->add_option("pred", ev.pred, "Predicted treebank")->required();
  e->add_option("--json", ev.json, "Also write a JSON report here");
  e->add_option("--rules", ev.rules, "Head-rule file; adds LAS and UAS");
  e->add_option("--punct", punct, "POS tags treated as punctuation");
  e->add_option("--root", roots, "Root labels left out of scoring");

  // train
  cli::TrainCommandOptions tr;
  auto* t = app.add_subcommand("train", "Train a parser");
  t->add_option("train", tr.train, "Training treebank")->required();
  t->add_option("--dev", tr.dev, "Dev treebank (default: the training file)");
  t->add_option("--rules", tr.rules, "Head-rule file")->required();
  t->add_option("-m,--model", tr.model, "Checkpoint to write")->required();
  t->add_option("--config", tr.config, "Settings file (key = value)");
  t->add_option("--report", tr.report, "Write the training report as JSON");
  t->add_option("--embeddings", tr.embeddings, "Pretrained word vectors (word v1 ... vd per line)");
  t->add_option("--seed", tr.seed, "Random seed");
  t->add_option("--beam", tr.beam, "Beam width for dev decoding")->check(CLI::PositiveNumber);
  t->add_option("--epochs", tr.epochs, "Epoch budget")->check(CLI::PositiveNumber);
  t->add_option("--target-f1", tr.target_f1, "Stop once dev F1 reaches this (with --target-las)");
  t->add_option("--target-las", tr.target_las, "Stop once dev LAS reaches this (with --target-f1)");
  t->add_flag("--no-pos", tr.no_pos, "Train without POS tags");

  // parse
  cli::ParseCommandOptions pa;
  std::string format = "auto";
  std::uint64_t parse_seed = 0;
  auto* p = app.add_subcommand("parse", "Parse sentences with a trained model");
  p->add_option("input", pa.input, "Tokenized text (one sentence per line) or a treebank")->required();
  p->add_option("-m,--model", pa.model, "Checkpoint")->required();
  p->add_option("-o,--output", pa.output, "Output file (default stdout)");
  p->add_option("--beam", pa.beam, "Beam width")->check(CLI::PositiveNumber);
  p->add_option("--format", format, "Input format")->check(CLI::IsMember({"auto", "text", "treebank"}));
  p->add_option("--seed", parse_seed, "Accepted for symmetry; decoding is deterministic");
  p->add_flag("--no-pos", pa.no_pos, "Ignore POS tags in the input");

  CLI11_PARSE(app, argc, argv);

  return cli::guarded(
      [&]() -> int {
        if (c->parsed()) {
          conv.direction = direction == "deps" ? cli::Direction::ToDependencies : cli::Direction::ToConstituents;
          cli::convert(conv, std::cout, std::cerr);
        } else if (gn->parsed()) {
          if (g.min_length > g.max_length) throw UsageError("gen: --min-length exceeds --size");
          cli::gen(g, std::cout, std::cerr);
        } else if (r->parsed()) {
          if (cli::roundtrip(rt, std::cerr).failures > 0) return cli::kStructureFailure;
        } else if (e->parsed()) {
          if (e->count("--punct")) ev.eval.punct_pos = {punct.begin(), punct.end()};
          if (e->count("--root")) ev.eval.root_labels = {roots.begin(), roots.end()};
          cli::eval(ev, std::cout);
        } else if (t->parsed()) {
          cli::train_command(tr, std::cerr);
        } else if (p->parsed()) {
          std::cerr << "seed: " << parse_seed << "\n";
          pa.format = format == "text" ? cli::InputFormat::Text
                      : format == "treebank" ? cli::InputFormat::Treebank
                                             : cli::InputFormat::Auto;
          cli::parse_command(pa, std::cout, std::cerr);
        }
        return cli::kOk;
      },
      std::cerr);
}
