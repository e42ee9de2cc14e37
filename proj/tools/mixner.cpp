// mixner: mix corpora, train and apply the CRF tagger, score predictions,
// and self-check the CRF against brute-force enumeration.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixner/corpus.hpp"
#include "mixner/crf.hpp"
#include "mixner/eval.hpp"
#include "mixner/features.hpp"
#include "mixner/oracle.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kDataError = 2;

struct ColumnFlags {
  std::size_t token_column = 0;
  int tag_column = -1;
  int lang_column = -1;
  bool tab = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--token-column", token_column, "0-based token column")->capture_default_str();
    cmd.add_option("--tag-column", tag_column, "0-based tag column (-1 = last)")->capture_default_str();
    cmd.add_option("--lang-column", lang_column, "0-based language-id column (-1 = none)");
    cmd.add_flag("--tab", tab, "split columns on tabs only (default: any whitespace)");
  }

  mixner::ColumnSpec spec(bool tags_required = true) const {
    mixner::ColumnSpec c;
    c.token_column = token_column;
    if (tag_column >= 0) c.tag_column = static_cast<std::size_t>(tag_column);
    if (lang_column >= 0) c.lang_column = static_cast<std::size_t>(lang_column);
    c.separator = tab ? mixner::Separator::kTab : mixner::Separator::kWhitespace;
    c.tags_required = tags_required;
    return c;
  }
};

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string label_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (const auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name.resize(dot);
  return name;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct MixArgs {
  std::string primary;
  std::vector<std::string> aux;
  std::uint64_t seed = 42;
  bool shuffle = false;
  std::string out;
  ColumnFlags columns;
};

int cmd_mix(const MixArgs& a) {
  std::cout << "mixner mix --seed " << a.seed << (a.shuffle ? " --shuffle" : "") << "\n";
  const auto primary = mixner::read_conll_file(a.primary, a.columns.spec(), label_of(a.primary));
  std::vector<mixner::Dataset> aux;
  for (const auto& p : a.aux) aux.push_back(mixner::read_conll_file(p, a.columns.spec(), label_of(p)));

  const auto mixed = mixner::mix_datasets(primary, aux, a.seed, a.shuffle);
  mixner::write_conll_file(a.out, mixed);

  std::cout << a.primary << "\t" << primary.size() << " sentences\n";
  for (std::size_t i = 0; i < aux.size(); ++i) std::cout << a.aux[i] << "\t" << aux[i].size() << " sentences\n";
  std::cout << "total\t" << mixed.size() << " sentences -> " << a.out << "\n";
  return kOk;
}

struct TrainArgs {
  std::string train;
  std::string dev;
  std::string out;
  std::string history;
  mixner::TrainConfig cfg;
  std::size_t min_count = 1;
  mixner::TemplateConfig tmpl;
  ColumnFlags columns;
};

std::size_t count_repairs(const mixner::Dataset& before, const mixner::Dataset& after) {
  std::size_t n = 0;
  for (std::size_t s = 0; s < before.size(); ++s) {
    for (std::size_t i = 0; i < before.sentences[s].size(); ++i) {
      n += before.sentences[s].tokens[i].tag != after.sentences[s].tokens[i].tag;
    }
  }
  return n;
}

int cmd_train(const TrainArgs& a) {
  const auto& c = a.cfg;
  std::cout << "mixner train --epochs " << c.epochs << " --batch " << c.batch_size << " --patience "
            << c.patience << " --lr " << c.learning_rate << " --l2 " << c.l2 << " --min-delta "
            << c.min_delta << " --min-count " << a.min_count << (a.tmpl.lowercase ? " --lowercase" : "")
            << " --affix " << a.tmpl.affix_length << " --seed " << c.seed << "\n";

  const auto raw_train = mixner::read_conll_file(a.train, a.columns.spec(), label_of(a.train));
  const auto raw_dev = mixner::read_conll_file(a.dev, a.columns.spec(), label_of(a.dev));
  if (raw_train.size() == 0) {
    std::cerr << "error: " << a.train << ": empty training set\n";
    return kDataError;
  }
  const auto train = mixner::repair_iob(raw_train);
  const auto dev = mixner::repair_iob(raw_dev);
  if (const auto n = count_repairs(raw_train, train)) std::cout << "repaired " << n << " stray I- tags in " << a.train << "\n";
  if (const auto n = count_repairs(raw_dev, dev)) std::cout << "repaired " << n << " stray I- tags in " << a.dev << "\n";

  const auto tagset = mixner::induce_tagset(train);
  const auto index = mixner::build_index(train, tagset, a.tmpl, a.min_count);
  const auto encoded = mixner::encode_dataset(train, index, a.tmpl);
  std::cout << train.size() << " train / " << dev.size() << " dev sentences, " << tagset.size() << " tags, "
            << index.num_attributes() << " attributes\n";

  const auto result = mixner::train(encoded, dev, c, index, a.tmpl);
  std::string log = "epoch\tnll\tdev_weighted_f1\n";
  for (const auto& r : result.history.epochs) {
    char line[128];
    std::snprintf(line, sizeof line, "%d\t%.6f\t%.6f\n", r.epoch, r.train_nll, r.dev_weighted_f1);
    log += line;
    std::printf("epoch %3d  nll %14.4f  dev_weighted_f1 %.4f  (%.2fs)\n", r.epoch, r.train_nll,
                r.dev_weighted_f1, r.seconds);
  }
  std::fflush(stdout);
  mixner::save_model(result.model, a.out);
  const std::string history = a.history.empty() ? a.out + ".history.tsv" : a.history;
  write_text(history, log);

  const auto& best = result.history.epochs.at(static_cast<std::size_t>(result.history.best_epoch - 1));
  std::cout << "best epoch " << result.history.best_epoch << " dev_weighted_f1 " << fixed4(best.dev_weighted_f1)
            << "\nmodel -> " << a.out << "\nhistory -> " << history << "\n";
  return kOk;
}

struct TagArgs {
  std::string model;
  std::string input;
  std::string out;
  ColumnFlags columns;
};

int cmd_tag(const TagArgs& a) {
  const auto model = mixner::load_model(a.model);
  const auto input = mixner::read_conll_file(a.input, a.columns.spec(false), label_of(a.input));
  const auto tagged = mixner::tag_dataset(model, input);
  mixner::write_conll_file(a.out, tagged);
  std::cout << "tagged " << tagged.size() << " sentences, " << tagged.token_count() << " tokens -> " << a.out
            << "\n";
  return kOk;
}

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string report;
  std::string format = "text";
  ColumnFlags columns;
};

int cmd_eval(const EvalArgs& a) {
  const auto gold = mixner::read_conll_file(a.gold, a.columns.spec(), label_of(a.gold));
  const auto pred = mixner::read_conll_file(a.pred, a.columns.spec(), label_of(a.pred));
  const auto report = mixner::score_entities(gold, pred);
  const auto fmt = a.format == "json" ? mixner::ReportFormat::kJson : mixner::ReportFormat::kText;
  const auto rendered = mixner::render_report(report, fmt);
  if (a.report.empty()) {
    // The text report already carries the "weighted_f1" line.
    std::cout << rendered;
    return kOk;
  }
  write_text(a.report, rendered);
  std::cout << "weighted_f1 " << fixed4(report.weighted_f1) << "\n";
  return kOk;
}

struct VerifyArgs {
  std::size_t trials = 200;
  std::uint64_t seed = 42;
  std::string fault = "none";
};

int cmd_verify(const VerifyArgs& a) {
  std::cout << "mixner verify --trials " << a.trials << " --seed " << a.seed << "\n";
  if (a.trials == 0) {
    std::cout << "warning: no checks run\n";
    return kOk;
  }
  const auto fault = a.fault == "transition-sign" ? mixner::oracle::Fault::kTransitionSign : mixner::oracle::Fault::kNone;
  bool ok = true;
  for (const auto& r : mixner::oracle::run_verification(a.trials, a.seed, fault)) {
    const bool pass = r.failures == 0;
    ok = ok && pass;
    std::printf("%-4s %-14s %zu/%zu within %.0e (worst %.3e)\n", pass ? "PASS" : "FAIL", r.name.c_str(),
                r.trials - r.failures, r.trials, r.tolerance, r.worst);
    if (!pass) std::printf("     first failing instance: %s\n", r.first_failure.c_str());
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Code-mixed NER toolkit: corpus mixing, linear-chain CRF tagging, entity-level evaluation"};
  app.require_subcommand(1);

  MixArgs mix;
  auto* mix_cmd = app.add_subcommand("mix", "combine a primary corpus with auxiliary corpora");
  mix_cmd->add_option("--primary", mix.primary, "primary (code-mixed) corpus")->required();
  mix_cmd->add_option("--aux", mix.aux, "auxiliary corpus; repeatable");
  mix_cmd->add_option("--seed", mix.seed, "shuffle seed")->capture_default_str();
  mix_cmd->add_flag("--shuffle", mix.shuffle, "shuffle the combined sentences");
  mix_cmd->add_option("-o,--output", mix.out, "output CoNLL file")->required();
  mix.columns.add_to(*mix_cmd);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a CRF tagger with early stopping on dev F1");
  train_cmd->add_option("--train", tr.train, "training corpus")->required();
  train_cmd->add_option("--dev", tr.dev, "validation corpus")->required();
  train_cmd->add_option("--epochs", tr.cfg.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr.cfg.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", tr.cfg.patience)->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr", tr.cfg.learning_rate)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--l2", tr.cfg.l2)->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--min-delta", tr.cfg.min_delta, "dev F1 gain that resets patience")->capture_default_str();
  train_cmd->add_option("--min-count", tr.min_count, "drop attributes seen fewer times")->capture_default_str();
  train_cmd->add_option("--seed", tr.cfg.seed)->capture_default_str();
  train_cmd->add_flag("--lowercase", tr.tmpl.lowercase, "add lowercased window words");
  train_cmd->add_option("--affix", tr.tmpl.affix_length, "prefix/suffix length of the current word")
      ->capture_default_str()
      ->check(CLI::Range(0, 3));
  train_cmd->add_option("-o,--output", tr.out, "model file")->required();
  train_cmd->add_option("--history", tr.history, "per-epoch log (default: <model>.history.tsv)");
  tr.columns.add_to(*train_cmd);

  TagArgs tg;
  auto* tag_cmd = app.add_subcommand("tag", "tag a corpus with a trained model");
  tag_cmd->add_option("--model", tg.model, "model file written by train")->required();
  tag_cmd->add_option("--input", tg.input, "CoNLL input; the tag column is optional")->required();
  tag_cmd->add_option("-o,--output", tg.out)->required();
  tg.columns.add_to(*tag_cmd);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "entity-level scores and token confusion matrix");
  eval_cmd->add_option("--gold", ev.gold)->required();
  eval_cmd->add_option("--pred", ev.pred)->required();
  eval_cmd->add_option("--report", ev.report, "report file (default: standard output)");
  eval_cmd->add_option("--format", ev.format)->capture_default_str()->check(CLI::IsMember({"text", "json"}));
  ev.columns.add_to(*eval_cmd);

  VerifyArgs vf;
  auto* verify_cmd = app.add_subcommand("verify", "check the CRF against brute-force enumeration");
  verify_cmd->add_option("--trials", vf.trials, "random instances per check")->capture_default_str();
  verify_cmd->add_option("--seed", vf.seed)->capture_default_str();
  verify_cmd->add_option("--inject-fault", vf.fault)
      ->check(CLI::IsMember({"none", "transition-sign"}))
      ->group("");  // hidden: fault injection for testing the checker itself

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDataError;
  }

  try {
    if (mix_cmd->parsed()) return cmd_mix(mix);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (tag_cmd->parsed()) return cmd_tag(tg);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (verify_cmd->parsed()) return cmd_verify(vf);
  } catch (const mixner::ShapeMismatch& e) {
    std::cerr << "error: sentence " << e.sentence() << ": " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kDataError;
}
