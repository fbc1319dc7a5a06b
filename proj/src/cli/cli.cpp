#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "crowdsel/data_model.hpp"

namespace crowdsel::cli {

namespace {

void add_model_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--kind", f.kind, "logistic | svm")->capture_default_str();
  sub->add_option("--expansion", f.expansion, "linear | quadratic")->capture_default_str();
  sub->add_option("--benefit", f.benefit, "B: benefit of a response (weights B-C / C)")->capture_default_str();
  sub->add_option("--cost", f.cost, "C: cost of a question")->capture_default_str();
  sub->add_option("--c", f.c, "SVM hinge penalty")->capture_default_str();
  sub->add_option("--lambda", f.lambda, "logistic L2 penalty")->capture_default_str();
  sub->add_option("--bins", f.bins, "calibration bins (0: uncalibrated)")->capture_default_str();
  sub->add_option("--max-iters", f.max_iters, "solver iteration cap (0: default)")->capture_default_str();
}

void add_constraint_flags(CLI::App* sub, ConstraintFlags& f) {
  sub->add_option("--min-size", f.min_size, "minimum interval size, fraction of the ranked set")
      ->capture_default_str();
  sub->add_option("--exact-size", f.exact_size, "exact interval size, fraction (negative: unset)")
      ->capture_default_str();
  sub->add_option("--max-size", f.max_size, "maximum interval size, fraction (negative: unset)")
      ->capture_default_str();
  sub->add_flag("--restrict-top", f.restrict_top, "only intervals ending at the top rank");
}

// Canonical "key=value" view of every option of `app` except those in `skip`.
void record(RunConfig& cfg, const CLI::App* app, std::initializer_list<std::string_view> skip) {
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help") continue;
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    cfg.set(name, value);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"crowdsel: pick strangers to ask on social media"};
  app.name("crowdsel");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values (flags override)");

  std::uint64_t seed = 1;
  std::string out_dir;
  bool quiet = false;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();
  app.add_option("--out-dir", out_dir, "directory for relative output paths");
  app.add_flag("--quiet", quiet, "suppress the summary line");

  ExtractOptions ex;
  auto* s_extract = app.add_subcommand("extract", "user corpus -> feature matrix CSV");
  s_extract->add_option("--corpus", ex.corpus, "JSON-lines user records")->required();
  s_extract->add_option("--lexicon", ex.lexicon, "word-category lexicon")->required();
  s_extract->add_option("--traits", ex.traits, "trait weight matrix")->required();
  s_extract->add_option("--profile-lexicon", ex.profile_lexicon, "social words for profiles");
  s_extract->add_option("--query-time", ex.query_time, "question time, unix seconds")->required();
  s_extract->add_option("--steadiness-window", ex.steadiness_window, "recent posts used for steadiness")
      ->capture_default_str();
  s_extract->add_option("--out", ex.out, "output CSV")->capture_default_str();

  ScreenOptions sc;
  auto* s_screen = app.add_subcommand("screen", "chi-square screening of features");
  s_screen->add_option("--matrix", sc.matrix, "labeled feature matrix")->required();
  s_screen->add_option("--alpha", sc.alpha, "significance level")->capture_default_str();
  s_screen->add_option("--correction", sc.correction, "none | bonferroni")->capture_default_str();
  s_screen->add_option("--out", sc.out, "report file")->capture_default_str();

  TrainOptions tr;
  auto* s_train = app.add_subcommand("train", "fit a weighted scorer");
  s_train->add_option("--matrix", tr.matrix, "labeled feature matrix")->required();
  add_model_flags(s_train, tr.model);
  s_train->add_option("--out", tr.out, "model file")->capture_default_str();

  SelectOptions se;
  auto* s_select = app.add_subcommand("select", "choose whom to ask in a test population");
  s_select->add_option("--model", se.model, "trained model")->required();
  s_select->add_option("--train-matrix", se.train_matrix, "labeled training matrix (interval policy)");
  s_select->add_option("--test-matrix", se.test_matrix, "candidates")->required();
  add_constraint_flags(s_select, se.constraint);
  s_select->add_option("--mapping", se.mapping, "percentile | score")->capture_default_str();
  s_select->add_option("--policy", se.policy, "interval | topk | binary")->capture_default_str();
  s_select->add_option("--k", se.k, "topk count (negative: 10% of the test set)")->capture_default_str();
  s_select->add_option("--threshold", se.threshold, "binary probability threshold")->capture_default_str();
  s_select->add_option("--out", se.out, "plan file")->capture_default_str();

  BenefitOptions be;
  auto* s_benefit = app.add_subcommand("benefit", "maximize expected net benefit");
  s_benefit->add_option("--model", be.model, "trained model")->required();
  s_benefit->add_option("--train-matrix", be.train_matrix, "labeled training matrix")->required();
  s_benefit->add_option("--test-matrix", be.test_matrix, "candidates (optional)");
  s_benefit->add_option("--test-size", be.test_size, "test population size (negative: from --test-matrix)")
      ->capture_default_str();
  auto* bl = s_benefit->add_option("--benefit-linear", be.benefit_linear, "B(l) = b l")->capture_default_str();
  auto* bt = s_benefit->add_option("--benefit-table", be.benefit_table, "B(0..m) table file");
  bl->excludes(bt);
  auto* cl = s_benefit->add_option("--cost-linear", be.cost_linear, "C(k) = c k")->capture_default_str();
  auto* ct = s_benefit->add_option("--cost-table", be.cost_table, "C(0..m) table file");
  cl->excludes(ct);
  s_benefit->add_option("--min-answers", be.min_answers, "require Pr(answers >= m) >= q");
  s_benefit->add_option("--min-prob", be.min_prob, "q for --min-answers");
  add_constraint_flags(s_benefit, be.constraint);
  s_benefit->add_option("--out", be.out, "result file")->capture_default_str();

  EvalOptions ev;
  auto* s_eval = app.add_subcommand("eval", "k-fold policy comparison");
  s_eval->add_option("--matrix", ev.matrix, "labeled feature matrix");
  s_eval->add_option("--synthetic", ev.synthetic, "synthetic spec file");
  s_eval->add_option("--folds", ev.folds, "fold count")->capture_default_str();
  s_eval->add_option("--policies", ev.policies, "comma list of interval,topk,binary,random,all,none")
      ->capture_default_str();
  add_model_flags(s_eval, ev.model);
  add_constraint_flags(s_eval, ev.constraint);
  s_eval->add_option("--mapping", ev.mapping, "percentile | score")->capture_default_str();
  s_eval->add_option("--ask-fraction", ev.ask_fraction, "topk/random share of each test fold")
      ->capture_default_str();
  s_eval->add_option("--threshold", ev.threshold, "binary policy threshold")->capture_default_str();
  s_eval->add_option("--report", ev.report, "report file")->capture_default_str();

  SynthOptions sy;
  auto* s_synth = app.add_subcommand("synth", "planted-truth synthetic matrix");
  s_synth->add_option("--spec", sy.spec, "synthetic spec file");
  long long population = 0, dimension = 0;
  std::string coefficients;
  double intercept = 0, noise = 0;
  auto* o_pop = s_synth->add_option("--population", population, "users");
  auto* o_dim = s_synth->add_option("--dimension", dimension, "features");
  auto* o_coef = s_synth->add_option("--coefficients", coefficients, "comma list, one per feature");
  auto* o_int = s_synth->add_option("--intercept", intercept, "planted intercept");
  auto* o_noise = s_synth->add_option("--noise", noise, "std-dev of observation noise");
  s_synth->add_option("--out", sy.out, "matrix CSV (truth goes to <stem>.truth.csv)")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg;
  cfg.command = sub->get_name();
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  cfg.quiet = quiet;
  cfg.set("--seed", std::to_string(seed));
  record(cfg, sub, {});

  try {
    std::string summary;
    if (sub == s_extract) {
      summary = run_extract(cfg, ex);
    } else if (sub == s_screen) {
      summary = run_screen(cfg, sc);
    } else if (sub == s_train) {
      summary = run_train(cfg, tr);
    } else if (sub == s_select) {
      summary = run_select(cfg, se);
    } else if (sub == s_benefit) {
      summary = run_benefit(cfg, be);
    } else if (sub == s_eval) {
      summary = run_eval(cfg, ev);
    } else {
      if (o_pop->count()) sy.population = population;
      if (o_dim->count()) sy.dimension = dimension;
      if (o_coef->count()) sy.coefficients = coefficients;
      if (o_int->count()) sy.intercept = intercept;
      if (o_noise->count()) sy.noise = noise;
      sy.seed_given = app.get_option("--seed")->count() > 0;
      summary = run_synth(cfg, sy);
    }
    if (!quiet) out << summary << "\n";
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace crowdsel::cli
