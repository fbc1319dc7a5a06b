#pragma once

#include <optional>
#include <string>

#include "crowdsel/cli.hpp"

namespace crowdsel::cli {

// Every command returns its one-line summary.

struct ExtractOptions {
  std::string corpus, lexicon, traits, profile_lexicon;
  long long query_time = -1;
  int steadiness_window = 20;
  std::string out = "features.csv";
};
std::string run_extract(const RunConfig& cfg, const ExtractOptions& o);

struct ScreenOptions {
  std::string matrix;
  double alpha = 0.05;
  std::string correction = "bonferroni";
  std::string out = "screen.txt";
};
std::string run_screen(const RunConfig& cfg, const ScreenOptions& o);

struct ModelFlags {
  std::string kind = "logistic";
  std::string expansion = "linear";
  double benefit = 2.0;
  double cost = 1.0;
  double c = 1.0;
  double lambda = 1e-3;
  int bins = 10;
  int max_iters = 0;  // 0: solver default
};

struct TrainOptions {
  std::string matrix;
  ModelFlags model;
  std::string out = "model.json";
};
std::string run_train(const RunConfig& cfg, const TrainOptions& o);

// Shared by select and benefit. Negative values mean "not given".
struct ConstraintFlags {
  double min_size = 0.0;
  double exact_size = -1.0;
  double max_size = -1.0;
  bool restrict_top = false;
};

struct SelectOptions {
  std::string model, train_matrix, test_matrix;
  ConstraintFlags constraint;
  std::string mapping = "percentile";
  std::string policy = "interval";
  long long k = -1;
  double threshold = 0.5;
  std::string out = "plan.json";
};
std::string run_select(const RunConfig& cfg, const SelectOptions& o);

struct BenefitOptions {
  std::string model, train_matrix, test_matrix;
  long long test_size = -1;
  double benefit_linear = 10.0;
  std::string benefit_table;
  double cost_linear = 1.0;
  std::string cost_table;
  long long min_answers = -1;
  double min_prob = -1.0;
  ConstraintFlags constraint;
  std::string out = "benefit.json";
};
std::string run_benefit(const RunConfig& cfg, const BenefitOptions& o);

struct EvalOptions {
  std::string matrix, synthetic;
  int folds = 5;
  std::string policies = "interval,topk,binary,random,all";
  ModelFlags model;
  ConstraintFlags constraint{.min_size = 0.05};
  std::string mapping = "percentile";
  double ask_fraction = 0.1;
  double threshold = 0.5;
  std::string report = "eval.json";
};
std::string run_eval(const RunConfig& cfg, const EvalOptions& o);

struct SynthOptions {
  std::string spec;
  // Explicit flags override the spec file.
  std::optional<long long> population, dimension;
  std::optional<std::string> coefficients;
  std::optional<double> intercept, noise;
  bool seed_given = false;
  std::string out = "synthetic.csv";
};
std::string run_synth(const RunConfig& cfg, const SynthOptions& o);

}  // namespace crowdsel::cli
