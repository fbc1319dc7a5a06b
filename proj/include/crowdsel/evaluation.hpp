#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdsel/data_model.hpp"
#include "crowdsel/models.hpp"
#include "crowdsel/selection.hpp"

namespace crowdsel::evaluation {

struct FoldPlan {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_of;  // per example

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> sizes() const;
};

/// Seeded shuffle, then round-robin fold assignment.
FoldPlan kfold(std::size_t n, int folds, std::uint64_t seed);

/// Mann-Whitney AUC; tied scores contribute one half.
double auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;

  double precision() const { return tp + fp > 0 ? tp / (tp + fp) : 0.0; }
  double recall() const { return tp + fn > 0 ? tp / (tp + fn) : 0.0; }
  double f1() const;
};

/// `predicted` and `labels` hold +1/-1.
Confusion confusion(std::span<const int> predicted, std::span<const int> labels);
/// 2PR/(P+R), 0 when P+R = 0.
double f1_score(double precision, double recall);

enum class Policy { kInterval, kTopK, kBinary, kRandom, kAll, kNone };

std::string to_string(Policy p);
/// Comma-separated list, e.g. "interval,topk,binary,random,all".
std::vector<Policy> parse_policies(std::string_view list);

struct ModelConfig {
  models::Kind kind = models::Kind::kLogistic;
  models::Expansion expansion = models::Expansion::kLinear;
  models::ExampleWeighting weighting;
  models::LogisticOptions logistic;
  models::SvmOptions svm;
  int calibration_bins = 10;
};

/// Trains the configured scorer and calibrates it on the same data
/// (calibration_bins = 0 leaves it uncalibrated).
models::TrainedScorer train_model(const FeatureMatrix& training, const ModelConfig& config);

struct PolicyConfig {
  selection::IntervalConstraint interval{.min_size = 0.05, .exact_size = {}, .max_size = {}, .restrict_to_top = false};
  selection::Mapping mapping = selection::Mapping::kPercentile;
  /// Fraction of the test fold asked by topk and random.
  double ask_fraction = 0.1;
  double binary_threshold = 0.5;
};

struct PolicyOutcome {
  Policy policy = Policy::kAll;
  double response_rate = 0.0;
  double recall = 0.0;
  std::size_t selected = 0;
  bool empty = false;
};

struct FoldReport {
  int fold = 0;
  bool skipped = false;
  std::string warning;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double base_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  std::vector<PolicyOutcome> policies;
};

struct PolicySummary {
  Policy policy = Policy::kAll;
  double response_rate = 0.0;
  double recall = 0.0;
  int empty_folds = 0;
};

struct EvalReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::size_t examples = 0;
  int evaluated_folds = 0;
  std::vector<FoldReport> per_fold;
  double base_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  std::vector<PolicySummary> policies;

  const PolicySummary* find(Policy p) const;
};

/// K-fold comparison of selection policies. Folds whose training or test
/// part has a single class are skipped and reported.
EvalReport evaluate_policies(const FeatureMatrix& matrix, const ModelConfig& model,
                             std::span<const Policy> policies, const PolicyConfig& policy_config, int folds,
                             std::uint64_t seed);

std::string format_eval_report(const EvalReport& report,
                               std::span<const std::pair<std::string, std::string>> metadata = {});

struct SynthSpec {
  std::size_t population = 2000;
  std::size_t dimension = 8;
  std::vector<double> coefficients;  // empty: a fixed default pattern
  double intercept = 0.0;
  double noise = 0.0;  // std-dev of noise added to the observed features
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<double> effective_coefficients() const;
};

struct SyntheticData {
  FeatureMatrix matrix;
  std::vector<double> planted_probability;
  std::vector<double> coefficients;
  double intercept = 0.0;
};

/// Standard-normal features; label +1 with probability
/// logistic(intercept + coefficients . features).
SyntheticData generate_synthetic(const SynthSpec& spec);

/// `key = value` lines: population, dimension, coefficients (comma list),
/// intercept, noise, seed.
SynthSpec parse_synth_spec(std::string_view text);
/// CSV `user_id,planted_probability`.
std::string format_planted_truth(const SyntheticData& data);

}  // namespace crowdsel::evaluation
