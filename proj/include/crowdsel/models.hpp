#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdsel/data_model.hpp"

namespace crowdsel::models {

enum class Kind { kLogistic, kSvm };
enum class Expansion { kLinear, kQuadratic };

Kind parse_kind(std::string_view name);
Expansion parse_expansion(std::string_view name);
std::string to_string(Kind k);
std::string to_string(Expansion e);

/// Benefit B of an answer and cost C of a question. Responders are
/// weighted B - C, non-responders C.
struct ExampleWeighting {
  double benefit = 2.0;
  double cost = 1.0;

  /// Throws ValidationError unless B > C > 0.
  void validate() const;
  double weight(int label) const;
  std::vector<double> weights(std::span<const int> labels) const;
};

/// 0.5 * (y + 1) * B - y * C.
double example_weight(int label, double benefit, double cost);

/// Original features followed by x_a * x_b for every a < b, in (a, b)
/// lexicographic order.
std::vector<double> expand_quadratic(std::span<const double> x);
std::size_t expanded_dimension(std::size_t d, Expansion expansion);

/// Per-feature z-score. Features with zero spread map to 0.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stdev;

  static Standardization fit(const FeatureMatrix& m);
  std::vector<double> apply(std::span<const double> x) const;

  bool operator==(const Standardization&) const = default;
};

/// Dense row-major matrix of transformed (standardized, expanded) rows.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

Design build_design(const FeatureMatrix& m, const Standardization& s, Expansion e);

/// Parameter layout for the objective helpers: theta[0] is the intercept,
/// theta[1..] the coefficients.
///
/// Negated weighted log-likelihood plus ridge:
///   -sum_i w_i log sigma(y_i (a + b.x_i)) + lambda |b|^2
double logistic_objective(std::span<const double> theta, const Design& x, std::span<const int> y,
                          std::span<const double> w, double lambda);
void logistic_gradient(std::span<const double> theta, const Design& x, std::span<const int> y,
                       std::span<const double> w, double lambda, std::span<double> grad);

/// 0.5 |w|^2 + c * sum_i p_i max(0, 1 - y_i (w.x_i + b))
double svm_objective(std::span<const double> theta, const Design& x, std::span<const int> y,
                     std::span<const double> w, double c);

struct CalibrationBin {
  double lower = 0.0;  // smallest training score in the bin
  double upper = 0.0;  // largest training score in the bin
  double rate = 0.0;   // fraction of responders
  std::size_t count = 0;

  bool operator==(const CalibrationBin&) const = default;
};

struct TrainingInfo {
  std::uint64_t seed = 0;
  double benefit = 2.0;
  double cost = 1.0;
  double lambda = 0.0;  // logistic ridge
  double c = 0.0;       // svm penalty
  double eta0 = 0.0;    // svm initial step
  int max_iters = 0;
  double tol = 0.0;
  int iterations = 0;
  bool converged = false;
  double initial_objective = 0.0;
  double objective = 0.0;

  bool operator==(const TrainingInfo&) const = default;
};

struct TrainedScorer {
  Kind kind = Kind::kLogistic;
  Expansion expansion = Expansion::kLinear;
  std::vector<std::string> feature_names;
  Standardization standardization;
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<CalibrationBin> calibration;
  TrainingInfo info;

  std::size_t input_dimension() const { return feature_names.size(); }

  std::vector<double> transform(std::span<const double> x) const;
  /// Linear form on the standardized, expanded input.
  double score(std::span<const double> x) const;
  /// Calibrated bin rate when calibration is present, otherwise the
  /// logistic link (logistic models only).
  double probability(std::span<const double> x) const;
  double calibrated_rate(double score) const;

  std::vector<double> scores(const FeatureMatrix& m) const;
  std::vector<double> probabilities(const FeatureMatrix& m) const;

  bool operator==(const TrainedScorer&) const = default;
};

struct LogisticOptions {
  double lambda = 1e-3;
  int max_iters = 5000;
  /// Stop when max |gradient| / sum(weights) drops below this.
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct SvmOptions {
  double c = 1.0;
  int max_iters = 20000;
  /// Stop when an update moves no parameter by more than this.
  double tol = 1e-12;
  /// Initial step of eta0 / (1 + t); <= 0 picks 1.
  double eta0 = 0.0;
  std::uint64_t seed = 0;
};

TrainedScorer train_logistic(const FeatureMatrix& m, std::span<const double> weights, Expansion e,
                             const LogisticOptions& opts);
TrainedScorer train_logistic(const FeatureMatrix& m, const ExampleWeighting& weighting, Expansion e,
                             const LogisticOptions& opts);

/// `objective_trace`, when given, receives the objective of every iterate
/// (iterate 0 first).
TrainedScorer train_svm_primal(const FeatureMatrix& m, std::span<const double> weights, Expansion e,
                               const SvmOptions& opts, std::vector<double>* objective_trace = nullptr);
TrainedScorer train_svm_primal(const FeatureMatrix& m, const ExampleWeighting& weighting, Expansion e,
                               const SvmOptions& opts, std::vector<double>* objective_trace = nullptr);

/// Equal-count quantile bins over training scores. Bins whose edge scores
/// tie are merged, so constant scores yield one bin.
TrainedScorer calibrate(TrainedScorer model, const FeatureMatrix& training, int n_bins = 10);

std::string format_model(const TrainedScorer& model, std::string_view config_digest = {});
TrainedScorer parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedScorer& model, std::string_view config_digest = {});
TrainedScorer load_model(const std::filesystem::path& path);

}  // namespace crowdsel::models
