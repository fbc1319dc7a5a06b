#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crowdsel/data_model.hpp"
#include "crowdsel/models.hpp"

namespace crowdsel::selection {

struct Candidate {
  std::string user_id;
  double score = 0.0;
  double probability = 0.0;
  std::optional<int> label;
};

/// Candidates in non-decreasing probability order. Equal probabilities are
/// ordered by raw score, then by user id.
struct RankedSet {
  std::vector<Candidate> members;

  std::size_t size() const { return members.size(); }
  bool labeled() const;
  const Candidate& at_rank(std::size_t rank) const { return members.at(rank - 1); }
};

RankedSet rank(std::vector<Candidate> candidates);
/// Scores and ranks every row of `m` with `model` (labels copied when present).
RankedSet rank_matrix(const models::TrainedScorer& model, const FeatureMatrix& m);

/// Interval size limits as fractions of the ranked population.
struct IntervalConstraint {
  double min_size = 0.0;
  std::optional<double> exact_size;
  std::optional<double> max_size;
  bool restrict_to_top = false;

  void validate() const;

  struct Lengths {
    std::size_t min = 1;
    std::size_t max = 1;
  };
  /// Admissible interval lengths for a population of n. Throws
  /// ValidationError when no length is admissible.
  Lengths resolve(std::size_t n) const;
};

/// 1-based inclusive rank interval.
struct Interval {
  std::size_t first = 1;
  std::size_t last = 1;

  std::size_t length() const { return last - first + 1; }
  bool operator==(const Interval&) const = default;
};

enum class Mapping { kPercentile, kScore };
Mapping parse_mapping(std::string_view name);
std::string to_string(Mapping m);

struct SelectionPlan {
  Interval training;
  std::size_t training_size = 0;
  std::size_t positives = 0;
  double rate = 0.0;
  Mapping mapping = Mapping::kPercentile;
  double score_low = 0.0;   // score of the member at training.first
  double score_high = 0.0;  // score of the member at training.last
  std::optional<std::size_t> ask_count;

  bool operator==(const SelectionPlan&) const = default;
};

/// Preference between two intervals: higher response rate, then longer,
/// then earlier start. Rates compare exactly as fractions.
bool interval_preferred(std::size_t pos_a, Interval a, std::size_t pos_b, Interval b);

/// Best-rate interval over all admissible intervals (O(n^2) scan).
SelectionPlan optimal_interval(const RankedSet& ranked, const IntervalConstraint& cons,
                               Mapping mapping = Mapping::kPercentile);

struct Selection {
  std::vector<std::string> user_ids;
  std::vector<std::size_t> ranks;  // 1-based ranks in the test set
  bool empty = true;

  std::size_t size() const { return user_ids.size(); }
};

/// floor(rank * m / n), clamped to [1, m].
Interval map_percentile(Interval training, std::size_t n, std::size_t m);

Selection map_interval(const SelectionPlan& plan, const RankedSet& test);
Selection select_top_k(const RankedSet& ranked, std::size_t k);
Selection select_binary(const RankedSet& ranked, double threshold);

/// Positives among the selection / selection size (0 when empty), and
/// selected positives / all positives in `population`.
double response_rate(const Selection& s, const RankedSet& population);
double recommendation_recall(const Selection& s, const RankedSet& population);

/// JSON document with the plan, optionally the selected ids, and string
/// metadata (seed, config digest, ...).
std::string format_plan(const SelectionPlan& plan, const Selection* selected = nullptr,
                        std::span<const std::pair<std::string, std::string>> metadata = {});
SelectionPlan parse_plan(std::string_view text);

}  // namespace crowdsel::selection
