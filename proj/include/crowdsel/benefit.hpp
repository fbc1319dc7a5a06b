#pragma once

#include <optional>
#include <vector>

#include "crowdsel/selection.hpp"

namespace crowdsel::benefit {

/// Distribution of the number of answers l = 0..k when k people each
/// answer independently with probability p.
struct AnswerDistribution {
  std::size_t k = 0;
  double p = 0.0;
  std::vector<double> pmf;

  double mean() const;
  /// Pr(answers >= m).
  double tail(std::size_t m) const;
};

/// Pascal recursion P(k,l) = P(k-1,l-1) p + P(k-1,l) (1-p), P(0,0) = 1.
AnswerDistribution binomial_pmf(std::size_t k, double p);

/// Advances `row` (a pmf for some k) in place to the pmf for k + 1.
void binomial_step(std::vector<double>& row, double p);

/// B(l) or C(k): either unit * x, or a table indexed from 0.
class ValueFunction {
 public:
  static ValueFunction linear(double unit);
  static ValueFunction table(std::vector<double> values);

  /// Throws ValidationError when x lies beyond a table.
  double at(std::size_t x) const;
  bool is_linear() const { return !table_; }
  double unit() const { return unit_; }
  const std::vector<double>& values() const { return values_; }
  /// Largest x the function is defined for.
  std::size_t domain_limit() const;

 private:
  bool table_ = false;
  double unit_ = 0.0;
  std::vector<double> values_;
};

/// Parses whitespace/newline separated values, '#' comments allowed.
ValueFunction parse_value_table(std::string_view text);

/// Pr(answers >= min_answers) >= min_probability.
struct AnswerConstraint {
  std::size_t min_answers = 0;
  double min_probability = 0.0;

  bool satisfied_by(const AnswerDistribution& d) const { return d.tail(min_answers) >= min_probability; }
};

struct BenefitSpec {
  ValueFunction benefit = ValueFunction::linear(10.0);
  ValueFunction cost = ValueFunction::linear(1.0);
  std::optional<AnswerConstraint> constraint;

  /// B(0) = C(0) = 0, finite table entries, constraint probability in [0,1].
  void validate() const;
  bool is_linear() const { return benefit.is_linear() && cost.is_linear(); }
};

/// sum_l P(k,l) B(l) - C(k).
double expected_net_benefit(std::size_t k, double p, const BenefitSpec& spec);

struct BaselineDecision {
  double value = 0.0;  // M (r b - c), unclamped
  bool send = false;   // r b - c > 0
};

/// Asking everyone in a population of M with response rate r.
BaselineDecision baseline_net_benefit(double population, double rate, double unit_benefit, double unit_cost);
/// Asking only a selected S people whose response rate is s.
double selected_net_benefit(double selected, double rate, double unit_benefit, double unit_cost);

struct BenefitSelection {
  bool feasible = false;
  /// Absent when the best choice is to ask nobody.
  std::optional<selection::SelectionPlan> plan;
  selection::Interval test_interval;  // meaningful only with a plan
  std::size_t ask_count = 0;
  double expected_value = 0.0;
};

/// Searches every admissible training interval and every ask count
/// k <= (mapped test interval size), using the interval's training rate as
/// p. Ties prefer fewer questions, then the selection module's interval rule.
BenefitSelection optimal_benefit_selection(const selection::RankedSet& training, std::size_t test_size,
                                           const BenefitSpec& spec, const selection::IntervalConstraint& cons);

/// The `ask_count` highest-ranked members of the mapped test interval.
selection::Selection apply_benefit_selection(const BenefitSelection& result, const selection::RankedSet& test);

}  // namespace crowdsel::benefit
