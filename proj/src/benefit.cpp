#include "crowdsel/benefit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace crowdsel::benefit {

using selection::Interval;

// ---------------------------------------------------------- distribution

double AnswerDistribution::mean() const {
  double m = 0.0;
  for (std::size_t l = 0; l < pmf.size(); ++l) m += static_cast<double>(l) * pmf[l];
  return m;
}

double AnswerDistribution::tail(std::size_t m) const {
  double t = 0.0;
  for (std::size_t l = m; l < pmf.size(); ++l) t += pmf[l];
  return t;
}

void binomial_step(std::vector<double>& row, double p) {
  const double q = 1.0 - p;
  row.push_back(0.0);
  for (std::size_t l = row.size() - 1; l >= 1; --l) row[l] = row[l - 1] * p + row[l] * q;
  row[0] *= q;
}

AnswerDistribution binomial_pmf(std::size_t k, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("response rate must lie in [0, 1]");
  AnswerDistribution d;
  d.k = k;
  d.p = p;
  d.pmf.reserve(k + 1);
  d.pmf.push_back(1.0);
  for (std::size_t i = 0; i < k; ++i) binomial_step(d.pmf, p);
  return d;
}

// -------------------------------------------------------- value functions

ValueFunction ValueFunction::linear(double unit) {
  ValueFunction f;
  f.unit_ = unit;
  return f;
}

ValueFunction ValueFunction::table(std::vector<double> values) {
  ValueFunction f;
  f.table_ = true;
  f.values_ = std::move(values);
  return f;
}

double ValueFunction::at(std::size_t x) const {
  if (!table_) return unit_ * static_cast<double>(x);
  if (x >= values_.size())
    throw ValidationError("value table defines 0.." + std::to_string(values_.size() - 1) + " but " +
                          std::to_string(x) + " was requested");
  return values_[x];
}

std::size_t ValueFunction::domain_limit() const {
  if (!table_) return std::numeric_limits<std::size_t>::max();
  return values_.empty() ? 0 : values_.size() - 1;
}

ValueFunction parse_value_table(std::string_view text) {
  std::vector<double> values;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ws(line);
    std::string tok;
    while (ws >> tok) values.push_back(parse_double(tok));
  }
  if (values.empty()) throw ParseError("value table is empty");
  return ValueFunction::table(std::move(values));
}

void BenefitSpec::validate() const {
  for (const auto* f : {&benefit, &cost}) {
    if (f->is_linear()) {
      if (!std::isfinite(f->unit())) throw ValidationError("linear unit value must be finite");
    } else {
      if (f->values().empty()) throw ValidationError("value table is empty");
      for (double v : f->values()) {
        if (!std::isfinite(v)) throw ValidationError("value table entries must be finite");
      }
      if (f->values().front() != 0.0) throw ValidationError("value tables must start at 0 (B(0) = C(0) = 0)");
    }
  }
  if (constraint && !(constraint->min_probability >= 0.0 && constraint->min_probability <= 1.0))
    throw ValidationError("constraint probability must lie in [0, 1]");
}

namespace {

double benefit_of(const std::vector<double>& pmf, const ValueFunction& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < pmf.size(); ++l) s += pmf[l] * b.at(l);
  return s;
}

}  // namespace

double expected_net_benefit(std::size_t k, double p, const BenefitSpec& spec) {
  const auto d = binomial_pmf(k, p);
  return benefit_of(d.pmf, spec.benefit) - spec.cost.at(k);
}

BaselineDecision baseline_net_benefit(double population, double rate, double unit_benefit, double unit_cost) {
  const double per_question = rate * unit_benefit - unit_cost;
  return {population * per_question, per_question > 0.0};
}

double selected_net_benefit(double selected, double rate, double unit_benefit, double unit_cost) {
  return selected * (rate * unit_benefit - unit_cost);
}

// ------------------------------------------------------------ optimizer

namespace {

struct Choice {
  double value = 0.0;
  std::size_t k = 0;
};

// best[k] = best (value, smallest k) among feasible ask counts 1..k.
std::vector<std::optional<Choice>> best_prefix(double p, std::size_t max_k, const BenefitSpec& spec) {
  std::vector<std::optional<Choice>> best(max_k + 1);
  const bool closed_form = spec.is_linear() && !spec.constraint;
  std::vector<double> row{1.0};
  std::optional<Choice> running;
  for (std::size_t k = 1; k <= max_k; ++k) {
    double value = 0.0;
    bool ok = true;
    if (closed_form) {
      value = static_cast<double>(k) * (p * spec.benefit.unit() - spec.cost.unit());
    } else {
      binomial_step(row, p);
      value = benefit_of(row, spec.benefit) - spec.cost.at(k);
      if (spec.constraint) {
        double tail = 0.0;
        for (std::size_t l = spec.constraint->min_answers; l < row.size(); ++l) tail += row[l];
        ok = tail >= spec.constraint->min_probability;
      }
    }
    if (ok && (!running || value > running->value)) running = Choice{value, k};
    best[k] = running;
  }
  return best;
}

}  // namespace

BenefitSelection optimal_benefit_selection(const selection::RankedSet& training, std::size_t test_size,
                                           const BenefitSpec& spec, const selection::IntervalConstraint& cons) {
  spec.validate();
  if (!training.labeled()) throw ValidationError("benefit search needs labeled training candidates");
  if (test_size == 0) throw ValidationError("test population must be non-empty");
  if (spec.benefit.domain_limit() < test_size || spec.cost.domain_limit() < test_size)
    throw ValidationError("benefit/cost tables must cover 0.." + std::to_string(test_size));
  const std::size_t n = training.size();
  const auto len = cons.resolve(n);

  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t r = 1; r <= n; ++r)
    prefix[r] = prefix[r - 1] + (*training.members[r - 1].label > 0 ? 1 : 0);

  // Intervals grouped by (positives, length): members of a group share p.
  struct Entry {
    Interval training;
    Interval test;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Entry>> groups;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t j_hi = std::min(n, i + len.max - 1);
    for (std::size_t j = i + len.min - 1; j <= j_hi; ++j) {
      if (cons.restrict_to_top && j != n) continue;
      const Interval iv{i, j};
      groups[{prefix[j] - prefix[i - 1], iv.length()}].push_back(
          {iv, selection::map_percentile(iv, n, test_size)});
    }
  }

  BenefitSelection result;
  // Asking nobody: value 0, feasible unless answers are required.
  const bool empty_ok = !spec.constraint || binomial_pmf(0, 0.0).tail(spec.constraint->min_answers) >=
                                                 spec.constraint->min_probability;
  bool have_interval = false;
  std::size_t best_pos = 0;
  if (empty_ok) {
    result.feasible = true;
    result.expected_value = 0.0;
    result.ask_count = 0;
  }

  for (const auto& [key, entries] : groups) {
    const auto [pos, length] = key;
    const double p = static_cast<double>(pos) / static_cast<double>(length);
    std::size_t max_k = 0;
    for (const auto& e : entries) max_k = std::max(max_k, e.test.length());
    const auto best = best_prefix(p, max_k, spec);
    for (const auto& e : entries) {
      const auto& choice = best[e.test.length()];
      if (!choice) continue;
      bool better = false;
      if (!result.feasible) {
        better = true;
      } else if (choice->value != result.expected_value) {
        better = choice->value > result.expected_value;
      } else if (choice->k != result.ask_count) {
        better = choice->k < result.ask_count;
      } else {
        better = have_interval && selection::interval_preferred(pos, e.training, best_pos, result.plan->training);
      }
      if (!better) continue;
      result.feasible = true;
      result.expected_value = choice->value;
      result.ask_count = choice->k;
      result.test_interval = e.test;
      have_interval = true;
      best_pos = pos;
      selection::SelectionPlan plan;
      plan.training = e.training;
      plan.training_size = n;
      plan.positives = pos;
      plan.rate = p;
      plan.mapping = selection::Mapping::kPercentile;
      plan.score_low = training.at_rank(e.training.first).score;
      plan.score_high = training.at_rank(e.training.last).score;
      plan.ask_count = choice->k;
      result.plan = plan;
    }
  }
  if (result.feasible && result.ask_count == 0) result.plan.reset();
  return result;
}

selection::Selection apply_benefit_selection(const BenefitSelection& result, const selection::RankedSet& test) {
  selection::Selection s;
  if (!result.feasible || !result.plan || result.ask_count == 0) return s;
  const auto mapped = selection::map_percentile(result.plan->training, result.plan->training_size, test.size());
  const std::size_t k = std::min(result.ask_count, mapped.length());
  for (std::size_t r = mapped.last - k + 1; r <= mapped.last; ++r) {
    s.ranks.push_back(r);
    s.user_ids.push_back(test.at_rank(r).user_id);
  }
  s.empty = s.user_ids.empty();
  return s;
}

}  // namespace crowdsel::benefit
