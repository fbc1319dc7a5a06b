#pragma once
// Random tabulated benefit instances compared against the brute-force oracle.

#include <string>

#include "crowdsel/benefit.hpp"
#include "oracles.hpp"

namespace benefit_case {

using namespace crowdsel;

struct Instance {
  std::vector<int> labels;
  std::size_t test_size = 0;
  benefit::BenefitSpec spec;
  selection::IntervalConstraint cons;
};

inline selection::RankedSet ranked(const std::vector<int>& labels) {
  std::vector<selection::Candidate> c;
  for (std::size_t r = 1; r <= labels.size(); ++r) {
    const double x = static_cast<double>(r);
    c.push_back({"r" + std::to_string(100 + r), x, x / static_cast<double>(labels.size() + 1), labels[r - 1]});
  }
  return selection::rank(std::move(c));
}

/// n, m <= 10; B increasing with random concavity, C random non-negative;
/// a probabilistic constraint and interval limits some of the time.
inline Instance random_instance(oracle::Gen& g) {
  Instance in;
  const std::size_t n = 1 + g.below(10);
  const double base = g.uniform(0.1, 0.9);
  for (std::size_t i = 0; i < n; ++i) in.labels.push_back(g.label(std::min(0.95, base + 0.05 * i)));
  in.test_size = 1 + g.below(10);
  std::vector<double> b{0.0}, c{0.0};
  for (std::size_t x = 1; x <= in.test_size; ++x) {
    b.push_back(b.back() + g.uniform(0.0, 6.0) / static_cast<double>(x));
    c.push_back(c.back() + g.uniform(0.2, 2.0));
  }
  in.spec.benefit = benefit::ValueFunction::table(b);
  in.spec.cost = benefit::ValueFunction::table(c);
  if (g.uniform() < 0.4) in.spec.constraint = benefit::AnswerConstraint{g.below(3), g.uniform(0.2, 0.9)};
  if (g.uniform() < 0.3) in.cons.min_size = 0.3;
  if (g.uniform() < 0.2) in.cons.restrict_to_top = true;
  return in;
}

inline oracle::BenefitPick brute_force(const Instance& in) {
  const auto len = in.cons.resolve(in.labels.size());
  const auto value = [&](std::size_t k, double p) { return benefit::expected_net_benefit(k, p, in.spec); };
  const auto ok = [&](std::size_t k, double p) {
    if (!in.spec.constraint) return true;
    double tail = 0.0;
    for (std::size_t l = in.spec.constraint->min_answers; l <= k; ++l) tail += oracle::binomial(int(k), int(l), p);
    return tail >= in.spec.constraint->min_probability;
  };
  return oracle::best_benefit(in.labels, in.test_size, len.min, len.max, in.cons.restrict_to_top, value, ok);
}

/// Empty string on agreement, otherwise a description of the mismatch.
inline std::string compare(const Instance& in) {
  const auto want = brute_force(in);
  const auto got = benefit::optimal_benefit_selection(ranked(in.labels), in.test_size, in.spec, in.cons);
  auto describe = [](bool f, double v, std::size_t k, std::size_t a, std::size_t b) {
    return "feasible=" + std::to_string(f) + " value=" + std::to_string(v) + " k=" + std::to_string(k) + " [" +
           std::to_string(a) + "," + std::to_string(b) + "]";
  };
  const std::size_t ga = got.plan ? got.plan->training.first : 0, gb = got.plan ? got.plan->training.last : 0;
  const bool same = want.feasible == got.feasible &&
                    (!want.feasible || (want.value == got.expected_value && want.k == got.ask_count &&
                                        want.first == ga && want.last == gb));
  if (same) return {};
  return "oracle " + describe(want.feasible, want.value, want.k, want.first, want.last) + " vs library " +
         describe(got.feasible, got.expected_value, got.ask_count, ga, gb);
}

}  // namespace benefit_case
