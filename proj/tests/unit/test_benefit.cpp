#include <algorithm>
#include <cmath>

#include "benefit_cases.hpp"
#include "crowdsel/benefit.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crowdsel;
using namespace crowdsel::benefit;

namespace {

BenefitSpec linear(double b, double c) {
  BenefitSpec s;
  s.benefit = ValueFunction::linear(b);
  s.cost = ValueFunction::linear(c);
  return s;
}

}  // namespace

TEST_SUITE("benefit") {

TEST_CASE("binomial examples") {
  CHECK(binomial_pmf(2, 0.5).pmf == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(binomial_pmf(3, 0.5).pmf[2] == doctest::Approx(0.375).epsilon(1e-15));
  const auto d = binomial_pmf(5, 0.0);
  CHECK(d.pmf[0] == 1.0);
  for (std::size_t l = 1; l <= 5; ++l) CHECK(d.pmf[l] == 0.0);
  CHECK(binomial_pmf(0, 0.3).pmf == std::vector<double>{1.0});
  CHECK_THROWS_AS(binomial_pmf(3, 1.5), ValidationError);
  CHECK_THROWS_AS(binomial_pmf(3, -0.1), ValidationError);
}

TEST_CASE("recursion agrees with the closed form, sums to one, has mean kp") {
  for (int k = 0; k <= 50; ++k) {
    for (int t = 1; t <= 9; ++t) {
      const double p = t / 10.0;
      const auto d = binomial_pmf(k, p);
      double sum = 0.0, worst = 0.0;
      for (int l = 0; l <= k; ++l) {
        worst = std::max(worst, std::fabs(d.pmf[l] - oracle::binomial(k, l, p)));
        sum += d.pmf[l];
        CHECK(d.pmf[l] >= 0.0);
      }
      CHECK(worst <= 1e-10);
      CHECK(std::fabs(sum - 1.0) <= 1e-9);
      CHECK(std::fabs(d.mean() - k * p) <= 1e-9);
    }
  }
}

TEST_CASE("tail probabilities") {
  const auto d = binomial_pmf(4, 0.5);
  CHECK(d.tail(0) == 1.0);
  CHECK(d.tail(4) == doctest::Approx(1.0 / 16));
  CHECK(d.tail(5) == 0.0);
}

TEST_CASE("expected net benefit examples") {
  CHECK(expected_net_benefit(10, 0.5, linear(10, 1)) == doctest::Approx(40.0).epsilon(1e-12));
  BenefitSpec concave;
  concave.benefit = ValueFunction::table({0, 10, 15, 15, 15});
  concave.cost = ValueFunction::table({0, 1, 2, 3, 4});
  CHECK(expected_net_benefit(2, 1.0, concave) == 13.0);
  CHECK(std::fabs(expected_net_benefit(20, 0.3, linear(10, 1)) - 40.0) <= 1e-9);
  CHECK_THROWS_AS(expected_net_benefit(5, 0.5, concave), ValidationError);
}

TEST_CASE("linear specs match k(pb - c)") {
  oracle::Gen g(31);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = g.below(200);
    const double p = g.uniform(), b = g.uniform(0, 50), c = g.uniform(0, 5);
    const double want = static_cast<double>(k) * (p * b - c);
    CHECK(std::fabs(expected_net_benefit(k, p, linear(b, c)) - want) <= 1e-9 * std::max(1.0, std::fabs(want)));
  }
}

TEST_CASE("baseline and selected closed forms") {
  const auto a = baseline_net_benefit(308, 0.31, 10, 1);
  CHECK(a.value == doctest::Approx(646.8));
  CHECK(a.send);
  const auto b = baseline_net_benefit(118, 0.42, 2, 1);
  CHECK(b.value == doctest::Approx(-18.88));
  CHECK_FALSE(b.send);
  const auto edge = baseline_net_benefit(50, 0.25, 4, 1);
  CHECK(edge.value == 0.0);
  CHECK_FALSE(edge.send);
  CHECK(selected_net_benefit(100, 0.6, 10, 1) == doctest::Approx(500.0));
  CHECK(selected_net_benefit(0, 0.6, 10, 1) == 0.0);
  CHECK(selected_net_benefit(7, 1.0, 3, 3) == 0.0);
}

TEST_CASE("value tables") {
  const auto t = parse_value_table("# benefit\n0, 10\n15 15 # flat\n");
  CHECK(t.values() == std::vector<double>{0, 10, 15, 15});
  CHECK(t.domain_limit() == 3);
  CHECK_THROWS_AS(t.at(4), ValidationError);
  CHECK_THROWS_AS(parse_value_table("# nothing\n"), ParseError);
  CHECK_THROWS(parse_value_table("0 x"));
  BenefitSpec s;
  s.benefit = ValueFunction::table({1, 2});
  CHECK_THROWS_AS(s.validate(), ValidationError);
  BenefitSpec q;
  q.constraint = AnswerConstraint{1, 1.5};
  CHECK_THROWS_AS(q.validate(), ValidationError);
}

TEST_CASE("linear spec above break-even asks the whole best interval") {
  const auto train = benefit_case::ranked({-1, -1, -1, 1, 1, 1});
  const auto r = optimal_benefit_selection(train, 12, linear(10, 1), {});
  REQUIRE(r.plan);
  // [3,6] maps to test ranks 6..12 at rate 0.75: 7 * 6.5 beats 5 * 9 for [4,6]
  CHECK(r.plan->training == selection::Interval{3, 6});
  CHECK(r.test_interval == selection::Interval{6, 12});
  CHECK(r.ask_count == 7);
  CHECK(r.expected_value == doctest::Approx(45.5));
  CHECK(r.plan->ask_count == 7u);
}

TEST_CASE("linear spec below break-even asks nobody") {
  const auto train = benefit_case::ranked({-1, 1, -1, -1, -1, -1, -1, -1, -1, -1});
  const auto r = optimal_benefit_selection(train, 10, linear(0.9, 1), {});
  CHECK(r.feasible);
  CHECK(r.ask_count == 0);
  CHECK(r.expected_value == 0.0);
  CHECK_FALSE(r.plan);
  CHECK(apply_benefit_selection(r, benefit_case::ranked(std::vector<int>(10, 1))).empty);
}

TEST_CASE("unsatisfiable constraint is reported infeasible") {
  auto spec = linear(10, 1);
  spec.constraint = AnswerConstraint{3, 0.5};
  const auto r = optimal_benefit_selection(benefit_case::ranked({-1, -1, -1, -1}), 2, spec, {});
  CHECK_FALSE(r.feasible);
  CHECK_FALSE(r.plan);
}

TEST_CASE("tables must cover the test population") {
  BenefitSpec s;
  s.benefit = ValueFunction::table({0, 1, 2});
  s.cost = ValueFunction::table({0, 1, 2});
  CHECK_THROWS_AS(optimal_benefit_selection(benefit_case::ranked({1, -1}), 3, s, {}), ValidationError);
}

TEST_CASE("selection asks the top k of the mapped interval") {
  BenefitSpec concave;
  concave.benefit = ValueFunction::table({0, 10, 12, 12, 12, 12, 12, 12, 12});
  concave.cost = ValueFunction::linear(1);
  const auto train = benefit_case::ranked({-1, -1, 1, 1});
  const auto r = optimal_benefit_selection(train, 8, concave, {});
  REQUIRE(r.plan);
  CHECK(r.ask_count == 2);  // 10 + 2 - 2 beats 10 - 1
  const auto test = benefit_case::ranked(std::vector<int>(8, -1));
  const auto s = apply_benefit_selection(r, test);
  CHECK(s.size() == 2);
  CHECK(s.ranks.back() == r.test_interval.last);
  CHECK(s.ranks.front() == r.test_interval.last - 1);
}

TEST_CASE("brute-force oracle agreement on random tabulated specs") {
  oracle::Gen g(4242);
  for (int rep = 0; rep < 300; ++rep) {
    const auto in = benefit_case::random_instance(g);
    const auto diff = benefit_case::compare(in);
    INFO("instance " << rep << ": " << diff);
    CHECK(diff.empty());
  }
}

TEST_CASE("returned combinations satisfy the constraint and dominate asking the whole mapped ranking") {
  oracle::Gen g(7);
  for (int rep = 0; rep < 200; ++rep) {
    auto in = benefit_case::random_instance(g);
    in.cons = {};
    const auto train = benefit_case::ranked(in.labels);
    const auto r = optimal_benefit_selection(train, in.test_size, in.spec, in.cons);
    if (!r.feasible) continue;
    if (in.spec.constraint && r.plan) {
      const auto d = binomial_pmf(r.ask_count, r.plan->rate);
      CHECK(d.tail(in.spec.constraint->min_answers) >= in.spec.constraint->min_probability);
    }
    const std::size_t n = in.labels.size();
    const double rate = static_cast<double>(std::count(in.labels.begin(), in.labels.end(), 1)) / n;
    // The whole training ranking maps to test ranks floor(m/n)..m, all of them when m <= n.
    const std::size_t k_all = in.test_size - oracle::map_rank(1, n, in.test_size) + 1;
    if (in.test_size <= n) CHECK(k_all == in.test_size);
    const auto all = binomial_pmf(k_all, rate);
    if (!in.spec.constraint || all.tail(in.spec.constraint->min_answers) >= in.spec.constraint->min_probability)
      CHECK(r.expected_value >= expected_net_benefit(k_all, rate, in.spec));
    if (!in.spec.constraint || in.spec.constraint->min_answers == 0) CHECK(r.expected_value >= 0.0);
  }
}

}  // TEST_SUITE
