#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdsel/evaluation.hpp"
#include "crowdsel/models.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crowdsel;
using namespace crowdsel::models;

namespace {

// Overlapping Gaussian-ish classes: label depends on x0 - x1 plus noise.
FeatureMatrix noisy(std::uint64_t seed, std::size_t n, std::size_t d) {
  oracle::Gen g(seed);
  FeatureMatrix m;
  for (std::size_t j = 0; j < d; ++j) m.feature_names.push_back("x" + std::to_string(j));
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = g.uniform(-2, 2);
    const double z = row[0] - (d > 1 ? row[1] : 0.0) + g.uniform(-1.5, 1.5);
    m.append("u" + std::to_string(i), row, z > 0 ? 1 : -1);
  }
  return m;
}

FeatureMatrix two_points(int copies) {
  FeatureMatrix m;
  m.feature_names = {"x"};
  for (int k = 0; k < copies; ++k) {
    const double lo[] = {-1.0}, hi[] = {1.0};
    m.append("n" + std::to_string(k), lo, -1);
    m.append("p" + std::to_string(k), hi, 1);
  }
  return m;
}

std::vector<std::size_t> order_of(const std::vector<double>& s) {
  std::vector<std::size_t> o(s.size());
  std::iota(o.begin(), o.end(), std::size_t{0});
  std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  return o;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("example weights") {
  oracle::Gen g(1);
  for (int rep = 0; rep < 100; ++rep) {
    const double c = g.uniform(0.01, 10);
    const double b = c + g.uniform(0.01, 10);
    CHECK(example_weight(1, b, c) == doctest::Approx(b - c).epsilon(1e-15));
    CHECK(example_weight(-1, b, c) == doctest::Approx(c).epsilon(1e-15));
  }
  CHECK_THROWS_AS((ExampleWeighting{1, 1}.validate()), ValidationError);
  CHECK_THROWS_AS((ExampleWeighting{2, 0}.validate()), ValidationError);
  CHECK_NOTHROW((ExampleWeighting{2, 1}.validate()));
}

TEST_CASE("quadratic expansion") {
  const double a[] = {2, 3};
  CHECK(expand_quadratic(a) == std::vector<double>{2, 3, 6});
  const double b[] = {1, 0, 4};
  CHECK(expand_quadratic(b) == std::vector<double>{1, 0, 4, 0, 4, 0});
  CHECK(expanded_dimension(119, Expansion::kQuadratic) == 7140);
  std::vector<double> x(119, 1.0);
  CHECK(expand_quadratic(x).size() == 7140);
}

TEST_CASE("standardization") {
  FeatureMatrix m;
  m.feature_names = {"a", "const"};
  for (double v : {1.0, 2.0, 3.0, 4.0}) {
    const double row[] = {v, 7.0};
    m.append("u" + format_double(v), row, v > 2 ? 1 : -1);
  }
  const auto s = Standardization::fit(m);
  CHECK(s.mean[0] == 2.5);
  CHECK(s.stdev[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.stdev[1] == 0.0);
  const double x[] = {2.5, 100.0};
  CHECK(s.apply(x) == std::vector<double>{0.0, 0.0});
  const double bad[] = {1.0};
  CHECK_THROWS_AS(s.apply(bad), ValidationError);
}

TEST_CASE("logistic gradient matches central differences") {
  const auto m = noisy(3, 30, 4);
  const auto s = Standardization::fit(m);
  for (auto e : {Expansion::kLinear, Expansion::kQuadratic}) {
    const auto x = build_design(m, s, e);
    oracle::Gen g(4);
    std::vector<double> w(m.rows());
    for (auto& v : w) v = g.uniform(0.5, 2);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> theta(x.cols + 1), grad(x.cols + 1);
      for (auto& v : theta) v = g.uniform(-1, 1);
      logistic_gradient(theta, x, m.labels, w, 0.1, grad);
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double h = 1e-5;
        auto tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        const double fd = (logistic_objective(tp, x, m.labels, w, 0.1) - logistic_objective(tm, x, m.labels, w, 0.1)) /
                          (2 * h);
        CHECK(std::fabs(fd - grad[j]) <= 1e-5 * std::max(1.0, std::fabs(grad[j])));
      }
    }
  }
}

TEST_CASE("logistic on separable 1-D data") {
  const auto m = two_points(10);
  LogisticOptions o;
  o.lambda = 0.01;
  const auto model = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, o);
  CHECK(model.coefficients[0] > 0.0);
  const double lo[] = {-1.0}, hi[] = {1.0};
  CHECK(model.score(hi) > model.score(lo));
  CHECK(model.probability(hi) > 0.5);
  CHECK(model.info.converged);
  CHECK(model.info.objective < model.info.initial_objective);
}

TEST_CASE("uniform weights equal the unweighted fit") {
  const auto m = noisy(5, 80, 3);
  LogisticOptions o;
  const auto weighted = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, o);
  const std::vector<double> ones(m.rows(), 1.0);
  const auto plain = train_logistic(m, ones, Expansion::kLinear, o);
  CHECK(weighted.intercept == doctest::Approx(plain.intercept).epsilon(1e-6));
  for (std::size_t j = 0; j < plain.coefficients.size(); ++j)
    CHECK(std::fabs(weighted.coefficients[j] - plain.coefficients[j]) <= 1e-6);
}

TEST_CASE("scaling all weights leaves the logistic argmax in place") {
  const auto m = noisy(6, 60, 3);
  LogisticOptions o;
  o.lambda = 0.0;
  oracle::Gen g(7);
  std::vector<double> w(m.rows());
  for (auto& v : w) v = g.uniform(0.5, 3);
  for (double gamma : {10.0, 0.25}) {
    auto scaled = w;
    for (auto& v : scaled) v *= gamma;
    const auto a = train_logistic(m, w, Expansion::kLinear, o);
    const auto b = train_logistic(m, scaled, Expansion::kLinear, o);
    CHECK(a.info.converged);
    CHECK(b.info.converged);
    CHECK(std::fabs(a.intercept - b.intercept) <= 1e-5);
    for (std::size_t j = 0; j < a.coefficients.size(); ++j)
      CHECK(std::fabs(a.coefficients[j] - b.coefficients[j]) <= 1e-5);
  }
}

TEST_CASE("heavier positive weight raises predicted rates") {
  const auto m = noisy(8, 200, 2);
  LogisticOptions o;
  const auto even = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, o);
  const auto heavy = train_logistic(m, ExampleWeighting{11, 1}, Expansion::kLinear, o);
  CHECK(heavy.intercept > even.intercept);
}

TEST_CASE("svm recovers the two-point hard margin") {
  const auto m = two_points(1);
  SvmOptions o;
  o.c = 100.0;
  o.max_iters = 20000;
  const auto model = train_svm_primal(m, ExampleWeighting{2, 1}, Expansion::kLinear, o);
  CHECK(model.coefficients[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::fabs(model.intercept) <= 0.05);
}

TEST_CASE("svm returns its best iterate") {
  const auto m = noisy(9, 60, 3);
  SvmOptions o;
  o.max_iters = 500;
  std::vector<double> trace;
  const auto model = train_svm_primal(m, ExampleWeighting{2, 1}, Expansion::kLinear, o, &trace);
  REQUIRE(trace.size() >= 2);
  CHECK(model.info.objective == *std::min_element(trace.begin(), trace.end()));
  CHECK(model.info.objective <= trace.front());
  const auto x = build_design(m, model.standardization, Expansion::kLinear);
  std::vector<double> theta{model.intercept};
  theta.insert(theta.end(), model.coefficients.begin(), model.coefficients.end());
  const auto w = ExampleWeighting{2, 1}.weights(m.labels);
  CHECK(svm_objective(theta, x, m.labels, w, o.c) == doctest::Approx(model.info.objective).epsilon(1e-12));
}

TEST_CASE("svm: doubling weights with c halved is the same problem") {
  const auto m = noisy(10, 50, 3);
  const auto w = ExampleWeighting{3, 1}.weights(m.labels);
  auto w2 = w;
  for (auto& v : w2) v *= 2;
  SvmOptions a, b;
  a.c = 1.0;
  b.c = 0.5;
  a.max_iters = b.max_iters = 2000;
  const auto ma = train_svm_primal(m, w, Expansion::kLinear, a);
  const auto mb = train_svm_primal(m, w2, Expansion::kLinear, b);
  CHECK(std::fabs(ma.intercept - mb.intercept) <= 1e-6);
  for (std::size_t j = 0; j < ma.coefficients.size(); ++j)
    CHECK(std::fabs(ma.coefficients[j] - mb.coefficients[j]) <= 1e-6);
}

TEST_CASE("training input checks") {
  auto m = noisy(11, 20, 2);
  std::fill(m.labels.begin(), m.labels.end(), 1);
  CHECK_THROWS_AS(train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, {}), ValidationError);
  auto bad = noisy(11, 20, 2);
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(train_logistic(bad, ExampleWeighting{2, 1}, Expansion::kLinear, {}), ValidationError);
  CHECK_THROWS_AS(train_svm_primal(bad, ExampleWeighting{2, 1}, Expansion::kLinear, {}), ValidationError);
  CHECK_THROWS_AS(train_logistic(noisy(11, 20, 2), ExampleWeighting{1, 1}, Expansion::kLinear, {}),
                  ValidationError);
}

TEST_CASE("scoring basics") {
  const auto m = noisy(12, 100, 3);
  const auto model = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, {});
  CHECK(model.score(model.standardization.mean) == doctest::Approx(model.intercept).epsilon(1e-12));
  // monotone in a positively weighted feature
  const std::size_t j = static_cast<std::size_t>(
      std::max_element(model.coefficients.begin(), model.coefficients.end()) - model.coefficients.begin());
  REQUIRE(model.coefficients[j] > 0);
  auto x = model.standardization.mean;
  double prev = model.score(x);
  for (int k = 0; k < 10; ++k) {
    x[j] += 0.5;
    const double s = model.score(x);
    CHECK(s > prev);
    prev = s;
  }
  const double short_row[] = {1.0};
  CHECK_THROWS_AS(model.score(short_row), ValidationError);
}

TEST_CASE("ranking survives affine re-scaling of inputs") {
  const auto m = noisy(13, 120, 3);
  auto shifted = m;
  for (std::size_t i = 0; i < shifted.rows(); ++i) {
    auto r = shifted.row(i);
    r[0] = 3.0 * r[0] + 7.0;
    r[1] = 0.01 * r[1] - 2.0;
  }
  const auto a = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, {});
  const auto b = train_logistic(shifted, ExampleWeighting{2, 1}, Expansion::kLinear, {});
  CHECK(order_of(a.scores(m)) == order_of(b.scores(shifted)));
}

TEST_CASE("calibration bins") {
  FeatureMatrix m;
  m.feature_names = {"x"};
  for (int i = 0; i < 10; ++i) {
    const double v[] = {static_cast<double>(i)};
    m.append("u" + std::to_string(i), v, i >= 5 ? 1 : -1);
  }
  auto model = train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, {});
  auto cal = calibrate(model, m, 2);
  REQUIRE(cal.calibration.size() == 2);
  CHECK(cal.calibration[0].rate == 0.0);
  CHECK(cal.calibration[1].rate == 1.0);
  CHECK(cal.calibration[0].count == 5);

  auto flat = model;
  flat.coefficients = {0.0};
  const auto one = calibrate(flat, m, 4);
  REQUIRE(one.calibration.size() == 1);
  CHECK(one.calibration[0].rate == 0.5);
  CHECK_THROWS_AS(calibrate(model, m, 0), ValidationError);
  CHECK_THROWS_AS(calibrate(model, m, 11), ValidationError);
}

TEST_CASE("calibrated probabilities stay within the bin rates") {
  const auto m = noisy(14, 200, 3);
  const auto model = calibrate(train_logistic(m, ExampleWeighting{2, 1}, Expansion::kLinear, {}), m, 10);
  double lo = 1, hi = 0;
  for (const auto& b : model.calibration) {
    lo = std::min(lo, b.rate);
    hi = std::max(hi, b.rate);
  }
  oracle::Gen g(15);
  for (int k = 0; k < 200; ++k) {
    const double x[] = {g.uniform(-10, 10), g.uniform(-10, 10), g.uniform(-10, 10)};
    const double p = model.probability(x);
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
}

TEST_CASE("uncalibrated svm has no probability") {
  const auto m = noisy(16, 40, 2);
  const auto model = train_svm_primal(m, ExampleWeighting{2, 1}, Expansion::kLinear, {});
  CHECK_THROWS_AS(model.probability(m.row(0)), ValidationError);
}

TEST_CASE("model file round trip reproduces scores bit for bit") {
  const auto m = noisy(17, 100, 4);
  for (auto kind : {Kind::kLogistic, Kind::kSvm}) {
    for (auto e : {Expansion::kLinear, Expansion::kQuadratic}) {
      evaluation::ModelConfig cfg;
      cfg.kind = kind;
      cfg.expansion = e;
      cfg.svm.max_iters = 300;
      const auto model = evaluation::train_model(m, cfg);
      const auto back = parse_model(format_model(model, "abc"));
      CHECK(back == model);
      CHECK(back.scores(m) == model.scores(m));
      CHECK(back.probabilities(m) == model.probabilities(m));
    }
  }
  CHECK_THROWS(parse_model("{}"));
  CHECK_THROWS(parse_model("not json"));
}

}  // TEST_SUITE
