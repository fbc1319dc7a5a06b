#include "crowdsel/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace crowdsel::models {

Kind parse_kind(std::string_view name) {
  if (name == "logistic") return Kind::kLogistic;
  if (name == "svm") return Kind::kSvm;
  throw ValidationError("unknown model kind '" + std::string(name) + "' (expected logistic|svm)");
}

Expansion parse_expansion(std::string_view name) {
  if (name == "linear") return Expansion::kLinear;
  if (name == "quadratic") return Expansion::kQuadratic;
  throw ValidationError("unknown expansion '" + std::string(name) + "' (expected linear|quadratic)");
}

std::string to_string(Kind k) { return k == Kind::kLogistic ? "logistic" : "svm"; }
std::string to_string(Expansion e) { return e == Expansion::kLinear ? "linear" : "quadratic"; }

// ------------------------------------------------------------- weighting

double example_weight(int label, double benefit, double cost) {
  const double y = static_cast<double>(label);
  return 0.5 * (y + 1.0) * benefit - y * cost;
}

void ExampleWeighting::validate() const {
  if (!(std::isfinite(benefit) && std::isfinite(cost)))
    throw ValidationError("benefit and cost must be finite");
  if (!(cost > 0.0) || !(benefit > cost))
    throw ValidationError("example weighting needs B > C > 0 (got B=" + format_double(benefit) +
                          ", C=" + format_double(cost) + ")");
}

double ExampleWeighting::weight(int label) const { return example_weight(label, benefit, cost); }

std::vector<double> ExampleWeighting::weights(std::span<const int> labels) const {
  std::vector<double> w;
  w.reserve(labels.size());
  for (int l : labels) w.push_back(weight(l));
  return w;
}

// ------------------------------------------------------------- transforms

std::vector<double> expand_quadratic(std::span<const double> x) {
  const std::size_t d = x.size();
  std::vector<double> out(x.begin(), x.end());
  out.reserve(d + d * (d - (d > 0 ? 1 : 0)) / 2);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) out.push_back(x[a] * x[b]);
  }
  return out;
}

std::size_t expanded_dimension(std::size_t d, Expansion expansion) {
  if (expansion == Expansion::kLinear || d == 0) return d;
  return d + d * (d - 1) / 2;
}

Standardization Standardization::fit(const FeatureMatrix& m) {
  Standardization s;
  const std::size_t n = m.rows(), d = m.cols();
  s.mean.assign(d, 0.0);
  s.stdev.assign(d, 0.0);
  if (n == 0) return s;
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += m.at(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (m.at(i, j) - mean) * (m.at(i, j) - mean);
    s.mean[j] = mean;
    s.stdev[j] = std::sqrt(ss / static_cast<double>(n));
  }
  return s;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
  if (x.size() != mean.size())
    throw ValidationError("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(mean.size()));
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = stdev[j] > 0.0 ? (x[j] - mean[j]) / stdev[j] : 0.0;
  return z;
}

Design build_design(const FeatureMatrix& m, const Standardization& s, Expansion e) {
  Design x;
  x.rows = m.rows();
  x.cols = expanded_dimension(m.cols(), e);
  x.data.reserve(x.rows * x.cols);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto z = s.apply(m.row(i));
    if (e == Expansion::kQuadratic) z = expand_quadratic(z);
    x.data.insert(x.data.end(), z.begin(), z.end());
  }
  return x;
}

// ------------------------------------------------------------- objectives

namespace {

// log(sigma(t)), stable for large |t|.
double log_sigmoid(double t) { return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double linear_form(std::span<const double> theta, std::span<const double> row) {
  double z = theta[0];
  for (std::size_t j = 0; j < row.size(); ++j) z += theta[j + 1] * row[j];
  return z;
}

void check_inputs(const FeatureMatrix& m, std::span<const double> weights) {
  m.validate();
  if (!m.has_labels()) throw ValidationError("training needs a labeled matrix");
  if (weights.size() != m.rows()) throw ValidationError("one weight per example required");
  const auto pos = std::count(m.labels.begin(), m.labels.end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == m.rows())
    throw ValidationError("training needs both labels present");
  for (double v : m.values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value in training matrix");
  }
  for (double w : weights) {
    if (!(std::isfinite(w) && w >= 0.0)) throw ValidationError("example weights must be finite and >= 0");
  }
}

TrainedScorer make_scorer(const FeatureMatrix& m, Kind kind, Expansion e, Standardization s,
                          std::span<const double> theta) {
  TrainedScorer model;
  model.kind = kind;
  model.expansion = e;
  model.feature_names = m.feature_names;
  model.standardization = std::move(s);
  model.intercept = theta[0];
  model.coefficients.assign(theta.begin() + 1, theta.end());
  return model;
}

}  // namespace

double logistic_objective(std::span<const double> theta, const Design& x, std::span<const int> y,
                          std::span<const double> w, double lambda) {
  double f = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double z = linear_form(theta, x.row(i));
    f -= w[i] * log_sigmoid(static_cast<double>(y[i]) * z);
  }
  double ridge = 0.0;
  for (std::size_t j = 1; j < theta.size(); ++j) ridge += theta[j] * theta[j];
  return f + lambda * ridge;
}

void logistic_gradient(std::span<const double> theta, const Design& x, std::span<const int> y,
                       std::span<const double> w, double lambda, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto row = x.row(i);
    const double yi = static_cast<double>(y[i]);
    const double coef = -w[i] * yi * sigmoid(-yi * linear_form(theta, row));
    grad[0] += coef;
    for (std::size_t j = 0; j < row.size(); ++j) grad[j + 1] += coef * row[j];
  }
  for (std::size_t j = 1; j < theta.size(); ++j) grad[j] += 2.0 * lambda * theta[j];
}

double svm_objective(std::span<const double> theta, const Design& x, std::span<const int> y,
                     std::span<const double> w, double c) {
  double reg = 0.0;
  for (std::size_t j = 1; j < theta.size(); ++j) reg += theta[j] * theta[j];
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double margin = static_cast<double>(y[i]) * linear_form(theta, x.row(i));
    loss += (c * w[i]) * std::max(0.0, 1.0 - margin);
  }
  return 0.5 * reg + loss;
}

// ---------------------------------------------------------------- logistic

TrainedScorer train_logistic(const FeatureMatrix& m, std::span<const double> weights, Expansion e,
                             const LogisticOptions& opts) {
  check_inputs(m, weights);
  if (!(opts.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  auto standardization = Standardization::fit(m);
  const Design x = build_design(m, standardization, e);
  const std::span<const int> y = m.labels;
  const double total_weight = std::max(1e-300, std::accumulate(weights.begin(), weights.end(), 0.0));

  const std::size_t p = x.cols + 1;
  std::vector<double> theta(p, 0.0), grad(p), trial(p), trial_grad(p);
  double f = logistic_objective(theta, x, y, weights, opts.lambda);
  logistic_gradient(theta, x, y, weights, opts.lambda, grad);

  TrainingInfo info;
  info.seed = opts.seed;
  info.lambda = opts.lambda;
  info.max_iters = opts.max_iters;
  info.tol = opts.tol;
  info.initial_objective = f;

  auto max_abs = [](std::span<const double> v) {
    double mx = 0.0;
    for (double a : v) mx = std::max(mx, std::abs(a));
    return mx;
  };

  // Gradient descent on the negated log-likelihood. The trial step is the
  // Barzilai-Borwein estimate, accepted under the Armijo condition. Changes
  // within rounding noise of f count as acceptable, otherwise the search
  // stalls once f stops resolving the required decrease.
  double step = 1.0 / total_weight;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (max_abs(grad) / total_weight < opts.tol) {
      info.converged = true;
      break;
    }
    double g2 = 0.0;
    for (double g : grad) g2 += g * g;
    double f_trial = f;
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] - step * grad[j];
      f_trial = logistic_objective(trial, x, y, weights, opts.lambda);
      if (std::isfinite(f_trial) && f_trial <= f - 1e-4 * step * g2 + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    logistic_gradient(trial, x, y, weights, opts.lambda, trial_grad);
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double s = trial[j] - theta[j];
      ss += s * s;
      sy += s * (trial_grad[j] - grad[j]);
    }
    theta.swap(trial);
    grad.swap(trial_grad);
    f = f_trial;
    step = (sy > 0.0 && std::isfinite(ss / sy)) ? ss / sy : step * 2.0;
  }
  if (!info.converged && max_abs(grad) / total_weight < opts.tol) info.converged = true;
  info.iterations = it;
  info.objective = f;

  auto model = make_scorer(m, Kind::kLogistic, e, std::move(standardization), theta);
  model.info = info;
  return model;
}

TrainedScorer train_logistic(const FeatureMatrix& m, const ExampleWeighting& weighting, Expansion e,
                             const LogisticOptions& opts) {
  weighting.validate();
  auto model = train_logistic(m, weighting.weights(m.labels), e, opts);
  model.info.benefit = weighting.benefit;
  model.info.cost = weighting.cost;
  return model;
}

// ---------------------------------------------------------------- svm

TrainedScorer train_svm_primal(const FeatureMatrix& m, std::span<const double> weights, Expansion e,
                               const SvmOptions& opts, std::vector<double>* objective_trace) {
  check_inputs(m, weights);
  if (!(opts.c > 0.0)) throw ValidationError("svm penalty c must be > 0");
  auto standardization = Standardization::fit(m);
  const Design x = build_design(m, standardization, e);
  const std::span<const int> y = m.labels;

  // c * p_i is the only place either factor enters.
  std::vector<double> cw(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) cw[i] = opts.c * weights[i];
  // The objective is 1-strongly convex, so eta_t = 1 / (1 + t) by default.
  const double eta0 = opts.eta0 > 0.0 ? opts.eta0 : 1.0;

  const std::size_t p = x.cols + 1;
  std::vector<double> theta(p, 0.0), best(p, 0.0), grad(p);
  auto objective = [&](std::span<const double> t) { return svm_objective(t, x, y, cw, 1.0); };

  double f = objective(theta);
  double best_f = f;
  if (objective_trace) objective_trace->assign(1, f);

  TrainingInfo info;
  info.seed = opts.seed;
  info.c = opts.c;
  info.eta0 = eta0;
  info.max_iters = opts.max_iters;
  info.tol = opts.tol;
  info.initial_objective = f;

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t j = 1; j < p; ++j) grad[j] = theta[j];
    for (std::size_t i = 0; i < x.rows; ++i) {
      auto row = x.row(i);
      const double yi = static_cast<double>(y[i]);
      if (yi * linear_form(theta, row) < 1.0) {
        const double coef = -cw[i] * yi;
        grad[0] += coef;
        for (std::size_t j = 0; j < row.size(); ++j) grad[j + 1] += coef * row[j];
      }
    }
    const double eta = eta0 / (1.0 + static_cast<double>(it));
    double moved = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double delta = eta * grad[j];
      theta[j] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    f = objective(theta);
    if (objective_trace) objective_trace->push_back(f);
    if (f < best_f) {
      best_f = f;
      best = theta;
    }
    if (moved < opts.tol) {
      info.converged = true;
      ++it;
      break;
    }
  }
  info.iterations = it;
  info.objective = best_f;

  auto model = make_scorer(m, Kind::kSvm, e, std::move(standardization), best);
  model.info = info;
  return model;
}

TrainedScorer train_svm_primal(const FeatureMatrix& m, const ExampleWeighting& weighting, Expansion e,
                               const SvmOptions& opts, std::vector<double>* objective_trace) {
  weighting.validate();
  auto model = train_svm_primal(m, weighting.weights(m.labels), e, opts, objective_trace);
  model.info.benefit = weighting.benefit;
  model.info.cost = weighting.cost;
  return model;
}

// ------------------------------------------------------------- scoring

std::vector<double> TrainedScorer::transform(std::span<const double> x) const {
  auto z = standardization.apply(x);
  if (expansion == Expansion::kQuadratic) z = expand_quadratic(z);
  return z;
}

double TrainedScorer::score(std::span<const double> x) const {
  auto z = transform(x);
  if (z.size() != coefficients.size()) throw ValidationError("model coefficient count mismatch");
  double s = intercept;
  for (std::size_t j = 0; j < z.size(); ++j) s += coefficients[j] * z[j];
  return s;
}

double TrainedScorer::calibrated_rate(double s) const {
  if (calibration.empty()) throw ValidationError("model has no calibration");
  auto it = std::lower_bound(calibration.begin(), calibration.end(), s,
                             [](const CalibrationBin& b, double v) { return b.upper < v; });
  if (it == calibration.end()) --it;
  return it->rate;
}

double TrainedScorer::probability(std::span<const double> x) const {
  const double s = score(x);
  if (!calibration.empty()) return calibrated_rate(s);
  if (kind == Kind::kLogistic) return sigmoid(s);
  throw ValidationError("svm model needs calibration to produce probabilities");
}

std::vector<double> TrainedScorer::scores(const FeatureMatrix& m) const {
  std::vector<double> out;
  out.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(score(m.row(i)));
  return out;
}

std::vector<double> TrainedScorer::probabilities(const FeatureMatrix& m) const {
  std::vector<double> out;
  out.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(probability(m.row(i)));
  return out;
}

TrainedScorer calibrate(TrainedScorer model, const FeatureMatrix& training, int n_bins) {
  if (n_bins < 1) throw ValidationError("calibration needs at least one bin");
  if (!training.has_labels()) throw ValidationError("calibration needs labels");
  const std::size_t n = training.rows();
  if (n < static_cast<std::size_t>(n_bins))
    throw ValidationError("calibration needs at least as many examples as bins");

  auto s = model.scores(training);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] < s[b]; });

  std::vector<CalibrationBin> bins;
  std::vector<double> positives;
  const auto bins_n = static_cast<std::size_t>(n_bins);
  for (std::size_t b = 0; b < bins_n; ++b) {
    const std::size_t lo = b * n / bins_n, hi = (b + 1) * n / bins_n;
    if (lo == hi) continue;
    double pos = 0.0;
    for (std::size_t k = lo; k < hi; ++k) pos += training.labels[order[k]] > 0 ? 1.0 : 0.0;
    const double first = s[order[lo]], last = s[order[hi - 1]];
    if (!bins.empty() && bins.back().upper == first) {
      bins.back().upper = last;
      bins.back().count += hi - lo;
      positives.back() += pos;
    } else {
      bins.push_back({first, last, 0.0, hi - lo});
      positives.push_back(pos);
    }
  }
  for (std::size_t b = 0; b < bins.size(); ++b)
    bins[b].rate = positives[b] / static_cast<double>(bins[b].count);
  model.calibration = std::move(bins);
  return model;
}

}  // namespace crowdsel::models
