#include "crowdsel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "crowdsel/rng.hpp"
#include "json.hpp"

namespace crowdsel::evaluation {

// ---------------------------------------------------------------- folds

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::sizes() const {
  std::vector<std::size_t> s(static_cast<std::size_t>(folds), 0);
  for (int f : fold_of) ++s[static_cast<std::size_t>(f)];
  return s;
}

FoldPlan kfold(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("k-fold needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > n)
    throw ValidationError("cannot split " + std::to_string(n) + " examples into " + std::to_string(folds) +
                          " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.folds = folds;
  plan.seed = seed;
  plan.fold_of.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos)
    plan.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return plan;
}

// -------------------------------------------------------------- metrics

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double pos = 0, rank_sum = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    // ranks start+1 .. end share their average
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] > 0) {
        pos += 1;
        rank_sum += midrank;
      }
    }
    start = end;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) throw ValidationError("auc needs both labels present");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double f1_score(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double Confusion::f1() const { return f1_score(precision(), recall()); }

Confusion confusion(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw ValidationError("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] > 0, y = labels[i] > 0;
    (p ? (y ? c.tp : c.fp) : (y ? c.fn : c.tn)) += 1;
  }
  return c;
}

// ------------------------------------------------------------- policies

std::string to_string(Policy p) {
  switch (p) {
    case Policy::kInterval: return "interval";
    case Policy::kTopK: return "topk";
    case Policy::kBinary: return "binary";
    case Policy::kRandom: return "random";
    case Policy::kAll: return "all";
    case Policy::kNone: return "none";
  }
  return "?";
}

std::vector<Policy> parse_policies(std::string_view list) {
  std::vector<Policy> out;
  std::string item;
  std::istringstream in{std::string(list)};
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    Policy p;
    if (item == "interval") p = Policy::kInterval;
    else if (item == "topk") p = Policy::kTopK;
    else if (item == "binary") p = Policy::kBinary;
    else if (item == "random") p = Policy::kRandom;
    else if (item == "all") p = Policy::kAll;
    else if (item == "none") p = Policy::kNone;
    else throw ValidationError("unknown policy '" + item + "'");
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  if (out.empty()) throw ValidationError("at least one policy is required");
  return out;
}

models::TrainedScorer train_model(const FeatureMatrix& training, const ModelConfig& config) {
  auto model = config.kind == models::Kind::kLogistic
                   ? models::train_logistic(training, config.weighting, config.expansion, config.logistic)
                   : models::train_svm_primal(training, config.weighting, config.expansion, config.svm);
  if (config.calibration_bins == 0) return model;
  return models::calibrate(std::move(model), training, config.calibration_bins);
}

namespace {

bool single_class(std::span<const int> labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return pos == 0 || static_cast<std::size_t>(pos) == labels.size();
}

selection::Selection select_random(const selection::RankedSet& ranked, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> ranks(ranked.size());
  std::iota(ranks.begin(), ranks.end(), std::size_t{1});
  Rng rng(seed);
  rng.shuffle(ranks);
  ranks.resize(k);
  std::sort(ranks.begin(), ranks.end());
  selection::Selection s;
  for (auto r : ranks) {
    s.ranks.push_back(r);
    s.user_ids.push_back(ranked.at_rank(r).user_id);
  }
  s.empty = s.ranks.empty();
  return s;
}

}  // namespace

const PolicySummary* EvalReport::find(Policy p) const {
  for (const auto& s : policies) {
    if (s.policy == p) return &s;
  }
  return nullptr;
}

EvalReport evaluate_policies(const FeatureMatrix& matrix, const ModelConfig& model_config,
                             std::span<const Policy> policies, const PolicyConfig& policy_config, int folds,
                             std::uint64_t seed) {
  matrix.validate();
  if (!matrix.has_labels()) throw ValidationError("evaluation needs a labeled matrix");
  if (policies.empty()) throw ValidationError("at least one policy is required");
  const auto plan = kfold(matrix.rows(), folds, seed);

  EvalReport report;
  report.folds = folds;
  report.seed = seed;
  report.examples = matrix.rows();
  for (auto p : policies) report.policies.push_back({p, 0.0, 0.0, 0});

  for (int f = 0; f < folds; ++f) {
    FoldReport fr;
    fr.fold = f;
    const auto train_idx = plan.train_indices(f);
    const auto test_idx = plan.test_indices(f);
    const auto train = matrix.subset(train_idx);
    const auto test = matrix.subset(test_idx);
    fr.train_size = train.rows();
    fr.test_size = test.rows();
    if (single_class(train.labels) || single_class(test.labels)) {
      fr.skipped = true;
      fr.warning = "fold " + std::to_string(f) + " has a single class; skipped";
      report.per_fold.push_back(std::move(fr));
      continue;
    }
    const auto model = train_model(train, model_config);
    const auto ranked_train = selection::rank_matrix(model, train);
    const auto ranked_test = selection::rank_matrix(model, test);

    std::vector<double> scores;
    std::vector<int> labels, predicted;
    for (const auto& c : ranked_test.members) {
      scores.push_back(c.score);
      labels.push_back(*c.label);
      predicted.push_back(c.probability >= policy_config.binary_threshold ? 1 : -1);
    }
    fr.base_rate = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) /
                   static_cast<double>(labels.size());
    fr.auc = auc(scores, labels);
    const auto conf = confusion(predicted, labels);
    fr.precision = conf.precision();
    fr.recall = conf.recall();
    fr.f1 = conf.f1();

    const std::size_t m = ranked_test.size();
    const auto ask_k = std::min<std::size_t>(
        m, static_cast<std::size_t>(std::llround(policy_config.ask_fraction * static_cast<double>(m))));
    for (auto p : policies) {
      selection::Selection sel;
      switch (p) {
        case Policy::kInterval: {
          const auto iv = selection::optimal_interval(ranked_train, policy_config.interval, policy_config.mapping);
          sel = selection::map_interval(iv, ranked_test);
          break;
        }
        case Policy::kTopK: sel = selection::select_top_k(ranked_test, ask_k); break;
        case Policy::kBinary: sel = selection::select_binary(ranked_test, policy_config.binary_threshold); break;
        case Policy::kRandom:
          sel = select_random(ranked_test, ask_k, seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(f + 1)));
          break;
        case Policy::kAll: sel = selection::select_top_k(ranked_test, m); break;
        case Policy::kNone: break;
      }
      PolicyOutcome out;
      out.policy = p;
      out.selected = sel.size();
      out.empty = sel.ranks.empty();
      out.response_rate = selection::response_rate(sel, ranked_test);
      out.recall = selection::recommendation_recall(sel, ranked_test);
      fr.policies.push_back(out);
    }
    report.per_fold.push_back(std::move(fr));
  }

  for (const auto& fr : report.per_fold) {
    if (fr.skipped) continue;
    ++report.evaluated_folds;
    report.base_rate += fr.base_rate;
    report.precision += fr.precision;
    report.recall += fr.recall;
    report.f1 += fr.f1;
    report.auc += fr.auc;
    for (std::size_t k = 0; k < fr.policies.size(); ++k) {
      report.policies[k].response_rate += fr.policies[k].response_rate;
      report.policies[k].recall += fr.policies[k].recall;
      report.policies[k].empty_folds += fr.policies[k].empty ? 1 : 0;
    }
  }
  if (report.evaluated_folds > 0) {
    const double d = report.evaluated_folds;
    report.base_rate /= d;
    report.precision /= d;
    report.recall /= d;
    report.f1 /= d;
    report.auc /= d;
    for (auto& s : report.policies) {
      s.response_rate /= d;
      s.recall /= d;
    }
  }
  return report;
}

std::string format_eval_report(const EvalReport& report,
                               std::span<const std::pair<std::string, std::string>> metadata) {
  nlohmann::ordered_json j;
  j["format"] = "crowdsel-eval";
  j["version"] = 1;
  for (const auto& [k, v] : metadata) j[k] = v;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  j["examples"] = report.examples;
  j["evaluated_folds"] = report.evaluated_folds;
  j["average"] = {{"base_rate", report.base_rate},
                  {"precision", report.precision},
                  {"recall", report.recall},
                  {"f1", report.f1},
                  {"auc", report.auc}};
  auto pol = nlohmann::ordered_json::array();
  for (const auto& s : report.policies) {
    pol.push_back({{"policy", to_string(s.policy)},
                   {"response_rate", s.response_rate},
                   {"recall", s.recall},
                   {"empty_folds", s.empty_folds}});
  }
  j["policies"] = std::move(pol);
  auto folds = nlohmann::ordered_json::array();
  for (const auto& fr : report.per_fold) {
    nlohmann::ordered_json jf = {{"fold", fr.fold},     {"skipped", fr.skipped},    {"train_size", fr.train_size},
                                 {"test_size", fr.test_size}, {"base_rate", fr.base_rate}, {"precision", fr.precision},
                                 {"recall", fr.recall}, {"f1", fr.f1},              {"auc", fr.auc}};
    if (!fr.warning.empty()) jf["warning"] = fr.warning;
    auto jp = nlohmann::ordered_json::array();
    for (const auto& p : fr.policies) {
      jp.push_back({{"policy", to_string(p.policy)},
                    {"response_rate", p.response_rate},
                    {"recall", p.recall},
                    {"selected", p.selected},
                    {"empty_selection", p.empty}});
    }
    jf["policies"] = std::move(jp);
    folds.push_back(std::move(jf));
  }
  j["per_fold"] = std::move(folds);
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------- synthetic

void SynthSpec::validate() const {
  if (population < 1) throw ValidationError("synthetic population must be >= 1");
  if (dimension < 1) throw ValidationError("synthetic dimension must be >= 1");
  if (!coefficients.empty() && coefficients.size() != dimension)
    throw ValidationError("synthetic coefficient count must equal the dimension");
  if (!(noise >= 0.0) || !std::isfinite(intercept)) throw ValidationError("bad synthetic noise/intercept");
}

std::vector<double> SynthSpec::effective_coefficients() const {
  if (!coefficients.empty()) return coefficients;
  // Decaying, sign-alternating weights scaled to a logit spread of 2.5.
  std::vector<double> c(dimension);
  double norm = 0.0;
  for (std::size_t j = 0; j < dimension; ++j) {
    c[j] = (j % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(j + 1);
    norm += c[j] * c[j];
  }
  for (auto& v : c) v *= 2.5 / std::sqrt(norm);
  return c;
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  SyntheticData data;
  data.coefficients = spec.effective_coefficients();
  data.intercept = spec.intercept;
  for (std::size_t j = 0; j < spec.dimension; ++j) data.matrix.feature_names.push_back("x" + std::to_string(j + 1));

  const auto width = std::to_string(spec.population).size();
  Rng rng(spec.seed);
  std::vector<double> x(spec.dimension);
  for (std::size_t i = 0; i < spec.population; ++i) {
    double logit = spec.intercept;
    for (std::size_t j = 0; j < spec.dimension; ++j) {
      x[j] = rng.normal();
      logit += data.coefficients[j] * x[j];
    }
    const double prob = 1.0 / (1.0 + std::exp(-logit));
    const int label = rng.bernoulli(prob) ? 1 : -1;
    if (spec.noise > 0.0) {
      for (auto& v : x) v += spec.noise * rng.normal();
    }
    std::string id = std::to_string(i + 1);
    id = "s" + std::string(width - id.size(), '0') + id;
    data.matrix.append(std::move(id), x, label);
    data.planted_probability.push_back(prob);
  }
  return data;
}

SynthSpec parse_synth_spec(std::string_view text) {
  SynthSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    const std::string where = "synthetic spec line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ParseError(where + "expected 'key = value'");
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const auto key = strip(line.substr(0, eq));
    const auto value = strip(line.substr(eq + 1));
    try {
      if (key == "population") spec.population = static_cast<std::size_t>(parse_double(value));
      else if (key == "dimension") spec.dimension = static_cast<std::size_t>(parse_double(value));
      else if (key == "intercept") spec.intercept = parse_double(value);
      else if (key == "noise") spec.noise = parse_double(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "coefficients") {
        spec.coefficients.clear();
        std::istringstream cs(value);
        std::string c;
        while (std::getline(cs, c, ',')) spec.coefficients.push_back(parse_double(c));
      } else {
        throw ParseError("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError(where + "bad value for '" + key + "'");
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  spec.validate();
  return spec;
}

std::string format_planted_truth(const SyntheticData& data) {
  std::string out = "user_id,planted_probability\n";
  for (std::size_t i = 0; i < data.matrix.rows(); ++i)
    out += data.matrix.user_ids[i] + "," + format_double(data.planted_probability[i]) + "\n";
  return out;
}

}  // namespace crowdsel::evaluation
