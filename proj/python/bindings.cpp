#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crowdsel/benefit.hpp"
#include "crowdsel/evaluation.hpp"
#include "crowdsel/features.hpp"
#include "crowdsel/models.hpp"
#include "crowdsel/screening.hpp"
#include "crowdsel/selection.hpp"

namespace py = pybind11;
using namespace crowdsel;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                          std::vector<std::string> names, std::vector<std::string> ids) {
  if (!labels.empty() && labels.size() != rows.size()) throw ValidationError("labels and rows differ in length");
  FeatureMatrix m;
  const std::size_t d = rows.empty() ? names.size() : rows.front().size();
  if (names.empty())
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  if (ids.empty())
    for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("u" + std::to_string(i + 1));
  if (ids.size() != rows.size()) throw ValidationError("user ids and rows differ in length");
  m.feature_names = std::move(names);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels.empty()) m.append(ids[i], rows[i]);
    else m.append(ids[i], rows[i], labels[i]);
  }
  m.validate();
  return m;
}

std::vector<std::vector<double>> rows_of(const FeatureMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

selection::IntervalConstraint constraint(double min_size, std::optional<double> exact_size,
                                         std::optional<double> max_size, bool restrict_to_top) {
  selection::IntervalConstraint c;
  c.min_size = min_size;
  c.exact_size = exact_size;
  c.max_size = max_size;
  c.restrict_to_top = restrict_to_top;
  return c;
}

selection::RankedSet ranked_from(const std::vector<double>& probabilities, const std::vector<int>& labels,
                                 const std::vector<double>& scores) {
  if (labels.size() != probabilities.size()) throw ValidationError("probabilities and labels differ in length");
  if (!scores.empty() && scores.size() != probabilities.size())
    throw ValidationError("scores and probabilities differ in length");
  std::vector<selection::Candidate> c;
  const auto width = std::to_string(probabilities.size()).size();
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    auto id = std::to_string(i);
    id = std::string(width - id.size(), '0') + id;
    c.push_back({id, scores.empty() ? probabilities[i] : scores[i], probabilities[i], labels[i]});
  }
  return selection::rank(std::move(c));
}

py::dict plan_dict(const selection::SelectionPlan& p) {
  py::dict d;
  d["first"] = p.training.first;
  d["last"] = p.training.last;
  d["positives"] = p.positives;
  d["rate"] = p.rate;
  d["score_low"] = p.score_low;
  d["score_high"] = p.score_high;
  return d;
}

benefit::ValueFunction value_function(const py::object& v) {
  if (py::isinstance<py::float_>(v) || py::isinstance<py::int_>(v)) return benefit::ValueFunction::linear(v.cast<double>());
  return benefit::ValueFunction::table(v.cast<std::vector<double>>());
}

benefit::BenefitSpec benefit_spec(const py::object& b, const py::object& c, std::optional<std::size_t> min_answers,
                                  double min_probability) {
  benefit::BenefitSpec s;
  s.benefit = value_function(b);
  s.cost = value_function(c);
  if (min_answers) s.constraint = benefit::AnswerConstraint{*min_answers, min_probability};
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Selecting strangers to ask on social media: features, weighted scorers, interval and benefit selection.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<FeatureMatrix>(m, "Matrix")
      .def(py::init(&make_matrix), py::arg("rows"), py::arg("labels") = std::vector<int>{},
           py::arg("feature_names") = std::vector<std::string>{}, py::arg("user_ids") = std::vector<std::string>{})
      .def_readonly("feature_names", &FeatureMatrix::feature_names)
      .def_readonly("user_ids", &FeatureMatrix::user_ids)
      .def_readonly("labels", &FeatureMatrix::labels)
      .def_property_readonly("rows", &rows_of)
      .def("__len__", &FeatureMatrix::rows)
      .def("to_csv", &format_feature_matrix);

  m.def("read_matrix", &read_feature_matrix, py::arg("path"));
  m.def("parse_matrix", &parse_feature_matrix, py::arg("csv"));
  m.def(
      "extract_features",
      [](const std::filesystem::path& corpus, const std::filesystem::path& lexicon,
         const std::filesystem::path& traits, std::optional<std::filesystem::path> profile_lexicon,
         long long query_time, int steadiness_window) {
        features::FeatureConfig cfg;
        cfg.lexicon = load_lexicon(lexicon);
        cfg.traits = load_trait_matrix(traits, cfg.lexicon);
        if (profile_lexicon) cfg.profile_words = load_lexicon(*profile_lexicon);
        const features::QueryContext ctx{query_time, steadiness_window};
        return features::extract_matrix(ingest_corpus(corpus), cfg, ctx);
      },
      py::arg("corpus"), py::arg("lexicon"), py::arg("traits"), py::arg("profile_lexicon") = py::none(),
      py::arg("query_time"), py::arg("steadiness_window") = 20);

  m.def(
      "screen",
      [](const FeatureMatrix& mat, double alpha, const std::string& correction) {
        const auto r = screening::chi_square_screen(mat, alpha, screening::parse_correction(correction));
        py::list out;
        for (const auto& f : r.features) {
          py::dict d;
          d["name"] = f.name;
          d["statistic"] = f.statistic;
          d["p_value"] = f.p_value;
          d["significant"] = f.significant;
          d["direction"] = f.direction;
          out.append(d);
        }
        return py::make_tuple(out, r.fdr_estimate);
      },
      py::arg("matrix"), py::arg("alpha") = 0.05, py::arg("correction") = "bonferroni");

  py::class_<models::TrainedScorer>(m, "Model")
      .def_readonly("intercept", &models::TrainedScorer::intercept)
      .def_readonly("coefficients", &models::TrainedScorer::coefficients)
      .def_readonly("feature_names", &models::TrainedScorer::feature_names)
      .def_property_readonly("kind", [](const models::TrainedScorer& s) { return models::to_string(s.kind); })
      .def_property_readonly("converged", [](const models::TrainedScorer& s) { return s.info.converged; })
      .def_property_readonly("iterations", [](const models::TrainedScorer& s) { return s.info.iterations; })
      .def("scores", &models::TrainedScorer::scores)
      .def("probabilities", &models::TrainedScorer::probabilities)
      .def("to_json", [](const models::TrainedScorer& s) { return models::format_model(s); });

  m.def("load_model", &models::load_model, py::arg("path"));
  m.def(
      "train",
      [](const FeatureMatrix& mat, const std::string& kind, const std::string& expansion, double benefit_value,
         double cost_value, double lambda, double c, int bins) {
        evaluation::ModelConfig cfg;
        cfg.kind = models::parse_kind(kind);
        cfg.expansion = models::parse_expansion(expansion);
        cfg.weighting = {benefit_value, cost_value};
        cfg.logistic.lambda = lambda;
        cfg.svm.c = c;
        cfg.calibration_bins = bins;
        return evaluation::train_model(mat, cfg);
      },
      py::arg("matrix"), py::arg("kind") = "logistic", py::arg("expansion") = "linear", py::arg("benefit") = 2.0,
      py::arg("cost") = 1.0, py::arg("lambda_") = 1e-3, py::arg("c") = 1.0, py::arg("bins") = 10);

  m.def(
      "optimal_interval",
      [](const std::vector<double>& probabilities, const std::vector<int>& labels, double min_size,
         std::optional<double> exact_size, std::optional<double> max_size, bool restrict_to_top,
         const std::vector<double>& scores) {
        return plan_dict(selection::optimal_interval(ranked_from(probabilities, labels, scores),
                                                     constraint(min_size, exact_size, max_size, restrict_to_top)));
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("min_size") = 0.0, py::arg("exact_size") = py::none(),
      py::arg("max_size") = py::none(), py::arg("restrict_to_top") = false,
      py::arg("scores") = std::vector<double>{},
      "Best-rate rank interval; ranks are 1-based in increasing probability order.");

  m.def(
      "map_percentile",
      [](std::size_t first, std::size_t last, std::size_t n, std::size_t size) {
        const auto iv = selection::map_percentile({first, last}, n, size);
        return py::make_tuple(iv.first, iv.last);
      },
      py::arg("first"), py::arg("last"), py::arg("n"), py::arg("m"));

  m.def(
      "binomial_pmf", [](std::size_t k, double p) { return benefit::binomial_pmf(k, p).pmf; }, py::arg("k"),
      py::arg("p"));
  m.def(
      "expected_net_benefit",
      [](std::size_t k, double p, const py::object& b, const py::object& c) {
        return benefit::expected_net_benefit(k, p, benefit_spec(b, c, std::nullopt, 0.0));
      },
      py::arg("k"), py::arg("p"), py::arg("benefit"), py::arg("cost"),
      "benefit/cost: a number (linear unit value) or a table indexed from 0.");
  m.def(
      "baseline_net_benefit",
      [](double population, double rate, double b, double c) {
        const auto r = benefit::baseline_net_benefit(population, rate, b, c);
        return py::make_tuple(r.value, r.send);
      },
      py::arg("population"), py::arg("rate"), py::arg("benefit"), py::arg("cost"));
  m.def("selected_net_benefit", &benefit::selected_net_benefit, py::arg("selected"), py::arg("rate"),
        py::arg("benefit"), py::arg("cost"));
  m.def(
      "optimal_benefit_selection",
      [](const std::vector<double>& probabilities, const std::vector<int>& labels, std::size_t test_size,
         const py::object& b, const py::object& c, std::optional<std::size_t> min_answers, double min_probability,
         double min_size) {
        const auto spec = benefit_spec(b, c, min_answers, min_probability);
        const auto r = benefit::optimal_benefit_selection(ranked_from(probabilities, labels, {}), test_size, spec,
                                                          constraint(min_size, std::nullopt, std::nullopt, false));
        py::dict d;
        d["feasible"] = r.feasible;
        d["expected_value"] = r.expected_value;
        d["ask_count"] = r.ask_count;
        d["plan"] = r.plan ? py::object(plan_dict(*r.plan)) : py::none();
        d["test_interval"] = r.plan ? py::object(py::make_tuple(r.test_interval.first, r.test_interval.last)) : py::none();
        return d;
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("test_size"), py::arg("benefit") = 10.0,
      py::arg("cost") = 1.0, py::arg("min_answers") = py::none(), py::arg("min_probability") = 0.0,
      py::arg("min_size") = 0.0);

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return evaluation::auc(scores, labels); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "evaluate",
      [](const FeatureMatrix& mat, const std::string& policies, int folds, std::uint64_t seed, double min_size,
         double ask_fraction, const std::string& kind) {
        evaluation::ModelConfig model;
        model.kind = models::parse_kind(kind);
        evaluation::PolicyConfig pc;
        pc.interval.min_size = min_size;
        pc.ask_fraction = ask_fraction;
        const auto list = evaluation::parse_policies(policies);
        return evaluation::format_eval_report(evaluation::evaluate_policies(mat, model, list, pc, folds, seed));
      },
      py::arg("matrix"), py::arg("policies") = "interval,topk,binary,random,all", py::arg("folds") = 5,
      py::arg("seed") = 1, py::arg("min_size") = 0.05, py::arg("ask_fraction") = 0.1, py::arg("kind") = "logistic",
      "K-fold policy comparison; returns the JSON report text.");
  m.def(
      "synthetic",
      [](std::size_t population, std::size_t dimension, std::vector<double> coefficients, double intercept,
         double noise, std::uint64_t seed) {
        evaluation::SynthSpec spec;
        spec.population = population;
        spec.dimension = dimension;
        spec.coefficients = std::move(coefficients);
        spec.intercept = intercept;
        spec.noise = noise;
        spec.seed = seed;
        auto data = evaluation::generate_synthetic(spec);
        return py::make_tuple(std::move(data.matrix), data.planted_probability);
      },
      py::arg("population") = 2000, py::arg("dimension") = 8, py::arg("coefficients") = std::vector<double>{},
      py::arg("intercept") = 0.0, py::arg("noise") = 0.0, py::arg("seed") = 1,
      "Planted logistic data; returns (Matrix, planted probabilities).");
}
