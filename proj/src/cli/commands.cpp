#include "commands.hpp"

#include <algorithm>
#include <sstream>

#include "crowdsel/benefit.hpp"
#include "crowdsel/evaluation.hpp"
#include "crowdsel/features.hpp"
#include "crowdsel/models.hpp"
#include "crowdsel/screening.hpp"
#include "crowdsel/selection.hpp"
#include "json.hpp"

namespace crowdsel::cli {

using nlohmann::ordered_json;

namespace {

ordered_json header(const RunConfig& cfg, std::string_view format) {
  ordered_json j;
  j["format"] = format;
  j["version"] = 1;
  for (const auto& [k, v] : cfg.metadata()) j[k] = v;
  return j;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

// CSV artifacts keep their header equal to the schema, so provenance goes
// into a sidecar next to them.
void write_meta(const RunConfig& cfg, const std::filesystem::path& artifact, ordered_json extra = {}) {
  auto j = header(cfg, "crowdsel-meta");
  j["artifact"] = artifact.filename().string();
  if (extra.is_object()) {
    for (auto& [k, v] : extra.items()) j[k] = v;
  }
  write_json(std::filesystem::path(artifact.string() + ".meta.json"), j);
}

std::string tail(const RunConfig& cfg, const std::filesystem::path& out) {
  return " seed=" + std::to_string(cfg.seed) + " digest=" + cfg.digest() + " -> " + out.string();
}

FeatureMatrix labeled_matrix(const RunConfig& cfg, const std::string& path) {
  auto m = read_feature_matrix(cfg.input(path));
  if (!m.has_labels()) throw ValidationError(path + ": matrix has no label column");
  return m;
}

evaluation::ModelConfig model_config(const RunConfig& cfg, const ModelFlags& f) {
  evaluation::ModelConfig mc;
  mc.kind = models::parse_kind(f.kind);
  mc.expansion = models::parse_expansion(f.expansion);
  mc.weighting = {f.benefit, f.cost};
  mc.weighting.validate();
  mc.logistic.lambda = f.lambda;
  mc.logistic.seed = cfg.seed;
  mc.svm.c = f.c;
  mc.svm.seed = cfg.seed;
  if (f.max_iters > 0) mc.logistic.max_iters = mc.svm.max_iters = f.max_iters;
  if (f.bins < 0) throw ValidationError("--bins must be >= 0");
  if (!(f.lambda >= 0.0)) throw ValidationError("--lambda must be >= 0");
  if (!(f.c > 0.0)) throw ValidationError("--c must be > 0");
  mc.calibration_bins = f.bins;
  return mc;
}

selection::IntervalConstraint constraint(const ConstraintFlags& f) {
  selection::IntervalConstraint c;
  c.min_size = f.min_size;
  if (f.exact_size >= 0.0) c.exact_size = f.exact_size;
  if (f.max_size >= 0.0) c.max_size = f.max_size;
  c.restrict_to_top = f.restrict_top;
  c.validate();
  return c;
}

void check_schema(const models::TrainedScorer& model, const FeatureMatrix& m, const std::string& what) {
  if (model.feature_names != m.feature_names)
    throw ValidationError(what + " columns do not match the model's feature names");
}

ordered_json plan_json(const selection::SelectionPlan& plan) {
  ordered_json j;
  j["interval"] = {plan.training.first, plan.training.last};
  j["training_size"] = plan.training_size;
  j["positives"] = plan.positives;
  j["rate"] = plan.rate;
  j["mapping"] = selection::to_string(plan.mapping);
  j["score_low"] = plan.score_low;
  j["score_high"] = plan.score_high;
  return j;
}

}  // namespace

// --------------------------------------------------------------- extract

std::string run_extract(const RunConfig& cfg, const ExtractOptions& o) {
  if (o.query_time < 0) throw ValidationError("--query-time is required and must be >= 0");
  features::QueryContext ctx{o.query_time, o.steadiness_window};
  ctx.validate();
  features::FeatureConfig fc;
  fc.lexicon = load_lexicon(cfg.input(o.lexicon));
  fc.traits = load_trait_matrix(cfg.input(o.traits), fc.lexicon);
  if (!o.profile_lexicon.empty()) fc.profile_words = load_lexicon(cfg.input(o.profile_lexicon));
  const auto records = ingest_corpus(cfg.input(o.corpus));
  const auto matrix = features::extract_matrix(records, fc, ctx);

  const auto out = cfg.output(o.out);
  write_feature_matrix(out, matrix);
  write_meta(cfg, out, {{"rows", matrix.rows()}, {"features", matrix.cols()}, {"query_time", o.query_time}});
  return "extract: " + std::to_string(matrix.rows()) + " users x " + std::to_string(matrix.cols()) + " features" +
         tail(cfg, out);
}

// ---------------------------------------------------------------- screen

std::string run_screen(const RunConfig& cfg, const ScreenOptions& o) {
  const auto m = labeled_matrix(cfg, o.matrix);
  const auto report = screening::chi_square_screen(m, o.alpha, screening::parse_correction(o.correction));
  std::string text;
  for (const auto& [k, v] : cfg.metadata()) text += k + ": " + v + "\n";
  text += screening::format_report(report);
  const auto out = cfg.output(o.out);
  write_text_file(out, text);
  return "screen: " + std::to_string(report.significant_count()) + " of " + std::to_string(report.features.size()) +
         " features significant, fdr=" + format_double(report.fdr_estimate) + tail(cfg, out);
}

// ----------------------------------------------------------------- train

std::string run_train(const RunConfig& cfg, const TrainOptions& o) {
  const auto mc = model_config(cfg, o.model);
  const auto m = labeled_matrix(cfg, o.matrix);
  const auto model = evaluation::train_model(m, mc);
  const auto out = cfg.output(o.out);
  models::save_model(out, model, cfg.digest());
  return "train: " + models::to_string(model.kind) + "/" + models::to_string(model.expansion) + " on " +
         std::to_string(m.rows()) + " examples, objective=" + format_double(model.info.objective) +
         (model.info.converged ? "" : " (not converged)") + tail(cfg, out);
}

// ---------------------------------------------------------------- select

std::string run_select(const RunConfig& cfg, const SelectOptions& o) {
  const auto model = models::load_model(cfg.input(o.model));
  const auto test = read_feature_matrix(cfg.input(o.test_matrix));
  check_schema(model, test, "test matrix");
  const auto ranked_test = selection::rank_matrix(model, test);
  const auto out = cfg.output(o.out);

  if (o.policy == "interval") {
    const auto cons = constraint(o.constraint);
    const auto train = labeled_matrix(cfg, o.train_matrix);
    check_schema(model, train, "training matrix");
    const auto ranked_train = selection::rank_matrix(model, train);
    const auto plan = selection::optimal_interval(ranked_train, cons, selection::parse_mapping(o.mapping));
    const auto sel = selection::map_interval(plan, ranked_test);
    auto md = cfg.metadata();
    md.emplace_back("policy", "interval");
    write_text_file(out, selection::format_plan(plan, &sel, md));
    return "select: interval [" + std::to_string(plan.training.first) + ", " + std::to_string(plan.training.last) +
           "] rate=" + format_double(plan.rate) + " selected=" + std::to_string(sel.size()) + tail(cfg, out);
  }

  selection::Selection sel;
  auto j = header(cfg, "crowdsel-selection");
  j["policy"] = o.policy;
  if (o.policy == "topk") {
    const std::size_t m = ranked_test.size();
    const auto k = o.k >= 0 ? static_cast<std::size_t>(o.k) : static_cast<std::size_t>(std::llround(0.1 * m));
    if (k > m) throw ValidationError("--k exceeds the test population (" + std::to_string(m) + ")");
    sel = selection::select_top_k(ranked_test, k);
    j["k"] = k;
  } else if (o.policy == "binary") {
    if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw ValidationError("--threshold must lie in [0, 1]");
    sel = selection::select_binary(ranked_test, o.threshold);
    j["threshold"] = o.threshold;
  } else {
    throw ValidationError("unknown policy '" + o.policy + "' (interval, topk, binary)");
  }
  j["selected_count"] = sel.size();
  j["selected"] = sel.user_ids;
  write_json(out, j);
  return "select: " + o.policy + " selected=" + std::to_string(sel.size()) + tail(cfg, out);
}

// --------------------------------------------------------------- benefit

std::string run_benefit(const RunConfig& cfg, const BenefitOptions& o) {
  benefit::BenefitSpec spec;
  spec.benefit = o.benefit_table.empty() ? benefit::ValueFunction::linear(o.benefit_linear)
                                         : benefit::parse_value_table(read_text_file(cfg.input(o.benefit_table)));
  spec.cost = o.cost_table.empty() ? benefit::ValueFunction::linear(o.cost_linear)
                                   : benefit::parse_value_table(read_text_file(cfg.input(o.cost_table)));
  if ((o.min_answers >= 0) != (o.min_prob >= 0.0))
    throw ValidationError("--min-answers and --min-prob must be given together");
  if (o.min_answers >= 0) spec.constraint = benefit::AnswerConstraint{static_cast<std::size_t>(o.min_answers), o.min_prob};
  spec.validate();
  const auto cons = constraint(o.constraint);

  const auto model = models::load_model(cfg.input(o.model));
  const auto train = labeled_matrix(cfg, o.train_matrix);
  check_schema(model, train, "training matrix");
  const auto ranked_train = selection::rank_matrix(model, train);

  std::optional<selection::RankedSet> ranked_test;
  if (!o.test_matrix.empty()) {
    const auto test = read_feature_matrix(cfg.input(o.test_matrix));
    check_schema(model, test, "test matrix");
    ranked_test = selection::rank_matrix(model, test);
  }
  std::size_t m = 0;
  if (o.test_size >= 0) {
    m = static_cast<std::size_t>(o.test_size);
    if (ranked_test && ranked_test->size() != m)
      throw ValidationError("--test-size disagrees with the test matrix row count");
  } else if (ranked_test) {
    m = ranked_test->size();
  } else {
    throw ValidationError("give --test-size or --test-matrix");
  }

  const auto result = benefit::optimal_benefit_selection(ranked_train, m, spec, cons);
  auto j = header(cfg, "crowdsel-benefit");
  j["test_size"] = m;
  j["feasible"] = result.feasible;
  if (result.feasible) {
    j["expected_value"] = result.expected_value;
    j["ask_count"] = result.ask_count;
    if (result.plan) {
      j["plan"] = plan_json(*result.plan);
      j["test_interval"] = {result.test_interval.first, result.test_interval.last};
    }
  }
  if (spec.is_linear()) {
    std::size_t pos = 0;
    for (const auto& c : ranked_train.members) pos += *c.label > 0 ? 1 : 0;
    const double r = static_cast<double>(pos) / static_cast<double>(ranked_train.size());
    const auto base = benefit::baseline_net_benefit(static_cast<double>(m), r, spec.benefit.unit(), spec.cost.unit());
    j["baseline"] = {{"rate", r}, {"value", base.value}, {"send", base.send}};
  }
  if (ranked_test) {
    const auto sel = benefit::apply_benefit_selection(result, *ranked_test);
    j["selected_count"] = sel.size();
    j["selected"] = sel.user_ids;
  }
  const auto out = cfg.output(o.out);
  write_json(out, j);
  if (!result.feasible) return "benefit: infeasible under the answer constraint" + tail(cfg, out);
  return "benefit: ask " + std::to_string(result.ask_count) + " of " + std::to_string(m) +
         ", expected net benefit " + format_double(result.expected_value) + tail(cfg, out);
}

// ------------------------------------------------------------------ eval

std::string run_eval(const RunConfig& cfg, const EvalOptions& o) {
  if (o.matrix.empty() == o.synthetic.empty()) throw ValidationError("give exactly one of --matrix or --synthetic");
  const auto mc = model_config(cfg, o.model);
  const auto policies = evaluation::parse_policies(o.policies);
  evaluation::PolicyConfig pc;
  pc.interval = constraint(o.constraint);
  pc.mapping = selection::parse_mapping(o.mapping);
  if (!(o.ask_fraction >= 0.0 && o.ask_fraction <= 1.0)) throw ValidationError("--ask-fraction must lie in [0, 1]");
  pc.ask_fraction = o.ask_fraction;
  pc.binary_threshold = o.threshold;

  FeatureMatrix m;
  if (!o.matrix.empty()) {
    m = labeled_matrix(cfg, o.matrix);
  } else {
    m = evaluation::generate_synthetic(evaluation::parse_synth_spec(read_text_file(cfg.input(o.synthetic)))).matrix;
  }
  const auto report = evaluation::evaluate_policies(m, mc, policies, pc, o.folds, cfg.seed);
  const auto out = cfg.output(o.report);
  write_text_file(out, evaluation::format_eval_report(report, cfg.metadata()));

  std::ostringstream s;
  s << "eval: " << report.evaluated_folds << "/" << report.folds << " folds, auc=" << format_double(report.auc)
    << ", base=" << format_double(report.base_rate);
  for (const auto& p : report.policies)
    s << ", " << evaluation::to_string(p.policy) << "=" << format_double(p.response_rate);
  return s.str() + tail(cfg, out);
}

// ----------------------------------------------------------------- synth

std::string run_synth(const RunConfig& cfg, const SynthOptions& o) {
  evaluation::SynthSpec spec;
  if (!o.spec.empty()) spec = evaluation::parse_synth_spec(read_text_file(cfg.input(o.spec)));
  if (o.spec.empty() || o.seed_given) spec.seed = cfg.seed;
  if (o.population) {
    if (*o.population < 1) throw ValidationError("--population must be >= 1");
    spec.population = static_cast<std::size_t>(*o.population);
  }
  if (o.dimension) {
    if (*o.dimension < 1) throw ValidationError("--dimension must be >= 1");
    spec.dimension = static_cast<std::size_t>(*o.dimension);
  }
  if (o.coefficients) {
    spec.coefficients.clear();
    std::istringstream cs(*o.coefficients);
    std::string c;
    while (std::getline(cs, c, ',')) spec.coefficients.push_back(parse_double(c));
  }
  if (o.intercept) spec.intercept = *o.intercept;
  if (o.noise) spec.noise = *o.noise;
  const auto data = evaluation::generate_synthetic(spec);

  const auto out = cfg.output(o.out);
  auto truth = out;
  truth.replace_extension(".truth.csv");
  write_feature_matrix(out, data.matrix);
  write_text_file(truth, evaluation::format_planted_truth(data));
  ordered_json coeffs = data.coefficients;
  write_meta(cfg, out,
             {{"population", spec.population},
              {"dimension", spec.dimension},
              {"synthetic_seed", spec.seed},
              {"intercept", spec.intercept},
              {"noise", spec.noise},
              {"coefficients", coeffs},
              {"truth", truth.filename().string()}});
  const auto pos = std::count(data.matrix.labels.begin(), data.matrix.labels.end(), 1);
  return "synth: " + std::to_string(spec.population) + " users, " + std::to_string(pos) + " responders" +
         tail(cfg, out);
}

}  // namespace crowdsel::cli
