#include <cmath>

#include "crowdsel/models.hpp"
#include "json.hpp"

namespace crowdsel::models {

using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "crowdsel-model";
constexpr int kVersion = 1;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string("cannot serialize non-finite ") + what);
}

template <class T>
T field(const ordered_json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("model file missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("model field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_model(const TrainedScorer& model, std::string_view config_digest) {
  require_finite(model.intercept, "intercept");
  for (double c : model.coefficients) require_finite(c, "coefficient");

  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["kind"] = to_string(model.kind);
  j["expansion"] = to_string(model.expansion);
  j["feature_names"] = model.feature_names;
  j["standardization"] = {{"mean", model.standardization.mean}, {"stdev", model.standardization.stdev}};
  j["intercept"] = model.intercept;
  j["coefficients"] = model.coefficients;
  ordered_json bins = ordered_json::array();
  for (const auto& b : model.calibration)
    bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"rate", b.rate}, {"count", b.count}});
  j["calibration"] = std::move(bins);
  const auto& i = model.info;
  j["training"] = {{"seed", i.seed},
                   {"benefit", i.benefit},
                   {"cost", i.cost},
                   {"lambda", i.lambda},
                   {"c", i.c},
                   {"eta0", i.eta0},
                   {"max_iters", i.max_iters},
                   {"tol", i.tol},
                   {"iterations", i.iterations},
                   {"converged", i.converged},
                   {"initial_objective", i.initial_objective},
                   {"objective", i.objective}};
  if (!config_digest.empty()) j["config_digest"] = std::string(config_digest);
  return j.dump(2) + "\n";
}

TrainedScorer parse_model(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (field<std::string>(j, "format") != kFormat) throw ParseError("not a crowdsel model file");
  if (field<int>(j, "version") != kVersion) throw ParseError("unsupported model file version");

  TrainedScorer m;
  m.kind = parse_kind(field<std::string>(j, "kind"));
  m.expansion = parse_expansion(field<std::string>(j, "expansion"));
  m.feature_names = field<std::vector<std::string>>(j, "feature_names");
  const auto& st = j.at("standardization");
  m.standardization.mean = field<std::vector<double>>(st, "mean");
  m.standardization.stdev = field<std::vector<double>>(st, "stdev");
  m.intercept = field<double>(j, "intercept");
  m.coefficients = field<std::vector<double>>(j, "coefficients");
  for (const auto& b : j.at("calibration")) {
    m.calibration.push_back({field<double>(b, "lower"), field<double>(b, "upper"), field<double>(b, "rate"),
                             field<std::size_t>(b, "count")});
  }
  const auto& t = j.at("training");
  m.info.seed = field<std::uint64_t>(t, "seed");
  m.info.benefit = field<double>(t, "benefit");
  m.info.cost = field<double>(t, "cost");
  m.info.lambda = field<double>(t, "lambda");
  m.info.c = field<double>(t, "c");
  m.info.eta0 = field<double>(t, "eta0");
  m.info.max_iters = field<int>(t, "max_iters");
  m.info.tol = field<double>(t, "tol");
  m.info.iterations = field<int>(t, "iterations");
  m.info.converged = field<bool>(t, "converged");
  m.info.initial_objective = field<double>(t, "initial_objective");
  m.info.objective = field<double>(t, "objective");

  const auto d = m.feature_names.size();
  if (m.standardization.mean.size() != d || m.standardization.stdev.size() != d)
    throw ParseError("model standardization length differs from feature count");
  if (m.coefficients.size() != expanded_dimension(d, m.expansion))
    throw ParseError("model coefficient count does not match its expansion");
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedScorer& model, std::string_view config_digest) {
  write_text_file(path, format_model(model, config_digest));
}

TrainedScorer load_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace crowdsel::models
