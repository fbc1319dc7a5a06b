#include "crowdsel/selection.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace crowdsel::selection {

bool RankedSet::labeled() const {
  return std::all_of(members.begin(), members.end(), [](const Candidate& c) { return c.label.has_value(); });
}

RankedSet rank(std::vector<Candidate> candidates) {
  for (const auto& c : candidates) {
    if (!std::isfinite(c.probability)) throw ValidationError("non-finite probability for '" + c.user_id + "'");
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.probability != b.probability) return a.probability < b.probability;
    if (a.score != b.score) return a.score < b.score;
    return a.user_id < b.user_id;
  });
  return RankedSet{std::move(candidates)};
}

RankedSet rank_matrix(const models::TrainedScorer& model, const FeatureMatrix& m) {
  std::vector<Candidate> cands;
  cands.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Candidate c;
    c.user_id = m.user_ids[i];
    c.score = model.score(m.row(i));
    c.probability = model.probability(m.row(i));
    if (m.has_labels()) c.label = m.labels[i];
    cands.push_back(std::move(c));
  }
  return rank(std::move(cands));
}

// ----------------------------------------------------------- constraints

void IntervalConstraint::validate() const {
  auto frac = [](double f, const char* what) {
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
  };
  frac(min_size, "min_size");
  if (exact_size) frac(*exact_size, "exact_size");
  if (max_size) frac(*max_size, "max_size");
}

IntervalConstraint::Lengths IntervalConstraint::resolve(std::size_t n) const {
  validate();
  if (n == 0) throw ValidationError("cannot select from an empty ranking");
  const double nd = static_cast<double>(n);
  Lengths len;
  if (exact_size) {
    const auto exact = static_cast<std::size_t>(std::llround(*exact_size * nd));
    len.min = len.max = exact;
  } else {
    len.min = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(min_size * nd - 1e-9)));
    len.max = max_size ? static_cast<std::size_t>(std::floor(*max_size * nd + 1e-9)) : n;
  }
  if (len.min < 1 || len.max > n || len.min > len.max)
    throw ValidationError("infeasible interval constraint for " + std::to_string(n) +
                          " candidates (admissible lengths " + std::to_string(len.min) + ".." +
                          std::to_string(len.max) + ")");
  return len;
}

Mapping parse_mapping(std::string_view name) {
  if (name == "percentile") return Mapping::kPercentile;
  if (name == "score") return Mapping::kScore;
  throw ValidationError("unknown mapping '" + std::string(name) + "' (expected percentile|score)");
}

std::string to_string(Mapping m) { return m == Mapping::kPercentile ? "percentile" : "score"; }

// ---------------------------------------------------------- optimization

bool interval_preferred(std::size_t pos_a, Interval a, std::size_t pos_b, Interval b) {
  const auto lhs = static_cast<unsigned long long>(pos_a) * b.length();
  const auto rhs = static_cast<unsigned long long>(pos_b) * a.length();
  if (lhs != rhs) return lhs > rhs;
  if (a.length() != b.length()) return a.length() > b.length();
  return a.first < b.first;
}

SelectionPlan optimal_interval(const RankedSet& ranked, const IntervalConstraint& cons, Mapping mapping) {
  const std::size_t n = ranked.size();
  if (!ranked.labeled()) throw ValidationError("interval search needs labeled candidates");
  const auto len = cons.resolve(n);

  // prefix[r] = positives among ranks 1..r
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t r = 1; r <= n; ++r) prefix[r] = prefix[r - 1] + (*ranked.members[r - 1].label > 0 ? 1 : 0);

  bool found = false;
  Interval best;
  std::size_t best_pos = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t j_lo = i + len.min - 1;
    const std::size_t j_hi = std::min(n, i + len.max - 1);
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      if (cons.restrict_to_top && j != n) continue;
      const Interval cand{i, j};
      const std::size_t pos = prefix[j] - prefix[i - 1];
      if (!found || interval_preferred(pos, cand, best_pos, best)) {
        best = cand;
        best_pos = pos;
        found = true;
      }
    }
  }
  if (!found) throw ValidationError("no interval satisfies the constraint");

  SelectionPlan plan;
  plan.training = best;
  plan.training_size = n;
  plan.positives = best_pos;
  plan.rate = static_cast<double>(best_pos) / static_cast<double>(best.length());
  plan.mapping = mapping;
  plan.score_low = ranked.at_rank(best.first).score;
  plan.score_high = ranked.at_rank(best.last).score;
  return plan;
}

// -------------------------------------------------------------- mapping

Interval map_percentile(Interval training, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw ValidationError("percentile mapping needs non-empty populations");
  auto map = [&](std::size_t r) {
    const auto scaled = static_cast<std::size_t>((static_cast<unsigned long long>(r) * m) / n);
    return std::clamp<std::size_t>(scaled, 1, m);
  };
  return {map(training.first), map(training.last)};
}

namespace {

Selection from_ranks(const RankedSet& ranked, std::size_t first, std::size_t last) {
  Selection s;
  for (std::size_t r = first; r <= last && r <= ranked.size(); ++r) {
    s.ranks.push_back(r);
    s.user_ids.push_back(ranked.at_rank(r).user_id);
  }
  s.empty = s.user_ids.empty();
  return s;
}

}  // namespace

Selection map_interval(const SelectionPlan& plan, const RankedSet& test) {
  if (test.size() == 0) return {};
  if (plan.mapping == Mapping::kPercentile) {
    const auto mapped = map_percentile(plan.training, plan.training_size, test.size());
    return from_ranks(test, mapped.first, mapped.last);
  }
  const double lo = std::min(plan.score_low, plan.score_high);
  const double hi = std::max(plan.score_low, plan.score_high);
  Selection s;
  for (std::size_t r = 1; r <= test.size(); ++r) {
    const auto& c = test.at_rank(r);
    if (c.score >= lo && c.score <= hi) {
      s.ranks.push_back(r);
      s.user_ids.push_back(c.user_id);
    }
  }
  s.empty = s.user_ids.empty();
  return s;
}

Selection select_top_k(const RankedSet& ranked, std::size_t k) {
  if (k > ranked.size()) throw ValidationError("k exceeds the number of candidates");
  if (k == 0) return {};
  return from_ranks(ranked, ranked.size() - k + 1, ranked.size());
}

Selection select_binary(const RankedSet& ranked, double threshold) {
  Selection s;
  for (std::size_t r = 1; r <= ranked.size(); ++r) {
    if (ranked.at_rank(r).probability >= threshold) {
      s.ranks.push_back(r);
      s.user_ids.push_back(ranked.at_rank(r).user_id);
    }
  }
  s.empty = s.user_ids.empty();
  return s;
}

double response_rate(const Selection& s, const RankedSet& population) {
  if (s.ranks.empty()) return 0.0;
  double pos = 0;
  for (auto r : s.ranks) pos += population.at_rank(r).label.value_or(-1) > 0 ? 1.0 : 0.0;
  return pos / static_cast<double>(s.ranks.size());
}

double recommendation_recall(const Selection& s, const RankedSet& population) {
  double all = 0, hit = 0;
  for (const auto& c : population.members) all += c.label.value_or(-1) > 0 ? 1.0 : 0.0;
  if (all == 0) return 0.0;
  for (auto r : s.ranks) hit += population.at_rank(r).label.value_or(-1) > 0 ? 1.0 : 0.0;
  return hit / all;
}

// --------------------------------------------------------------- plan io

std::string format_plan(const SelectionPlan& plan, const Selection* selected,
                        std::span<const std::pair<std::string, std::string>> metadata) {
  nlohmann::ordered_json j;
  j["format"] = "crowdsel-plan";
  j["version"] = 1;
  for (const auto& [k, v] : metadata) j[k] = v;
  j["interval"] = {plan.training.first, plan.training.last};
  j["training_size"] = plan.training_size;
  j["positives"] = plan.positives;
  j["rate"] = plan.rate;
  j["mapping"] = to_string(plan.mapping);
  j["score_low"] = plan.score_low;
  j["score_high"] = plan.score_high;
  if (plan.ask_count) j["ask_count"] = *plan.ask_count;
  if (selected) {
    j["selected_count"] = selected->size();
    j["selected"] = selected->user_ids;
  }
  return j.dump(2) + "\n";
}

SelectionPlan parse_plan(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw ParseError(std::string("plan file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "crowdsel-plan") throw ParseError("not a crowdsel plan file");
    SelectionPlan p;
    auto iv = j.at("interval").get<std::vector<std::size_t>>();
    if (iv.size() != 2) throw ParseError("plan interval must have two ranks");
    p.training = {iv[0], iv[1]};
    p.training_size = j.at("training_size").get<std::size_t>();
    p.positives = j.at("positives").get<std::size_t>();
    p.rate = j.at("rate").get<double>();
    p.mapping = parse_mapping(j.at("mapping").get<std::string>());
    p.score_low = j.at("score_low").get<double>();
    p.score_high = j.at("score_high").get<double>();
    if (j.contains("ask_count")) p.ask_count = j.at("ask_count").get<std::size_t>();
    if (p.training.first < 1 || p.training.first > p.training.last || p.training.last > p.training_size)
      throw ParseError("plan interval out of range");
    return p;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw ParseError(std::string("plan file: ") + e.what());
  }
}

}  // namespace crowdsel::selection
