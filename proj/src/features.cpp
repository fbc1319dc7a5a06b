#include "crowdsel/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace crowdsel::features {

namespace {

constexpr std::array<const char*, kResponsivenessCount> kResponsivenessNames = {
    "MeanResponseTime", "MedianResponseTime", "ModeResponseTime", "MaxResponseTime",
    "MinResponseTime",  "ResponseRate",       "Proactiveness"};
constexpr std::array<const char*, kActivityCount> kActivityNames = {
    "MsgCount", "DailyMsgCount", "RetweetRatio", "RetweetsPerDay"};
constexpr std::array<const char*, kReadinessCount> kReadinessNames = {
    "DayLikelihood", "HourLikelihood", "Steadiness", "Inactivity"};

constexpr double kSecondsPerDay = 86400.0;

std::vector<UnixSeconds> sorted_timestamps(const UserRecord& record) {
  std::vector<UnixSeconds> ts;
  ts.reserve(record.posts.size());
  for (const auto& p : record.posts) ts.push_back(p.timestamp);
  std::sort(ts.begin(), ts.end());
  return ts;
}

double median_of_sorted(std::span<const double> xs) {
  const auto n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Most frequent whole-minute value; ties go to the smallest.
double mode_minutes(std::span<const double> xs) {
  std::map<long long, int> counts;
  for (double x : xs) ++counts[std::llround(x)];
  long long best = 0;
  int best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return static_cast<double>(best);
}

double count_in_categories(std::string_view text, const Lexicon& lexicon,
                           std::span<const std::size_t> categories) {
  double count = 0.0;
  for (const auto& tok : tokenize(text)) {
    for (auto g : categories) {
      if (lexicon.matches(g, tok)) {
        count += 1.0;
        break;
      }
    }
  }
  return count;
}

}  // namespace

void QueryContext::validate() const {
  if (query_time < 0) throw ValidationError("query time must be non-negative");
  if (steadiness_window < 2) throw ValidationError("steadiness window must be at least 2");
}

int utc_day_of_week(UnixSeconds t) {
  // 1970-01-01 was a Thursday.
  auto days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
  return static_cast<int>(((days + 4) % 7 + 7) % 7);
}

int utc_hour(UnixSeconds t) {
  auto secs = ((t % 86400) + 86400) % 86400;
  return static_cast<int>(secs / 3600);
}

std::array<double, kResponsivenessCount> responsiveness_features(const UserRecord& record) {
  std::vector<double> minutes;
  double directed = 0, directed_answered = 0, indirect = 0, indirect_answered = 0;
  for (const auto& q : record.inbound_questions) {
    if (q.directed) {
      directed += 1;
      if (q.responded_at) {
        directed_answered += 1;
        minutes.push_back(static_cast<double>(*q.responded_at - q.asked_at) / 60.0);
      }
    } else {
      indirect += 1;
      if (q.responded_at) indirect_answered += 1;
    }
  }
  // Sorting first keeps the sum independent of question order.
  std::sort(minutes.begin(), minutes.end());

  std::array<double, kResponsivenessCount> out{};
  if (minutes.empty()) {
    std::fill(out.begin(), out.begin() + 5, kNoResponseFallbackMinutes);
  } else {
    out[0] = std::accumulate(minutes.begin(), minutes.end(), 0.0) / static_cast<double>(minutes.size());
    out[1] = median_of_sorted(minutes);
    out[2] = mode_minutes(minutes);
    out[3] = minutes.back();
    out[4] = minutes.front();
  }
  out[5] = directed > 0 ? std::clamp(directed_answered / directed, 0.0, 1.0) : 0.0;
  out[6] = indirect > 0 ? std::clamp(indirect_answered / indirect, 0.0, 1.0) : 0.0;
  return out;
}

double profile_feature(std::string_view profile_text, const Lexicon& social_words) {
  std::vector<std::size_t> all(social_words.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return count_in_categories(profile_text, social_words, all);
}

std::vector<double> lexicon_category_scores(const UserRecord& record, const Lexicon& lexicon) {
  std::vector<double> counts(lexicon.size(), 0.0);
  std::unordered_map<std::string, std::vector<std::size_t>> memo;
  double total = 0.0;
  for (const auto& post : record.posts) {
    if (post.is_retweet) continue;
    for (auto& tok : tokenize(post.text)) {
      total += 1.0;
      auto it = memo.find(tok);
      if (it == memo.end()) it = memo.emplace(tok, lexicon.categories_of(tok)).first;
      for (auto g : it->second) counts[g] += 1.0;
    }
  }
  if (total == 0.0) return std::vector<double>(lexicon.size(), 0.0);
  for (auto& c : counts) c /= total;
  return counts;
}

std::vector<double> trait_scores(std::span<const double> category_scores, const TraitMatrix& traits) {
  std::vector<double> out;
  out.reserve(traits.size());
  for (const auto& trait : traits.traits) {
    double s = 0.0;
    for (const auto& term : trait.terms) s += term.weight * category_scores[term.category_index];
    out.push_back(s);
  }
  return out;
}

std::array<double, kActivityCount> activity_features(const UserRecord& record) {
  std::array<double, kActivityCount> out{};
  if (record.posts.empty()) return out;
  auto ts = sorted_timestamps(record);
  const double msgs = static_cast<double>(ts.size());
  const double retweets = static_cast<double>(
      std::count_if(record.posts.begin(), record.posts.end(), [](const Post& p) { return p.is_retweet; }));
  const double span_days = std::max(1.0, static_cast<double>(ts.back() - ts.front()) / kSecondsPerDay);
  out[0] = msgs;
  out[1] = msgs / span_days;
  out[2] = retweets / msgs;
  out[3] = retweets / span_days;
  return out;
}

std::array<double, kReadinessCount> readiness_features(const UserRecord& record, const QueryContext& ctx) {
  std::array<double, kReadinessCount> out{};
  auto ts = sorted_timestamps(record);
  if (ts.empty()) {
    // Never seen posting: treat the last post as the epoch.
    out[3] = static_cast<double>(ctx.query_time);
    return out;
  }
  const double n = static_cast<double>(ts.size());
  const int qday = utc_day_of_week(ctx.query_time);
  const int qhour = utc_hour(ctx.query_time);
  double on_day = 0, on_hour = 0;
  for (auto t : ts) {
    if (utc_day_of_week(t) == qday) on_day += 1;
    if (utc_hour(t) == qhour) on_hour += 1;
  }
  out[0] = on_day / n;
  out[1] = on_hour / n;

  const std::size_t window = std::min<std::size_t>(ts.size(), static_cast<std::size_t>(ctx.steadiness_window));
  if (window >= 3) {
    std::vector<double> gaps;
    for (std::size_t i = ts.size() - window + 1; i < ts.size(); ++i)
      gaps.push_back(static_cast<double>(ts[i] - ts[i - 1]));
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(gaps.size()));
    out[2] = sigma == 0.0 ? kSteadinessCap : std::min(1.0 / sigma, kSteadinessCap);
  }
  out[3] = static_cast<double>(ctx.query_time - ts.back());
  return out;
}

std::size_t FeatureConfig::dimension() const {
  return kResponsivenessCount + kProfileCount + lexicon.size() + traits.size() + kActivityCount +
         kReadinessCount;
}

std::vector<std::string> FeatureConfig::schema() const {
  std::vector<std::string> names;
  names.reserve(dimension());
  for (auto n : kResponsivenessNames) names.emplace_back(n);
  names.emplace_back("CountSocialWords");
  for (const auto& c : lexicon.categories()) names.push_back("liwc:" + c.name);
  for (const auto& t : traits.traits) names.push_back("trait:" + t.name);
  for (auto n : kActivityNames) names.emplace_back(n);
  for (auto n : kReadinessNames) names.emplace_back(n);
  return names;
}

FeatureVector assemble(const UserRecord& record, const FeatureConfig& config, const QueryContext& ctx) {
  ctx.validate();
  FeatureVector fv;
  fv.names = config.schema();
  fv.values.reserve(fv.names.size());

  auto resp = responsiveness_features(record);
  fv.values.insert(fv.values.end(), resp.begin(), resp.end());

  if (config.profile_words.size() > 0) {
    fv.values.push_back(profile_feature(record.profile_text, config.profile_words));
  } else if (auto idx = config.lexicon.index_of(config.profile_category)) {
    const std::size_t cats[] = {*idx};
    fv.values.push_back(count_in_categories(record.profile_text, config.lexicon, cats));
  } else {
    fv.values.push_back(0.0);
  }

  auto cats = lexicon_category_scores(record, config.lexicon);
  auto traits = trait_scores(cats, config.traits);
  fv.values.insert(fv.values.end(), cats.begin(), cats.end());
  fv.values.insert(fv.values.end(), traits.begin(), traits.end());

  auto act = activity_features(record);
  fv.values.insert(fv.values.end(), act.begin(), act.end());
  auto ready = readiness_features(record, ctx);
  fv.values.insert(fv.values.end(), ready.begin(), ready.end());
  return fv;
}

FeatureMatrix extract_matrix(std::span<const UserRecord> records, const FeatureConfig& config,
                             const QueryContext& ctx) {
  FeatureMatrix m;
  m.feature_names = config.schema();
  const auto labeled = std::count_if(records.begin(), records.end(),
                                     [](const UserRecord& r) { return r.label.has_value(); });
  if (labeled != 0 && static_cast<std::size_t>(labeled) != records.size())
    throw ValidationError("corpus is partially labeled: " + std::to_string(labeled) + " of " +
                          std::to_string(records.size()) + " records carry a label");
  for (const auto& r : records) {
    auto fv = assemble(r, config, ctx);
    m.append(r.user_id, fv.values, r.label);
  }
  return m;
}

}  // namespace crowdsel::features
