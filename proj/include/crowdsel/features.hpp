#pragma once

#include <array>
#include <string>
#include <vector>

#include "crowdsel/data_model.hpp"

namespace crowdsel::features {

/// Time statistics used when a user has no answered directed question:
/// one week, in minutes.
inline constexpr double kNoResponseFallbackMinutes = 10080.0;
/// Steadiness reported for perfectly periodic posting.
inline constexpr double kSteadinessCap = 1e6;

inline constexpr std::size_t kResponsivenessCount = 7;
inline constexpr std::size_t kProfileCount = 1;
inline constexpr std::size_t kActivityCount = 4;
inline constexpr std::size_t kReadinessCount = 4;

struct QueryContext {
  UnixSeconds query_time = 0;
  int steadiness_window = 20;

  void validate() const;
};

/// Mean/Median/Mode/Max/Min response time (minutes), ResponseRate, Proactiveness.
std::array<double, kResponsivenessCount> responsiveness_features(const UserRecord& record);

/// Number of profile tokens found in any category of `social_words`.
double profile_feature(std::string_view profile_text, const Lexicon& social_words);

/// Fraction of tokens (retweets excluded) falling in each category, in
/// lexicon order.
std::vector<double> lexicon_category_scores(const UserRecord& record, const Lexicon& lexicon);

std::vector<double> trait_scores(std::span<const double> category_scores, const TraitMatrix& traits);

/// MsgCount, DailyMsgCount, RetweetRatio, RetweetsPerDay.
std::array<double, kActivityCount> activity_features(const UserRecord& record);

/// DayLikelihood, HourLikelihood, Steadiness, Inactivity (seconds).
std::array<double, kReadinessCount> readiness_features(const UserRecord& record, const QueryContext& ctx);

/// Everything needed to turn a UserRecord into a FeatureVector.
struct FeatureConfig {
  Lexicon lexicon;
  TraitMatrix traits;
  /// Words counted in the profile. Empty means "use the lexicon category
  /// named `profile_category`", falling back to zero if it is absent.
  Lexicon profile_words;
  std::string profile_category = "Social Processes";

  std::size_t dimension() const;
  /// Canonical column names, in assembly order.
  std::vector<std::string> schema() const;
};

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
};

FeatureVector assemble(const UserRecord& record, const FeatureConfig& config, const QueryContext& ctx);

/// One row per record, columns per FeatureConfig::schema(). Labels are
/// copied when every record carries one; a partially labeled corpus is an
/// error.
FeatureMatrix extract_matrix(std::span<const UserRecord> records, const FeatureConfig& config,
                             const QueryContext& ctx);

/// Day of week 0..6 (0 = Sunday) and hour 0..23, UTC.
int utc_day_of_week(UnixSeconds t);
int utc_hour(UnixSeconds t);

}  // namespace crowdsel::features
