#pragma once

#include <string>
#include <vector>

#include "crowdsel/data_model.hpp"

namespace crowdsel::screening {

enum class Correction { kNone, kBonferroni };

Correction parse_correction(std::string_view name);
std::string to_string(Correction c);

/// 2x2 contingency table: rows = feature above / at-or-below median,
/// columns = responded / did not respond.
struct Contingency {
  double above_pos = 0, above_neg = 0, below_pos = 0, below_neg = 0;
};

/// Yates-corrected Pearson statistic, 1 degree of freedom. Returns 0 when a
/// margin is empty.
double chi_square_yates(const Contingency& t);
/// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square_sf_1dof(double statistic);

struct FeatureTest {
  std::string name;
  double p_value = 1.0;
  double statistic = 0.0;
  int direction = 0;  // sign(mean responders - mean non-responders)
  bool significant = false;
  bool degenerate = false;
};

struct ScreenReport {
  double alpha = 0.05;
  Correction correction = Correction::kBonferroni;
  double per_test_alpha = 0.05;
  double fdr_estimate = 0.0;
  std::vector<FeatureTest> features;

  std::vector<std::string> significant_names() const;
  std::size_t significant_count() const;
};

/// Median-split chi-square test of every column against the labels.
ScreenReport chi_square_screen(const FeatureMatrix& matrix, double alpha, Correction correction);

/// Names whose direction is non-zero and identical in every report.
std::vector<std::string> consistent_features(std::span<const ScreenReport> reports);

/// Line-oriented `key: value` text; see docs/formats.md.
std::string format_report(const ScreenReport& report);

}  // namespace crowdsel::screening
