#include "crowdsel/screening.hpp"

#include <algorithm>
#include <cmath>

namespace crowdsel::screening {

Correction parse_correction(std::string_view name) {
  if (name == "none") return Correction::kNone;
  if (name == "bonferroni") return Correction::kBonferroni;
  throw ValidationError("unknown correction '" + std::string(name) + "' (expected none|bonferroni)");
}

std::string to_string(Correction c) { return c == Correction::kNone ? "none" : "bonferroni"; }

double chi_square_yates(const Contingency& t) {
  const double a = t.above_pos, b = t.above_neg, c = t.below_pos, d = t.below_neg;
  const double n = a + b + c + d;
  const double denom = (a + b) * (c + d) * (a + c) * (b + d);
  if (denom == 0.0) return 0.0;
  const double diff = std::max(0.0, std::abs(a * d - b * c) - n / 2.0);
  return n * diff * diff / denom;
}

double chi_square_sf_1dof(double statistic) {
  if (statistic <= 0.0) return 1.0;
  return std::erfc(std::sqrt(statistic / 2.0));
}

std::vector<std::string> ScreenReport::significant_names() const {
  std::vector<std::string> out;
  for (const auto& f : features) {
    if (f.significant) out.push_back(f.name);
  }
  return out;
}

std::size_t ScreenReport::significant_count() const {
  return static_cast<std::size_t>(
      std::count_if(features.begin(), features.end(), [](const FeatureTest& f) { return f.significant; }));
}

ScreenReport chi_square_screen(const FeatureMatrix& matrix, double alpha, Correction correction) {
  matrix.validate();
  if (!matrix.has_labels()) throw ValidationError("screening needs a labeled matrix");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const auto pos = std::count(matrix.labels.begin(), matrix.labels.end(), 1);
  const auto neg = static_cast<std::ptrdiff_t>(matrix.rows()) - pos;
  if (pos < 2 || neg < 2) throw ValidationError("screening needs at least 2 examples of each label");

  ScreenReport report;
  report.alpha = alpha;
  report.correction = correction;
  const double d = static_cast<double>(matrix.cols());
  report.per_test_alpha = correction == Correction::kBonferroni ? alpha / std::max(1.0, d) : alpha;

  const std::size_t n = matrix.rows();
  std::vector<double> column(n);
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = matrix.at(i, j);

    FeatureTest test;
    test.name = matrix.feature_names[j];

    double sum_pos = 0, sum_neg = 0;
    for (std::size_t i = 0; i < n; ++i) (matrix.labels[i] > 0 ? sum_pos : sum_neg) += column[i];
    const double diff = sum_pos / static_cast<double>(pos) - sum_neg / static_cast<double>(neg);
    test.direction = diff > 0 ? 1 : (diff < 0 ? -1 : 0);

    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    Contingency t;
    for (std::size_t i = 0; i < n; ++i) {
      const bool above = column[i] > median;
      const bool responded = matrix.labels[i] > 0;
      (above ? (responded ? t.above_pos : t.above_neg) : (responded ? t.below_pos : t.below_neg)) += 1;
    }
    if (t.above_pos + t.above_neg == 0.0 || t.below_pos + t.below_neg == 0.0) {
      test.degenerate = true;
      test.p_value = 1.0;
    } else {
      test.statistic = chi_square_yates(t);
      test.p_value = chi_square_sf_1dof(test.statistic);
    }
    test.significant = !test.degenerate && test.p_value < report.per_test_alpha;
    report.features.push_back(std::move(test));
  }
  report.fdr_estimate = report.per_test_alpha * d / std::max<double>(1.0, static_cast<double>(report.significant_count()));
  return report;
}

std::vector<std::string> consistent_features(std::span<const ScreenReport> reports) {
  if (reports.size() < 2) throw ValidationError("consistency check needs at least two reports");
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.features.size() != first.features.size())
      throw ValidationError("screen reports have different feature schemas");
    for (std::size_t j = 0; j < r.features.size(); ++j) {
      if (r.features[j].name != first.features[j].name)
        throw ValidationError("screen reports have different feature schemas");
    }
  }
  std::vector<std::string> out;
  for (std::size_t j = 0; j < first.features.size(); ++j) {
    const int dir = first.features[j].direction;
    if (dir == 0) continue;
    bool same = std::all_of(reports.begin(), reports.end(),
                            [&](const ScreenReport& r) { return r.features[j].direction == dir; });
    if (same) out.push_back(first.features[j].name);
  }
  return out;
}

std::string format_report(const ScreenReport& report) {
  std::string out;
  out += "alpha: " + format_double(report.alpha) + "\n";
  out += "correction: " + to_string(report.correction) + "\n";
  out += "per_test_alpha: " + format_double(report.per_test_alpha) + "\n";
  out += "features: " + std::to_string(report.features.size()) + "\n";
  out += "significant: " + std::to_string(report.significant_count()) + "\n";
  out += "fdr_estimate: " + format_double(report.fdr_estimate) + "\n";
  for (const auto& f : report.features) {
    out += "feature: " + f.name + "\tp=" + format_double(f.p_value) + "\tchi2=" + format_double(f.statistic) +
           "\tdirection=" + std::to_string(f.direction) + "\tsignificant=" + (f.significant ? "1" : "0") +
           "\tdegenerate=" + (f.degenerate ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace crowdsel::screening
