#pragma once
// Independent reference computations used by the unit and acceptance
// suites. Deliberately naive: no prefix sums, no recursion sharing with the
// library.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

inline double choose(int k, int l) {
  double c = 1.0;
  for (int i = 1; i <= l; ++i) c = c * (k - l + i) / i;
  return c;
}

inline double binomial(int k, int l, double p) {
  return choose(k, l) * std::pow(p, l) * std::pow(1.0 - p, k - l);
}

/// Fraction of (positive, negative) pairs ordered correctly; ties count half.
inline double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0, pairs = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (y[a] <= 0) continue;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (y[b] > 0) continue;
      pairs += 1;
      if (s[a] > s[b]) good += 1;
      else if (s[a] == s[b]) good += 0.5;
    }
  }
  return good / pairs;
}

/// Yates-corrected chi-square of [[a, b], [c, d]].
inline double chi2_yates(double a, double b, double c, double d) {
  const double n = a + b + c + d;
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return 0.0;
  const double diff = std::max(0.0, std::fabs(a * d - b * c) - n / 2.0);
  return n * diff * diff / (r1 * r2 * c1 * c2);
}

struct IntervalPick {
  std::size_t first = 0, last = 0, pos = 0;
};

/// Exhaustive search over all intervals of admissible length, counting
/// positives directly. Preference: higher rate, longer, smaller start.
inline std::optional<IntervalPick> best_interval(const std::vector<int>& labels, std::size_t min_len,
                                                 std::size_t max_len, bool top_only) {
  const std::size_t n = labels.size();
  std::optional<IntervalPick> best;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      const std::size_t len = j - i + 1;
      if (len < min_len || len > max_len) continue;
      if (top_only && j != n) continue;
      std::size_t pos = 0;
      for (std::size_t r = i; r <= j; ++r) pos += labels[r - 1] > 0 ? 1 : 0;
      if (!best) {
        best = IntervalPick{i, j, pos};
        continue;
      }
      const std::size_t blen = best->last - best->first + 1;
      const auto lhs = static_cast<std::uint64_t>(pos) * blen;
      const auto rhs = static_cast<std::uint64_t>(best->pos) * len;
      bool better = false;
      if (lhs != rhs) better = lhs > rhs;
      else if (len != blen) better = len > blen;
      else better = i < best->first;
      if (better) best = IntervalPick{i, j, pos};
    }
  }
  return best;
}

/// Percentile transfer of a training rank to a population of m, written
/// out independently of the library.
inline std::size_t map_rank(std::size_t r, std::size_t n, std::size_t m) {
  std::size_t v = r * m / n;
  if (v < 1) v = 1;
  if (v > m) v = m;
  return v;
}

struct BenefitPick {
  bool feasible = false;
  double value = 0.0;
  std::size_t k = 0;
  std::size_t first = 0, last = 0, pos = 0;
};

/// Exhaustive search over every (interval, k) combination. `value(k, p)`
/// and `ok(k, p)` give the expected net benefit and constraint feasibility;
/// k = 0 (ask nobody) is a candidate when ok(0, 0). Preference: higher
/// value, fewer questions, then the interval rule of best_interval.
template <class Value, class Ok>
BenefitPick best_benefit(const std::vector<int>& labels, std::size_t m, std::size_t min_len, std::size_t max_len,
                         bool top_only, Value value, Ok ok) {
  const std::size_t n = labels.size();
  BenefitPick best;
  if (ok(std::size_t{0}, 0.0)) best = BenefitPick{true, 0.0, 0, 0, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      const std::size_t len = j - i + 1;
      if (len < min_len || len > max_len) continue;
      if (top_only && j != n) continue;
      std::size_t pos = 0;
      for (std::size_t r = i; r <= j; ++r) pos += labels[r - 1] > 0 ? 1 : 0;
      const double p = static_cast<double>(pos) / static_cast<double>(len);
      const std::size_t kmax = map_rank(j, n, m) - map_rank(i, n, m) + 1;
      for (std::size_t k = 1; k <= kmax; ++k) {
        if (!ok(k, p)) continue;
        const double v = value(k, p);
        bool better = false;
        if (!best.feasible) better = true;
        else if (v != best.value) better = v > best.value;
        else if (k != best.k) better = k < best.k;
        else {
          const std::size_t blen = best.last - best.first + 1;
          const auto lhs = static_cast<std::uint64_t>(pos) * blen;
          const auto rhs = static_cast<std::uint64_t>(best.pos) * len;
          if (lhs != rhs) better = lhs > rhs;
          else if (len != blen) better = len > blen;
          else better = i < best.first;
        }
        if (better) best = BenefitPick{true, v, k, i, j, pos};
      }
    }
  }
  return best;
}

/// Minimal deterministic generator for property tests (splitmix64).
struct Gen {
  std::uint64_t state;
  explicit Gen(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  int label(double p = 0.5) { return uniform() < p ? 1 : -1; }
};

}  // namespace oracle
