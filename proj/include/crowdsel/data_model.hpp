#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace crowdsel {

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

/// Raised for malformed input files. The message names the file and line
/// (or the offending key) so it can be shown to a user as-is.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when inputs are well-formed but violate a contract (duplicate ids,
/// unknown categories, infeasible constraints, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Post {
  UnixSeconds timestamp = 0;
  std::string text;
  bool is_retweet = false;
  bool is_reply = false;

  bool operator==(const Post&) const = default;
};

struct InboundQuestion {
  UnixSeconds asked_at = 0;
  bool directed = true;
  std::optional<UnixSeconds> responded_at;

  bool operator==(const InboundQuestion&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::string profile_text;
  std::vector<Post> posts;
  std::vector<InboundQuestion> inbound_questions;
  std::optional<int> label;  // +1 responded, -1 did not

  bool operator==(const UserRecord&) const = default;
};

/// Parses one corpus line. Throws ParseError / ValidationError without a
/// line number; ingest_corpus adds it.
UserRecord parse_user_record(std::string_view json_line);
std::string format_user_record(const UserRecord& record);

/// Reads a record-lines corpus. Blank lines are skipped. Posts of every
/// record come back sorted by timestamp (stable), record order is the
/// file order.
std::vector<UserRecord> ingest_corpus(const std::filesystem::path& path);
std::vector<UserRecord> parse_corpus(std::string_view text);
void write_corpus(const std::filesystem::path& path, std::span<const UserRecord> records);

/// Lowercases ASCII and splits on every run of non-alphanumeric bytes.
/// Bytes >= 0x80 are treated as alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Word-category dictionary. Entries ending in '*' match any token with
/// that prefix; exact entries win over prefix entries.
class Lexicon {
 public:
  struct Category {
    std::string name;
    std::unordered_set<std::string> exact;
    std::vector<std::string> prefixes;  // stored without the '*'
  };

  Lexicon() = default;

  /// Adds a category; words are lowercased. Throws ValidationError on a
  /// duplicate name or empty entry.
  void add_category(std::string name, std::span<const std::string> words);

  std::size_t size() const { return categories_.size(); }
  const std::vector<Category>& categories() const { return categories_; }
  std::vector<std::string> category_names() const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Entry of `category` matched by `token`: the exact word, else the
  /// longest matching prefix (returned with its '*').
  std::optional<std::string> match(std::size_t category, std::string_view token) const;
  bool matches(std::size_t category, std::string_view token) const;

  /// Indices of all categories containing `token`, ascending.
  std::vector<std::size_t> categories_of(std::string_view token) const;

 private:
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

/// Linear combinations of lexicon category scores.
struct TraitMatrix {
  struct Term {
    std::string category;
    std::size_t category_index = 0;
    double weight = 0.0;
  };
  struct Trait {
    std::string name;
    std::vector<Term> terms;
  };

  std::vector<Trait> traits;

  std::size_t size() const { return traits.size(); }
  std::vector<std::string> trait_names() const;
  const Trait* find(std::string_view name) const;
};

TraitMatrix parse_trait_matrix(std::string_view text, const Lexicon& lexicon);
TraitMatrix load_trait_matrix(const std::filesystem::path& path, const Lexicon& lexicon);

/// Named-column numeric matrix, one row per user, optional +/-1 labels.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<std::string> user_ids;
  std::vector<double> values;  // row-major, rows() x cols()
  std::vector<int> labels;     // empty, or one per row

  std::size_t rows() const { return user_ids.size(); }
  std::size_t cols() const { return feature_names.size(); }
  bool has_labels() const { return !labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  void append(std::string user_id, std::span<const double> features,
              std::optional<int> label = std::nullopt);

  /// Rows listed in `indices`, in that order.
  FeatureMatrix subset(std::span<const std::size_t> indices) const;
  /// Keeps the named columns, in the given order.
  FeatureMatrix select_columns(std::span<const std::string> names) const;

  /// Throws ValidationError if shapes disagree or labels are not +/-1.
  void validate() const;

  bool operator==(const FeatureMatrix&) const = default;
};

/// CSV: header `user_id,<features...>[,label]`, doubles written in
/// shortest round-trip form.
std::string format_feature_matrix(const FeatureMatrix& matrix);
FeatureMatrix parse_feature_matrix(std::string_view csv);
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace crowdsel
