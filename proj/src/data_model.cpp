#include "crowdsel/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace crowdsel {

using nlohmann::json;

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional, std::string_view what) {
  if (!obj.is_object()) throw ParseError(std::string(what) + " must be an object");
  for (auto key : required) {
    if (!obj.contains(key)) throw ParseError(std::string(what) + " missing field '" + std::string(key) + "'");
  }
  for (const auto& [key, _] : obj.items()) {
    auto known = [&](auto list) {
      return std::find(list.begin(), list.end(), key) != list.end();
    };
    if (!known(required) && !known(optional))
      throw ParseError(std::string(what) + " has unknown field '" + key + "'");
  }
}

UnixSeconds get_time(const json& v, std::string_view field) {
  if (!v.is_number_integer())
    throw ParseError("field '" + std::string(field) + "' must be an integer timestamp");
  auto t = v.get<std::int64_t>();
  if (t < 0) throw ValidationError("field '" + std::string(field) + "' is negative");
  return t;
}

bool get_bool(const json& obj, const char* key) {
  if (!obj.contains(key)) return false;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ParseError(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

}  // namespace

UserRecord parse_user_record(std::string_view json_line) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  require_keys(obj, {"user_id", "profile_text", "posts", "inbound_questions"}, {"label"}, "record");

  UserRecord rec;
  if (!obj["user_id"].is_string()) throw ParseError("'user_id' must be a string");
  rec.user_id = obj["user_id"].get<std::string>();
  if (rec.user_id.empty()) throw ValidationError("empty user_id");
  if (!obj["profile_text"].is_string()) throw ParseError("'profile_text' must be a string");
  rec.profile_text = obj["profile_text"].get<std::string>();

  if (!obj["posts"].is_array()) throw ParseError("'posts' must be an array");
  for (const auto& p : obj["posts"]) {
    require_keys(p, {"ts", "text"}, {"is_retweet", "is_reply"}, "post");
    Post post;
    post.timestamp = get_time(p["ts"], "ts");
    if (!p["text"].is_string()) throw ParseError("post 'text' must be a string");
    post.text = p["text"].get<std::string>();
    post.is_retweet = get_bool(p, "is_retweet");
    post.is_reply = get_bool(p, "is_reply");
    if (post.text.empty() && !post.is_retweet)
      throw ValidationError("post at ts " + std::to_string(post.timestamp) + " has empty text");
    rec.posts.push_back(std::move(post));
  }
  std::stable_sort(rec.posts.begin(), rec.posts.end(),
                   [](const Post& a, const Post& b) { return a.timestamp < b.timestamp; });

  if (!obj["inbound_questions"].is_array()) throw ParseError("'inbound_questions' must be an array");
  for (const auto& q : obj["inbound_questions"]) {
    require_keys(q, {"asked_at", "directed"}, {"responded_at"}, "inbound question");
    InboundQuestion iq;
    iq.asked_at = get_time(q["asked_at"], "asked_at");
    if (!q["directed"].is_boolean()) throw ParseError("'directed' must be a boolean");
    iq.directed = q["directed"].get<bool>();
    if (q.contains("responded_at") && !q["responded_at"].is_null()) {
      iq.responded_at = get_time(q["responded_at"], "responded_at");
      if (*iq.responded_at < iq.asked_at)
        throw ValidationError("responded_at precedes asked_at");
    }
    rec.inbound_questions.push_back(iq);
  }

  if (obj.contains("label")) {
    const auto& l = obj["label"];
    if (!l.is_number_integer() || (l.get<int>() != 1 && l.get<int>() != -1))
      throw ValidationError("'label' must be +1 or -1");
    rec.label = l.get<int>();
  }
  return rec;
}

std::string format_user_record(const UserRecord& record) {
  // ordered_json keeps the documented field order in the output.
  nlohmann::ordered_json obj;
  obj["user_id"] = record.user_id;
  obj["profile_text"] = record.profile_text;
  obj["posts"] = nlohmann::ordered_json::array();
  for (const auto& p : record.posts) {
    obj["posts"].push_back(
        {{"ts", p.timestamp}, {"text", p.text}, {"is_retweet", p.is_retweet}, {"is_reply", p.is_reply}});
  }
  obj["inbound_questions"] = nlohmann::ordered_json::array();
  for (const auto& q : record.inbound_questions) {
    nlohmann::ordered_json jq = {{"asked_at", q.asked_at}, {"directed", q.directed}};
    if (q.responded_at) jq["responded_at"] = *q.responded_at;
    obj["inbound_questions"].push_back(std::move(jq));
  }
  if (record.label) obj["label"] = *record.label;
  return obj.dump();
}

std::vector<UserRecord> parse_corpus(std::string_view text) {
  std::vector<UserRecord> records;
  std::unordered_set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    UserRecord rec;
    try {
      rec = parse_user_record(line);
    } catch (const ParseError& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(rec.user_id).second)
      throw ValidationError("corpus line " + std::to_string(line_no) + ": duplicate user_id '" +
                            rec.user_id + "'");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<UserRecord> ingest_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ValidationError("corpus file '" + path.string() + "' does not exist");
  return parse_corpus(read_text_file(path));
}

void write_corpus(const std::filesystem::path& path, std::span<const UserRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += format_user_record(r);
    out += '\n';
  }
  write_text_file(path, out);
}

// ----------------------------------------------------------- FeatureMatrix

void FeatureMatrix::append(std::string user_id, std::span<const double> features,
                           std::optional<int> label) {
  if (features.size() != cols())
    throw ValidationError("row for '" + user_id + "' has " + std::to_string(features.size()) +
                          " values, schema has " + std::to_string(cols()));
  if (rows() > 0 && label.has_value() != has_labels())
    throw ValidationError("rows must be either all labeled or all unlabeled");
  user_ids.push_back(std::move(user_id));
  values.insert(values.end(), features.begin(), features.end());
  if (label) labels.push_back(*label);
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.user_ids.reserve(indices.size());
  out.values.reserve(indices.size() * cols());
  for (auto i : indices) {
    out.user_ids.push_back(user_ids.at(i));
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    if (has_labels()) out.labels.push_back(labels[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> cols_idx;
  for (const auto& n : names) {
    auto it = std::find(feature_names.begin(), feature_names.end(), n);
    if (it == feature_names.end()) throw ValidationError("unknown feature '" + n + "'");
    cols_idx.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  FeatureMatrix out;
  out.feature_names.assign(names.begin(), names.end());
  out.user_ids = user_ids;
  out.labels = labels;
  out.values.reserve(rows() * cols_idx.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (auto j : cols_idx) out.values.push_back(at(i, j));
  }
  return out;
}

void FeatureMatrix::validate() const {
  if (values.size() != rows() * cols()) throw ValidationError("feature matrix shape mismatch");
  if (has_labels() && labels.size() != rows())
    throw ValidationError("label count differs from row count");
  for (int l : labels) {
    if (l != 1 && l != -1) throw ValidationError("labels must be +1 or -1");
  }
}

std::string format_feature_matrix(const FeatureMatrix& matrix) {
  matrix.validate();
  auto check_cell = [](const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos)
      throw ValidationError("CSV cell '" + s + "' contains a comma or newline");
  };
  for (const auto& n : matrix.feature_names) check_cell(n);
  for (const auto& id : matrix.user_ids) check_cell(id);
  std::string out = "user_id";
  for (const auto& name : matrix.feature_names) {
    out += ',';
    out += name;
  }
  if (matrix.has_labels()) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    out += matrix.user_ids[i];
    for (double v : matrix.row(i)) {
      out += ',';
      out += format_double(v);
    }
    if (matrix.has_labels()) {
      out += ',';
      out += matrix.labels[i] > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

FeatureMatrix parse_feature_matrix(std::string_view csv) {
  FeatureMatrix m;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool labeled = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (line_no == 1) {
      if (fields.empty() || fields.front() != "user_id")
        throw ParseError("feature matrix: first header column must be 'user_id'");
      labeled = fields.back() == "label";
      width = fields.size();
      for (std::size_t j = 1; j + (labeled ? 1 : 0) < fields.size(); ++j)
        m.feature_names.emplace_back(fields[j]);
      continue;
    }
    const std::string where = "feature matrix line " + std::to_string(line_no) + ": ";
    if (fields.size() != width)
      throw ParseError(where + "expected " + std::to_string(width) + " fields, got " +
                       std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(where + "empty user_id");
    m.user_ids.emplace_back(fields[0]);
    try {
      for (std::size_t j = 1; j <= m.feature_names.size(); ++j)
        m.values.push_back(parse_double(fields[j]));
      if (labeled) {
        auto l = parse_double(fields.back());
        if (l != 1.0 && l != -1.0) throw ParseError("label must be 1 or -1");
        m.labels.push_back(static_cast<int>(l));
      }
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  if (line_no == 0) throw ParseError("feature matrix: missing header");
  return m;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  write_text_file(path, format_feature_matrix(matrix));
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  try {
    return parse_feature_matrix(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace crowdsel
