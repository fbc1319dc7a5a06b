#include "crowdsel/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace crowdsel {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// ---------------------------------------------------------------- Lexicon

void Lexicon::add_category(std::string name, std::span<const std::string> words) {
  name = std::string(trim(name));
  if (name.empty()) throw ValidationError("lexicon: empty category name");
  if (by_name_.contains(name)) throw ValidationError("lexicon: duplicate category '" + name + "'");
  Category cat;
  cat.name = name;
  for (const auto& raw : words) {
    auto word = lowercase(trim(raw));
    if (word.empty() || word == "*")
      throw ValidationError("lexicon: empty word entry in category '" + name + "'");
    if (word.back() == '*') {
      word.pop_back();
      cat.prefixes.push_back(std::move(word));
    } else {
      cat.exact.insert(std::move(word));
    }
  }
  // Longest prefix first so match() can stop at the first hit.
  std::sort(cat.prefixes.begin(), cat.prefixes.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  cat.prefixes.erase(std::unique(cat.prefixes.begin(), cat.prefixes.end()), cat.prefixes.end());
  by_name_.emplace(name, categories_.size());
  categories_.push_back(std::move(cat));
}

std::vector<std::string> Lexicon::category_names() const {
  std::vector<std::string> names;
  names.reserve(categories_.size());
  for (const auto& c : categories_) names.push_back(c.name);
  return names;
}

std::optional<std::size_t> Lexicon::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Lexicon::match(std::size_t category, std::string_view token) const {
  const auto& cat = categories_.at(category);
  std::string key(token);
  if (cat.exact.contains(key)) return key;
  for (const auto& prefix : cat.prefixes) {
    if (token.starts_with(prefix)) return prefix + "*";
  }
  return std::nullopt;
}

bool Lexicon::matches(std::size_t category, std::string_view token) const {
  return match(category, token).has_value();
}

std::vector<std::size_t> Lexicon::categories_of(std::string_view token) const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < categories_.size(); ++g) {
    if (matches(g, token)) out.push_back(g);
  }
  return out;
}

// Grammar (also in docs/formats.md):
//   # comment
//   [Category Name]
//   word another prefix*
// Words may be separated by whitespace or commas and span several lines.
Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::optional<std::string> current;
  std::vector<std::string> words;
  auto flush = [&] {
    if (current) lex.add_category(*current, words);
    words.clear();
  };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    try {
      if (body.front() == '[') {
        if (body.back() != ']')
          throw ParseError("unterminated category header");
        flush();
        current = std::string(trim(body.substr(1, body.size() - 2)));
        continue;
      }
      if (!current) throw ParseError("word list before any [category] header");
      std::string chunk(body);
      std::replace(chunk.begin(), chunk.end(), ',', ' ');
      std::istringstream ws(chunk);
      std::string w;
      while (ws >> w) words.push_back(w);
    } catch (const std::runtime_error& e) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  flush();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  try {
    return parse_lexicon(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ TraitMatrix

std::vector<std::string> TraitMatrix::trait_names() const {
  std::vector<std::string> names;
  names.reserve(traits.size());
  for (const auto& t : traits) names.push_back(t.name);
  return names;
}

const TraitMatrix::Trait* TraitMatrix::find(std::string_view name) const {
  for (const auto& t : traits) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

// Grammar:
//   [Trait Name]
//   Category Name = weight
// A trait section may be empty.
TraitMatrix parse_trait_matrix(std::string_view text, const Lexicon& lexicon) {
  TraitMatrix matrix;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::string where = "trait matrix line " + std::to_string(line_no) + ": ";
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(where + "unterminated trait header");
      std::string name(trim(body.substr(1, body.size() - 2)));
      if (name.empty()) throw ParseError(where + "empty trait name");
      if (matrix.find(name)) throw ValidationError(where + "duplicate trait '" + name + "'");
      matrix.traits.push_back({std::move(name), {}});
      continue;
    }
    if (matrix.traits.empty()) throw ParseError(where + "entry before any [trait] header");
    auto eq = body.rfind('=');
    if (eq == std::string_view::npos) throw ParseError(where + "expected 'category = weight'");
    std::string category(trim(body.substr(0, eq)));
    auto weight_text = trim(body.substr(eq + 1));
    double weight = 0.0;
    try {
      weight = parse_double(weight_text);
    } catch (const ParseError&) {
      throw ParseError(where + "bad weight '" + std::string(weight_text) + "'");
    }
    if (!std::isfinite(weight)) throw ValidationError(where + "non-finite weight");
    auto& trait = matrix.traits.back();
    auto idx = lexicon.index_of(category);
    if (!idx)
      throw ValidationError("trait '" + trait.name + "' references unknown category '" +
                            category + "'");
    trait.terms.push_back({std::move(category), *idx, weight});
  }
  return matrix;
}

TraitMatrix load_trait_matrix(const std::filesystem::path& path, const Lexicon& lexicon) {
  try {
    return parse_trait_matrix(read_text_file(path), lexicon);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- numbers

std::string format_double(double value) {
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ParseError("not a number: '" + std::string(text) + "'");
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace crowdsel
