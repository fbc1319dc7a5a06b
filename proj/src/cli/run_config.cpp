#include <algorithm>
#include <cstdio>

#include "crowdsel/cli.hpp"
#include "crowdsel/data_model.hpp"

namespace crowdsel::cli {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void RunConfig::set(std::string key, std::string value) {
  auto it = std::lower_bound(settings.begin(), settings.end(), key,
                             [](const auto& kv, const std::string& k) { return kv.first < k; });
  if (it != settings.end() && it->first == key) {
    it->second = std::move(value);
  } else {
    settings.insert(it, {std::move(key), std::move(value)});
  }
}

std::string RunConfig::digest() const {
  std::string canon = command + "\n";
  for (const auto& [k, v] : settings) canon += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

std::vector<std::pair<std::string, std::string>> RunConfig::metadata() const {
  return {{"command", command}, {"seed", std::to_string(seed)}, {"config_digest", digest()}};
}

std::filesystem::path RunConfig::output(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_relative() && !out_dir.empty()) return out_dir / p;
  return p;
}

std::filesystem::path RunConfig::input(const std::string& path) const {
  if (path.empty()) throw ValidationError("missing input path");
  std::filesystem::path p(path);
  if (!std::filesystem::exists(p)) throw ValidationError("input not found: " + p.string());
  return p;
}

}  // namespace crowdsel::cli
