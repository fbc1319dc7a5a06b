#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace crowdsel::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

/// Effective settings of one invocation. Every artifact carries the seed and
/// the digest of `settings`.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  bool quiet = false;
  std::vector<std::pair<std::string, std::string>> settings;  // sorted by key

  void set(std::string key, std::string value);
  /// 16 hex digits of FNV-1a over "command\nkey=value\n...".
  std::string digest() const;
  std::vector<std::pair<std::string, std::string>> metadata() const;

  /// Relative outputs land under out_dir when one is given.
  std::filesystem::path output(const std::string& path) const;
  /// Throws ValidationError naming the path when it does not exist.
  std::filesystem::path input(const std::string& path) const;
};

std::uint64_t fnv1a(std::string_view bytes);

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace crowdsel::cli
