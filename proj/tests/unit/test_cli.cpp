#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "crowdsel/cli.hpp"
#include "crowdsel/data_model.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using crowdsel::cli::run;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("crowdsel_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return crowdsel::read_text_file(p); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fnv1a reference values") {
  CHECK(crowdsel::cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(crowdsel::cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("digest depends on settings, not on insertion order") {
  crowdsel::cli::RunConfig a, b;
  a.command = b.command = "train";
  a.set("--x", "1");
  a.set("--y", "2");
  b.set("--y", "2");
  b.set("--x", "1");
  CHECK(a.digest() == b.digest());
  b.set("--x", "3");
  CHECK(a.digest() != b.digest());
  CHECK(a.digest().size() == 16);
}

TEST_CASE("synth, train, select, benefit and eval") {
  const auto dir = scratch("pipeline");
  const std::string d = dir.string();
  auto r = invoke({"--out-dir", d, "--seed", "7", "synth", "--population", "400", "--dimension", "3"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "synthetic.csv"));
  CHECK(fs::exists(dir / "synthetic.truth.csv"));
  const auto meta = nlohmann::json::parse(slurp(dir / "synthetic.csv.meta.json"));
  CHECK(meta["seed"] == "7");
  CHECK(meta["config_digest"].get<std::string>().size() == 16);

  const std::string matrix = (dir / "synthetic.csv").string();
  r = invoke({"train", "--matrix", matrix, "--out-dir", d, "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto model = nlohmann::json::parse(slurp(dir / "model.json"));
  CHECK(model.contains("config_digest"));

  const std::string model_path = (dir / "model.json").string();
  r = invoke({"--out-dir", d, "select", "--model", model_path, "--train-matrix", matrix, "--test-matrix", matrix,
              "--min-size", "0.1"});
  REQUIRE(r.code == 0);
  const auto plan = nlohmann::json::parse(slurp(dir / "plan.json"));
  CHECK(plan["format"] == "crowdsel-plan");

  r = invoke({"--out-dir", d, "benefit", "--model", model_path, "--train-matrix", matrix, "--test-matrix", matrix});
  REQUIRE(r.code == 0);
  const auto ben = nlohmann::json::parse(slurp(dir / "benefit.json"));
  CHECK(ben["format"] == "crowdsel-benefit");
  CHECK(ben["feasible"] == true);

  r = invoke({"--out-dir", d, "eval", "--matrix", matrix, "--folds", "4"});
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "eval.json"));
  CHECK(rep["folds"] == 4);
  CHECK(rep["evaluated_folds"] == 4);

  r = invoke({"--out-dir", d, "screen", "--matrix", matrix});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "screen.txt").find("correction: bonferroni") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and global flags may follow the subcommand") {
  const auto dir = scratch("rerun");
  const std::string matrix = (dir / "synthetic.csv").string();
  auto pipeline = [&](bool globals_first) {
    const std::vector<std::string> synth = {"synth", "--population", "300"};
    const std::vector<std::string> globals = {"--seed", "3", "--out-dir", dir.string()};
    std::vector<std::string> args = globals_first ? globals : synth;
    args.insert(args.end(), globals_first ? synth.begin() : globals.begin(), globals_first ? synth.end() : globals.end());
    REQUIRE(invoke(args).code == 0);
    REQUIRE(invoke({"--out-dir", dir.string(), "eval", "--matrix", matrix}).code == 0);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
  };
  const auto first = pipeline(true);
  const auto second = pipeline(false);
  CHECK(first.size() == 4);
  CHECK(first == second);
}

TEST_CASE("config files supply option values") {
  const auto dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "seed = 11\n[synth]\npopulation = 50\ndimension = 2\n";
  }
  REQUIRE(invoke({"--config", (dir / "run.toml").string(), "--out-dir", dir.string(), "synth"}).code == 0);
  const auto csv = slurp(dir / "synthetic.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
  CHECK(nlohmann::json::parse(slurp(dir / "synthetic.csv.meta.json"))["seed"] == "11");
}

TEST_CASE("exit codes") {
  const auto dir = scratch("errors");
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == 1);
  const auto unknown = invoke({"train", "--matrix", "x.csv", "--bogus"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  const auto missing = invoke({"train", "--matrix", (dir / "nope.csv").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("input not found") != std::string::npos);

  REQUIRE(invoke({"--out-dir", dir.string(), "synth", "--population", "60", "--dimension", "2"}).code == 0);
  const std::string matrix = (dir / "synthetic.csv").string();
  const auto weights = invoke({"--out-dir", dir.string(), "train", "--matrix", matrix, "--benefit", "1", "--cost", "1"});
  CHECK(weights.code == 1);
  CHECK(invoke({"--out-dir", dir.string(), "eval", "--matrix", matrix, "--policies", "magic"}).code == 1);
  CHECK(invoke({"--out-dir", dir.string(), "eval", "--matrix", matrix, "--synthetic", matrix}).code == 1);
  CHECK(invoke({"--out-dir", dir.string(), "benefit", "--model", matrix, "--train-matrix", matrix,
                "--benefit-linear", "2", "--benefit-table", matrix})
            .code == 1);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "user_id,x,label\na,1,1\n";
  }
  CHECK(invoke({"train", "--matrix", (dir / "bad.csv").string()}).code == 1);
}

}  // TEST_SUITE
