#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("pwr_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

Scratch& scratch() {
  static Scratch s;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const Json& j) {
  const fs::path p = scratch().dir / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Outcome {
  int code;
  std::string err;
  std::string out;
};

Outcome pwr(const std::string& args) {
  const char* exe = std::getenv("PWR_CLI");
  REQUIRE(exe != nullptr);
  const fs::path err = scratch().dir / "stderr.txt", out = scratch().dir / "stdout.txt";
  const std::string cmd = std::string(exe) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err), slurp(out)};
}

Json small_chain() {
  return Json{{"system", {{"kind", "kuramoto_chain3"}, {"eps", 0.05}, {"steps", 50}, {"horizon", 0.5}}},
              {"decomposition", {{"method", "explicit"}, {"clusters", {{0}, {1}, {2}}}}},
              {"method", {{"pwr", {{"ls", 3}, {"lc", 2}, {"eps", 1e-6}}}, {"mc", {{"samples", 200}}}, {"qmc", {{"samples", 200}}}}},
              {"seed", 5}};
}

}  // namespace

TEST_CASE("unknown keys are rejected with a diagnostic naming the key") {
  Json cfg = small_chain();
  cfg["method"]["pwr"]["lss"] = 5;
  const auto o = pwr("run --config " + write_config("typo", cfg).string() + " --out " + (scratch().dir / "typo").string());
  CHECK(o.code == 2);
  const Json diag = Json::parse(o.err.substr(0, o.err.find('\n')));
  CHECK(diag["error"] == "config-error");
  CHECK(diag["key"].get<std::string>().find("lss") != std::string::npos);
}

TEST_CASE("wrong types and bad usage exit with 2") {
  Json cfg = small_chain();
  cfg["method"]["pwr"]["ls"] = "five";
  CHECK(pwr("run --config " + write_config("type", cfg).string()).code == 2);
  CHECK(pwr("run").code == 2);
  CHECK(pwr("frobnicate").code == 2);
  CHECK(pwr("run --config " + (scratch().dir / "missing.json").string()).code == 2);
  std::ofstream(scratch().dir / "broken.json") << "{ not json";
  CHECK(pwr("run --config " + (scratch().dir / "broken.json").string()).code == 2);
}

TEST_CASE("numerical failures exit with 3") {
  const Json cfg{{"system", {{"kind", "kuramoto80"}, {"steps", 10}}}, {"method", {{"pcm", {{"level", 2}}}}}};
  const auto o = pwr("run-pcm --config " + write_config("big", cfg).string() + " --out " + (scratch().dir / "big").string());
  CHECK(o.code == 3);
  CHECK(o.err.find("grid-too-large") != std::string::npos);
  CHECK(o.err.find("1099511627776") != std::string::npos);
}

TEST_CASE("runs write their artifacts and are byte-for-byte repeatable") {
  const fs::path cfg = write_config("chain", small_chain());
  for (const std::string cmd : {"run-pwr", "run-mc", "run-qmc", "run-pcm"}) {
    const fs::path a = scratch().dir / (cmd + "_a"), b = scratch().dir / (cmd + "_b");
    REQUIRE(pwr(cmd + " --config " + cfg.string() + " --out " + a.string()).code == 0);
    REQUIRE(pwr(cmd + " --config " + cfg.string() + " --out " + b.string() + " --threads 2").code == 0);
    for (const char* f : {"moments.csv", "hist.csv", "resolved_config.json", "report.json"}) CHECK(fs::exists(a / f));
    CHECK(slurp(a / "moments.csv") == slurp(b / "moments.csv"));
  }
  CHECK(fs::exists(scratch().dir / "run-pwr_a" / "iterations.csv"));
  CHECK(fs::exists(scratch().dir / "run-pwr_a" / "decomposition.json"));
  CHECK(fs::exists(scratch().dir / "run-mc_a" / "std_error.csv"));
  const std::string header = slurp(scratch().dir / "run-pwr_a" / "moments.csv").substr(0, 40);
  CHECK(header.rfind("t,R_mean,R_var", 0) == 0);

  const fs::path c = scratch().dir / "mc_seed";
  REQUIRE(pwr("run-mc --config " + cfg.string() + " --out " + c.string() + " --seed 6").code == 0);
  CHECK(slurp(c / "moments.csv") != slurp(scratch().dir / "run-mc_a" / "moments.csv"));
}

TEST_CASE("compare reports zero difference against itself") {
  const fs::path cfg = write_config("cmp", small_chain());
  const fs::path run = scratch().dir / "cmp_run", cmp = scratch().dir / "cmp_out";
  REQUIRE(pwr("run-pwr --config " + cfg.string() + " --out " + run.string()).code == 0);
  REQUIRE(pwr("compare " + run.string() + " " + run.string() + " --out " + cmp.string()).code == 0);
  const Json j = Json::parse(slurp(cmp / "comparison.json"));
  for (const auto& [k, v] : j["runs"][0]["sup"].items()) CHECK(v.get<double>() == 0.0);

  Json other = small_chain();
  other["system"]["steps"] = 40;
  const fs::path run2 = scratch().dir / "cmp_run2";
  REQUIRE(pwr("run-pwr --config " + write_config("cmp2", other).string() + " --out " + run2.string()).code == 0);
  CHECK(pwr("compare " + run.string() + " " + run2.string() + " --out " + cmp.string()).code == 2);
}

TEST_CASE("decompose, kl and predict-cost") {
  const Json dec{{"system", {{"kind", "kuramoto80"}}}};
  const fs::path d = scratch().dir / "dec";
  REQUIRE(pwr("decompose --config " + write_config("dec", dec).string() + " --out " + d.string()).code == 0);
  CHECK(Json::parse(slurp(d / "decomposition.json"))["m"] == 40);

  const Json kl{{"kl", {{"truncation", 6}}}};
  const fs::path k = scratch().dir / "kl";
  REQUIRE(pwr("kl --config " + write_config("kl", kl).string() + " --out " + k.string()).code == 0);
  CHECK(fs::exists(k / "eigenvalues.csv"));
  CHECK(fs::exists(k / "modes.csv"));
  const double captured = Json::parse(slurp(k / "report.json"))["variance_captured"].get<double>();
  CHECK(captured > 0.0);
  CHECK(captured < 1.0);

  const Json cost{{"cost", {{"p", {5, 5}}, {"l", 5}, {"ls", 5}, {"lc", 1}, {"i_max", 0}}}};
  const fs::path c = scratch().dir / "cost";
  REQUIRE(pwr("predict-cost --config " + write_config("cost", cost).string() + " --out " + c.string()).code == 0);
  const Json r = Json::parse(slurp(c / "report.json"));
  CHECK(r["full"] == "9765625");
  CHECK(r["pwr"] == "6251");
}
