#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cslg/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cslg_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + CSL_GROUND_EXE + "\" " + args + " >" +
                          (kWork / "stdout.txt").string() + " 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

std::string path(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE_FIXTURE(Workspace, "generate writes a scenario") {
  CHECK(run("generate --seed 3 --out " + path("sc.json")) == 0);
  const auto j = cslg::read_json_file(kWork / "sc.json");
  CHECK(j["format"] == "csl-ground/scenario/1");
  CHECK(j["config"]["seed"] == 3);
  CHECK(j["situations"].size() == 125);

  CHECK(run("generate --seed 3 --dims 3,4,5 --noise 0.2 --out " + path("small.json")) == 0);
  const auto s = cslg::read_json_file(kWork / "small.json");
  CHECK(s["config"]["noise_scale"] == 0.2);
  CHECK(s["situations"][0]["features"]["color"].size() == 4);

  CHECK(run("generate --seed 3 --out " + path("again.json")) == 0);
  CHECK(slurp(kWork / "sc.json") == slurp(kWork / "again.json"));
}

TEST_CASE_FIXTURE(Workspace, "run then report") {
  write(kWork / "cfg.json", R"({"n_sequences": 2, "bayes": {"iterations": 3}})");
  CHECK(run("run --config " + path("cfg.json") + " --seed 1 --split 0.6 --model both --out " +
            path("out") + " --snapshots " + path("snap.json") + " --dump-model " + path("model.json")) == 0);
  for (const std::string model : {"csl", "baseline"})
    for (const std::string f : {"word_accuracy.csv", "modality_accuracy.csv", "mapping_trajectory.csv",
                                "word_occurrences.csv", "summary.json"})
      CHECK(fs::exists(kWork / "out" / model / f));
  const auto snaps = cslg::read_json_file(kWork / "snap.json");
  CHECK(snaps.size() == 75);
  CHECK(snaps[74]["situation"] == 74);
  const auto model = cslg::read_json_file(kWork / "model.json");
  CHECK(model.contains("theta"));

  CHECK(run("report --summary " + path("out/csl/summary.json") + " --out " + path("rendered")) == 0);
  for (const std::string f : {"word_accuracy.csv", "modality_accuracy.csv", "mapping_trajectory.csv",
                              "word_occurrences.csv", "summary.json"})
    CHECK(slurp(kWork / "rendered" / f) == slurp(kWork / "out" / "csl" / f));
}

TEST_CASE_FIXTURE(Workspace, "run from a saved scenario") {
  CHECK(run("generate --seed 2 --out " + path("sc.json")) == 0);
  CHECK(run("run --scenario " + path("sc.json") + " --model csl --sequences 1 --out " + path("a")) == 0);
  CHECK(run("run --seed 2 --model csl --sequences 1 --out " + path("b")) == 0);
  CHECK(slurp(kWork / "a" / "csl" / "summary.json") == slurp(kWork / "b" / "csl" / "summary.json"));
}

TEST_CASE_FIXTURE(Workspace, "exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 1);
  CHECK(run("fly") == 1);
  CHECK(run("generate") == 1);  // --out is required
  CHECK(run("run --model svm") == 1);
  CHECK(run("run --split 0 --out " + path("x")) == 1);
  CHECK(run("run --config " + path("missing.json")) == 1);
  CHECK(run("generate --dims 3,4 --out " + path("x.json")) == 1);
  CHECK(run("generate --noise -1 --out " + path("x.json")) == 1);

  write(kWork / "bad.json", R"({"bayes": {"kappa": 1}})");
  CHECK(run("run --config " + path("bad.json")) == 1);
  CHECK(slurp(kWork / "stderr.txt").find("bayes.kappa") != std::string::npos);
  write(kWork / "syntax.json", "{ not json");
  CHECK(run("run --config " + path("syntax.json")) == 1);

  // a non-positive-definite prior scale is a numerical failure, not a config error
  write(kWork / "numeric.json", R"({"n_sequences": 1, "model": "baseline", "bayes": {"psi_scale": 1e-320}})");
  CHECK(run("run --config " + path("numeric.json") + " --out " + path("n")) == 2);

  write(kWork / "notscenario.json", R"({"format": "other"})");
  CHECK(run("run --scenario " + path("notscenario.json") + " --out " + path("s")) == 1);
  CHECK(run("run --scenario " + path("absent.json") + " --out " + path("s")) == 1);

  CHECK(run("report --summary " + path("nothing.json") + " --out " + path("r")) == 2);
}
