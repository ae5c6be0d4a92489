// End-to-end checks that spawn the real CLI binary (path injected by the
// build as NCD_CLI_PATH) and inspect its exit codes, stdout contract, and
// output files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ncd/checkpoint.hpp"
#include "ncd/matrix.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr merged
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(NCD_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe))
    res.output.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Shared scratch area; a fresh synthetic dataset is generated once.
struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("ncd_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    RunResult synth = run("synth --students 30 --exercises 20 --concepts 3 "
                          "--seed 6 --out-dir " + (dir / "syn").string());
    REQUIRE(synth.exit_code == 0);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string syn(const std::string& name) const {
    return (dir / "syn" / name).string();
  }
  std::string sub(const std::string& name) const {
    return (dir / name).string();
  }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

const std::string kTrainArgs =
    " --epochs 4 --h1 16 --h2 8 --lr 0.01 --batch-size 32 --seed 2";

}  // namespace

TEST_CASE("synth writes the dataset files and reports its shape") {
  auto& w = ws();
  CHECK(read_lines(w.syn("logs.csv")).at(0) == "student_id,exercise_id,score");
  CHECK(read_lines(w.syn("qmatrix.csv")).at(0) == "exercise_id,concept_id");
  CHECK(read_lines(w.syn("true_proficiency.csv")).at(0) ==
        "student_id,concept_id,proficiency");
  CHECK(read_lines(w.syn("config.txt")).size() > 5);

  RunResult stats = run("stats --logs " + w.syn("logs.csv") + " --qmatrix " +
                        w.syn("qmatrix.csv"));
  CHECK(stats.exit_code == 0);
  auto kv = parse_kv(stats.output);
  CHECK(kv.at("students") == "30");
  CHECK(kv.at("exercises") == "20");
  CHECK(kv.at("concepts") == "3");
  CHECK(kv.at("logs") == "600");
}

TEST_CASE("train writes a full run directory and eval reproduces its metrics") {
  auto& w = ws();
  RunResult tr = run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
                     w.syn("qmatrix.csv") + " --model neuralcdm" + kTrainArgs +
                     " --out-dir " + w.sub("run"));
  REQUIRE(tr.exit_code == 0);
  auto tkv = parse_kv(tr.output);

  for (const char* f : {"config.txt", "history.csv", "checkpoint.txt",
                        "train_logs.csv", "test_logs.csv"})
    CHECK(fs::exists(w.sub("run") + "/" + std::string(f)));

  auto history = read_lines(w.sub("run") + "/history.csv");
  CHECK(history.at(0) == "epoch,train_loss,holdout_auc");
  CHECK(history.size() - 1 == std::stoul(tkv.at("epochs_run")));
  CHECK(history.size() - 1 <= 4);

  // Evaluating the stored checkpoint on the stored test split must
  // reproduce the training-time test metrics digit for digit: the
  // checkpoint round-trip loses nothing.
  RunResult ev = run("eval --checkpoint " + w.sub("run") + "/checkpoint.txt" +
                     " --logs " + w.sub("run") + "/test_logs.csv" +
                     " --qmatrix " + w.syn("qmatrix.csv"));
  REQUIRE(ev.exit_code == 0);
  auto ekv = parse_kv(ev.output);
  CHECK(ekv.at("eval_auc") == tkv.at("test_auc"));
  CHECK(ekv.at("eval_rmse") == tkv.at("test_rmse"));
  CHECK(ekv.at("eval_accuracy") == tkv.at("test_accuracy"));
  CHECK(ekv.at("family") == "neuralcdm");
}

TEST_CASE("variant flag trains the ablations and rejects unknown names") {
  auto& w = ws();
  RunResult noq = run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
                      w.syn("qmatrix.csv") +
                      " --model neuralcdm --variant no_qmatrix" + kTrainArgs +
                      " --out-dir " + w.sub("noq"));
  REQUIRE(noq.exit_code == 0);
  // The free-relevancy variant survives the checkpoint round trip.
  RunResult ev = run("eval --checkpoint " + w.sub("noq") + "/checkpoint.txt" +
                     " --logs " + w.sub("noq") + "/test_logs.csv" +
                     " --qmatrix " + w.syn("qmatrix.csv"));
  REQUIRE(ev.exit_code == 0);
  CHECK(parse_kv(ev.output).at("eval_auc") ==
        parse_kv(noq.output).at("test_auc"));

  RunResult nomono =
      run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
          w.syn("qmatrix.csv") +
          " --model neuralcdm --variant no_monotonicity" + kTrainArgs +
          " --out-dir " + w.sub("nomono"));
  CHECK(nomono.exit_code == 0);

  CHECK(run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
            w.syn("qmatrix.csv") + " --variant banana" + kTrainArgs)
            .exit_code == 2);
  CHECK(run("train --logs " + w.syn("logs.csv") + " --model irt --variant "
            "no_qmatrix" + kTrainArgs)
            .exit_code == 2);
}

TEST_CASE("rerunning the same train command gives a byte-identical checkpoint") {
  auto& w = ws();
  std::string base = "train --logs " + w.syn("logs.csv") + " --qmatrix " +
                     w.syn("qmatrix.csv") + " --model neuralcdm" + kTrainArgs;
  REQUIRE(run(base + " --out-dir " + w.sub("det_a")).exit_code == 0);
  REQUIRE(run(base + " --out-dir " + w.sub("det_b")).exit_code == 0);
  CHECK(slurp(w.sub("det_a") + "/checkpoint.txt") ==
        slurp(w.sub("det_b") + "/checkpoint.txt"));
  CHECK(slurp(w.sub("det_a") + "/history.csv") ==
        slurp(w.sub("det_b") + "/history.csv"));
}

TEST_CASE("diagnose reports sigmoid of the stored embeddings") {
  auto& w = ws();
  std::string ckpt = w.sub("run") + "/checkpoint.txt";
  REQUIRE(fs::exists(ckpt));  // produced by the train test case
  RunResult dg = run("diagnose --checkpoint " + ckpt + " --out-dir " +
                     w.sub("diag"));
  REQUIRE(dg.exit_code == 0);

  ncd::Checkpoint cp = ncd::load_checkpoint(ckpt);
  const ncd::Matrix& A = cp.matrix("A");
  auto lines = read_lines(w.sub("diag") + "/proficiency.csv");
  CHECK(lines.at(0) == "student_id,concept_id,proficiency");
  CHECK(lines.size() == 1 + 30 * 3);
  // Spot-check the first row: s?,k?,value with value = sigmoid(A[s][k]).
  {
    std::istringstream row(lines.at(1));
    std::string sid, kid, val;
    std::getline(row, sid, ',');
    std::getline(row, kid, ',');
    std::getline(row, val, ',');
    double got = std::strtod(val.c_str(), nullptr);
    double expect = ncd::sigmoid(A(0, 0));
    CHECK(got == expect);  // %.17g round-trips exactly
    CHECK(got > 0.0);
    CHECK(got < 1.0);
  }
  CHECK(read_lines(w.sub("diag") + "/knowledge_difficulty.csv").size() ==
        1 + 20 * 3);
  CHECK(read_lines(w.sub("diag") + "/discrimination.csv").size() == 1 + 20);
}

TEST_CASE("refine consumes candidates and writes the relevancy report") {
  auto& w = ws();
  RunResult synth =
      run("synth --students 30 --exercises 20 --concepts 3 --seed 6 "
          "--drop-rate 0.3 --spurious 2 --inject-seed 1 --out-dir " +
          w.sub("syn_bad"));
  REQUIRE(synth.exit_code == 0);
  CHECK(fs::exists(w.sub("syn_bad") + "/candidates.csv"));
  CHECK(fs::exists(w.sub("syn_bad") + "/qmatrix_true.csv"));

  RunResult rf = run("refine --logs " + w.sub("syn_bad") + "/logs.csv" +
                     " --qmatrix " + w.sub("syn_bad") + "/qmatrix.csv" +
                     " --candidates " + w.sub("syn_bad") + "/candidates.csv" +
                     kTrainArgs + " --out-dir " + w.sub("ref"));
  REQUIRE(rf.exit_code == 0);
  CHECK(parse_kv(rf.output).at("model") == "neuralcdm+");
  auto lines = read_lines(w.sub("ref") + "/refined_q.csv");
  CHECK(lines.at(0) == "exercise_id,concept_id,relevancy");
  CHECK(lines.size() > 20);  // at least one relevancy row per exercise

  RunResult ev = run("eval --checkpoint " + w.sub("ref") + "/checkpoint.txt" +
                     " --logs " + w.sub("syn_bad") + "/logs.csv --qmatrix " +
                     w.sub("syn_bad") + "/qmatrix.csv --doa");
  CHECK(ev.exit_code == 0);
  CHECK(parse_kv(ev.output).count("doa") == 1);
}

TEST_CASE("usage and data failures exit with the documented codes") {
  auto& w = ws();
  // neuralcdm+ without --candidates: refused before any training happens
  RunResult r1 = run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
                     w.syn("qmatrix.csv") + " --model neuralcdm+");
  CHECK(r1.exit_code == 2);
  CHECK(r1.output.find("--candidates") != std::string::npos);

  RunResult r2 = run("train --logs /nonexistent.csv --qmatrix " +
                     w.syn("qmatrix.csv") + " --model neuralcdm");
  CHECK(r2.exit_code == 3);

  RunResult r3 = run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
                     w.syn("qmatrix.csv") + " --model banana");
  CHECK(r3.exit_code == 2);

  RunResult r4 = run("stats");
  CHECK(r4.exit_code == 2);

  RunResult r5 = run("--help");
  CHECK(r5.exit_code == 0);
  CHECK(r5.output.find("train") != std::string::npos);
}

TEST_CASE("doa is refused for factor models without concept meaning") {
  auto& w = ws();
  RunResult tr = run("train --logs " + w.syn("logs.csv") + " --qmatrix " +
                     w.syn("qmatrix.csv") + " --model mf" + kTrainArgs +
                     " --out-dir " + w.sub("mf"));
  REQUIRE(tr.exit_code == 0);
  RunResult ev = run("eval --checkpoint " + w.sub("mf") + "/checkpoint.txt" +
                     " --logs " + w.syn("logs.csv") + " --doa");
  CHECK(ev.exit_code == 2);
  CHECK(ev.output.find("no concept-aligned factors") != std::string::npos);

  RunResult dg = run("diagnose --checkpoint " + w.sub("mf") +
                     "/checkpoint.txt --out-dir " + w.sub("mf_diag"));
  CHECK(dg.exit_code == 2);

  RunResult du = run("diagnose --checkpoint " + w.sub("run") +
                     "/checkpoint.txt --students nosuch --out-dir " +
                     w.sub("du"));
  CHECK(du.exit_code == 2);
  CHECK(du.output.find("unknown student id 'nosuch'") != std::string::npos);
}

TEST_CASE("every baseline family trains and evaluates through the cli") {
  auto& w = ws();
  for (const std::string model : {"irt", "mirt", "mf"}) {
    std::string args = "train --logs " + w.syn("logs.csv") + " --model " +
                       model + kTrainArgs + " --out-dir " + w.sub("b_" + model);
    if (model != "irt") args += " --qmatrix " + w.syn("qmatrix.csv");
    RunResult tr = run(args);
    REQUIRE(tr.exit_code == 0);
    std::string ev_args = "eval --checkpoint " + w.sub("b_" + model) +
                          "/checkpoint.txt --logs " + w.syn("logs.csv");
    if (model == "mirt") ev_args += " --qmatrix " + w.syn("qmatrix.csv");
    RunResult ev = run(ev_args);
    REQUIRE(ev.exit_code == 0);
    auto kv = parse_kv(ev.output);
    CHECK(kv.at("family") == model);
    double auc_val = std::strtod(kv.at("eval_auc").c_str(), nullptr);
    CHECK(auc_val > 0.4);
    CHECK(auc_val <= 1.0);
  }
}
