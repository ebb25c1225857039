#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "symparam/csv.hpp"

namespace fs = std::filesystem;
using symparam::read_csv;

namespace {

const fs::path kRoot = SYMPARAM_TEST_TMP;

int run(const std::string& args) {
  fs::create_directories(kRoot);
  const std::string cmd = std::string("\"") + SYMPARAM_CLI_PATH + "\" " + args + " > \"" +
                          (kRoot / "last_stdout.txt").string() + "\" 2> \"" + (kRoot / "last_stderr.txt").string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh(const std::string& name) {
  const auto dir = kRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& json) {
  const auto p = dir / "config.json";
  std::ofstream(p) << json;
  return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const char* kSmall =
    R"({"schedule": [{"epochs": 2, "learning_rate": 0.01}, {"epochs": 2, "learning_rate": 0.001}],
        "dataset": {"train_samples": 64, "eval_samples": 32}, "model": {"width": 8}})";

}  // namespace

TEST_CASE("generate-data") {
  const auto dir = fresh("gen");
  REQUIRE(run("--seed 3 --out " + q(dir / "a") + " generate-data --n 4 --sampling grid") == 0);
  const auto t = read_csv(dir / "a" / "dataset.csv");
  CHECK(t.header == std::vector<std::string>{"x", "y_r", "y_c"});
  REQUIRE(t.rows.size() == 4);
  CHECK(t.rows[0][0] == -1.0);
  CHECK(t.rows[1][0] == doctest::Approx(-1.0 / 3).epsilon(1e-15));
  CHECK(t.rows[3][0] == 1.0);
  CHECK(slurp(kRoot / "last_stdout.txt").find("seed") != std::string::npos);

  REQUIRE(run("--seed 3 --out " + q(dir / "r1") + " generate-data --n 100") == 0);
  REQUIRE(run("--seed 3 --out " + q(dir / "r2") + " generate-data --n 100") == 0);
  CHECK(slurp(dir / "r1" / "dataset.csv") == slurp(dir / "r2" / "dataset.csv"));
  CHECK(fs::exists(dir / "r1" / "generate-data.meta.json"));

  CHECK(run("--out " + q(dir / "b") + " generate-data --n 1") == 2);
}

TEST_CASE("usage errors") {
  const auto dir = fresh("usage");
  CHECK(run("no-such-command") == 2);
  CHECK(run("train --bogus") == 2);
  CHECK(run("--out " + q(dir) + " train --mode hyper") == 2);
  CHECK(run("--out " + q(dir) + " train --mode hyper --fixed-weights 0.7,0.7") == 2);
  const auto cfg = write_config(dir, R"({"unknown_key": 1})");
  CHECK(run("--config " + q(cfg) + " --out " + q(dir) + " generate-data") == 2);
}

TEST_CASE("train is reproducible and resumable") {
  const auto dir = fresh("train");
  const auto cfg = write_config(dir, kSmall);
  const std::string base = "--config " + q(cfg) + " --seed 11 --out ";
  REQUIRE(run(base + q(dir / "a") + " train") == 0);
  REQUIRE(run(base + q(dir / "b") + " train") == 0);
  CHECK(slurp(dir / "a" / "checkpoint.json") == slurp(dir / "b" / "checkpoint.json"));
  CHECK(slurp(dir / "a" / "history.csv") == slurp(dir / "b" / "history.csv"));
  CHECK(fs::exists(dir / "a" / "train.meta.json"));

  REQUIRE(run(base + q(dir / "p1") + " train --stop-after-epochs 3") == 0);
  REQUIRE(run("--out " + q(dir / "p2") + " train --resume " + q(dir / "p1" / "checkpoint.json")) == 0);
  CHECK(slurp(dir / "p2" / "checkpoint.json") == slurp(dir / "a" / "checkpoint.json"));

  const auto full = read_csv(dir / "a" / "history.csv");
  const auto first = read_csv(dir / "p1" / "history.csv");
  const auto second = read_csv(dir / "p2" / "history.csv");
  CHECK(full.header == second.header);
  auto joined = first.rows;
  joined.insert(joined.end(), second.rows.begin(), second.rows.end());
  CHECK(joined == full.rows);
}

TEST_CASE("train reports divergence with exit code 4") {
  const auto dir = fresh("diverge");
  const auto cfg = write_config(dir, R"({"schedule": [{"epochs": 3, "learning_rate": 1e200}],
      "dataset": {"train_samples": 32, "eval_samples": 8}, "model": {"width": 4, "head": "raw"}})");
  CHECK(run("--config " + q(cfg) + " --out " + q(dir) + " train") == 4);
  CHECK(slurp(kRoot / "last_stderr.txt").find("epoch") != std::string::npos);
}

TEST_CASE("evaluate") {
  const auto dir = fresh("eval");
  const auto cfg = write_config(dir, kSmall);
  const std::string base = "--config " + q(cfg) + " --seed 5 --out ";
  REQUIRE(run(base + q(dir / "sym") + " train") == 0);
  REQUIRE(run("--out " + q(dir / "rep") + " evaluate --checkpoint " + q(dir / "sym" / "checkpoint.json")) == 0);
  const auto rep = read_csv(dir / "rep" / "report.csv");
  CHECK(rep.header == std::vector<std::string>{"w_r", "w_c", "L_total", "L_r", "L_c"});
  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.rows.front()[2] == rep.rows.front()[3]);
  CHECK(rep.rows.back()[2] == rep.rows.back()[4]);
  for (const auto& r : rep.rows) CHECK(std::abs(r[2] - (r[0] * r[3] + r[1] * r[4])) <= 1e-9);

  std::string hyper;
  for (const char* w : {"1,0", "0.75,0.25", "0.5,0.5", "0.25,0.75", "0,1"}) {
    const auto out = dir / (std::string("h") + w);
    REQUIRE(run(base + q(out) + " train --mode hyper --fixed-weights " + w) == 0);
    hyper += " " + q(out / "checkpoint.json");
  }
  REQUIRE(run("--out " + q(dir / "cmp") + " evaluate --checkpoint " + q(dir / "sym" / "checkpoint.json") +
              " --hyper" + hyper) == 0);
  const auto cmp = read_csv(dir / "cmp" / "comparison.csv");
  CHECK(cmp.header ==
        std::vector<std::string>{"w_r", "w_c", "sym_L", "sym_L_r", "sym_L_c", "hyper_L", "hyper_L_r", "hyper_L_c"});
  CHECK(cmp.rows.size() == 5);

  // a hyper checkpoint is missing for most rows
  CHECK(run("--out " + q(dir / "cmp2") + " evaluate --checkpoint " + q(dir / "sym" / "checkpoint.json") +
            " --hyper " + q(dir / "h1,0" / "checkpoint.json")) == 2);

  {
    std::ofstream(dir / "corrupt.json") << slurp(dir / "sym" / "checkpoint.json").substr(0, 200);
  }
  CHECK(run("--out " + q(dir / "bad") + " evaluate --checkpoint " + q(dir / "corrupt.json")) == 3);
  CHECK(run("--out " + q(dir / "bad") + " evaluate --checkpoint " + q(dir / "nothing.json")) == 3);
}

TEST_CASE("landscape") {
  const auto dir = fresh("land");
  for (const char* s : {"1,0", "0,1", "0.5,0.5"})
    REQUIRE(run("--out " + q(dir / s) + " landscape --s " + s + " --pgm") == 0);
  const auto a = read_csv(dir / "1,0" / "landscape.csv", false);
  const auto b = read_csv(dir / "0,1" / "landscape.csv", false);
  const auto m = read_csv(dir / "0.5,0.5" / "landscape.csv", false);
  REQUIRE(m.rows.size() == 201);
  REQUIRE(m.rows[0].size() == 201);
  double worst = 0.0;
  for (std::size_t r = 0; r < 201; ++r)
    for (std::size_t c = 0; c < 201; ++c)
      worst = std::max(worst, std::abs(m.rows[r][c] - 0.5 * (a.rows[r][c] + b.rows[r][c])));
  CHECK(worst <= 1e-12);

  const auto pgm = slurp(dir / "0.5,0.5" / "landscape.pgm");
  CHECK(pgm.rfind("P2", 0) == 0);
  std::istringstream in(pgm);
  std::string magic;
  int w = 0, h = 0;
  in >> magic >> w >> h;
  CHECK(w == 201);
  CHECK(h == 201);

  const auto dir2 = fresh("land_model");
  const auto cfg = write_config(dir2, kSmall);
  REQUIRE(run("--config " + q(cfg) + " --out " + q(dir2) + " train") == 0);
  REQUIRE(run("--out " + q(dir2 / "l") + " landscape --s 0.5,0.5 --checkpoint " + q(dir2 / "checkpoint.json")) == 0);
  const auto overlay = read_csv(dir2 / "l" / "landscape_overlay.csv");
  CHECK(overlay.header == std::vector<std::string>{"x", "f_out"});
  CHECK(overlay.rows.size() == 201);
}

TEST_CASE("sample-dirichlet") {
  const auto dir = fresh("dir");
  REQUIRE(run("--seed 2 --out " + q(dir) + " sample-dirichlet --alpha 0.5,0.5,2 --n 500") == 0);
  const auto t = read_csv(dir / "dirichlet.csv");
  CHECK(t.header == std::vector<std::string>{"s_1", "s_2", "s_3"});
  REQUIRE(t.rows.size() == 500);
  for (const auto& r : t.rows) {
    CHECK(std::abs(r[0] + r[1] + r[2] - 1.0) <= 1e-12);
    for (double v : r) CHECK(v >= 0.0);
  }
  CHECK(run("--out " + q(dir) + " sample-dirichlet --alpha 0.5,0") == 2);
}

TEST_CASE("sweep-size") {
  const auto dir = fresh("sweep");
  const auto cfg = write_config(dir, kSmall);
  REQUIRE(run("--config " + q(cfg) + " --out " + q(dir) + " sweep-size --widths 4,8") == 0);
  const auto t = read_csv(dir / "sweep.csv");
  CHECK(t.header == std::vector<std::string>{"width", "w_r", "w_c", "sym_L", "hyper_L", "gap"});
  CHECK(t.rows.size() == 10);
}

TEST_CASE("ccam-probe") {
  const auto dir = fresh("probe");
  const auto cfg = write_config(dir, R"({"ccam_probe": {"channels": 8, "train_samples": 64, "epochs": 3}})");
  REQUIRE(run("--config " + q(cfg) + " --out " + q(dir / "a") + " ccam-probe") == 0);
  REQUIRE(run("--config " + q(cfg) + " --out " + q(dir / "b") + " ccam-probe") == 0);
  const auto t = read_csv(dir / "a" / "attention.csv");
  CHECK(t.header.size() == 3 + 8);
  CHECK(t.header.front() == "s_1");
  CHECK(t.header.back() == "M_8");
  CHECK(slurp(dir / "a" / "attention.csv") == slurp(dir / "b" / "attention.csv"));
  CHECK(slurp(dir / "a" / "ccam_probe.txt") == slurp(dir / "b" / "ccam_probe.txt"));
  CHECK(slurp(dir / "a" / "ccam_probe.txt").find("PASS") != std::string::npos);
}
