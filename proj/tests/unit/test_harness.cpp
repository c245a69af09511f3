#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnn/harness.hpp"

using namespace qnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qnn_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.n_qubits == 2);
  CHECK(c.grid.n_steps == 8);
  CHECK(!c.task.has_value());
  CHECK(c.output.empty());
}

TEST_CASE("config values and comments") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "experiment.n_qubits = 3   # trailing\n"
      "\n"
      "noise.phase = 0.0089\n"
      "learn.gradient = finite_difference\n"
      "observable.subset = BC\n"
      "sweep.amplitudes = 0, 0.01,0.02\n");
  CHECK(c.n_qubits == 3);
  CHECK(c.noise.phase == 0.0089);
  CHECK(c.learn.gradient_mode == GradientMode::finite_difference);
  CHECK(c.subset == std::vector<int>{1, 2});
  CHECK(c.sweep.amplitudes == std::vector<double>{0.0, 0.01, 0.02});
}

TEST_CASE("config errors carry field and line") {
  try {
    parse_config("experiment.n_qubits = 3\nnoise.phase = abc\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "noise.phase");
  }
  CHECK_THROWS_AS(parse_config("learn.rat = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nodot = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.n_steps = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("learn.descent_guard = maybe\n"), ConfigError);
}

TEST_CASE("validation names the field") {
  ExperimentConfig c;
  c.task = Task::train;
  c.output = "x";
  c.learn.learning_rate = -1.0;
  try {
    c.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "learn.rate");
  }
  c.learn.learning_rate = 1e-5;
  CHECK_NOTHROW(c.validate());
  c.output.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("overrides and task names") {
  const auto [k, v] = split_override("noise.seed=4");
  CHECK(k == "noise.seed");
  CHECK(v == "4");
  CHECK(task_from_string("sweep-noise") == Task::sweep_noise);
  CHECK(task_from_string("sweep_qubits") == Task::sweep_qubits);
  CHECK(to_string(Task::fit) == "fit");
}

TEST_CASE("header lists every resolved key") {
  ExperimentConfig c;
  const std::string h = comment_header(c);
  CHECK(h.rfind(std::string("# ") + kVersion, 0) == 0);
  for (const auto& [key, value] : c.resolved()) CHECK(h.find("# " + key + " = ") != std::string::npos);
}

TEST_CASE("atomic write replaces the file whole") {
  const fs::path dir = scratch("atomic");
  write_atomic(dir / "a.txt", "first");
  write_atomic(dir / "a.txt", "second");
  CHECK(slurp(dir / "a.txt") == "second");
  std::size_t count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
  CHECK(count == 1);
}

TEST_CASE("noiseless test curve rows agree across seeds") {
  const ParameterSchedule s = default_initial_schedule(TimeGrid{251.0, 8}, 1);
  const CsvTable t = test_curve(s, "P", {0.0, 0.5}, {0.0}, {1, 2}, {1, 2});
  REQUIRE(t.size() == 4);
  CHECK(t.rows()[0][3] == t.rows()[1][3]);
  CHECK(t.rows()[0][4] == "1");
  const CsvTable m = test_curve(s, "M", {0.0}, {0.0, 0.027}, {1}, {1, 2}, PerturbationMode::relative, 2);
  CHECK(m.size() == 2);
  CHECK_THROWS_AS(test_curve(s, "Q", {0.0}, {0.0}, {1}, {1, 2}), ArgumentError);
}

TEST_CASE("run exit codes") {
  std::ostringstream out, err;
  ExperimentConfig c;
  c.task = Task::train;
  c.output = scratch("run").string();
  c.learn.learning_rate = -1.0;
  CHECK(run(c, 1, out, err) == kExitConfig);
  CHECK(err.str().find("learn.rate") != std::string::npos);

  c.learn.learning_rate = 8e-6;
  c.learn.max_epochs = 20;
  CHECK(run(c, 1, out, err) == kExitOk);
  CHECK(fs::exists(fs::path(c.output) / "schedule.csv"));
  CHECK(fs::exists(fs::path(c.output) / "report.json"));
  CHECK(out.str().rfind("train rms=", 0) == 0);

  ExperimentConfig f;
  f.task = Task::fit;
  f.output = scratch("fit").string();
  f.input = (scratch("missing") / "nothing.csv").string();
  CHECK(run(f, 1, out, err) == kExitIo);
  f.input = (fs::path(c.output) / "schedule.csv").string();
  CHECK(run(f, 1, out, err) == kExitOk);
  CHECK(slurp(fs::path(f.output) / "fits.csv").find("param,order,coef_name,value") !=
        std::string::npos);
}

TEST_CASE("relative outputs resolve against the environment") {
  ::setenv(kOutputDirEnv, "/tmp/base", 1);
  CHECK(resolve_output_dir("run1") == fs::path("/tmp/base/run1"));
  CHECK(resolve_output_dir("/abs") == fs::path("/abs"));
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir("run1") == fs::path("run1"));
}
