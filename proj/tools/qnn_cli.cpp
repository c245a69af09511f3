#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnn/config.hpp"
#include "qnn/harness.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  int jobs = 1;
  bool long_run = false;
};

int execute(qnn::Task task, const Options& opt) {
  qnn::ExperimentConfig cfg;
  try {
    if (!opt.config_path.empty()) {
      std::ifstream f(opt.config_path);
      if (!f) {
        std::cerr << "i/o error: cannot read config " << opt.config_path << "\n";
        return qnn::kExitIo;
      }
      std::ostringstream text;
      text << f.rdbuf();
      cfg = qnn::parse_config(text.str());
    }
    if (cfg.task && *cfg.task != task) {
      throw qnn::ConfigError("experiment.task", "config says " + qnn::to_string(*cfg.task) +
                                                    " but the command is " +
                                                    qnn::to_string(task));
    }
    cfg.task = task;
    if (opt.long_run) cfg.sweep.counts = {2, 3, 4, 5};
    for (const auto& o : opt.overrides) {
      const auto [key, value] = qnn::split_override(o);
      qnn::apply_setting(cfg, key, value);
    }
    if (!opt.output.empty()) cfg.output = opt.output;
  } catch (const qnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qnn::kExitConfig;
  }
  return qnn::run(cfg, opt.jobs, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum neural network simulator and trainer"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> verbs{
      {"train", "train a schedule on the pairwise/GHZ training set"},
      {"test", "evaluate a 3-qubit schedule on the P or M test family"},
      {"sweep-noise", "Fourier coefficients of 3-qubit schedules against noise"},
      {"sweep-qubits", "R² of noisy schedules against qubit count"},
      {"fit", "Fourier fits of a schedule CSV"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opt.config_path, "config file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", opt.overrides, "section.key=value override (repeatable)");
    sub->add_option("-o,--output", opt.output, "output directory (io.output)");
    sub->add_option("-j,--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_flag("--long-run", opt.long_run, "sweep qubit counts 2..5");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qnn::kExitConfig;
  }
  for (const auto& [name, help] : verbs) {
    if (app.got_subcommand(name)) return execute(qnn::task_from_string(name), opt);
  }
  return qnn::kExitConfig;
}
