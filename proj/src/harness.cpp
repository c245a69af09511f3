#include "qnn/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "qnn/analysis.hpp"
#include "qnn/errors.hpp"
#include "qnn/parallel.hpp"

namespace qnn {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const std::string& output) {
  fs::path p(output);
  if (p.is_relative()) {
    if (const char* base = std::getenv(kOutputDirEnv); base && *base) p = fs::path(base) / p;
  }
  return p;
}

std::string comment_header(const ExperimentConfig& cfg) {
  std::string out = std::string("# ") + kVersion + "\n";
  for (const auto& [key, value] : cfg.resolved()) out += "# " + key + " = " + value + "\n";
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

ParameterSchedule load_schedule(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read schedule " + path.string());
  return read_schedule_csv(f);
}

CsvTable test_curve(const ParameterSchedule& schedule, const std::string& family,
                    const std::vector<double>& gammas, const std::vector<double>& noise_levels,
                    const std::vector<std::uint64_t>& seeds, const std::vector<int>& subset,
                    PerturbationMode magnitude_mode, int jobs) {
  if (family != "P" && family != "M") throw ArgumentError("test_curve: family must be P or M");
  const int n = 3;
  const WitnessObservable obs(subset, n);
  const std::size_t per_gamma = noise_levels.size() * seeds.size();
  std::vector<double> outputs(gammas.size() * per_gamma);
  parallel_for(outputs.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx / per_gamma;
    const std::size_t l = (idx % per_gamma) / seeds.size();
    const std::size_t s = idx % seeds.size();
    const DensityMatrix rho = family == "P" ? test_state_P(gammas[i]) : test_state_M(gammas[i]);
    std::optional<NoiseContext> ctx;
    if (noise_levels[l] > 0.0) {
      NoiseConfig cfg = NoiseConfig::total(noise_levels[l], seeds[s]);
      cfg.magnitude_mode = magnitude_mode;
      ctx = NoiseContext{cfg, run_id_of(i, 0)};
    }
    outputs[idx] = output_value(propagate(rho, schedule, n, ctx).final_state, obs);
  });
  CsvTable table({"gamma", "noise", "seed", "output", "oracle"});
  for (std::size_t idx = 0; idx < outputs.size(); ++idx) {
    const std::size_t i = idx / per_gamma;
    const std::size_t l = (idx % per_gamma) / seeds.size();
    const std::size_t s = idx % seeds.size();
    const double oracle = family == "P" ? p_state_oracle(gammas[i]) : 1.0;
    table.row({format_double(gammas[i]), format_double(noise_levels[l]), std::to_string(seeds[s]),
               format_double(outputs[idx]), format_double(oracle)});
  }
  return table;
}

namespace {

std::string csv_text(const ExperimentConfig& cfg, const CsvTable& table) {
  std::ostringstream s;
  s << comment_header(cfg);
  table.write(s);
  return s.str();
}

std::string schedule_text(const ExperimentConfig& cfg, const ParameterSchedule& schedule) {
  std::ostringstream s;
  s << comment_header(cfg);
  write_schedule_csv(s, schedule);
  return s.str();
}

// header rides along as the first member
std::string json_text(const ExperimentConfig& cfg, nlohmann::ordered_json body) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json header;
  header["version"] = kVersion;
  nlohmann::ordered_json resolved;
  for (const auto& [key, value] : cfg.resolved()) resolved[key] = value;
  header["config"] = resolved;
  j["header"] = header;
  for (auto& [key, value] : body.items()) j[key] = value;
  return j.dump(2) + "\n";
}

std::optional<NoiseConfig> active_noise(const NoiseConfig& n) {
  if (!n.any_active()) return std::nullopt;
  return n;
}

SweepTask sweep_task(const ExperimentConfig& cfg, int jobs) {
  SweepTask task;
  task.n_qubits = cfg.n_qubits;
  task.grid = cfg.grid;
  task.learn = cfg.learn;
  task.stage_epochs = cfg.sweep.stage_epochs;
  task.magnitude_mode = cfg.noise.magnitude_mode;
  task.hamiltonian_mode = cfg.noise.hamiltonian_mode;
  task.hamiltonian_channel = cfg.sweep.channel == "hamiltonian";
  task.jobs = jobs;
  return task;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

struct Outcome {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::string summary;
};

Outcome run_train(const ExperimentConfig& cfg) {
  const auto noise = active_noise(cfg.noise);
  std::vector<TrainingReport> reports;
  if (cfg.bootstrap) {
    if (!cfg.input.empty()) throw ConfigError("io.input", "not used with learn.bootstrap");
    reports = bootstrap_chain(cfg.n_qubits, cfg.grid, cfg.learn, noise);
  } else {
    const ParameterSchedule start = cfg.input.empty()
                                        ? default_initial_schedule(cfg.grid, cfg.learn.init_seed)
                                        : load_schedule(resolve_output_dir(cfg.input));
    reports.push_back(train(start, training_set(cfg.n_qubits), cfg.n_qubits, cfg.learn, noise));
  }
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  const int first = cfg.n_qubits - static_cast<int>(reports.size()) + 1;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto j = report_to_json(reports[i]);
    nlohmann::ordered_json stage;
    stage["n_qubits"] = first + static_cast<int>(i);
    for (auto& [key, value] : j.items()) stage[key] = value;
    stages.push_back(stage);
  }
  nlohmann::ordered_json body;
  body["stages"] = stages;
  const TrainingReport& last = reports.back();
  return {{{"schedule.csv", schedule_text(cfg, last.schedule)},
           {"report.json", json_text(cfg, body)}},
          "rms=" + fmt(last.rms_history.back()) + " epochs=" + std::to_string(last.epochs_run)};
}

Outcome run_test(const ExperimentConfig& cfg, int jobs) {
  const ParameterSchedule schedule = load_schedule(resolve_output_dir(cfg.input));
  const CsvTable table = test_curve(schedule, cfg.test.family, cfg.test.gammas,
                                    cfg.test.noise_levels, cfg.test.seeds, cfg.subset,
                                    cfg.noise.magnitude_mode, jobs);
  double worst = 0.0;
  for (const auto& row : table.rows()) {
    worst = std::max(worst, std::abs(parse_double(row[3]) - parse_double(row[4])));
  }
  return {{{"curve.csv", csv_text(cfg, table)}},
          "rows=" + std::to_string(table.size()) + " max|output-oracle|=" + fmt(worst)};
}

Outcome run_sweep_noise(const ExperimentConfig& cfg, int jobs) {
  SweepTask task = sweep_task(cfg, jobs);
  if (!cfg.input.empty()) {
    task.start = load_schedule(resolve_output_dir(cfg.input));
  } else {
    task.start = bootstrap_chain(cfg.n_qubits, cfg.grid, cfg.learn).back().schedule;
  }
  const auto cells = coefficients_vs_noise(task, cfg.sweep.amplitudes, cfg.sweep.seeds);
  double worst = 0.0;
  for (const auto& c : cells) worst = std::max(worst, c.report.rms_history.back());
  return {{{"coefficients.csv", csv_text(cfg, coefficients_table(cells))},
           {"start_schedule.csv", schedule_text(cfg, *task.start)}},
          "cells=" + std::to_string(cells.size()) + " worst_rms=" + fmt(worst)};
}

Outcome run_sweep_qubits(const ExperimentConfig& cfg, int jobs) {
  const SweepTask task = sweep_task(cfg, jobs);
  const auto cells = r2_vs_qubits(task, cfg.sweep.counts, cfg.sweep.total, cfg.sweep.seeds);
  double min_r2 = 1.0;
  for (const auto& c : cells) {
    for (const auto& f : c.fits.fits) min_r2 = std::min(min_r2, f.r_squared);
  }
  return {{{"r2.csv", csv_text(cfg, r2_table(cells))},
           {"coefficients.csv", csv_text(cfg, coefficients_table(cells))}},
          "cells=" + std::to_string(cells.size()) + " min_r2=" + fmt(min_r2)};
}

Outcome run_fit(const ExperimentConfig& cfg) {
  const ParameterSchedule schedule = load_schedule(resolve_output_dir(cfg.input));
  const ScheduleFits fits = fit_schedule(schedule);
  CsvTable table({"param", "order", "coef_name", "value"});
  double min_r2 = 1.0;
  for (int s = 0; s < 3; ++s) {
    const FourierFit& f = fits.fits[s];
    auto coefs = f.coefficients();
    coefs.emplace_back("fit_rms", f.fit_rms);
    coefs.emplace_back("r2", f.r_squared);
    for (const auto& [name, value] : coefs) {
      table.row({parameter_name(s), std::to_string(f.order), name, format_double(value)});
    }
    min_r2 = std::min(min_r2, f.r_squared);
  }
  return {{{"fits.csv", csv_text(cfg, table)}}, "min_r2=" + fmt(min_r2)};
}

}  // namespace

int run(const ExperimentConfig& cfg, int jobs, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cfg.validate();
    Outcome outcome;
    switch (*cfg.task) {
      case Task::train: outcome = run_train(cfg); break;
      case Task::test: outcome = run_test(cfg, jobs); break;
      case Task::sweep_noise: outcome = run_sweep_noise(cfg, jobs); break;
      case Task::sweep_qubits: outcome = run_sweep_qubits(cfg, jobs); break;
      case Task::fit: outcome = run_fit(cfg); break;
    }
    const fs::path dir = resolve_output_dir(cfg.output);
    for (const auto& [name, content] : outcome.files) write_atomic(dir / name, content);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << to_string(*cfg.task) << " " << outcome.summary << " wall=" << fmt(wall) << "s\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "training diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ArgumentError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace qnn
