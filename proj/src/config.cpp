#include "qnn/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qnn/csv.hpp"
#include "qnn/errors.hpp"

namespace qnn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

double to_double(const std::string& key, const std::string& value, int line) {
  try {
    return parse_double(value);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'", line);
  }
}

long long to_integer(const std::string& key, const std::string& value, int line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ConfigError(key, "expected an integer, got '" + value + "'", line);
  }
  return v;
}

int to_int(const std::string& key, const std::string& value, int line) {
  const long long v = to_integer(key, value, line);
  if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(key, "out of range", line);
  return static_cast<int>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& value, int line) {
  const long long v = to_integer(key, value, line);
  if (v < 0) throw ConfigError(key, "seeds must be non-negative", line);
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'", line);
}

std::vector<double> to_doubles(const std::string& key, const std::string& value, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(key, item, line));
  return out;
}

std::vector<std::uint64_t> to_seeds(const std::string& key, const std::string& value, int line) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(value)) out.push_back(to_seed(key, item, line));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& value, int line) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(to_int(key, item, line));
  return out;
}

std::vector<int> to_subset(const std::string& key, const std::string& value, int line) {
  std::vector<int> out;
  if (!value.empty() && std::all_of(value.begin(), value.end(),
                                    [](char c) { return c >= 'A' && c <= 'E'; })) {
    for (char c : value) out.push_back(c - 'A');
    return out;
  }
  for (const auto& item : split_list(value)) out.push_back(to_int(key, item, line));
  if (out.empty()) throw ConfigError(key, "expected qubit letters or indices", line);
  return out;
}

template <class T>
std::string join(const std::vector<T>& values, std::function<std::string(const T&)> fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

std::string fmt_d(const double& v) { return format_double(v); }
std::string fmt_u(const std::uint64_t& v) { return std::to_string(v); }
std::string fmt_i(const int& v) { return std::to_string(v); }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["experiment.task"] = [](ExperimentConfig& c, const std::string& k, const std::string& v,
                              int l) {
      try {
        c.task = task_from_string(v);
      } catch (const ArgumentError&) {
        throw ConfigError(k, "unknown task '" + v + "'", l);
      }
    };
    t["experiment.n_qubits"] = [](auto& c, auto& k, auto& v, int l) {
      c.n_qubits = to_int(k, v, l);
    };
    t["grid.t_final"] = [](auto& c, auto& k, auto& v, int l) {
      c.grid.t_final = to_double(k, v, l);
    };
    t["grid.n_steps"] = [](auto& c, auto& k, auto& v, int l) {
      c.grid.n_steps = to_int(k, v, l);
    };
    t["learn.rate"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.learning_rate = to_double(k, v, l);
    };
    t["learn.max_epochs"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.max_epochs = to_int(k, v, l);
    };
    t["learn.rms_stop"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.rms_stop = to_double(k, v, l);
    };
    t["learn.gradient"] = [](ExperimentConfig& c, const std::string& k, const std::string& v,
                             int l) {
      try {
        c.learn.gradient_mode = gradient_mode_from_string(v);
      } catch (const ArgumentError&) {
        throw ConfigError(k, "expected adjoint or finite_difference, got '" + v + "'", l);
      }
    };
    t["learn.init_seed"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.init_seed = to_seed(k, v, l);
    };
    t["learn.fd_step"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.fd_step = to_double(k, v, l);
    };
    t["learn.descent_guard"] = [](auto& c, auto& k, auto& v, int l) {
      c.learn.descent_guard = to_bool(k, v, l);
    };
    t["learn.bootstrap"] = [](auto& c, auto& k, auto& v, int l) {
      c.bootstrap = to_bool(k, v, l);
    };
    t["noise.magnitude"] = [](auto& c, auto& k, auto& v, int l) {
      c.noise.magnitude = to_double(k, v, l);
    };
    t["noise.phase"] = [](auto& c, auto& k, auto& v, int l) {
      c.noise.phase = to_double(k, v, l);
    };
    t["noise.hamiltonian"] = [](auto& c, auto& k, auto& v, int l) {
      c.noise.hamiltonian = to_double(k, v, l);
    };
    t["noise.seed"] = [](auto& c, auto& k, auto& v, int l) { c.noise.seed = to_seed(k, v, l); };
    auto mode = [](PerturbationMode NoiseConfig::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v, int l) {
        try {
          c.noise.*field = perturbation_mode_from_string(v);
        } catch (const ArgumentError&) {
          throw ConfigError(k, "expected relative or additive, got '" + v + "'", l);
        }
      };
    };
    t["noise.magnitude_mode"] = mode(&NoiseConfig::magnitude_mode);
    t["noise.hamiltonian_mode"] = mode(&NoiseConfig::hamiltonian_mode);
    t["io.input"] = [](auto& c, auto&, auto& v, int) { c.input = v; };
    t["io.output"] = [](auto& c, auto&, auto& v, int) { c.output = v; };
    t["observable.subset"] = [](auto& c, auto& k, auto& v, int l) {
      c.subset = to_subset(k, v, l);
    };
    t["test.family"] = [](auto& c, auto&, auto& v, int) { c.test.family = v; };
    t["test.gammas"] = [](auto& c, auto& k, auto& v, int l) {
      c.test.gammas = to_doubles(k, v, l);
    };
    t["test.noise_levels"] = [](auto& c, auto& k, auto& v, int l) {
      c.test.noise_levels = to_doubles(k, v, l);
    };
    t["test.seeds"] = [](auto& c, auto& k, auto& v, int l) { c.test.seeds = to_seeds(k, v, l); };
    t["sweep.amplitudes"] = [](auto& c, auto& k, auto& v, int l) {
      c.sweep.amplitudes = to_doubles(k, v, l);
    };
    t["sweep.seeds"] = [](auto& c, auto& k, auto& v, int l) {
      c.sweep.seeds = to_seeds(k, v, l);
    };
    t["sweep.stage_epochs"] = [](auto& c, auto& k, auto& v, int l) {
      c.sweep.stage_epochs = to_int(k, v, l);
    };
    t["sweep.counts"] = [](auto& c, auto& k, auto& v, int l) {
      c.sweep.counts = to_ints(k, v, l);
    };
    t["sweep.total"] = [](auto& c, auto& k, auto& v, int l) {
      c.sweep.total = to_double(k, v, l);
    };
    t["sweep.channel"] = [](auto& c, auto&, auto& v, int) { c.sweep.channel = v; };
    return t;
  }();
  return table;
}

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

bool finite_non_negative(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message, int line)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         field + ": " + message),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(Task task) {
  switch (task) {
    case Task::train: return "train";
    case Task::test: return "test";
    case Task::sweep_noise: return "sweep-noise";
    case Task::sweep_qubits: return "sweep-qubits";
    case Task::fit: return "fit";
  }
  return "?";
}

Task task_from_string(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '_', '-');
  for (Task task : {Task::train, Task::test, Task::sweep_noise, Task::sweep_qubits, Task::fit}) {
    if (to_string(task) == t) return task;
  }
  throw ArgumentError("unknown task: " + text);
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   int line) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key", line);
  it->second(cfg, key, value, line);
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(std::string_view(raw).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("syntax", "expected 'section.key = value'", line);
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      throw ConfigError(key.empty() ? "syntax" : key, "key must have the form section.key", line);
    }
    apply_setting(base, key, value, line);
  }
  return base;
}

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(text, "override must be section.key=value");
  return {trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1))};
}

void ExperimentConfig::validate() const {
  require(task.has_value(), "experiment.task", "no task given");
  require(!output.empty(), "io.output", "no output directory given");
  require(n_qubits >= 2 && n_qubits <= 5, "experiment.n_qubits", "must lie in 2..5");
  require(std::isfinite(grid.t_final) && grid.t_final > 0.0, "grid.t_final", "must be positive");
  require(grid.n_steps >= 1, "grid.n_steps", "must be at least 1");
  require(std::isfinite(learn.learning_rate) && learn.learning_rate > 0.0, "learn.rate",
          "must be positive");
  require(learn.max_epochs >= 1, "learn.max_epochs", "must be at least 1");
  require(std::isfinite(learn.rms_stop) && learn.rms_stop >= 0.0, "learn.rms_stop",
          "must be non-negative");
  require(std::isfinite(learn.fd_step) && learn.fd_step > 0.0, "learn.fd_step",
          "must be positive");
  require(std::isfinite(noise.magnitude) && noise.magnitude >= 0.0, "noise.magnitude",
          "must be non-negative");
  require(std::isfinite(noise.phase) && noise.phase >= 0.0, "noise.phase",
          "must be non-negative");
  require(std::isfinite(noise.hamiltonian) && noise.hamiltonian >= 0.0, "noise.hamiltonian",
          "must be non-negative");
  require(test.family == "P" || test.family == "M", "test.family", "must be P or M");
  require(!test.gammas.empty() && finite_non_negative(test.gammas), "test.gammas",
          "must be a non-empty list of non-negative numbers");
  require(!test.noise_levels.empty() && finite_non_negative(test.noise_levels),
          "test.noise_levels", "must be a non-empty list of non-negative numbers");
  require(!test.seeds.empty(), "test.seeds", "must be non-empty");
  require(!sweep.amplitudes.empty() && finite_non_negative(sweep.amplitudes) &&
              std::is_sorted(sweep.amplitudes.begin(), sweep.amplitudes.end()),
          "sweep.amplitudes", "must be a non-empty ascending list of non-negative numbers");
  require(!sweep.seeds.empty(), "sweep.seeds", "must be non-empty");
  require(sweep.stage_epochs >= 1, "sweep.stage_epochs", "must be at least 1");
  require(!sweep.counts.empty(), "sweep.counts", "must be non-empty");
  for (std::size_t i = 0; i < sweep.counts.size(); ++i) {
    require(sweep.counts[i] >= 2 && sweep.counts[i] <= 5 &&
                (i == 0 || sweep.counts[i] > sweep.counts[i - 1]),
            "sweep.counts", "must be ascending qubit counts in 2..5");
  }
  require(std::isfinite(sweep.total) && sweep.total >= 0.0, "sweep.total",
          "must be non-negative");
  require(sweep.channel == "density" || sweep.channel == "hamiltonian", "sweep.channel",
          "must be density or hamiltonian");
  if (*task == Task::test || *task == Task::fit) {
    require(!input.empty(), "io.input", "this task reads a schedule CSV");
  }
  if (*task == Task::test) {
    require(n_qubits == 3, "experiment.n_qubits", "test states are 3-qubit");
    std::set<int> seen;
    for (int q : subset) {
      require(q >= 0 && q < n_qubits, "observable.subset", "qubit outside 0..n_qubits-1");
      require(seen.insert(q).second, "observable.subset", "repeated qubit");
    }
    require(!subset.empty(), "observable.subset", "must name at least one qubit");
  }
  require(input.empty() || input != output, "io.input", "must differ from io.output");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved() const {
  return {
      {"experiment.task", task ? to_string(*task) : ""},
      {"experiment.n_qubits", std::to_string(n_qubits)},
      {"grid.t_final", format_double(grid.t_final)},
      {"grid.n_steps", std::to_string(grid.n_steps)},
      {"learn.rate", format_double(learn.learning_rate)},
      {"learn.max_epochs", std::to_string(learn.max_epochs)},
      {"learn.rms_stop", format_double(learn.rms_stop)},
      {"learn.gradient", to_string(learn.gradient_mode)},
      {"learn.init_seed", std::to_string(learn.init_seed)},
      {"learn.fd_step", format_double(learn.fd_step)},
      {"learn.descent_guard", learn.descent_guard ? "true" : "false"},
      {"learn.bootstrap", bootstrap ? "true" : "false"},
      {"noise.magnitude", format_double(noise.magnitude)},
      {"noise.phase", format_double(noise.phase)},
      {"noise.hamiltonian", format_double(noise.hamiltonian)},
      {"noise.seed", std::to_string(noise.seed)},
      {"noise.magnitude_mode", to_string(noise.magnitude_mode)},
      {"noise.hamiltonian_mode", to_string(noise.hamiltonian_mode)},
      {"io.input", input},
      {"io.output", output},
      {"observable.subset", join<int>(subset, fmt_i)},
      {"test.family", test.family},
      {"test.gammas", join<double>(test.gammas, fmt_d)},
      {"test.noise_levels", join<double>(test.noise_levels, fmt_d)},
      {"test.seeds", join<std::uint64_t>(test.seeds, fmt_u)},
      {"sweep.amplitudes", join<double>(sweep.amplitudes, fmt_d)},
      {"sweep.seeds", join<std::uint64_t>(sweep.seeds, fmt_u)},
      {"sweep.stage_epochs", std::to_string(sweep.stage_epochs)},
      {"sweep.counts", join<int>(sweep.counts, fmt_i)},
      {"sweep.total", format_double(sweep.total)},
      {"sweep.channel", sweep.channel},
  };
}

}  // namespace qnn
