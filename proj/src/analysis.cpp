#include "qnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "qnn/parallel.hpp"

namespace qnn {

double FourierFit::operator()(double t) const {
  double v = a0 + a1 * std::cos(omega * t) + b1 * std::sin(omega * t);
  if (order == 2) v += a2 * std::cos(2.0 * omega * t) + b2 * std::sin(2.0 * omega * t);
  return v;
}

std::vector<double> FourierFit::evaluate(const std::vector<double>& times) const {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back((*this)(t));
  return out;
}

std::vector<std::pair<std::string, double>> FourierFit::coefficients() const {
  std::vector<std::pair<std::string, double>> c = {{"a0", a0}, {"a1", a1}, {"b1", b1}};
  if (order == 2) {
    c.emplace_back("a2", a2);
    c.emplace_back("b2", b2);
  }
  c.emplace_back("omega", omega);
  return c;
}

double r_squared(const std::vector<double>& series, const std::vector<double>& model_values) {
  if (series.size() != model_values.size()) throw ArgumentError("r_squared: length mismatch");
  if (series.size() < 2) throw ArgumentError("r_squared needs at least two points");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    ss_res += (series[i] - model_values[i]) * (series[i] - model_values[i]);
    ss_tot += (series[i] - mean) * (series[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

struct LinearFit {
  Eigen::VectorXd coef;
  double ss_res;
};

// least squares at fixed ω, QR on the design matrix
LinearFit solve_at(double omega, const Eigen::VectorXd& y, const Eigen::VectorXd& t, int order) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd a(n, 1 + 2 * order);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (int m = 1; m <= order; ++m) {
      a(i, 2 * m - 1) = std::cos(m * omega * t(i));
      a(i, 2 * m) = std::sin(m * omega * t(i));
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  LinearFit f{qr.solve(y), 0.0};
  f.ss_res = (a * f.coef - y).squaredNorm();
  return f;
}

}  // namespace

FourierFit fourier_fit(const std::vector<double>& series, const std::vector<double>& times,
                       int order) {
  if (order != 1 && order != 2) throw ArgumentError("fourier_fit: order must be 1 or 2");
  if (series.size() != times.size()) throw ArgumentError("fourier_fit: length mismatch");
  const std::size_t free = 2 + 2 * static_cast<std::size_t>(order);
  if (series.size() < std::max<std::size_t>(6, free)) {
    throw ArgumentError("fourier_fit: " + std::to_string(series.size()) +
                        " points is too few for order " + std::to_string(order));
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ArgumentError("fourier_fit: times must increase");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(series.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(times.data(), n);

  // ω ceiling is the Nyquist limit of the mean sample spacing
  const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  const double omega_max = std::numbers::pi / dt;
  constexpr int kGrid = 512;
  std::vector<double> grid(kGrid), ss(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = omega_max * (i + 1) / kGrid;
    ss[i] = solve_at(grid[i], y, t, order).ss_res;
  }

  // refine around the few best local minima of the coarse scan
  std::vector<int> minima;
  for (int i = 0; i < kGrid; ++i) {
    const bool left = i == 0 || ss[i] <= ss[i - 1];
    const bool right = i == kGrid - 1 || ss[i] <= ss[i + 1];
    if (left && right) minima.push_back(i);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return ss[a] < ss[b]; });
  if (minima.size() > 4) minima.resize(4);

  double best_omega = grid[minima.front()];
  double best_ss = ss[minima.front()];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i : minima) {
    double lo = i == 0 ? grid[0] * 1e-3 : grid[i - 1];
    double hi = i == kGrid - 1 ? omega_max : grid[i + 1];
    double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
    double fc = solve_at(c, y, t, order).ss_res, fd = solve_at(d, y, t, order).ss_res;
    while (hi - lo > 1e-8 * hi) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - invphi * (hi - lo);
        fc = solve_at(c, y, t, order).ss_res;
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + invphi * (hi - lo);
        fd = solve_at(d, y, t, order).ss_res;
      }
    }
    const double w = 0.5 * (lo + hi);
    const double s = solve_at(w, y, t, order).ss_res;
    if (s < best_ss) {
      best_ss = s;
      best_omega = w;
    }
  }

  return fourier_fit_at(series, times, order, best_omega);
}

FourierFit fourier_fit_at(const std::vector<double>& series, const std::vector<double>& times,
                          int order, double omega) {
  if (order != 1 && order != 2) throw ArgumentError("fourier_fit: order must be 1 or 2");
  if (series.size() != times.size()) throw ArgumentError("fourier_fit: length mismatch");
  if (series.size() < 2 + 2 * static_cast<std::size_t>(order)) {
    throw ArgumentError("fourier_fit: too few points for order " + std::to_string(order));
  }
  if (!(omega > 0.0)) throw ArgumentError("fourier_fit: omega must be > 0");
  const Eigen::Index n = static_cast<Eigen::Index>(series.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(times.data(), n);
  const LinearFit lf = solve_at(omega, y, t, order);
  FourierFit fit;
  fit.order = order;
  fit.omega = omega;
  fit.a0 = lf.coef(0);
  fit.a1 = lf.coef(1);
  fit.b1 = lf.coef(2);
  if (order == 2) {
    fit.a2 = lf.coef(3);
    fit.b2 = lf.coef(4);
  }
  fit.fit_rms = std::sqrt(lf.ss_res / static_cast<double>(n));
  fit.r_squared = r_squared(series, fit.evaluate(times));
  return fit;
}

int fit_order_for(int which) { return which == 0 ? 2 : 1; }

const char* parameter_name(int which) {
  return which == 0 ? "K" : which == 1 ? "epsilon" : "zeta";
}

ScheduleFits fit_schedule(const ParameterSchedule& schedule, const ScheduleFits* omega_from) {
  std::vector<double> times;
  for (int k = 0; k < schedule.steps(); ++k) times.push_back(schedule.grid().time_at(k));
  ScheduleFits out;
  for (int s = 0; s < 3; ++s) {
    const auto& series = s == 0 ? schedule.k() : s == 1 ? schedule.eps() : schedule.zeta();
    out.fits[s] = omega_from
                      ? fourier_fit_at(series, times, fit_order_for(s), omega_from->fits[s].omega)
                      : fourier_fit(series, times, fit_order_for(s));
  }
  return out;
}

NoiseConfig sweep_noise_config(const SweepTask& task, double amplitude, std::uint64_t seed) {
  NoiseConfig cfg;
  if (task.hamiltonian_channel) {
    cfg.hamiltonian = amplitude;
    cfg.seed = seed;
  } else {
    cfg = NoiseConfig::total(amplitude, seed);
  }
  cfg.magnitude_mode = task.magnitude_mode;
  cfg.hamiltonian_mode = task.hamiltonian_mode;
  cfg.validate();
  return cfg;
}

namespace {

std::string cell_name(double noise, std::uint64_t seed, int n_qubits) {
  return "noise=" + format_double(noise) + " seed=" + std::to_string(seed) +
         " n_qubits=" + std::to_string(n_qubits);
}

TrainingReport train_cell(const ParameterSchedule& start, int n_qubits, const LearnConfig& learn,
                          const std::optional<NoiseConfig>& noise, double amplitude,
                          std::uint64_t seed) {
  try {
    return train(start, training_set(n_qubits), n_qubits, learn, noise);
  } catch (const DivergenceError& e) {
    throw DivergenceError(cell_name(amplitude, seed, n_qubits) + ": " + e.what(), e.epoch());
  }
}

std::optional<NoiseConfig> cell_noise(const SweepTask& task, double amplitude,
                                      std::uint64_t seed) {
  if (amplitude == 0.0) return std::nullopt;
  return sweep_noise_config(task, amplitude, seed);
}

void check_grids(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw ArgumentError("sweep grids must be non-empty");
}

}  // namespace

std::vector<SweepCell> coefficients_vs_noise(const SweepTask& task,
                                             const std::vector<double>& noise_grid,
                                             const std::vector<std::uint64_t>& seeds) {
  check_grids(noise_grid.size(), seeds.size());
  for (std::size_t i = 0; i < noise_grid.size(); ++i) {
    if (!(noise_grid[i] >= 0.0) || (i > 0 && noise_grid[i] < noise_grid[i - 1])) {
      throw ArgumentError("noise grid must be non-negative and ascending");
    }
  }
  const ParameterSchedule start =
      task.start ? *task.start : default_initial_schedule(task.grid, task.learn.init_seed);
  LearnConfig learn = task.learn;
  learn.jobs = 1;
  learn.max_epochs = task.stage_epochs;

  const std::size_t n_noise = noise_grid.size();
  std::vector<std::optional<SweepCell>> slots(n_noise * seeds.size());
  // one chain per seed; each amplitude continues from the previous one
  parallel_for(seeds.size(), task.jobs, [&](std::size_t j) {
    ParameterSchedule current = start;
    for (std::size_t i = 0; i < n_noise; ++i) {
      const double a = noise_grid[i];
      TrainingReport report =
          train_cell(current, task.n_qubits, learn, cell_noise(task, a, seeds[j]), a, seeds[j]);
      current = report.schedule;
      slots[i * seeds.size() + j] = SweepCell{a, seeds[j], task.n_qubits, std::move(report), {}};
    }
  });
  std::vector<SweepCell> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  // every fit pinned to the ω of the first cell
  const ScheduleFits reference = fit_schedule(out.front().report.schedule);
  for (auto& c : out) c.fits = fit_schedule(c.report.schedule, &reference);
  return out;
}

CsvTable coefficients_table(const std::vector<SweepCell>& cells) {
  CsvTable table({"n_qubits", "noise", "seed", "param", "coef_name", "value"});
  for (const auto& c : cells) {
    for (int s = 0; s < 3; ++s) {
      for (const auto& [name, value] : c.fits.fits[s].coefficients()) {
        table.row({std::to_string(c.n_qubits), format_double(c.noise), std::to_string(c.seed),
                   parameter_name(s), name, format_double(value)});
      }
    }
  }
  return table;
}

std::vector<TrainingReport> bootstrap_chain(int n_to, const TimeGrid& grid,
                                            const LearnConfig& learn,
                                            const std::optional<NoiseConfig>& noise) {
  if (n_to < 2 || n_to > kMaxQubits) throw ArgumentError("bootstrap_chain: n_to in 2..5");
  std::vector<TrainingReport> out;
  ParameterSchedule start = default_initial_schedule(grid, learn.init_seed);
  for (int n = 2; n <= n_to; ++n) {
    if (n > 2) start = bootstrap(out.back().schedule, n - 1, n, grid);
    out.push_back(train(start, training_set(n), n, learn, noise));
  }
  return out;
}

std::vector<SweepCell> r2_vs_qubits(const SweepTask& task, const std::vector<int>& qubit_counts,
                                    double total_noise, const std::vector<std::uint64_t>& seeds) {
  check_grids(qubit_counts.size(), seeds.size());
  for (std::size_t i = 0; i < qubit_counts.size(); ++i) {
    if (qubit_counts[i] < 2 || qubit_counts[i] > kMaxQubits) {
      throw ArgumentError("qubit counts must lie in 2..5");
    }
    if (i > 0 && qubit_counts[i] <= qubit_counts[i - 1]) {
      throw ArgumentError("qubit counts must be strictly ascending");
    }
  }
  LearnConfig learn = task.learn;
  learn.jobs = 1;
  const std::size_t n_sizes = qubit_counts.size();
  std::vector<std::optional<SweepCell>> slots(n_sizes * seeds.size());
  parallel_for(seeds.size(), task.jobs, [&](std::size_t j) {
    const auto noise = cell_noise(task, total_noise, seeds[j]);
    ParameterSchedule start = default_initial_schedule(task.grid, learn.init_seed);
    std::size_t next = 0;
    for (int n = 2; n <= qubit_counts.back(); ++n) {
      if (n > 2) start = bootstrap(start, n - 1, n, task.grid);
      TrainingReport report = train_cell(start, n, learn, noise, total_noise, seeds[j]);
      start = report.schedule;
      if (n == qubit_counts[next]) {
        const ScheduleFits fits = fit_schedule(report.schedule);
        slots[next * seeds.size() + j] =
            SweepCell{total_noise, seeds[j], n, std::move(report), fits};
        ++next;
      }
    }
  });
  std::vector<SweepCell> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

CsvTable r2_table(const std::vector<SweepCell>& cells) {
  CsvTable table({"n_qubits", "seed", "param", "r2"});
  for (const auto& c : cells) {
    for (int s = 0; s < 3; ++s) {
      table.row({std::to_string(c.n_qubits), std::to_string(c.seed), parameter_name(s),
                 format_double(c.fits.fits[s].r_squared)});
    }
  }
  return table;
}

}  // namespace qnn
