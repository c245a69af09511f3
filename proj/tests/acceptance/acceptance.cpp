// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--only N]... [--long-run] [--recipes DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnn/analysis.hpp"
#include "qnn/harness.hpp"

using namespace qnn;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};
const TimeGrid kGrid{};

// Noiseless 2 -> 3 chains per init seed, trained once and shared.
class Chains {
 public:
  const std::vector<TrainingReport>& get(std::uint64_t seed) {
    auto it = cache_.find(seed);
    if (it == cache_.end()) {
      LearnConfig learn;
      learn.init_seed = seed;
      it = cache_.emplace(seed, bootstrap_chain(3, kGrid, learn)).first;
    }
    return it->second;
  }

 private:
  std::map<std::uint64_t, std::vector<TrainingReport>> cache_;
};

struct Context {
  bool long_run = false;
  fs::path recipes;
  Chains chains;
};

// ---------------------------------------------------------------- AC1

Verdict ac1(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const double got[4] = {concurrence_squared(states::bell()), concurrence_squared(states::flat()),
                         concurrence_squared(states::c_state()),
                         concurrence_squared(states::p_state())};
  const double want[4] = {1.0, 0.0, 0.0, 4.0 / 9.0};
  double worst_target = 0.0;
  for (int i = 0; i < 4; ++i) worst_target = std::max(worst_target, std::abs(got[i] - want[i]));

  std::mt19937_64 gen(2024);
  std::normal_distribution<double> n;
  double worst_forms = 0.0;
  for (int i = 0; i < 10000; ++i) {
    CVector v(4);
    for (int j = 0; j < 4; ++j) v(j) = Complex(n(gen), n(gen));
    const PureState s(v);
    worst_forms = std::max(worst_forms,
                           std::abs(concurrence_squared(s) - concurrence_squared_polar(s)));
  }
  const double t = seconds_since(t0);
  return {worst_target <= 1e-12 && worst_forms <= 1e-12 && t < 1.0,
          "target err " + num(worst_target) + ", form gap " + num(worst_forms) + " over 1e4, " +
              num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC2

Verdict ac2(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const TimeGrid grid{251.0, 251};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  double trace = 0.0, herm = 0.0, purity = 0.0, energy = 0.0;
  for (int q = 2; q <= 5; ++q) {
    const Eigen::Index dim = Eigen::Index{1} << q;
    CMatrix g(dim, dim);
    std::normal_distribution<double> nd;
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(nd(gen), nd(gen));
    CMatrix m = g * g.adjoint();
    const DensityMatrix rho0(m / m.trace().real());
    const double p0 = rho0.purity();

    std::vector<double> k, e, z;
    for (int i = 0; i < grid.n_steps; ++i) {
      k.push_back(u(gen));
      e.push_back(u(gen));
      z.push_back(u(gen));
    }
    const Propagation varying =
        propagate(rho0, ParameterSchedule(grid, k, e, z), q, std::nullopt, true);
    for (const CMatrix& s : varying.states) {
      trace = std::max(trace, std::abs(s.trace().real() - 1.0));
      herm = std::max(herm, hermiticity_error(s));
      purity = std::max(purity, std::abs((s * s).trace().real() - p0));
    }

    const ParameterSchedule flat = ParameterSchedule::constant(grid, 0.002, 1e-4, 2e-4);
    const HermitianOperator h = build_hamiltonian(0.002, 1e-4, 2e-4, q);
    const Propagation constant = propagate(rho0, flat, q, std::nullopt, true);
    const double e0 = expectation(rho0, h);
    for (const CMatrix& s : constant.states) {
      energy = std::max(energy, std::abs((s * h.matrix()).trace().real() - e0));
    }
  }
  const double t = seconds_since(t0);
  const bool ok = trace <= 1e-9 && herm <= 1e-9 && purity <= 1e-9 && energy <= 1e-9 && t < 10.0;
  return {ok, "n=2..5, 251 steps: trace " + num(trace) + ", herm " + num(herm) + ", purity " +
                  num(purity) + ", <H> " + num(energy) + ", " + num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC3

Verdict ac3(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> k(0.0, 0.006), e(-3e-4, 3e-4), z(-5e-4, 5e-4);
  double worst = 0.0;
  int instances = 0;
  for (int n = 2; n <= 3; ++n) {
    const auto pairs = training_set(n);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> ks, es, zs;
      for (int i = 0; i < kGrid.n_steps; ++i) {
        ks.push_back(k(gen));
        es.push_back(e(gen));
        zs.push_back(z(gen));
      }
      const ParameterSchedule s(kGrid, ks, es, zs);
      const ScheduleGradient adj = gradient(s, pairs, n);
      const ScheduleGradient fd = finite_difference_gradient(s, pairs, n, 1e-7);
      double diff = 0.0, ref = 0.0;
      for (int p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < adj.series(p).size(); ++i) {
          diff += std::pow(adj.series(p)[i] - fd.series(p)[i], 2);
          ref += std::pow(fd.series(p)[i], 2);
        }
      }
      worst = std::max(worst, std::sqrt(diff / ref));
      ++instances;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 120.0, std::to_string(instances) +
                                          " instances, worst relative gap " + num(worst) + ", " +
                                          num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC4

Verdict ac4(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainingReport r =
      train(default_initial_schedule(kGrid, 1), training_set(2), 2, LearnConfig{});
  const std::map<std::string, double> want{{"Bell", 1.0}, {"Flat", 0.0}, {"C", 0.0}, {"P", 0.44}};
  double worst = 0.0;
  std::string outs;
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    const auto it = std::find_if(want.begin(), want.end(), [&](const auto& w) {
      return r.labels[i].rfind(w.first, 0) == 0;
    });
    if (it == want.end()) return {false, "unexpected pair label " + r.labels[i]};
    worst = std::max(worst, std::abs(r.final_outputs[i] - it->second));
    outs += " " + num(r.final_outputs[i]);
  }
  const auto reach = r.epochs_to_reach(5e-3);
  const double t = seconds_since(t0);
  const bool ok = reach && *reach <= 500 && worst <= 0.05 && t < 300.0;
  return {ok, "rms 5e-3 at epoch " + (reach ? std::to_string(*reach) : std::string("never")) +
                  ", final rms " + num(r.rms_history.back()) + ", outputs" + outs +
                  ", worst dev " + num(worst) + ", " + num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC5

Verdict ac5(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    LearnConfig learn;
    learn.init_seed = seed;
    const TrainingReport& boot = ctx.chains.get(seed)[1];
    const TrainingReport plain =
        train(default_initial_schedule(kGrid, seed), training_set(3), 3, learn);
    const auto b = boot.epochs_to_reach(5e-3);
    const auto p = plain.epochs_to_reach(5e-3);
    const bool win = b && (!p || *b < *p);
    ok = ok && win;
    detail += " s" + std::to_string(seed) + ":" + (b ? std::to_string(*b) : "never") + "<" +
              (p ? std::to_string(*p) : "never");
  }
  const double t = seconds_since(t0);
  ok = ok && t < 1200.0;
  return {ok, "epochs to rms 5e-3, bootstrapped<default:" + detail + ", " + num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC6

Verdict ac6(Context& ctx) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> c(-1e-3, 1e-3), w(0.012, 0.04);
  std::vector<double> times;
  for (int i = 0; i < 251; ++i) times.push_back(i);
  double synth = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    for (int order = 1; order <= 2; ++order) {
      FourierFit truth;
      truth.order = order;
      truth.a0 = c(gen);
      truth.a1 = c(gen);
      truth.b1 = c(gen);
      if (order == 2) {
        truth.a2 = c(gen);
        truth.b2 = c(gen);
      }
      truth.omega = w(gen);
      const FourierFit f = fourier_fit(truth.evaluate(times), times, order);
      const auto got = f.coefficients();
      const auto want = truth.coefficients();
      for (std::size_t i = 0; i < got.size(); ++i) {
        synth = std::max(synth, std::abs(got[i].second - want[i].second));
      }
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  double worst_ratio = 1e300;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const ParameterSchedule& s = ctx.chains.get(seed)[1].schedule;
    const ScheduleFits fits = fit_schedule(s);
    for (int p = 0; p < 3; ++p) {
      const std::vector<double>& v = p == 0 ? s.k() : p == 1 ? s.eps() : s.zeta();
      double sq = 0.0;
      for (double x : v) sq += x * x;
      const double amplitude = std::sqrt(sq / v.size());
      const double ratio =
          fits.fits[p].fit_rms > 0.0 ? amplitude / fits.fits[p].fit_rms : 1e300;
      worst_ratio = std::min(worst_ratio, ratio);
      if (seed == 1) detail += std::string(" ") + parameter_name(p) + ":" + num(ratio, 3);
    }
  }
  const double t = seconds_since(t0);
  return {synth <= 1e-6 && worst_ratio >= 100.0 && t < 60.0,
          "synthetic coef err " + num(synth) + "; amplitude/fit-rms worst " + num(worst_ratio, 3) +
              " over 5 seeds (seed 1" + detail + "), " + num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC7

double mean_r2(const std::vector<SweepCell>& cells, int n, int p) {
  double s = 0.0;
  int c = 0;
  for (const auto& cell : cells) {
    if (cell.n_qubits == n) {
      s += cell.fits.fits[p].r_squared;
      ++c;
    }
  }
  return s / c;
}

Verdict ac7(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  // (a) coefficient drift along the noise ladder
  SweepTask task;
  task.n_qubits = 3;
  task.start = ctx.chains.get(1)[1].schedule;
  const std::vector<double> amps{0.0, 0.00675, 0.0135, 0.02025, 0.027};
  const auto cells = coefficients_vs_noise(task, amps, kSeeds);
  bool ok_a = true;
  std::string drift_text;
  for (int p = 0; p < 3; ++p) {
    std::vector<double> zero, top;
    for (const auto& c : cells) {
      const auto coefs = c.fits.fits[p].coefficients();
      std::vector<double>* into = c.noise == 0.0 ? &zero : c.noise == amps.back() ? &top : nullptr;
      if (!into) continue;
      if (into->empty()) into->assign(coefs.size() - 1, 0.0);
      for (std::size_t i = 0; i + 1 < coefs.size(); ++i) {
        (*into)[i] += coefs[i].second / kSeeds.size();
      }
    }
    double num_sq = 0.0, den_sq = 0.0;
    for (std::size_t i = 0; i < zero.size(); ++i) {
      num_sq += std::pow(top[i] - zero[i], 2);
      den_sq += zero[i] * zero[i];
    }
    const double drift = std::sqrt(num_sq / den_sq);
    ok_a = ok_a && drift < 0.25;
    drift_text += std::string(" ") + parameter_name(p) + ":" + num(drift, 3);
  }

  // (b) R^2 against qubit count at total noise 0.027
  const std::vector<int> counts =
      ctx.long_run ? std::vector<int>{2, 3, 4, 5} : std::vector<int>{2, 3};
  SweepTask chain;
  const auto r2cells = r2_vs_qubits(chain, counts, 0.027, kSeeds);
  bool ok_b = true;
  std::string r2_text;
  for (int p = 0; p < 3; ++p) {
    r2_text += std::string(" ") + parameter_name(p) + ":";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double r = mean_r2(r2cells, counts[i], p);
      r2_text += (i ? "/" : "") + num(r, 3);
      if (i > 0 && r < mean_r2(r2cells, counts[i - 1], p) - 0.05) ok_b = false;
      if (p == 2 && r < 0.7) ok_b = false;
    }
  }
  const double t = seconds_since(t0);
  return {ok_a && ok_b && t < 3600.0, "(a) drift at 0.027" + drift_text + " (b) mean R2 n=" +
                                          std::to_string(counts.front()) + ".." +
                                          std::to_string(counts.back()) + r2_text + ", " +
                                          num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC8

std::vector<double> column(const CsvTable& t, std::size_t c) {
  std::vector<double> out;
  for (const auto& row : t.rows()) out.push_back(parse_double(row[c]));
  return out;
}

Verdict ac8(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> gammas;
  for (int i = 0; i <= 10; ++i) gammas.push_back(i / 10.0);
  const ParameterSchedule& s = ctx.chains.get(1)[1].schedule;
  const std::vector<int> bc{1, 2};

  // P against the closed form
  const CsvTable p0 = test_curve(s, "P", gammas, {0.0}, {1}, bc);
  const auto p_out = column(p0, 3);
  const auto p_orc = column(p0, 4);
  double p_dev = 0.0;
  for (std::size_t i = 0; i < p_out.size(); ++i) {
    p_dev = std::max(p_dev, std::abs(p_out[i] - p_orc[i]));
  }

  // M monotone, tolerance = largest across-seed standard deviation
  std::vector<std::vector<double>> m_curves;
  for (std::uint64_t seed : kSeeds) {
    m_curves.push_back(
        column(test_curve(ctx.chains.get(seed)[1].schedule, "M", gammas, {0.0}, {1}, bc), 3));
  }
  std::vector<double> mean(gammas.size(), 0.0);
  double spread = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    double sq = 0.0;
    for (const auto& c : m_curves) {
      mean[i] += c[i] / m_curves.size();
      sq += c[i] * c[i] / m_curves.size();
    }
    spread = std::max(spread, std::sqrt(std::max(0.0, sq - mean[i] * mean[i])));
  }
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < mean.size(); ++i) {
    worst_rise = std::max(worst_rise, mean[i] - mean[i - 1]);
  }

  // stability under noise: seed-averaged noisy curve against the noiseless one
  const std::vector<double> levels{0.0, 0.009, 0.018, 0.027};
  double drop = 0.0;
  for (const char* family : {"P", "M"}) {
    const CsvTable t = test_curve(s, family, gammas, levels, kSeeds, bc);
    const auto out = column(t, 3);
    const std::size_t per_gamma = levels.size() * kSeeds.size();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      const double clean = out[i * per_gamma];
      for (std::size_t l = 1; l < levels.size(); ++l) {
        double m = 0.0;
        for (std::size_t k = 0; k < kSeeds.size(); ++k) {
          m += out[i * per_gamma + l * kSeeds.size() + k] / kSeeds.size();
        }
        drop = std::max(drop, std::abs(m - clean));
      }
    }
  }
  const double t = seconds_since(t0);
  const bool ok = p_dev <= 0.1 && worst_rise <= spread && drop <= 0.15 && t < 600.0;
  return {ok, "P max|out-oracle| " + num(p_dev, 3) + "; M mean curve " + num(mean.front(), 3) +
                  "->" + num(mean.back(), 3) + ", worst rise " + num(worst_rise, 3) +
                  " vs seed sd " + num(spread, 3) + "; worst noisy shift " + num(drop, 3) + ", " +
                  num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC9

Verdict ac9(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepTask task;
  task.hamiltonian_channel = true;
  const std::vector<int> counts{2, 3};
  const auto cells = r2_vs_qubits(task, counts, 0.027, kSeeds);
  bool converged = true;
  std::string conv;
  for (const auto& c : cells) {
    const auto& h = c.report.rms_history;
    const bool ok = std::isfinite(h.back()) && h.back() <= 0.1 * h.front();
    converged = converged && ok;
  }
  double scatter[2] = {0.0, 0.0};
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const ScheduleFits reference = fit_schedule(ctx.chains.get(1)[n].schedule);
    std::vector<std::vector<double>> coefs;
    double first = 0.0, last = 0.0;
    for (const auto& c : cells) {
      if (c.n_qubits != counts[n]) continue;
      const ScheduleFits f = fit_schedule(c.report.schedule, &reference);
      const auto e = f.fits[1].coefficients();
      coefs.push_back({e[0].second, e[1].second, e[2].second});
      first += c.report.rms_history.front() / kSeeds.size();
      last += c.report.rms_history.back() / kSeeds.size();
    }
    double var = 0.0, mean_sq = 0.0;
    for (int j = 0; j < 3; ++j) {
      double m = 0.0, sq = 0.0;
      for (const auto& v : coefs) {
        m += v[j] / coefs.size();
        sq += v[j] * v[j] / coefs.size();
      }
      var += std::max(0.0, sq - m * m);
      mean_sq += m * m;
    }
    scatter[n] = std::sqrt(var / mean_sq);
    conv += " n=" + std::to_string(counts[n]) + " rms " + num(first, 3) + "->" + num(last, 3);
  }
  const double t = seconds_since(t0);
  const bool ok = converged && scatter[1] <= scatter[0] && t < 1800.0;
  return {ok, "mean" + conv + (converged ? " (all runs >=10x drop)" : " (a run failed to drop 10x)") +
                  "; eps relative scatter n=2 " + num(scatter[0], 3) + ", n=3 " +
                  num(scatter[1], 3) + ", " + num(t, 3) + "s"};
}

// ---------------------------------------------------------------- AC10

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Recipe {
  fs::path path;
  ExperimentConfig config;
  bool long_run = false;
};

std::vector<Recipe> load_recipes(const fs::path& dir, bool long_run) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".conf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Recipe> out;
  for (const auto& f : files) {
    const std::string text = slurp(f);
    Recipe r{f, parse_config(text), text.find("# long-run") != std::string::npos};
    if (r.long_run && !long_run) continue;
    if (r.long_run) r.config.sweep.counts = {2, 3, 4, 5};
    out.push_back(std::move(r));
  }
  return out;
}

Verdict ac10(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!fs::is_directory(ctx.recipes)) return {false, "no recipe directory " + ctx.recipes.string()};
  const auto recipes = load_recipes(ctx.recipes, ctx.long_run);
  const fs::path root = fs::temp_directory_path() / "qnn_acceptance_replay";
  fs::remove_all(root);
  const char* saved = std::getenv(kOutputDirEnv);
  const std::string saved_value = saved ? saved : "";
  const struct Pass {
    const char* name;
    int jobs;
  } passes[] = {{"serial_a", 1}, {"serial_b", 1}, {"parallel", 3}};
  std::ostringstream sink;
  for (const auto& pass : passes) {
    ::setenv(kOutputDirEnv, (root / pass.name).c_str(), 1);
    for (const auto& r : recipes) {
      const int code = run(r.config, pass.jobs, sink, sink);
      if (code != kExitOk) {
        if (saved) ::setenv(kOutputDirEnv, saved_value.c_str(), 1);
        else ::unsetenv(kOutputDirEnv);
        return {false, r.path.filename().string() + " exited " + std::to_string(code) + ": " +
                           sink.str()};
      }
    }
  }
  if (saved) ::setenv(kOutputDirEnv, saved_value.c_str(), 1);
  else ::unsetenv(kOutputDirEnv);

  int files = 0;
  std::vector<std::string> mismatched;
  for (const auto& e : fs::recursive_directory_iterator(root / "serial_a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "serial_a");
    const std::string a = slurp(e.path());
    ++files;
    for (const char* other : {"serial_b", "parallel"}) {
      const fs::path p = root / other / rel;
      if (!fs::exists(p) || slurp(p) != a) mismatched.push_back(std::string(other) + "/" + rel.string());
    }
  }
  const double t = seconds_since(t0);
  std::string detail = std::to_string(recipes.size()) + " recipes, " + std::to_string(files) +
                       " files, compared serial twice and with 3 jobs";
  if (!mismatched.empty()) detail += "; differs: " + mismatched.front();
  detail += ", " + num(t, 3) + "s";
  return {mismatched.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  Context ctx;
  ctx.recipes = QNN_RECIPE_DIR;
  std::string recipes;
  app.add_option("--only", only, "criterion number (repeatable)")->check(CLI::Range(1, 10));
  app.add_flag("--long-run", ctx.long_run, "extend qubit-count sweeps to 4 and 5 qubits");
  app.add_option("--recipes", recipes, "recipe directory");
  CLI11_PARSE(app, argc, argv);
  if (!recipes.empty()) ctx.recipes = recipes;

  const std::vector<std::function<Verdict(Context&)>> checks{ac1, ac2, ac3, ac4, ac5,
                                                             ac6, ac7, ac8, ac9, ac10};
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = checks[i](ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << "AC" << id << (id < 10 ? "  " : " ") << (v.pass ? "PASS" : "FAIL") << "  "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
