#include "qnn/learning.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "qnn/csv.hpp"
#include "qnn/parallel.hpp"

namespace qnn {

std::string to_string(GradientMode mode) {
  return mode == GradientMode::adjoint ? "adjoint" : "finite-difference";
}

GradientMode gradient_mode_from_string(const std::string& text) {
  if (text == "adjoint") return GradientMode::adjoint;
  if (text == "finite-difference" || text == "finite_difference") {
    return GradientMode::finite_difference;
  }
  throw ArgumentError("unknown gradient mode '" + text + "'");
}

void LearnConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learn.rate must be > 0");
  }
  if (max_epochs < 1) throw ArgumentError("learn.max_epochs must be >= 1");
  if (!(rms_stop >= 0.0)) throw ArgumentError("learn.rms_stop must be >= 0");
  if (!(fd_step > 0.0)) throw ArgumentError("learn.fd_step must be > 0");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
}

double ScheduleGradient::max_abs() const {
  double m = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (double v : series(s)) m = std::max(m, std::abs(v));
  }
  return m;
}

std::optional<int> TrainingReport::epochs_to_reach(double threshold) const {
  for (std::size_t i = 0; i < rms_history.size(); ++i) {
    if (rms_history[i] <= threshold) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

double rms_error(const std::vector<double>& outputs, const std::vector<double>& targets) {
  if (outputs.size() != targets.size() || outputs.empty()) {
    throw ArgumentError("rms_error: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double d = outputs[i] - targets[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(outputs.size()));
}

namespace {

void check_pairs(const std::vector<TrainingPair>& pairs, int n_qubits) {
  if (pairs.empty()) throw ArgumentError("training set is empty");
  for (const auto& p : pairs) validate_pair(p, n_qubits);
}

std::vector<WitnessObservable> observables_for(const std::vector<TrainingPair>& pairs,
                                               int n_qubits) {
  std::vector<WitnessObservable> obs;
  obs.reserve(pairs.size());
  for (const auto& p : pairs) obs.emplace_back(p.subset, n_qubits);
  return obs;
}

Evaluation summarize(std::vector<double> outputs, const std::vector<TrainingPair>& pairs) {
  Evaluation e;
  double s = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = outputs[i] - pairs[i].target;
    s += d * d;
  }
  e.loss = 0.5 * s;
  e.rms = std::sqrt(s / static_cast<double>(pairs.size()));
  e.outputs = std::move(outputs);
  return e;
}

std::optional<NoiseContext> context_for(const std::optional<NoiseConfig>& noise,
                                        std::uint64_t run_base, std::size_t pair) {
  if (!noise || !noise->any_active()) return std::nullopt;
  return NoiseContext{*noise, run_id_of(run_base, pair)};
}

/// dU/dθ for U = exp(−i H dt), H = V diag(λ) V†, in direction G:
/// V [(V† G V) ∘ F] V†, where F holds the divided differences of
/// λ ↦ exp(−iλ dt), written in the sinc form that stays exact when
/// eigenvalues coincide.
struct StepDerivatives {
  std::array<CMatrix, 3> d_unitary;
};

StepDerivatives step_derivatives(const StepPropagator& step, const HamiltonianBasis& basis) {
  const RVector& lambda = step.eig.values;
  const CMatrix& v = step.eig.vectors;
  const Eigen::Index d = lambda.size();
  const double dt = step.dt;
  CMatrix f(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      const double half = 0.5 * (lambda(a) - lambda(b)) * dt;
      const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
      f(a, b) = Complex(0.0, -dt) * std::polar(1.0, -0.5 * (lambda(a) + lambda(b)) * dt) * sinc;
    }
  }
  StepDerivatives out;
  for (int g = 0; g < 3; ++g) {
    const CMatrix rotated = v.adjoint() * basis.generator(g) * v;
    out.d_unitary[g] = v * rotated.cwiseProduct(f) * v.adjoint();
  }
  return out;
}

struct PairResult {
  double output = 0.0;
  ScheduleGradient grad;
};

/// Forward pass with trajectory, then the backward sweep
///   Λ_N = 2 (f − y) e O,   ∂L/∂θ_k = 2 Re Tr[∂U_k ρ_k U_k† Λ_{k+1}],
///   Λ_k = U_k† Λ_{k+1} U_k.
/// `shared` holds per-step propagators and derivatives when every pair sees
/// the same Hamiltonian; otherwise they are rebuilt from the applied values.
PairResult pair_gradient(const ParameterSchedule& schedule, const TrainingPair& pair,
                         const WitnessObservable& obs, int n_qubits,
                         const std::optional<NoiseContext>& noise,
                         const std::vector<StepPropagator>* shared_steps,
                         const std::vector<StepDerivatives>* shared_derivs) {
  const HamiltonianBasis& basis = hamiltonian_basis(n_qubits);
  const int steps = schedule.steps();
  const double dt = schedule.grid().dt();
  Propagation prop = propagate(pair.input, schedule, n_qubits, noise, true);

  PairResult r;
  const double e = expectation(prop.final_state, obs.op());
  r.output = e * e;
  const double weight = 2.0 * (r.output - pair.target) * e;
  r.grad.k.assign(steps, 0.0);
  r.grad.eps.assign(steps, 0.0);
  r.grad.zeta.assign(steps, 0.0);

  CMatrix lambda = weight * obs.op().matrix();
  for (int k = steps - 1; k >= 0; --k) {
    StepPropagator local;
    StepDerivatives local_d;
    const StepPropagator* step;
    const StepDerivatives* deriv;
    if (shared_steps) {
      step = &(*shared_steps)[k];
      deriv = &(*shared_derivs)[k];
    } else {
      local = make_step(basis.assemble(prop.applied[k]), dt);
      local_d = step_derivatives(local, basis);
      step = &local;
      deriv = &local_d;
    }
    const CMatrix x = prop.states[k] * step->unitary.adjoint() * lambda;
    for (int g = 0; g < 3; ++g) {
      // Tr[A X] = Σ_ij A_ij X_ji
      const Complex tr = deriv->d_unitary[g].cwiseProduct(x.transpose()).sum();
      r.grad.series(g)[k] = 2.0 * tr.real();
    }
    lambda = step->unitary.adjoint() * lambda * step->unitary;
  }
  return r;
}

}  // namespace

Evaluation loss_and_outputs(const ParameterSchedule& schedule,
                            const std::vector<TrainingPair>& pairs, int n_qubits,
                            const std::optional<NoiseConfig>& noise, std::uint64_t run_base,
                            int jobs) {
  check_pairs(pairs, n_qubits);
  const auto obs = observables_for(pairs, n_qubits);
  std::vector<double> outputs(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    const Propagation prop =
        propagate(pairs[p].input, schedule, n_qubits, context_for(noise, run_base, p));
    outputs[p] = output_value(prop.final_state, obs[p]);
  });
  return summarize(std::move(outputs), pairs);
}

GradientEvaluation evaluate_with_gradient(const ParameterSchedule& schedule,
                                          const std::vector<TrainingPair>& pairs,
                                          int n_qubits, const std::optional<NoiseConfig>& noise,
                                          std::uint64_t run_base, int jobs) {
  check_pairs(pairs, n_qubits);
  const auto obs = observables_for(pairs, n_qubits);
  const HamiltonianBasis& basis = hamiltonian_basis(n_qubits);
  const int steps = schedule.steps();
  const double dt = schedule.grid().dt();

  const bool per_pair_hamiltonian = noise && noise->hamiltonian_active();
  std::vector<StepPropagator> shared_steps;
  std::vector<StepDerivatives> shared_derivs;
  if (!per_pair_hamiltonian) {
    shared_steps.resize(steps);
    shared_derivs.resize(steps);
    parallel_for(static_cast<std::size_t>(steps), jobs, [&](std::size_t k) {
      shared_steps[k] = make_step(basis.assemble(schedule.at(static_cast<int>(k))), dt);
      shared_derivs[k] = step_derivatives(shared_steps[k], basis);
    });
  }

  std::vector<PairResult> results(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    results[p] = pair_gradient(schedule, pairs[p], obs[p], n_qubits,
                               context_for(noise, run_base, p),
                               per_pair_hamiltonian ? nullptr : &shared_steps,
                               per_pair_hamiltonian ? nullptr : &shared_derivs);
  });

  GradientEvaluation out;
  std::vector<double> outputs(pairs.size());
  out.gradient.k.assign(steps, 0.0);
  out.gradient.eps.assign(steps, 0.0);
  out.gradient.zeta.assign(steps, 0.0);
  // pair order fixes the summation order, independent of `jobs`
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    outputs[p] = results[p].output;
    for (int g = 0; g < 3; ++g) {
      auto& dst = out.gradient.series(g);
      const auto& src = results[p].grad.series(g);
      for (int k = 0; k < steps; ++k) dst[k] += src[k];
    }
  }
  out.evaluation = summarize(std::move(outputs), pairs);
  return out;
}

ScheduleGradient gradient(const ParameterSchedule& schedule,
                          const std::vector<TrainingPair>& pairs, int n_qubits, int jobs) {
  return evaluate_with_gradient(schedule, pairs, n_qubits, std::nullopt, 0, jobs).gradient;
}

ScheduleGradient finite_difference_gradient(const ParameterSchedule& schedule,
                                            const std::vector<TrainingPair>& pairs,
                                            int n_qubits, double h, int jobs) {
  check_pairs(pairs, n_qubits);
  const int steps = schedule.steps();
  ScheduleGradient out;
  out.k.assign(steps, 0.0);
  out.eps.assign(steps, 0.0);
  out.zeta.assign(steps, 0.0);
  const std::size_t total = 3 * static_cast<std::size_t>(steps);
  parallel_for(total, jobs, [&](std::size_t idx) {
    const int g = static_cast<int>(idx / steps);
    const int k = static_cast<int>(idx % steps);
    ParameterSchedule plus = schedule, minus = schedule;
    plus.mutable_series(g)[k] += h;
    minus.mutable_series(g)[k] -= h;
    const double lp = loss_and_outputs(plus, pairs, n_qubits).loss;
    const double lm = loss_and_outputs(minus, pairs, n_qubits).loss;
    out.series(g)[k] = (lp - lm) / (2.0 * h);
  });
  return out;
}

TrainingReport train(const ParameterSchedule& initial, const std::vector<TrainingPair>& pairs,
                     int n_qubits, const LearnConfig& learn,
                     const std::optional<NoiseConfig>& noise) {
  learn.validate();
  check_pairs(pairs, n_qubits);
  if (noise) noise->validate();
  const bool noisy = noise && noise->any_active();

  TrainingReport report{0, {}, {}, {}, {}, initial, learn.learning_rate, {}};
  for (const auto& p : pairs) {
    report.targets.push_back(p.target);
    report.labels.push_back(p.label);
  }
  ParameterSchedule& schedule = report.schedule;
  double rate = learn.learning_rate;
  double initial_rms = 0.0;
  int above = 0;

  for (int epoch = 0; epoch < learn.max_epochs; ++epoch) {
    const std::uint64_t run_base = static_cast<std::uint64_t>(epoch);
    Evaluation eval;
    ScheduleGradient grad;
    if (learn.gradient_mode == GradientMode::adjoint) {
      auto ge = evaluate_with_gradient(schedule, pairs, n_qubits, noise, run_base, learn.jobs);
      eval = std::move(ge.evaluation);
      grad = std::move(ge.gradient);
    } else {
      eval = loss_and_outputs(schedule, pairs, n_qubits, noise, run_base, learn.jobs);
      grad = finite_difference_gradient(schedule, pairs, n_qubits, learn.fd_step, learn.jobs);
    }
    report.rms_history.push_back(eval.rms);
    report.final_outputs = eval.outputs;
    report.epochs_run = epoch + 1;
    if (epoch == 0) initial_rms = eval.rms;

    if (!std::isfinite(eval.rms)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                                " (non-finite rms)",
                            epoch + 1);
    }
    above = eval.rms > 10.0 * initial_rms ? above + 1 : 0;
    if (above >= 10) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                                ": rms above 10x its initial value for 10 epochs",
                            epoch + 1);
    }
    if (eval.rms <= learn.rms_stop) break;
    if (epoch + 1 == learn.max_epochs) break;

    if (learn.descent_guard && !noisy && epoch > 0 &&
        eval.rms > report.rms_history[epoch - 1]) {
      rate *= 0.5;
      std::ostringstream msg;
      msg << "epoch " << epoch + 1 << ": rms rose from "
          << format_double(report.rms_history[epoch - 1]) << " to " << format_double(eval.rms)
          << "; rate halved to " << format_double(rate);
      report.events.push_back(msg.str());
    }
    schedule.descend(rate, grad.k, grad.eps, grad.zeta);
  }
  report.final_rate = rate;
  return report;
}

ParameterSchedule bootstrap(const ParameterSchedule& small, int n_from, int n_to,
                            const std::optional<TimeGrid>& target_grid) {
  if (n_from < 2 || n_from > kMaxQubits || n_to != n_from + 1 || n_to > kMaxQubits) {
    throw ArgumentError("bootstrap goes from n to n + 1 qubits within 2..5; got " +
                        std::to_string(n_from) + " -> " + std::to_string(n_to));
  }
  if (target_grid && !(*target_grid == small.grid())) {
    throw ArgumentError("bootstrap: schedule grid does not match the target grid");
  }
  return small;
}

ParameterSchedule default_initial_schedule(const TimeGrid& grid, std::uint64_t seed) {
  grid.validate();
  constexpr double base[3] = {0.002, 1e-4, 2e-4};
  // run id 2^63 keeps these draws apart from every noise stream
  RngStream rng = rng_stream_for(seed, std::uint64_t{1} << 63, 0);
  double value[3];
  for (int s = 0; s < 3; ++s) value[s] = base[s] * (1.0 + 0.2 * (rng.uniform() - 0.5));
  return ParameterSchedule::constant(grid, value[0], value[1], value[2]);
}

nlohmann::ordered_json report_to_json(const TrainingReport& report) {
  nlohmann::ordered_json j;
  j["epochs"] = report.epochs_run;
  j["rms_history"] = report.rms_history;
  j["outputs"] = report.final_outputs;
  j["targets"] = report.targets;
  j["labels"] = report.labels;
  j["final_rate"] = report.final_rate;
  j["events"] = report.events;
  return j;
}

}  // namespace qnn
