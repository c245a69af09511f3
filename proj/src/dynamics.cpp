#include "qnn/dynamics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "qnn/csv.hpp"

namespace qnn {

void TimeGrid::validate() const {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ArgumentError("grid.t_final must be > 0");
  }
  if (n_steps < 1) throw ArgumentError("grid.n_steps must be >= 1");
}

ParameterSchedule::ParameterSchedule(TimeGrid grid, std::vector<double> k,
                                     std::vector<double> eps, std::vector<double> zeta)
    : grid_(grid), k_(std::move(k)), eps_(std::move(eps)), zeta_(std::move(zeta)) {
  grid_.validate();
  const auto n = static_cast<std::size_t>(grid_.n_steps);
  if (k_.size() != n || eps_.size() != n || zeta_.size() != n) {
    throw ArgumentError("schedule series length does not match grid.n_steps");
  }
  for (const auto* series : {&k_, &eps_, &zeta_}) {
    for (double v : *series) {
      if (!std::isfinite(v)) throw ArgumentError("schedule contains a non-finite value");
    }
  }
}

ParameterSchedule ParameterSchedule::constant(TimeGrid grid, double k, double eps,
                                              double zeta) {
  grid.validate();
  const auto n = static_cast<std::size_t>(grid.n_steps);
  return ParameterSchedule(grid, std::vector<double>(n, k), std::vector<double>(n, eps),
                           std::vector<double>(n, zeta));
}

void ParameterSchedule::descend(double rate, const std::vector<double>& dk,
                                const std::vector<double>& de,
                                const std::vector<double>& dz) {
  for (std::size_t i = 0; i < k_.size(); ++i) {
    k_[i] -= rate * dk[i];
    eps_[i] -= rate * de[i];
    zeta_[i] -= rate * dz[i];
  }
}

std::vector<double>& ParameterSchedule::mutable_series(int which) {
  return which == 0 ? k_ : which == 1 ? eps_ : zeta_;
}

namespace {

HamiltonianBasis make_basis(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  HamiltonianBasis b{n, CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim),
                     CMatrix::Zero(dim, dim)};
  std::vector<CMatrix> z;
  for (int q = 0; q < n; ++q) {
    b.tunneling += pauli_on(Axis::x, q, n).matrix();
    z.push_back(pauli_on(Axis::z, q, n).matrix());
    b.bias += z.back();
  }
  for (int a = 0; a < n; ++a) {
    for (int c = a + 1; c < n; ++c) b.coupling += z[a] * z[c];
  }
  return b;
}

void check_qubits(int n_qubits) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) {
    throw ArgumentError("n_qubits must be in 2..5, got " + std::to_string(n_qubits));
  }
}

}  // namespace

const HamiltonianBasis& hamiltonian_basis(int n_qubits) {
  check_qubits(n_qubits);
  static std::array<std::once_flag, kMaxQubits + 1> flags;
  static std::array<HamiltonianBasis, kMaxQubits + 1> cache;
  std::call_once(flags[n_qubits], [n_qubits] { cache[n_qubits] = make_basis(n_qubits); });
  return cache[n_qubits];
}

HermitianOperator build_hamiltonian(double k, double eps, double zeta, int n_qubits) {
  return HermitianOperator(hamiltonian_basis(n_qubits).assemble({k, eps, zeta}));
}

StepPropagator make_step(const CMatrix& hermitian, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("time step must be > 0");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) {
    throw ContractViolation("Hermitian eigensolver did not converge");
  }
  const RVector& lambda = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  CVector phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    phases(i) = std::polar(1.0, -lambda(i) * dt);
  }
  CMatrix u = v * phases.asDiagonal() * v.adjoint();
  return {{lambda, v}, std::move(u), dt};
}

StepPropagator make_step(const HermitianOperator& h, double dt) {
  return make_step(h.matrix(), dt);
}

CMatrix step_unitary(const HermitianOperator& h, double dt) {
  return make_step(h, dt).unitary;
}

Propagation propagate(const DensityMatrix& rho0, const ParameterSchedule& schedule,
                      int n_qubits, const std::optional<NoiseContext>& noise,
                      bool record_trajectory) {
  const HamiltonianBasis& basis = hamiltonian_basis(n_qubits);
  if (rho0.dimension() != basis.tunneling.rows()) {
    throw ArgumentError("initial state dimension does not match n_qubits");
  }
  schedule.grid().validate();
  const int steps = schedule.steps();
  const double dt = schedule.grid().dt();

  Propagation out{rho0, {}, {}};
  if (record_trajectory) {
    out.states.reserve(static_cast<std::size_t>(steps) + 1);
    out.applied.reserve(static_cast<std::size_t>(steps));
  }
  const bool noisy = noise && noise->config.any_active();
  CMatrix rho = rho0.matrix();
  for (int k = 0; k < steps; ++k) {
    if (record_trajectory) out.states.push_back(rho);
    ParameterTriple p = schedule.at(k);
    std::optional<RngStream> rng;
    if (noisy) {
      rng.emplace(rng_stream_for(noise->config.seed, noise->run_id,
                                 static_cast<std::uint64_t>(k)));
      p = perturb_parameters(p, noise->config, *rng);
    }
    if (record_trajectory) out.applied.push_back(p);
    const StepPropagator step = make_step(basis.assemble(p), dt);
    rho = step.unitary * rho * step.unitary.adjoint();
    rho = (0.5 * (rho + rho.adjoint())).eval();
    if (noisy && noise->config.density_active()) {
      rho = perturb_density(DensityMatrix::adopt(std::move(rho)), noise->config, *rng)
                .matrix();
    }
  }
  if (record_trajectory) out.states.push_back(rho);
  out.final_state = DensityMatrix::adopt(std::move(rho));
  return out;
}

void write_schedule_csv(std::ostream& out, const ParameterSchedule& schedule) {
  out << "# grid.t_final = " << format_double(schedule.grid().t_final) << '\n';
  out << "# grid.n_steps = " << schedule.steps() << '\n';
  out << "step,t,K,epsilon,zeta\n";
  for (int k = 0; k < schedule.steps(); ++k) {
    out << k << ',' << format_double(schedule.grid().time_at(k)) << ','
        << format_double(schedule.k()[k]) << ',' << format_double(schedule.eps()[k]) << ','
        << format_double(schedule.zeta()[k]) << '\n';
  }
}

ParameterSchedule read_schedule_csv(std::istream& in) {
  std::string line;
  bool header_seen = false;
  std::optional<double> t_final;
  std::vector<double> t, k, eps, zeta;
  int line_no = 0;
  static const std::string kGridTag = "# grid.t_final = ";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kGridTag, 0) == 0) {
      t_final = parse_double(line.substr(kGridTag.size()));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "step,t,K,epsilon,zeta") {
        throw ArgumentError("schedule CSV: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw ArgumentError("schedule CSV line " + std::to_string(line_no) +
                          ": expected 5 fields");
    }
    if (parse_double(fields[0]) != static_cast<double>(k.size())) {
      throw ArgumentError("schedule CSV line " + std::to_string(line_no) +
                          ": steps out of order");
    }
    t.push_back(parse_double(fields[1]));
    k.push_back(parse_double(fields[2]));
    eps.push_back(parse_double(fields[3]));
    zeta.push_back(parse_double(fields[4]));
  }
  if (!header_seen || k.empty()) throw ArgumentError("schedule CSV has no rows");
  const int n = static_cast<int>(k.size());
  if (!t_final) {
    if (n < 2) throw ArgumentError("schedule CSV: one row and no grid.t_final comment");
    // t holds step start times, so the spacing is dt and t_final = n·dt.
    t_final = (t.back() - t.front()) / (n - 1) * n;
  }
  return ParameterSchedule(TimeGrid{*t_final, n}, std::move(k), std::move(eps),
                           std::move(zeta));
}

}  // namespace qnn
