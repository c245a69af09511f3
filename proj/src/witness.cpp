#include "qnn/witness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qnn {

namespace {

void check_subset(const std::vector<int>& subset, int n_qubits, std::size_t min_size) {
  if (subset.size() < min_size || subset.size() > static_cast<std::size_t>(n_qubits)) {
    throw ArgumentError("subset size " + std::to_string(subset.size()) +
                        " invalid for " + std::to_string(n_qubits) + " qubits");
  }
  std::set<int> seen;
  for (int q : subset) {
    if (q < 0 || q >= n_qubits) throw ArgumentError("subset qubit index out of range");
    if (!seen.insert(q).second) throw ArgumentError("subset has a repeated qubit");
  }
}

CMatrix subset_z_product(const std::vector<int>& subset, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  CMatrix op = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    int parity = 0;
    for (int q : subset) parity ^= static_cast<int>((i >> (n_qubits - 1 - q)) & 1);
    op(i, i) = parity ? -1.0 : 1.0;
  }
  return op;
}

// Basis index with qubit `q` set to `bit`, starting from `index`.
Eigen::Index with_bit(Eigen::Index index, int q, int n_qubits, int bit) {
  const Eigen::Index mask = Eigen::Index{1} << (n_qubits - 1 - q);
  return bit ? (index | mask) : (index & ~mask);
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ArgumentError("gamma must be in [0, 1], got " + std::to_string(gamma));
  }
}

std::vector<int> checked(std::vector<int> subset, int n_qubits) {
  check_subset(subset, n_qubits, 1);
  return subset;
}

}  // namespace

WitnessObservable::WitnessObservable(std::vector<int> subset, int n_qubits)
    : subset_(checked(std::move(subset), n_qubits)),
      op_(subset_z_product(subset_, n_qubits)) {}

void validate_pair(const TrainingPair& pair, int n_qubits) {
  check_subset(pair.subset, n_qubits, 2);
  if (!(pair.target >= 0.0 && pair.target <= 1.0)) {
    throw ArgumentError("training target must lie in [0, 1]");
  }
  if (pair.input.qubits() != n_qubits) {
    throw ArgumentError("training input '" + pair.label + "' has " +
                        std::to_string(pair.input.qubits()) + " qubits, expected " +
                        std::to_string(n_qubits));
  }
}

double concurrence_squared(const PureState& state) {
  if (state.dimension() != 4) throw ArgumentError("concurrence needs a two-qubit state");
  const CVector& psi = state.amplitudes();
  const CMatrix yy = pauli_on(Axis::y, 0, 2).matrix() * pauli_on(Axis::y, 1, 2).matrix();
  const CVector flipped = yy * psi.conjugate();
  return std::norm(psi.dot(flipped));
}

double concurrence_squared_polar(const PureState& state) {
  if (state.dimension() != 4) throw ArgumentError("concurrence needs a two-qubit state");
  const CVector& psi = state.amplitudes();
  const double a = std::abs(psi(0)), b = std::abs(psi(1)), c = std::abs(psi(2)),
               d = std::abs(psi(3));
  const double phi0 = std::arg(psi(0));
  const double t1 = std::arg(psi(1)) - phi0;
  const double t2 = std::arg(psi(2)) - phi0;
  const double t3 = std::arg(psi(3)) - phi0;
  return 4.0 * (a * a * d * d + b * b * c * c - 2.0 * a * b * c * d * std::cos(t3 - (t1 + t2)));
}

double entanglement_of_formation(double c_squared) {
  constexpr double tol = 1e-12;
  if (!(c_squared >= -tol && c_squared <= 1.0 + tol)) {
    throw ArgumentError("concurrence² must lie in [0, 1], got " + std::to_string(c_squared));
  }
  const double c2 = std::clamp(c_squared, 0.0, 1.0);
  const double root = std::sqrt(1.0 - c2);
  auto h = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
  return h(0.5 * (1.0 + root)) + h(0.5 * (1.0 - root));
}

double output_value(const DensityMatrix& rho_final, const WitnessObservable& obs) {
  const double e = expectation(rho_final, obs.op());
  return e * e;
}

namespace states {

PureState bell() { return PureState(CVector{{1.0, 0.0, 0.0, 1.0}}); }
PureState flat() { return PureState(CVector{{1.0, 1.0, 1.0, 1.0}}); }
PureState c_state() { return PureState(CVector{{0.0, 0.0, 0.5, 1.0}}); }
PureState p_state() { return PureState(CVector{{1.0, 0.0, 1.0, 1.0}}); }

}  // namespace states

PureState embed_pair(const PureState& two_qubit, int first, int second, int n_qubits) {
  if (two_qubit.dimension() != 4) throw ArgumentError("embed_pair needs a two-qubit state");
  check_subset({first, second}, n_qubits, 2);
  CVector out = CVector::Zero(Eigen::Index{1} << n_qubits);
  for (int idx = 0; idx < 4; ++idx) {
    Eigen::Index target = with_bit(0, first, n_qubits, idx >> 1);
    target = with_bit(target, second, n_qubits, idx & 1);
    out(target) = two_qubit.amplitudes()(idx);
  }
  return PureState(std::move(out));
}

PureState ghz_state(int n_qubits, const std::vector<int>& subset) {
  if (n_qubits < 3 || n_qubits > kMaxQubits) {
    throw ArgumentError("ghz_state: n_qubits must be in 3..5");
  }
  check_subset(subset, n_qubits, 3);
  CVector out = CVector::Zero(Eigen::Index{1} << n_qubits);
  Eigen::Index ones = 0;
  for (int q : subset) ones = with_bit(ones, q, n_qubits, 1);
  out(0) = 1.0;
  out(ones) = 1.0;
  return PureState(std::move(out));
}

std::string subset_name(const std::vector<int>& subset) {
  std::string s;
  for (int q : subset) s += static_cast<char>('A' + q);
  return s;
}

std::vector<TrainingPair> training_set(int n_qubits) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) {
    throw ArgumentError("training_set: n_qubits must be in 2..5");
  }
  struct Base {
    const char* name;
    PureState ket;
    double target;
  };
  const std::vector<Base> base = {{"Bell", states::bell(), 1.0},
                                  {"Flat", states::flat(), 0.0},
                                  {"C", states::c_state(), 0.0},
                                  {"P", states::p_state(), 4.0 / 9.0}};
  std::vector<TrainingPair> out;
  for (int a = 0; a < n_qubits; ++a) {
    for (int b = a + 1; b < n_qubits; ++b) {
      const std::vector<int> subset{a, b};
      for (const auto& s : base) {
        out.push_back({outer_product(embed_pair(s.ket, a, b, n_qubits)), s.target, subset,
                       std::string(s.name) + "[" + subset_name(subset) + "]"});
      }
    }
  }
  // k-subsets in lexicographic order via a selection mask
  for (int k = 3; k <= n_qubits; ++k) {
    std::vector<bool> pick(n_qubits, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
      std::vector<int> subset;
      for (int q = 0; q < n_qubits; ++q) {
        if (pick[q]) subset.push_back(q);
      }
      out.push_back({outer_product(ghz_state(n_qubits, subset)), 1.0, subset,
                     "GHZ[" + subset_name(subset) + "]"});
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

DensityMatrix test_state_P(double gamma) {
  check_gamma(gamma);
  CVector v = CVector::Zero(8);
  v(0) = 1.0;
  v(1) = gamma;
  v(3) = 1.0;
  return outer_product(PureState(std::move(v)));
}

DensityMatrix test_state_M(double gamma) {
  check_gamma(gamma);
  CMatrix m = CMatrix::Zero(8, 8);
  m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
  m(1, 1) = gamma;
  return DensityMatrix(m / (1.0 + gamma));
}

double p_state_oracle(double gamma) {
  const double s = 2.0 + gamma * gamma;
  return 4.0 / (s * s);
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  const CMatrix& m = rho.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<TrainingPair>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pairs) {
    out.push_back({{"label", p.label},
                   {"target", p.target},
                   {"subset", p.subset},
                   {"input", to_json(p.input)}});
  }
  return out;
}

}  // namespace qnn
