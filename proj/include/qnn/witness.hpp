#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qnn/quantum_core.hpp"

namespace qnn {

/// ⊗_{α∈subset} σ_zα, identity on every other qubit.
class WitnessObservable {
 public:
  WitnessObservable(std::vector<int> subset, int n_qubits);

  const std::vector<int>& subset() const noexcept { return subset_; }
  const HermitianOperator& op() const noexcept { return op_; }

 private:
  std::vector<int> subset_;
  HermitianOperator op_;
};

struct TrainingPair {
  DensityMatrix input;
  double target;
  std::vector<int> subset;
  std::string label;
};

/// Checks target range and subset validity against `n_qubits`.
void validate_pair(const TrainingPair& pair, int n_qubits);

/// |<ψ|ψ_sf>|² with ψ_sf = σ_y⊗σ_y |ψ*>.
double concurrence_squared(const PureState& state);

/// 4[a²d² + b²c² − 2abcd cos(θ₃ − θ₁ − θ₂)] from the polar form of the four
/// amplitudes, with every phase measured relative to the |00> amplitude.
double concurrence_squared_polar(const PureState& state);

double entanglement_of_formation(double c_squared);

/// (Tr[ρ O])², which lies in [0, 1] and sits on the same scale as C².
double output_value(const DensityMatrix& rho_final, const WitnessObservable& obs);

namespace states {

/// The four two-qubit training kets, unnormalized amplitudes in |00>,|01>,|10>,|11> order.
PureState bell();
PureState flat();
PureState c_state();
PureState p_state();

}  // namespace states

/// Embeds a two-qubit ket on qubits (first, second); every other qubit is |0>.
PureState embed_pair(const PureState& two_qubit, int first, int second, int n_qubits);

/// (|0…0> + |1…1>)/√2 on `subset`, |0> elsewhere.
PureState ghz_state(int n_qubits, const std::vector<int>& subset);

/// All qubit pairs with the four pairwise states, then one GHZ state per
/// k-subset for k = 3..n. Sizes: 4, 13, 29, 56 for n = 2..5.
std::vector<TrainingPair> training_set(int n_qubits);

/// (|000> + γ|001> + |011>)/√(2+γ²).
DensityMatrix test_state_P(double gamma);
/// The BC Bell pair mixed with γ|001><001|, normalized by 1/(1+γ).
DensityMatrix test_state_M(double gamma);

/// Closed-form BC concurrence² of test_state_P(γ): 4/(2+γ²)².
double p_state_oracle(double gamma);

/// Qubit letters for a subset, e.g. {1, 2} -> "BC".
std::string subset_name(const std::vector<int>& subset);

nlohmann::json to_json(const DensityMatrix& rho);
nlohmann::json to_json(const std::vector<TrainingPair>& pairs);

}  // namespace qnn
