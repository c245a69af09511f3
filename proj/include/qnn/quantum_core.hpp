#pragma once

// Dense complex linear algebra for small multi-qubit registers.
//
// Basis convention: a basis index is read as a bit string with qubit A as the
// most significant bit, so for three qubits |abc> has index 4a + 2b + c.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

#include "qnn/errors.hpp"

namespace qnn {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr int kMaxQubits = 5;

/// Tolerance for Hermiticity and trace checks on typed matrices.
inline constexpr double kStructureTol = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
inline constexpr double kPsdTol = 1e-10;

/// Number of qubits for a register of dimension `dim`; throws if `dim` is not
/// a power of two in [2, 2^kMaxQubits].
int qubits_for_dimension(Eigen::Index dim);

double hermiticity_error(const CMatrix& m);

/// Normalized ket. Normalizes on construction.
class PureState {
 public:
  explicit PureState(CVector amplitudes);

  const CVector& amplitudes() const noexcept { return amps_; }
  Eigen::Index dimension() const noexcept { return amps_.size(); }
  int qubits() const noexcept { return n_qubits_; }

 private:
  CVector amps_;
  int n_qubits_;
};

class HermitianOperator {
 public:
  /// Throws ContractViolation when `m` is not Hermitian within kStructureTol.
  explicit HermitianOperator(CMatrix m);

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dimension() const noexcept { return m_.rows(); }

 private:
  CMatrix m_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates every invariant; throws ContractViolation otherwise.
  explicit DensityMatrix(CMatrix m);

  /// Wraps a matrix whose invariants the caller already guarantees (output of
  /// a unitary conjugation or of project_physical). Skips the eigen check.
  static DensityMatrix adopt(CMatrix m);

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dimension() const noexcept { return m_.rows(); }
  int qubits() const { return qubits_for_dimension(m_.rows()); }
  double purity() const;

 private:
  struct Unchecked {};
  DensityMatrix(CMatrix m, Unchecked) : m_(std::move(m)) {}
  CMatrix m_;
};

enum class Axis { x, y, z };

/// I ⊗ ... ⊗ σ_axis ⊗ ... ⊗ I with the Pauli matrix on `qubit` (0 = A).
HermitianOperator pauli_on(Axis which, int qubit, int n_qubits);

/// Kronecker product a ⊗ b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

DensityMatrix outer_product(const PureState& ket);

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors; unitary
};

EigenSystem hermitian_eigen(const HermitianOperator& op);

/// Tr(ρ O). Throws ArgumentError on dimension mismatch and ContractViolation
/// if the imaginary residue exceeds 1e-10.
double expectation(const DensityMatrix& rho, const HermitianOperator& op);

/// Hermitize, clip negative eigenvalues to zero, renormalize the trace.
DensityMatrix project_physical(const CMatrix& m);

}  // namespace qnn
