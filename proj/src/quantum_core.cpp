#include "qnn/quantum_core.hpp"

#include <cmath>
#include <string>

namespace qnn {

int qubits_for_dimension(Eigen::Index dim) {
  for (int n = 1; n <= kMaxQubits; ++n) {
    if (dim == (Eigen::Index{1} << n)) return n;
  }
  throw ArgumentError("dimension " + std::to_string(dim) +
                      " is not 2^n for 1 <= n <= 5");
}

double hermiticity_error(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

PureState::PureState(CVector amplitudes) : amps_(std::move(amplitudes)) {
  n_qubits_ = qubits_for_dimension(amps_.size());
  const double norm = amps_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ArgumentError("pure state has zero or non-finite norm");
  }
  amps_ /= norm;
}

HermitianOperator::HermitianOperator(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ArgumentError("operator is not square");
  const double err = hermiticity_error(m_);
  if (!(err <= kStructureTol)) {
    throw ContractViolation("operator is not Hermitian (max asymmetry " +
                            std::to_string(err) + ")");
  }
}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ArgumentError("density matrix is not square");
  qubits_for_dimension(m_.rows());
  if (!(hermiticity_error(m_) <= kStructureTol)) {
    throw ContractViolation("density matrix is not Hermitian");
  }
  const Complex tr = m_.trace();
  if (!(std::abs(tr - 1.0) <= kStructureTol)) {
    throw ContractViolation("density matrix trace " + std::to_string(tr.real()) +
                            " differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -kPsdTol) {
    throw ContractViolation("density matrix has negative eigenvalue " +
                            std::to_string(es.eigenvalues()(0)));
  }
}

DensityMatrix DensityMatrix::adopt(CMatrix m) {
  return DensityMatrix(std::move(m), Unchecked{});
}

double DensityMatrix::purity() const {
  // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
  return m_.squaredNorm();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

CMatrix pauli_matrix(Axis which) {
  CMatrix s(2, 2);
  switch (which) {
    case Axis::x:
      s << 0, 1, 1, 0;
      break;
    case Axis::y:
      s << 0, Complex(0, -1), Complex(0, 1), 0;
      break;
    case Axis::z:
      s << 1, 0, 0, -1;
      break;
  }
  return s;
}

}  // namespace

HermitianOperator pauli_on(Axis which, int qubit, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ArgumentError("n_qubits must be in 1..5, got " + std::to_string(n_qubits));
  }
  if (qubit < 0 || qubit >= n_qubits) {
    throw ArgumentError("qubit index " + std::to_string(qubit) + " out of range for " +
                        std::to_string(n_qubits) + " qubits");
  }
  CMatrix out = CMatrix::Identity(1, 1);
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix sigma = pauli_matrix(which);
  for (int q = 0; q < n_qubits; ++q) out = kron(out, q == qubit ? sigma : id);
  return HermitianOperator(std::move(out));
}

DensityMatrix outer_product(const PureState& ket) {
  const CVector& v = ket.amplitudes();
  CMatrix rho = v * v.adjoint();
  // exact Hermitian symmetry; the trace is |v|² = 1 up to rounding
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix::adopt(std::move(rho));
}

EigenSystem hermitian_eigen(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
  if (es.info() != Eigen::Success) {
    throw ContractViolation("Hermitian eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double expectation(const DensityMatrix& rho, const HermitianOperator& op) {
  if (rho.dimension() != op.dimension()) {
    throw ArgumentError("expectation: dimension mismatch (" +
                        std::to_string(rho.dimension()) + " vs " +
                        std::to_string(op.dimension()) + ")");
  }
  // Tr(ρO) = Σ_ij ρ_ij O_ji
  const Complex value = rho.matrix().cwiseProduct(op.matrix().transpose()).sum();
  if (std::abs(value.imag()) > 1e-10) {
    throw ContractViolation("expectation has imaginary residue " +
                            std::to_string(value.imag()));
  }
  return value.real();
}

DensityMatrix project_physical(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("project_physical: matrix is not square");
  qubits_for_dimension(m.rows());
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  RVector w = es.eigenvalues().cwiseMax(0.0);
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateInputError("project_physical: no positive spectral weight left");
  }
  // Already physical: return the Hermitian part untouched so that repeated
  // projection is the identity up to rounding of the trace.
  if (es.eigenvalues()(0) >= 0.0 && std::abs(total - 1.0) <= kStructureTol) {
    return DensityMatrix::adopt(herm);
  }
  w /= total;
  const CMatrix& v = es.eigenvectors();
  CMatrix out = v * w.asDiagonal() * v.adjoint();
  out = (0.5 * (out + out.adjoint())).eval();
  return DensityMatrix::adopt(std::move(out));
}

}  // namespace qnn
