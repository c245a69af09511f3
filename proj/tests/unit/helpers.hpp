#pragma once

#include <cstdint>
#include <random>

#include "qnn/quantum_core.hpp"

namespace qnn::testing {

inline CVector random_ket(std::mt19937_64& gen, Eigen::Index dim) {
  std::normal_distribution<double> n;
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(n(gen), n(gen));
  return v.normalized();
}

inline DensityMatrix random_density(std::mt19937_64& gen, Eigen::Index dim) {
  CMatrix g(dim, dim);
  std::normal_distribution<double> n;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(n(gen), n(gen));
  CMatrix m = g * g.adjoint();
  return DensityMatrix(m / m.trace().real());
}

inline CMatrix random_hermitian(std::mt19937_64& gen, Eigen::Index dim) {
  CMatrix g(dim, dim);
  std::normal_distribution<double> n;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(n(gen), n(gen));
  return 0.5 * (g + g.adjoint());
}

}  // namespace qnn::testing
