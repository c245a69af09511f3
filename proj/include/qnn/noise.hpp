#pragma once

#include <cstdint>
#include <string>

#include "qnn/quantum_core.hpp"

namespace qnn {

/// How a draw δ acts on the value it perturbs.
enum class PerturbationMode {
  relative,  // v <- v (1 + δ); zero values stay zero
  additive,  // v <- v + δ
};

std::string to_string(PerturbationMode mode);
PerturbationMode perturbation_mode_from_string(const std::string& text);

struct NoiseConfig {
  double magnitude = 0.0;    // RMS of magnitude perturbations
  double phase = 0.0;        // RMS of phase perturbations (radians)
  double hamiltonian = 0.0;  // RMS of K/ε/ζ perturbations, see hamiltonian_mode
  std::uint64_t seed = 0;
  PerturbationMode magnitude_mode = PerturbationMode::relative;
  PerturbationMode hamiltonian_mode = PerturbationMode::relative;

  bool density_active() const { return magnitude > 0.0 || phase > 0.0; }
  bool hamiltonian_active() const { return hamiltonian > 0.0; }
  bool any_active() const { return density_active() || hamiltonian_active(); }

  /// Throws ArgumentError for negative or non-finite amplitudes.
  void validate() const;

  /// Magnitude and phase channels at `total / sqrt(2)` each, so that the
  /// combined per-element RMS equals `total`. Hamiltonian channel off.
  static NoiseConfig total(double total, std::uint64_t seed);
};

/// Counter-based stream: the i-th draw is a pure function of
/// (seed, run, step, i), independent of evaluation order or threading.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Zero-mean uniform draw on [-√3·rms, +√3·rms], whose RMS is `rms`.
  double symmetric(double rms);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RngStream rng_stream_for(std::uint64_t seed, std::uint64_t run_id, std::uint64_t step);

/// Packs a (major, minor) pair of indices into a run id; the sweep and
/// training code uses this to give every (epoch, pair) its own stream.
std::uint64_t run_id_of(std::uint64_t major, std::uint64_t minor);

struct ParameterTriple {
  double k = 0.0;
  double eps = 0.0;
  double zeta = 0.0;
};

/// Magnitude and phase perturbation of every upper-triangle element, then
/// projection back onto the physical set. Exact identity when both density
/// amplitudes are zero.
DensityMatrix perturb_density(const DensityMatrix& rho, const NoiseConfig& cfg,
                              RngStream& rng);

ParameterTriple perturb_parameters(const ParameterTriple& p, const NoiseConfig& cfg,
                                   RngStream& rng);

}  // namespace qnn
