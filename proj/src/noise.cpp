#include "qnn/noise.hpp"

#include <cmath>

namespace qnn {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string to_string(PerturbationMode mode) {
  return mode == PerturbationMode::relative ? "relative" : "additive";
}

PerturbationMode perturbation_mode_from_string(const std::string& text) {
  if (text == "relative") return PerturbationMode::relative;
  if (text == "additive") return PerturbationMode::additive;
  throw ArgumentError("unknown perturbation mode '" + text + "' (relative or additive)");
}

void NoiseConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ArgumentError(std::string("noise.") + name + " must be finite and >= 0");
    }
  };
  check(magnitude, "magnitude");
  check(phase, "phase");
  check(hamiltonian, "hamiltonian");
}

NoiseConfig NoiseConfig::total(double total, std::uint64_t seed) {
  NoiseConfig cfg;
  cfg.magnitude = total / std::sqrt(2.0);
  cfg.phase = total / std::sqrt(2.0);
  cfg.seed = seed;
  return cfg;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::symmetric(double rms) {
  const double u = 2.0 * uniform() - 1.0;
  return u * std::sqrt(3.0) * rms;
}

RngStream rng_stream_for(std::uint64_t seed, std::uint64_t run_id, std::uint64_t step) {
  // Three rounds of mixing so that neighbouring triples land on unrelated keys.
  std::uint64_t key = mix64(seed ^ 0x243F6A8885A308D3ULL);
  key = mix64(key ^ (run_id + 0x13198A2E03707344ULL));
  key = mix64(key ^ (step + 0xA4093822299F31D0ULL));
  return RngStream(key);
}

std::uint64_t run_id_of(std::uint64_t major, std::uint64_t minor) {
  return (major << 24) ^ minor;
}

DensityMatrix perturb_density(const DensityMatrix& rho, const NoiseConfig& cfg,
                              RngStream& rng) {
  if (!cfg.density_active()) return rho;
  const CMatrix& in = rho.matrix();
  const Eigen::Index d = in.rows();
  CMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const Complex z = in(i, j);
      double m = std::abs(z);
      double phi = std::arg(z);
      const double dm = rng.symmetric(cfg.magnitude);
      if (cfg.magnitude_mode == PerturbationMode::additive) {
        m = std::max(0.0, m + dm);
      } else {
        m *= std::max(0.0, 1.0 + dm);
      }
      if (i != j) {
        phi += rng.symmetric(cfg.phase);
        out(i, j) = std::polar(m, phi);
        out(j, i) = std::conj(out(i, j));
      } else {
        // diagonal stays real; a tiny negative value keeps its sign
        out(i, i) = z.real() < 0.0 ? -m : m;
      }
    }
  }
  return project_physical(out);
}

ParameterTriple perturb_parameters(const ParameterTriple& p, const NoiseConfig& cfg,
                                   RngStream& rng) {
  if (!cfg.hamiltonian_active()) return p;
  auto kick = [&](double v) {
    const double d = rng.symmetric(cfg.hamiltonian);
    return cfg.hamiltonian_mode == PerturbationMode::relative ? v * (1.0 + d) : v + d;
  };
  const double k = kick(p.k);
  const double eps = kick(p.eps);
  return {k, eps, kick(p.zeta)};
}

}  // namespace qnn
