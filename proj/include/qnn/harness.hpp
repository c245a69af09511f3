#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnn/config.hpp"
#include "qnn/csv.hpp"

namespace qnn {

inline constexpr const char* kVersion = "qnn 1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitIo = 4,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name of the environment variable holding the base for relative paths.
inline constexpr const char* kOutputDirEnv = "QNN_OUTPUT_DIR";

/// Relative paths land under $QNN_OUTPUT_DIR when it is set. Applied to
/// io.input as well, so recipes can read each other's outputs.
std::filesystem::path resolve_output_dir(const std::string& output);

/// `# ` lines: version, then every resolved key.
std::string comment_header(const ExperimentConfig& cfg);

/// Writes to a sibling temporary and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

ParameterSchedule load_schedule(const std::filesystem::path& path);

/// Rows `gamma,noise,seed,output,oracle` in (γ, noise, seed) order. Noise
/// level L uses NoiseConfig::total(L, seed); γ index i draws from
/// run_id_of(i, 0). The M oracle is the γ = 0 value, 1.
CsvTable test_curve(const ParameterSchedule& schedule, const std::string& family,
                    const std::vector<double>& gammas, const std::vector<double>& noise_levels,
                    const std::vector<std::uint64_t>& seeds, const std::vector<int>& subset,
                    PerturbationMode magnitude_mode = PerturbationMode::relative, int jobs = 1);

/// Validates, dispatches, writes artifacts under the output directory and
/// prints one summary line to `out`. Errors go to `err`; the return value is
/// an ExitCode.
int run(const ExperimentConfig& cfg, int jobs, std::ostream& out, std::ostream& err);

}  // namespace qnn
