#ifndef MDM_HARNESS_HPP
#define MDM_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdm/errors.hpp"
#include "mdm/estimator.hpp"

namespace mdm {

/// One Monte-Carlo experiment: the model, its true parameters and how the
/// estimator is configured.
struct BenchmarkSpec {
  std::string name;
  LtvModel model;
  NoiseStructure structure;
  Vec alpha_true;
  InitialCondition init;
  /// Input applied in simulation; absent means u_k = 0.
  std::optional<InputSignal> input;
  Index L = 1;
  InputMode mode = InputMode::known;
  /// Number of measurement samples; model.tau == samples - 1.
  Index samples = 0;
  Index n_mc = 500;
  std::uint64_t seed = 0;
  /// Parameter labels used in the emitted tables.
  std::vector<std::string> labels;
};

/// Canonical preset names.
std::vector<std::string> preset_names();

/// "clock-ensemble" (alias "clock"), "unobs-unknown-input" or "obs-ltv" with
/// the given number of samples. Throws ValidationError for unknown names.
BenchmarkSpec preset(const std::string& name, Index samples = 1000);

enum class McMethod { ordinary, weighted };

const char* to_string(McMethod method);

struct McResult {
  std::string name;
  McMethod method = McMethod::ordinary;
  Vec alpha_true;
  std::vector<std::string> labels;
  std::vector<std::uint64_t> seeds;
  /// n_mc x n_alpha, row i from seed + i.
  Mat estimates;
  /// Diagonal of the per-run estimate covariance (weighted only).
  std::optional<Mat> est_cov_diag;
  Vec sample_mean;
  /// Unbiased (N - 1) sample variances.
  Vec sample_cov_diag;
  std::optional<Vec> mean_est_cov_diag;
  double wall_time_per_run = 0.0;
  /// Runs whose weighting needed a PSD repair of Q or R.
  Index repaired_runs = 0;

  Index runs() const { return estimates.rows(); }
};

/// Fills sample_mean, sample_cov_diag and mean_est_cov_diag from the stored
/// per-run values.
void compute_statistics(McResult& result);

/// Runs spec.n_mc simulate-identify cycles with seeds spec.seed + i on up to
/// `workers` threads. Results do not depend on the worker count.
///
/// Throws McRunFailure naming the seed of the first failing run.
McResult run_mc(const BenchmarkSpec& spec, McMethod method, unsigned workers = 1,
                const Tolerance& tol = {});

class McRunFailure : public Error {
 public:
  McRunFailure(std::uint64_t seed, const std::string& what)
      : Error("Monte-Carlo run with seed " + std::to_string(seed) + " failed: " + what),
        seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace mdm

#endif  // MDM_HARNESS_HPP
