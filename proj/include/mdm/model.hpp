#ifndef MDM_MODEL_HPP
#define MDM_MODEL_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mdm/linalg.hpp"

namespace mdm {

/// A per-step matrix sequence that is either one matrix broadcast over all
/// time steps or an explicit list indexed by k.
class StepSequence {
 public:
  StepSequence() = default;

  static StepSequence constant(Mat m);
  static StepSequence per_step(std::vector<Mat> items);

  const Mat& at(Index k) const;
  bool is_constant() const { return constant_; }
  /// Number of stored matrices (1 when constant).
  Index stored() const { return static_cast<Index>(items_.size()); }
  const std::vector<Mat>& items() const { return items_; }

 private:
  std::vector<Mat> items_;
  bool constant_ = true;
};

/// x_{k+1} = F_k x_k + G_k u_k + E_k w_k,  z_k = H_k x_k + D_k v_k,
/// for k = 0..tau.
struct LtvModel {
  Index n_x = 0;
  Index n_w = 0;
  Index n_v = 0;
  /// Last time index; sequences cover k = 0..tau.
  Index tau = 0;
  StepSequence F;
  StepSequence G;
  StepSequence E;
  StepSequence H;
  StepSequence D;

  Index n_u(Index k) const { return G.at(k).cols(); }
  Index n_z(Index k) const { return H.at(k).rows(); }
  bool is_time_invariant() const;
};

/// Q = sum_i alpha_i BQ[i], R = sum_i alpha_i BR[i].
struct NoiseStructure {
  std::vector<Mat> bq;
  std::vector<Mat> br;

  Index n_alpha() const { return static_cast<Index>(bq.size()); }
  Index n_w() const { return bq.empty() ? 0 : bq.front().rows(); }
  Index n_v() const { return br.empty() ? 0 : br.front().rows(); }
};

struct NoiseCovariances {
  Mat Q;
  Mat R;
};

NoiseCovariances assemble_qr(const NoiseStructure& structure, const Vec& alpha);

/// Covariance of the stacked window noise [w_k..w_{k+L-2}; v_k..v_{k+L-1}]:
/// blkdiag(I_{L-1} ⊗ Q, I_L ⊗ R).
Mat window_noise_covariance(const Mat& Q, const Mat& R, Index L);

/// Matrix mapping alpha to vec(blkdiag(I_{L-1} ⊗ Q(alpha), I_L ⊗ R(alpha))).
Mat defining_replication(const NoiseStructure& structure, Index L);

struct Finding {
  enum class Kind { dimension, non_finite, asymmetric, structure };
  Kind kind;
  std::string message;
};

using ValidationReport = std::vector<Finding>;

/// Empty report means the model and structure are consistent.
ValidationReport validate(const LtvModel& model, const NoiseStructure& structure);

/// Throws ValidationError listing every finding when the report is not empty.
void require_valid(const LtvModel& model, const NoiseStructure& structure);

struct InitialCondition {
  Vec mean;
  Mat cov;

  /// Mean of ones and identity covariance.
  static InitialCondition standard(Index n_x);
};

struct Trajectory {
  std::vector<Vec> x;  // x_0..x_tau
  std::vector<Vec> z;  // z_0..z_tau
  std::vector<Vec> u;  // u_0..u_tau, empty when no input was applied
  std::vector<Vec> w;  // w_0..w_{tau-1}
  std::vector<Vec> v;  // v_0..v_tau
};

/// Per-step input values u_0..u_tau.
using InputSignal = std::vector<Vec>;

/// What the estimator sees: measurements z_0..z_tau and, when known, the
/// inputs.
struct MeasurementData {
  std::vector<Vec> z;
  std::optional<InputSignal> u;

  Index tau() const { return static_cast<Index>(z.size()) - 1; }
  static MeasurementData from_trajectory(const Trajectory& t, bool with_input);
};

/// u_k = sin(k / samples) with one input channel, k = 0..tau.
InputSignal sinusoidal_input(Index tau, double samples);

/// Zero-mean Gaussian sampler built from an LDLT factorisation, which accepts
/// semidefinite covariances and rejects indefinite ones.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Mat& cov);
  template <class Rng>
  Vec operator()(Rng& rng) const;
  Index dim() const { return factor_.rows(); }

 private:
  Mat factor_;
};

/// Replays the recursion with given noise sequences.
Trajectory propagate(const LtvModel& model, const Vec& x0,
                     const std::optional<InputSignal>& input,
                     const std::vector<Vec>& w, const std::vector<Vec>& v);

/// Draws x_0, w_k and v_k from the given seed and propagates the model.
Trajectory simulate(const LtvModel& model, const NoiseStructure& structure,
                    const Vec& alpha_true, const InitialCondition& init,
                    const std::optional<InputSignal>& input, std::uint64_t seed);

template <class Rng>
Vec GaussianSampler::operator()(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec xi(factor_.cols());
  for (Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
  return factor_ * xi;
}

}  // namespace mdm

#endif  // MDM_MODEL_HPP
