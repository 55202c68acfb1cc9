#ifndef MDM_ETA_COVARIANCE_HPP
#define MDM_ETA_COVARIANCE_HPP

#include <string>
#include <vector>

#include "mdm/linalg.hpp"
#include "mdm/model.hpp"

namespace mdm {

enum class PsdRepair { reject, clip };

/// Second and fourth moments of the window noise E_k = [w_k..w_{k+L-2};
/// v_k..v_{k+L-1}] and of eta_k = kron(E_k, E_k) - vec(cov E_k) under
/// Gaussian noise.
struct EtaCovariances {
  Index L = 1;
  Index n_w = 0;
  Index n_v = 0;
  Mat Q;
  Mat R;
  /// cross[j] = E[E_k E_{k+j}^T] for j = 0..L-1.
  std::vector<Mat> cross;
  std::vector<std::string> warnings;

  Index n_eps() const { return (L - 1) * n_w + L * n_v; }

  /// E[E_k E_{k+j}^T]; zero for j >= L.
  Mat cross_covariance(Index j) const;

  /// Covariance of [E_k; E_{k+j}].
  Mat joint_covariance(Index j) const;

  /// E[kron(E_k, E_k) kron(E_{k+j}, E_{k+j})^T] computed entrywise from the
  /// joint covariance by Isserlis' theorem, minus vec(cov E)^{2}, laid out as
  /// the n_eps^4 vector E[kron(eta_k, eta_{k+j})].
  Vec vector_form(Index j) const;

  /// E[eta_k eta_{k+j}^T] (n_eps^2 x n_eps^2); zero for j >= L.
  Mat band(Index j) const;
};

/// Throws NonPsdCovariance when Q(alpha) or R(alpha) is indefinite and
/// repair == reject. With repair == clip, negative eigenvalues of Q and R are
/// set to zero and a warning is recorded.
EtaCovariances gaussian_eta_covariances(const NoiseStructure& structure,
                                        const Vec& alpha, Index L,
                                        PsdRepair repair = PsdRepair::reject);

}  // namespace mdm

#endif  // MDM_ETA_COVARIANCE_HPP
