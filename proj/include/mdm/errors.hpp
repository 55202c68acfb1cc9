#ifndef MDM_ERRORS_HPP
#define MDM_ERRORS_HPP

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape inconsistency in the inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Model or structure failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NonPsdCovariance : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The matrix to annihilate has full row rank: the window is too short.
class NoAnnihilator : public Error {
 public:
  explicit NoAnnihilator(const std::string& what) : Error(what) {}
  NoAnnihilator(const std::string& what, Eigen::Index k,
                std::optional<Eigen::Index> minimal_window)
      : Error(what), k_(k), minimal_window_(minimal_window) {}

  /// Time index of the offending window, -1 when not known.
  Eigen::Index k() const { return k_; }
  /// Smallest window length that works for every k, when one was found.
  std::optional<Eigen::Index> minimal_window() const { return minimal_window_; }

 private:
  Eigen::Index k_ = -1;
  std::optional<Eigen::Index> minimal_window_;
};

/// The stacked design matrix has fewer identifiable directions than
/// parameters.
class RankDeficientDesign : public Error {
 public:
  RankDeficientDesign(Eigen::Index rank, Eigen::Index n_alpha)
      : Error("design matrix is rank deficient: rank " + std::to_string(rank) +
              " < " + std::to_string(n_alpha) + " parameters"),
        rank_(rank),
        n_alpha_(n_alpha) {}

  Eigen::Index rank() const { return rank_; }
  Eigen::Index n_alpha() const { return n_alpha_; }

 private:
  Eigen::Index rank_;
  Eigen::Index n_alpha_;
};

/// Estimated weighting matrix has clearly negative eigenvalues.
class IndefiniteWeight : public Error {
 public:
  using Error::Error;
};

}  // namespace mdm

#endif  // MDM_ERRORS_HPP
