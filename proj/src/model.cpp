#include "mdm/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "mdm/errors.hpp"

namespace mdm {

StepSequence StepSequence::constant(Mat m) {
  StepSequence s;
  s.items_.push_back(std::move(m));
  s.constant_ = true;
  return s;
}

StepSequence StepSequence::per_step(std::vector<Mat> items) {
  StepSequence s;
  s.items_ = std::move(items);
  s.constant_ = false;
  return s;
}

const Mat& StepSequence::at(Index k) const {
  if (items_.empty()) throw DimensionError("empty matrix sequence");
  if (constant_) return items_.front();
  if (k < 0 || k >= stored()) {
    throw DimensionError("time index " + std::to_string(k) +
                         " outside matrix sequence of length " +
                         std::to_string(stored()));
  }
  return items_[static_cast<std::size_t>(k)];
}

bool LtvModel::is_time_invariant() const {
  return F.is_constant() && G.is_constant() && E.is_constant() &&
         H.is_constant() && D.is_constant();
}

NoiseCovariances assemble_qr(const NoiseStructure& structure, const Vec& alpha) {
  if (alpha.size() != structure.n_alpha() ||
      structure.br.size() != structure.bq.size()) {
    throw DimensionError("alpha has " + std::to_string(alpha.size()) +
                         " entries but the structure has " +
                         std::to_string(structure.n_alpha()) + " basis pairs");
  }
  NoiseCovariances out{Mat::Zero(structure.n_w(), structure.n_w()),
                       Mat::Zero(structure.n_v(), structure.n_v())};
  for (Index i = 0; i < alpha.size(); ++i) {
    out.Q += alpha(i) * structure.bq[static_cast<std::size_t>(i)];
    out.R += alpha(i) * structure.br[static_cast<std::size_t>(i)];
  }
  return out;
}

Mat window_noise_covariance(const Mat& Q, const Mat& R, Index L) {
  if (L < 1) throw std::invalid_argument("window length must be >= 1");
  const Index nq = (L - 1) * Q.rows();
  const Index nr = L * R.rows();
  Mat out = Mat::Zero(nq + nr, nq + nr);
  for (Index i = 0; i < L - 1; ++i) {
    out.block(i * Q.rows(), i * Q.rows(), Q.rows(), Q.rows()) = Q;
  }
  for (Index i = 0; i < L; ++i) {
    out.block(nq + i * R.rows(), nq + i * R.rows(), R.rows(), R.rows()) = R;
  }
  return out;
}

Mat defining_replication(const NoiseStructure& structure, Index L) {
  if (L < 1) throw std::invalid_argument("window length must be >= 1");
  const Index n_eps = (L - 1) * structure.n_w() + L * structure.n_v();
  Mat upsilon(n_eps * n_eps, structure.n_alpha());
  for (Index i = 0; i < structure.n_alpha(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    upsilon.col(i) = linalg::vec(
        window_noise_covariance(structure.bq[s], structure.br[s], L));
  }
  return upsilon;
}

namespace {

bool all_finite(const Mat& m) { return m.allFinite(); }

bool is_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_sequence(const StepSequence& seq, const char* name, Index tau,
                    ValidationReport& report) {
  if (seq.stored() == 0) {
    report.push_back({Finding::Kind::dimension,
                      std::string(name) + " is missing"});
    return;
  }
  if (!seq.is_constant() && seq.stored() != tau + 1) {
    report.push_back({Finding::Kind::dimension,
                      std::string(name) + " has " +
                          std::to_string(seq.stored()) +
                          " steps, expected tau + 1 = " +
                          std::to_string(tau + 1)});
  }
}

}  // namespace

ValidationReport validate(const LtvModel& model,
                          const NoiseStructure& structure) {
  ValidationReport report;
  auto dim = [&](const std::string& msg) {
    report.push_back({Finding::Kind::dimension, msg});
  };

  if (model.n_x < 1 || model.n_w < 0 || model.n_v < 0 || model.tau < 0) {
    dim("model dimensions must be positive (n_x >= 1, tau >= 0)");
    return report;
  }
  check_sequence(model.F, "F", model.tau, report);
  check_sequence(model.G, "G", model.tau, report);
  check_sequence(model.E, "E", model.tau, report);
  check_sequence(model.H, "H", model.tau, report);
  check_sequence(model.D, "D", model.tau, report);
  if (!report.empty()) return report;

  for (Index k = 0; k <= model.tau; ++k) {
    const std::string at = " at k=" + std::to_string(k);
    const Mat& F = model.F.at(k);
    const Mat& G = model.G.at(k);
    const Mat& E = model.E.at(k);
    const Mat& H = model.H.at(k);
    const Mat& D = model.D.at(k);
    if (F.rows() != model.n_x || F.cols() != model.n_x) {
      dim("F is " + shape(F) + at + ", expected n_x x n_x");
    }
    if (G.rows() != model.n_x) dim("G has " + shape(G) + at + ", expected n_x rows");
    if (E.rows() != model.n_x || E.cols() != model.n_w) {
      dim("E is " + shape(E) + at + ", expected n_x x n_w");
    }
    if (H.cols() != model.n_x) dim("H is " + shape(H) + at + ", expected n_x columns");
    if (D.rows() != H.rows() || D.cols() != model.n_v) {
      dim("D is " + shape(D) + at + ", expected n_z x n_v with n_z = rows(H)");
    }
    for (const Mat* m : {&F, &G, &E, &H, &D}) {
      if (!all_finite(*m)) {
        report.push_back({Finding::Kind::non_finite,
                          "non-finite model entry" + at});
        break;
      }
    }
    if (model.is_time_invariant()) break;
  }

  if (structure.n_alpha() < 1) {
    report.push_back({Finding::Kind::structure, "structure has no basis pairs"});
  }
  if (structure.bq.size() != structure.br.size()) {
    report.push_back({Finding::Kind::structure,
                      "structure has different numbers of Q and R basis matrices"});
    return report;
  }
  for (std::size_t i = 0; i < structure.bq.size(); ++i) {
    const std::string which = std::to_string(i + 1);
    const Mat& bq = structure.bq[i];
    const Mat& br = structure.br[i];
    if (bq.rows() != model.n_w || bq.cols() != model.n_w) {
      dim("BQ(" + which + ") is " + shape(bq) + ", expected n_w x n_w");
    } else if (!is_symmetric(bq)) {
      report.push_back({Finding::Kind::asymmetric,
                        "BQ(" + which + ") is not symmetric"});
    }
    if (br.rows() != model.n_v || br.cols() != model.n_v) {
      dim("BR(" + which + ") is " + shape(br) + ", expected n_v x n_v");
    } else if (!is_symmetric(br)) {
      report.push_back({Finding::Kind::asymmetric,
                        "BR(" + which + ") is not symmetric"});
    }
    if (!all_finite(bq) || !all_finite(br)) {
      report.push_back({Finding::Kind::non_finite,
                        "non-finite entry in basis pair " + which});
    }
  }
  return report;
}

void require_valid(const LtvModel& model, const NoiseStructure& structure) {
  const ValidationReport report = validate(model, structure);
  if (report.empty()) return;
  std::ostringstream os;
  os << "model validation failed:";
  for (const Finding& f : report) os << "\n  - " << f.message;
  throw ValidationError(os.str());
}

InitialCondition InitialCondition::standard(Index n_x) {
  return {Vec::Ones(n_x), Mat::Identity(n_x, n_x)};
}

InputSignal sinusoidal_input(Index tau, double samples) {
  InputSignal u;
  u.reserve(static_cast<std::size_t>(tau + 1));
  for (Index k = 0; k <= tau; ++k) {
    u.push_back(Vec::Constant(1, std::sin(static_cast<double>(k) / samples)));
  }
  return u;
}

GaussianSampler::GaussianSampler(const Mat& cov) {
  if (cov.rows() != cov.cols()) {
    throw DimensionError("covariance must be square, got " + shape(cov));
  }
  if (cov.size() == 0) {
    factor_ = Mat(0, 0);
    return;
  }
  if (!cov.allFinite() || !is_symmetric(cov)) {
    throw NonPsdCovariance("covariance is not a finite symmetric matrix");
  }
  Eigen::LDLT<Mat> ldlt(cov);
  Vec d = ldlt.vectorD();
  const double scale = std::max(d.cwiseAbs().maxCoeff(), 0.0);
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) < -1e-12 * scale) {
      throw NonPsdCovariance("covariance is not positive semidefinite");
    }
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  const Mat lower = ldlt.matrixL();
  factor_ = ldlt.transpositionsP().transpose() * (lower * d.asDiagonal());
}

MeasurementData MeasurementData::from_trajectory(const Trajectory& t,
                                                 bool with_input) {
  MeasurementData d;
  d.z = t.z;
  if (with_input && !t.u.empty()) d.u = t.u;
  return d;
}

Trajectory propagate(const LtvModel& model, const Vec& x0,
                     const std::optional<InputSignal>& input,
                     const std::vector<Vec>& w, const std::vector<Vec>& v) {
  const auto steps = static_cast<std::size_t>(model.tau + 1);
  if (v.size() != steps || w.size() + 1 < steps) {
    throw DimensionError("noise sequences do not cover k = 0..tau");
  }
  if (input && input->size() + 1 < steps) {
    throw DimensionError("input sequence does not cover k = 0..tau-1");
  }
  Trajectory t;
  t.x.reserve(steps);
  t.z.reserve(steps);
  t.w.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(steps - 1));
  t.v = v;
  if (input) t.u = *input;

  Vec x = x0;
  for (Index k = 0; k <= model.tau; ++k) {
    const auto s = static_cast<std::size_t>(k);
    t.x.push_back(x);
    t.z.push_back(model.H.at(k) * x + model.D.at(k) * v[s]);
    if (k == model.tau) break;
    Vec next = model.F.at(k) * x + model.E.at(k) * w[s];
    if (input) next += model.G.at(k) * (*input)[s];
    x = std::move(next);
  }
  return t;
}

Trajectory simulate(const LtvModel& model, const NoiseStructure& structure,
                    const Vec& alpha_true, const InitialCondition& init,
                    const std::optional<InputSignal>& input, std::uint64_t seed) {
  const NoiseCovariances qr = assemble_qr(structure, alpha_true);
  const GaussianSampler draw_w(qr.Q);
  const GaussianSampler draw_v(qr.R);
  const GaussianSampler draw_x0(init.cov);
  if (init.mean.size() != model.n_x || draw_x0.dim() != model.n_x) {
    throw DimensionError("initial condition does not match n_x");
  }

  std::mt19937_64 rng(seed);
  const Vec x0 = init.mean + draw_x0(rng);
  std::vector<Vec> w;
  std::vector<Vec> v;
  w.reserve(static_cast<std::size_t>(model.tau));
  v.reserve(static_cast<std::size_t>(model.tau + 1));
  for (Index k = 0; k <= model.tau; ++k) {
    v.push_back(draw_v(rng));
    if (k < model.tau) w.push_back(draw_w(rng));
  }
  return propagate(model, x0, input, w, v);
}

}  // namespace mdm
