#include <cmath>
#include <numbers>

#include "mdm/errors.hpp"
#include "mdm/harness.hpp"

namespace mdm {

namespace {

Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Index>(rows.size());
  const auto c = static_cast<Index>(rows.begin()->size());
  Mat m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

Mat scalar(double x) { return Mat::Constant(1, 1, x); }

BenchmarkSpec clock_ensemble(Index samples) {
  constexpr double T = 10.0;
  BenchmarkSpec s;
  s.name = "clock-ensemble";
  s.samples = samples;
  s.L = 10;
  s.mode = InputMode::known;
  s.n_mc = 200;

  LtvModel& m = s.model;
  m.n_x = 6;
  m.n_w = 6;
  m.n_v = 2;
  m.tau = samples - 1;
  const Mat f2 = mat({{1, T}, {0, 1}});
  m.F = StepSequence::constant(linalg::kron(Mat::Identity(3, 3), f2));
  m.G = StepSequence::constant(Mat::Zero(6, 1));
  m.E = StepSequence::constant(Mat::Identity(6, 6));
  m.H = StepSequence::constant(mat({{1, 0, -1, 0, 0, 0}, {1, 0, 0, 0, -1, 0}}));
  m.D = StepSequence::constant(Mat::Identity(2, 2));

  const Mat q1 = mat({{T * T * T / 3, T * T / 2}, {T * T / 2, T}});
  const Mat q2 = mat({{T, 0}, {0, 0}});
  for (Index c = 0; c < 3; ++c) {
    Mat e = Mat::Zero(3, 3);
    e(c, c) = 1.0;
    s.structure.bq.push_back(linalg::kron(e, q1));
    s.structure.br.push_back(Mat::Zero(2, 2));
    s.structure.bq.push_back(linalg::kron(e, q2));
    s.structure.br.push_back(Mat::Zero(2, 2));
  }
  s.structure.bq.push_back(Mat::Zero(6, 6));
  s.structure.br.push_back(mat({{1, 0}, {0, 0}}));
  s.structure.bq.push_back(Mat::Zero(6, 6));
  s.structure.br.push_back(mat({{0, 0}, {0, 1}}));

  s.alpha_true.resize(8);
  s.alpha_true << 6, 0.05, 20, 0.3, 7, 0.04, 80, 100;
  s.alpha_true *= 1e-19;
  s.labels = {"q1_1", "q2_1", "q1_2", "q2_2", "q1_3", "q2_3", "r_1", "r_2"};
  s.init = InitialCondition::standard(m.n_x);
  return s;
}

BenchmarkSpec unobs_unknown_input(Index samples) {
  BenchmarkSpec s;
  s.name = "unobs-unknown-input";
  s.samples = samples;
  s.L = 2;
  s.mode = InputMode::unknown;
  s.n_mc = 500;

  LtvModel& m = s.model;
  m.n_x = 3;
  m.n_w = 3;
  m.n_v = 3;
  m.tau = samples - 1;
  const auto tau = static_cast<double>(samples);
  m.F = StepSequence::constant(mat({{1, 2, 1}, {0, -1.01, 2}, {0, 0, 1}}));
  std::vector<Mat> g;
  for (Index k = 0; k <= m.tau; ++k) {
    g.push_back(mat({{0}, {std::sin(10.0 * static_cast<double>(k) / tau)}, {1}}));
  }
  m.G = StepSequence::per_step(std::move(g));
  m.E = StepSequence::constant(mat({{-3, 2, 0}, {2, 2, 2}, {5, 0, 1}}));
  m.H = StepSequence::constant(mat({{0, 1, 0}, {0, 0, 2}, {0, 1, 1}}));
  m.D = StepSequence::constant(mat({{1, 1, 0}, {0, 2, 1}, {1, 0, -1}}));

  const Mat z = Mat::Zero(3, 3);
  s.structure.bq = {Mat::Identity(3, 3), mat({{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}),
                    mat({{0, -1, 0}, {-1, 0, -1}, {0, -1, 0}}), z, z, z};
  s.structure.br = {z, z, z, mat({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}),
                    mat({{0, 0, 0}, {0, 2, 0}, {0, 0, 0}}),
                    mat({{0, 0, 1}, {0, 0, 1}, {1, 1, 0}})};

  s.alpha_true.resize(6);
  s.alpha_true << 1, 1, -1, 2, 2, 1;
  s.labels = {"alpha_1", "alpha_2", "alpha_3", "alpha_4", "alpha_5", "alpha_6"};
  s.init = InitialCondition::standard(m.n_x);
  s.input = sinusoidal_input(m.tau, tau);
  return s;
}

BenchmarkSpec obs_ltv(Index samples) {
  BenchmarkSpec s;
  s.name = "obs-ltv";
  s.samples = samples;
  s.L = 2;
  s.mode = InputMode::known;
  s.n_mc = 500;

  LtvModel& m = s.model;
  m.n_x = 1;
  m.n_w = 1;
  m.n_v = 1;
  m.tau = samples - 1;
  const auto tau = static_cast<double>(samples);
  constexpr double pi = std::numbers::pi;
  std::vector<Mat> f;
  std::vector<Mat> h;
  for (Index k = 0; k <= m.tau; ++k) {
    const auto kd = static_cast<double>(k);
    f.push_back(scalar(0.8 - 0.1 * std::sin(7.0 * pi * kd / tau)));
    h.push_back(scalar(1.0 + 0.99 * std::sin(100.0 * pi * kd / tau)));
  }
  m.F = StepSequence::per_step(std::move(f));
  m.H = StepSequence::per_step(std::move(h));
  m.G = StepSequence::constant(scalar(1));
  m.E = StepSequence::constant(scalar(1));
  m.D = StepSequence::constant(scalar(1));

  s.structure.bq = {scalar(1), scalar(0)};
  s.structure.br = {scalar(0), scalar(1)};
  s.alpha_true.resize(2);
  s.alpha_true << 2, 1;
  s.labels = {"Q", "R"};
  s.init = InitialCondition::standard(m.n_x);
  s.input = sinusoidal_input(m.tau, tau);
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"clock-ensemble", "unobs-unknown-input", "obs-ltv"};
}

BenchmarkSpec preset(const std::string& name, Index samples) {
  if (samples < 2) throw ValidationError("a benchmark needs at least 2 samples");
  if (name == "clock-ensemble" || name == "clock") return clock_ensemble(samples);
  if (name == "unobs-unknown-input") return unobs_unknown_input(samples);
  if (name == "obs-ltv") return obs_ltv(samples);
  throw ValidationError("unknown preset '" + name +
                        "' (expected clock-ensemble, unobs-unknown-input or obs-ltv)");
}

}  // namespace mdm
