#include "mdm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "mdm/errors.hpp"

namespace mdm {

const char* to_string(McMethod method) {
  return method == McMethod::ordinary ? "ordinary" : "weighted";
}

void compute_statistics(McResult& r) {
  const Index n = r.estimates.rows();
  const Index p = r.estimates.cols();
  r.sample_mean = Vec::Zero(p);
  r.sample_cov_diag = Vec::Zero(p);
  if (n == 0) return;
  for (Index i = 0; i < n; ++i) r.sample_mean += r.estimates.row(i).transpose();
  r.sample_mean /= static_cast<double>(n);
  if (n > 1) {
    for (Index i = 0; i < n; ++i) {
      r.sample_cov_diag +=
          (r.estimates.row(i).transpose() - r.sample_mean).cwiseAbs2();
    }
    r.sample_cov_diag /= static_cast<double>(n - 1);
  }
  if (r.est_cov_diag) {
    Vec m = Vec::Zero(p);
    for (Index i = 0; i < n; ++i) m += r.est_cov_diag->row(i).transpose();
    r.mean_est_cov_diag = m / static_cast<double>(n);
  } else {
    r.mean_est_cov_diag.reset();
  }
}

McResult run_mc(const BenchmarkSpec& spec, McMethod method, unsigned workers,
                const Tolerance& tol) {
  if (spec.n_mc < 1) throw ValidationError("n_mc must be >= 1");
  const auto design =
      build_stacked_design(spec.model, spec.structure, spec.L, spec.mode, tol);
  const OrdinarySolver solver(design->design, tol);
  const bool feed_input = spec.mode == InputMode::known && spec.input.has_value();

  McResult r;
  r.name = spec.name;
  r.method = method;
  r.alpha_true = spec.alpha_true;
  r.labels = spec.labels;
  const Index p = spec.alpha_true.size();
  r.estimates = Mat::Zero(spec.n_mc, p);
  if (method == McMethod::weighted) r.est_cov_diag = Mat::Zero(spec.n_mc, p);
  r.seeds.resize(static_cast<std::size_t>(spec.n_mc));
  std::vector<char> repaired(static_cast<std::size_t>(spec.n_mc), 0);

  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  Index failed_run = -1;
  std::string failure;

  auto work = [&] {
    for (Index i = next++; i < spec.n_mc && !failed; i = next++) {
      const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
      r.seeds[static_cast<std::size_t>(i)] = seed;
      try {
        const Trajectory t = simulate(spec.model, spec.structure, spec.alpha_true,
                                      spec.init, spec.input, seed);
        const MeasurementData data = MeasurementData::from_trajectory(t, feed_input);
        const StackedSystem sys{design, observe(*design, spec.model, data)};
        if (method == McMethod::ordinary) {
          r.estimates.row(i) = solver.solve(sys.obs).transpose();
        } else {
          const Estimate est = three_step_weighted_pipeline(sys, spec.structure, solver, tol);
          r.estimates.row(i) = est.alpha.transpose();
          r.est_cov_diag->row(i) = est.cov->diagonal().transpose();
          repaired[static_cast<std::size_t>(i)] = est.diagnostics.warnings.empty() ? 0 : 1;
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (failed_run < 0 || i < failed_run) {
          failed_run = i;
          failure = e.what();
        }
        failed = true;
      }
    }
  };

  const auto start = std::chrono::steady_clock::now();
  const unsigned count = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(spec.n_mc));
  if (count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  if (failed) {
    throw McRunFailure(spec.seed + static_cast<std::uint64_t>(failed_run), failure);
  }
  r.wall_time_per_run = elapsed.count() / static_cast<double>(spec.n_mc);
  r.repaired_runs = std::count(repaired.begin(), repaired.end(), 1);
  compute_statistics(r);
  return r;
}

}  // namespace mdm
