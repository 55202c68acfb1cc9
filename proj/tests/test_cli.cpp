#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mdm/cli.hpp"
#include "mdm/harness.hpp"
#include "mdm/model_io.hpp"

namespace mdm {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mdm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("mdm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    write_text_file(dir_ / name, text);
    return path(name);
  }

  nlohmann::json result_json() const {
    return nlohmann::json::parse(read_text_file(dir_ / "identify_result.json"));
  }

  fs::path dir_;
};

constexpr const char* kScalarModel = R"({"n_x":1,"n_w":1,"n_v":1,"tau":9,
  "F":0.5,"G":0,"E":1,"H":1,"D":1,
  "basis":[{"BQ":1,"BR":0},{"BQ":0,"BR":1}],"alpha_true":[1.5,0.5]})";

constexpr const char* kInputEqualsNoise = R"({"n_x":1,"n_w":1,"n_v":2,"tau":20,
  "F":0.9,"G":1,"E":1,"H":[[1],[2]],"D":[[1,0],[0,1]],
  "basis":[{"BQ":1,"BR":[[0,0],[0,0]]},{"BQ":0,"BR":[[1,0],[0,1]]}]})";

TEST_F(CliTest, SimulateThenIdentifyRecoversObservableLtv) {
  ASSERT_EQ(run_cli({"simulate", "--preset", "obs-ltv", "--seed", "3", "--out", path("")}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "data.jsonl.meta.json"));
  const CliResult r = run_cli({"identify", "--preset", "obs-ltv", "--data", path("data.jsonl"),
                               "--L", "auto", "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("L auto: selected L=2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "identify_timing.json"));

  BenchmarkSpec spec = preset("obs-ltv");
  spec.n_mc = 100;
  spec.seed = 1000;
  const McResult mc = run_mc(spec, McMethod::ordinary);
  const auto j = result_json();
  EXPECT_EQ(j["method"], "ordinary");
  EXPECT_EQ(j["identifiability"]["rank"], 2);
  for (Index i = 0; i < 2; ++i) {
    const double a = j["alpha"][static_cast<std::size_t>(i)];
    EXPECT_LE(std::abs(a - spec.alpha_true(i)), 5.0 * std::sqrt(mc.sample_cov_diag(i))) << i;
  }
}

TEST_F(CliTest, WeightedIdentifyWritesCovariance) {
  ASSERT_EQ(run_cli({"simulate", "--preset", "obs-ltv", "--seed", "4", "--out", path("")}).code, 0);
  const CliResult r = run_cli({"identify", "--preset", "obs-ltv", "--data", path("data.jsonl"),
                               "--method", "weighted", "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = result_json();
  EXPECT_EQ(j["method"].get<std::string>().rfind("weighted", 0), 0u);
  EXPECT_EQ(j["cov"].size(), 2u);
  EXPECT_EQ(j["alpha_ordinary"].size(), 2u);
  EXPECT_GT(j["cov"][0][0].get<double>(), 0.0);
}

TEST_F(CliTest, HorizonTooShort) {
  const std::string model = write("m.json", kScalarModel);
  ASSERT_EQ(run_cli({"simulate", "--model", model, "--tau", "3", "--out", path("")}).code, 0);
  const CliResult r = run_cli({"identify", "--model", model, "--data", path("data.jsonl"),
                               "--L", "5", "--out", path("")});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("horizon too short"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownInputIdentifiesWithoutInputFields) {
  ASSERT_EQ(run_cli({"simulate", "--preset", "unobs-unknown-input", "--seed", "2", "--out",
                     path("")})
                .code,
            0);
  MeasurementData data = read_measurements(dir_ / "data.jsonl");
  ASSERT_TRUE(data.u);
  data.u.reset();
  write_measurements(data, dir_ / "z_only.jsonl");
  ASSERT_EQ(read_text_file(dir_ / "z_only.jsonl").find("\"u\""), std::string::npos);

  const CliResult r = run_cli({"identify", "--preset", "unobs-unknown-input", "--data",
                               path("z_only.jsonl"), "--input-mode", "unknown", "--L", "2",
                               "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(result_json()["alpha"].size(), 6u);
  EXPECT_EQ(result_json()["input_mode"], "unknown");
}

TEST_F(CliTest, KnownInputModeNeedsInputs) {
  ASSERT_EQ(run_cli({"simulate", "--preset", "obs-ltv", "--out", path("")}).code, 0);
  MeasurementData data = read_measurements(dir_ / "data.jsonl");
  data.u.reset();
  write_measurements(data, dir_ / "z_only.jsonl");
  const CliResult r = run_cli({"identify", "--preset", "obs-ltv", "--data",
                               path("z_only.jsonl"), "--out", path("")});
  EXPECT_EQ(r.code, cli::kValidation) << r.err;
  EXPECT_NE(r.err.find("--input-mode unknown"), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteIdenticalForFixedSeed) {
  fs::create_directories(dir_ / "a");
  fs::create_directories(dir_ / "b");
  fs::create_directories(dir_ / "c");
  ASSERT_EQ(run_cli({"simulate", "--preset", "clock", "--tau", "50", "--seed", "11", "--out",
                     path("a")})
                .code,
            0);
  ASSERT_EQ(run_cli({"simulate", "--preset", "clock", "--tau", "50", "--seed", "11", "--out",
                     path("b")})
                .code,
            0);
  ASSERT_EQ(run_cli({"simulate", "--preset", "clock", "--tau", "50", "--seed", "12", "--out",
                     path("c")})
                .code,
            0);
  const std::string a = read_text_file(dir_ / "a" / "data.jsonl");
  EXPECT_EQ(a, read_text_file(dir_ / "b" / "data.jsonl"));
  EXPECT_NE(a, read_text_file(dir_ / "c" / "data.jsonl"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 50);
  const auto meta = nlohmann::json::parse(read_text_file(dir_ / "a" / "data.jsonl.meta.json"));
  EXPECT_EQ(meta["seed"], 11);
}

TEST_F(CliTest, ZeroNoiseModelIdentifiesZero) {
  std::string text = kScalarModel;
  text.replace(text.find("[1.5,0.5]"), 9, "[0,0]");
  const std::string model = write("m.json", text);
  ASSERT_EQ(run_cli({"simulate", "--model", model, "--out", path("")}).code, 0);
  const CliResult r =
      run_cli({"identify", "--model", model, "--data", path("data.jsonl"), "--L", "3",
               "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& a : result_json()["alpha"]) EXPECT_LE(std::abs(a.get<double>()), 1e-9);
}

TEST_F(CliTest, SimulateWithoutTrueParametersFails) {
  const std::string model = write("m.json", kInputEqualsNoise);
  const CliResult r = run_cli({"simulate", "--model", model, "--out", path("")});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("alpha_true"), std::string::npos);
}

TEST_F(CliTest, UsageAndIoErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"benchmark", "nope", "--out", path("")}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"identify", "--preset", "obs-ltv"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"identify", "--preset", "obs-ltv", "--data", path("missing.jsonl")}).code,
            cli::kIo);
  EXPECT_EQ(run_cli({"identifiability", "--preset", "obs-ltv", "--L", "0"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"identifiability", "--preset", "obs-ltv", "--method", "x"}).code,
            cli::kUsage);
  EXPECT_EQ(run_cli({"identifiability", "--model", write("bad.json", "{")}).code,
            cli::kValidation);
  EXPECT_EQ(run_cli({"identifiability", "--model", path("absent.json")}).code, cli::kIo);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, IdentifiabilityClockIsFullRank) {
  const CliResult r = run_cli({"identifiability", "--preset", "clock", "--L", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rank 8 of 8"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("all parameters identifiable"), std::string::npos);
}

TEST_F(CliTest, IdentifiabilityFlagsInputEqualsNoise) {
  const std::string model = write("m.json", kInputEqualsNoise);
  const CliResult r = run_cli({"identifiability", "--model", model, "--input-mode", "unknown",
                               "--L", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rank 1 of 2"), std::string::npos) << r.out;
  const auto line = r.out.substr(r.out.find("  alpha_1:"));
  EXPECT_NE(line.substr(0, line.find('\n')).find("participation 1.000000e+00"), std::string::npos)
      << r.out;

  const CliResult known = run_cli({"identifiability", "--model", model, "--L", "3"});
  EXPECT_NE(known.out.find("rank 2 of 2"), std::string::npos) << known.out;
}

TEST_F(CliTest, RankDeficientIdentifyIsNumericalFailure) {
  std::string text = kInputEqualsNoise;
  text.insert(text.rfind('}'), R"(,"alpha_true":[1,1])");
  const std::string model = write("m.json", text);
  ASSERT_EQ(run_cli({"simulate", "--model", model, "--out", path("")}).code, 0);
  const CliResult r = run_cli({"identify", "--model", model, "--data", path("data.jsonl"),
                               "--input-mode", "unknown", "--L", "3", "--out", path("")});
  EXPECT_EQ(r.code, cli::kNumerical);
  EXPECT_NE(r.out.find("rank 1 of 2"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "identify_result.json"));
}

TEST_F(CliTest, IdentifiabilitySingleParameter) {
  const std::string model = write("m.json", R"({"n_x":1,"n_w":1,"n_v":1,"tau":9,
    "F":0.5,"G":1,"E":1,"H":1,"D":1,"basis":[{"BQ":1,"BR":1}]})");
  const CliResult r = run_cli({"identifiability", "--model", model});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rank 1 of 1"), std::string::npos) << r.out;
}

TEST_F(CliTest, BenchmarkWeightedEmitsEstimatedCovariance) {
  const CliResult r = run_cli({"benchmark", "obs-ltv", "--method", "weighted", "--n-mc", "20",
                               "--tau", "200", "--workers", "2", "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_text_file(dir_ / "obs-ltv_weighted_table.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "param,true,s_mean,s_cov,est_cov");
  EXPECT_TRUE(fs::exists(dir_ / "obs-ltv_weighted_runs.csv"));
  EXPECT_NE(read_text_file(dir_ / "obs-ltv_weighted_table.txt").find("runtime per run"),
            std::string::npos);
}

TEST_F(CliTest, BenchmarkClockDefaultsToOrdinary) {
  const CliResult r =
      run_cli({"benchmark", "clock", "--n-mc", "2", "--tau", "60", "--out", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "clock-ensemble_ordinary_table.csv"));
  EXPECT_NE(r.out.find("6.0000e-19"), std::string::npos);
}

TEST_F(CliTest, BenchmarkIsByteIdenticalForFixedSeed) {
  for (const char* sub : {"a", "b"}) {
    fs::create_directories(dir_ / sub);
    ASSERT_EQ(run_cli({"benchmark", "obs-ltv", "--seed", "7", "--n-mc", "10", "--tau", "200",
                       "--out", path(sub)})
                  .code,
              0);
  }
  for (const char* f : {"obs-ltv_ordinary_table.csv", "obs-ltv_ordinary_runs.csv"}) {
    EXPECT_EQ(read_text_file(dir_ / "a" / f), read_text_file(dir_ / "b" / f)) << f;
  }
}

}  // namespace
}  // namespace mdm
