// Copyright 2026 The InSPO Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "inspo/cli.hpp"

namespace inspo {
namespace {

namespace fs = std::filesystem;
using io::Json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("inspo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("INSPO_LAB_OUT");
  }
  void TearDown() override {
    unsetenv("INSPO_LAB_OUT");
    fs::remove_all(dir_);
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string write_config(const Json& j, const std::string& name = "exp.json") {
    const auto path = (dir_ / name).string();
    io::write_json_file(path, j);
    return path;
  }

  static Json small_config() {
    Json j = io::header("experiment_config");
    j["spaces"] = Json{{"num_contexts", 2}, {"num_responses", 3}};
    j["preference_model"] = Json{{"type", "antisymmetric-random"}, {"seed", 7}, {"scale", 2.0}};
    j["dataset"] = Json{{"n", 300}, {"seed", 1}};
    j["train"] = Json{{"epochs", 1}, {"batch_size", 8}, {"eval_every", 5}};
    j["verification"] = Json{{"dominance_instances", 20}, {"separable_instances", 10},
                             {"algebra_instances", 10},  {"kl_solve_instances", 2},
                             {"gradient_seeds", 1},       {"identity_instances", 10}};
    j["sweep"] = Json{{"seeds", {3, 1, 2}}};
    return j;
  }

  std::string out_dir(const std::string& name) const { return (dir_ / name).string(); }
  std::string read(const std::string& path) const { return io::read_text_file(path); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run({}), cli::kUsage); }

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run({"train", "--bogus"}), cli::kUsage); }

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}), cli::kOk); }

TEST_F(CliTest, MissingConfigFileIsUsageError) {
  EXPECT_EQ(run({"train", "--config", out_dir("nope.json")}), cli::kUsage);
  EXPECT_NE(err_.str().find("cannot open"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MalformedConfigReportsLocation) {
  const auto path = out_dir("bad.json");
  io::write_text_file(path, "{\n  \"schema_version\": 1,\n  oops\n}\n");
  EXPECT_EQ(run({"train", "--config", path}), cli::kUsage);
  EXPECT_NE(err_.str().find("bad.json:3:"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnknownConfigFieldIsUsageError) {
  auto j = small_config();
  j["train"]["momentum"] = 0.9;
  EXPECT_EQ(run({"train", "--config", write_config(j)}), cli::kUsage);
  EXPECT_NE(err_.str().find("train.momentum"), std::string::npos) << err_.str();
}

TEST_F(CliTest, RuntimeFailureExitsThree) {
  auto j = small_config();
  j["reference"] = Json{{"type", "explicit"}, {"probs", {{1.0, 0.0, 0.0}, {0.2, 0.3, 0.5}}}};
  EXPECT_EQ(run({"gen-data", "--config", write_config(j), "--out", out_dir("o")}), cli::kRuntime);
  EXPECT_NE(err_.str().find("context 0"), std::string::npos) << err_.str();
}

TEST_F(CliTest, GenModelDefaultsWriteReadableFiles) {
  ASSERT_EQ(run({"gen-model", "--out", out_dir("m"), "--quiet"}), cli::kOk);
  EXPECT_TRUE(out_.str().empty());
  const auto model = io::preference_model_from_json(io::read_json_file(out_dir("m/model.json")));
  const auto ref = io::context_policy_from_json(io::read_json_file(out_dir("m/reference.json")));
  const auto spaces = io::spaces_document_from_json(io::read_json_file(out_dir("m/spaces.json")));
  const experiment::ExperimentConfig defaults;
  const auto w = experiment::build_world(defaults);
  EXPECT_EQ(model, w.model);
  EXPECT_EQ(ref, w.ref);
  EXPECT_EQ(spaces, w.spaces);
}

TEST_F(CliTest, GenDataDeterministicAndSeedOverrides) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"gen-data", "--config", cfg, "--out", out_dir("a")}), cli::kOk);
  ASSERT_EQ(run({"gen-data", "--config", cfg, "--out", out_dir("b")}), cli::kOk);
  ASSERT_EQ(run({"gen-data", "--config", cfg, "--out", out_dir("c"), "--seed", "9"}), cli::kOk);
  EXPECT_EQ(read(out_dir("a/dataset.json")), read(out_dir("b/dataset.json")));
  EXPECT_NE(read(out_dir("a/dataset.json")), read(out_dir("c/dataset.json")));
  const auto d = io::dataset_from_json(io::read_json_file(out_dir("c/dataset.json")));
  EXPECT_EQ(d.seed, 9u);
  EXPECT_EQ(d.size(), 300u);
}

TEST_F(CliTest, TrainWritesRoundTrippableOutputs) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out_dir("t"), "--seed", "1"}), cli::kOk) << err_.str();
  const auto params = io::policy_params_from_json(io::read_json_file(out_dir("t/params.json")));
  EXPECT_EQ(io::to_json(params).dump(2) + "\n", read(out_dir("t/params.json")));
  const auto csv = read(out_dir("t/curves.csv"));
  EXPECT_EQ(io::curves_csv(io::curves_from_csv(csv)), csv);
  const auto report = io::read_json_file(out_dir("t/report.json"));
  EXPECT_EQ(report.dump(2) + "\n", read(out_dir("t/report.json")));
  EXPECT_EQ(report["type"], "experiment_report");
  EXPECT_TRUE(report["checks"][0]["pass"].get<bool>());
  const auto echoed = experiment::config_from_json(report["config"]);
  EXPECT_EQ(echoed.dataset_seed, 1u);
  EXPECT_TRUE(fs::exists(out_dir("t/run_info.json")));
  EXPECT_TRUE(fs::exists(out_dir("t/baseline_params.json")));
}

TEST_F(CliTest, BidirectionalRunIsNotedInReport) {
  auto j = small_config();
  j["train"]["loss"] = Json{{"method", "DPO"}, {"conditioning", "bidirectional"}, {"beta", 0.5}};
  ASSERT_EQ(run({"train", "--config", write_config(j), "--out", out_dir("bi")}), cli::kOk) << err_.str();
  const auto report = io::read_json_file(out_dir("bi/report.json"));
  ASSERT_TRUE(report.contains("notes"));
  EXPECT_NE(report["notes"].get<std::string>().find("cross"), std::string::npos);
  ASSERT_EQ(run({"train", "--config", write_config(small_config()), "--out", out_dir("cr")}), cli::kOk);
  EXPECT_FALSE(io::read_json_file(out_dir("cr/report.json")).contains("notes"));
}

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out_dir("a"), "--seed", "4"}), cli::kOk);
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out_dir("b"), "--seed", "4"}), cli::kOk);
  for (const char* f : {"curves.csv", "params.json", "report.json", "baseline_curves.csv"})
    EXPECT_EQ(read(out_dir("a/") + f), read(out_dir("b/") + f)) << f;
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
  auto j = small_config();
  j["output_dir"] = out_dir("from_config");
  const auto cfg = write_config(j);
  ASSERT_EQ(run({"gen-data", "--config", cfg}), cli::kOk);
  EXPECT_TRUE(fs::exists(out_dir("from_config/dataset.json")));
  setenv("INSPO_LAB_OUT", out_dir("from_env").c_str(), 1);
  ASSERT_EQ(run({"gen-data", "--config", cfg}), cli::kOk);
  EXPECT_TRUE(fs::exists(out_dir("from_env/dataset.json")));
  ASSERT_EQ(run({"gen-data", "--config", cfg, "--out", out_dir("from_flag")}), cli::kOk);
  EXPECT_TRUE(fs::exists(out_dir("from_flag/dataset.json")));
}

TEST_F(CliTest, VerifyWritesReport) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"verify", "--config", cfg, "--out", out_dir("v")}), cli::kOk) << out_.str();
  const auto report = io::read_json_file(out_dir("v/verify_report.json"));
  EXPECT_TRUE(report["all_pass"].get<bool>());
  bool saw_scores = false;
  for (const auto& c : report["checks"])
    if (c["check_name"] == "psi_dependence.scores_identity_uniform") {
      saw_scores = true;
      EXPECT_NEAR(c["details"]["scores"][0].get<double>(), 0.55, 1e-12);
      EXPECT_NEAR(c["details"]["scores"][1].get<double>(), 0.56, 1e-12);
    }
  EXPECT_TRUE(saw_scores);
  EXPECT_EQ(verify::options_from_json(report["options"], "options").dominance_instances, 20);
}

TEST_F(CliTest, EvaluateStoredPolicies) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"train", "--config", cfg, "--out", out_dir("t")}), cli::kOk);
  ASSERT_EQ(run({"evaluate", "--config", cfg, "--out", out_dir("e"), "--policy", out_dir("t/params.json"),
                 "--policy", out_dir("t/baseline_params.json")}),
            cli::kOk)
      << err_.str();
  const auto e = io::read_json_file(out_dir("e/evaluation.json"));
  const auto report = io::read_json_file(out_dir("t/report.json"));
  EXPECT_EQ(e["values"]["identity"]["params"], report["values"]["identity"]["trained"]);
  EXPECT_EQ(e["values"]["identity"]["baseline_params"], report["values"]["identity"]["baseline"]);
  const auto csv = read(out_dir("e/values.csv"));
  EXPECT_EQ(csv.rfind("psi,policy,value\n", 0), 0u);
  const auto at = csv.find("identity,reference,");
  ASSERT_NE(at, std::string::npos) << csv;
  EXPECT_NEAR(std::stod(csv.substr(at + 19)), 0.5, 1e-12);
}

TEST_F(CliTest, EvaluateRejectsNonPolicyFile) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"gen-data", "--config", cfg, "--out", out_dir("d")}), cli::kOk);
  EXPECT_EQ(run({"evaluate", "--config", cfg, "--out", out_dir("e"), "--policy", out_dir("d/dataset.json")}),
            cli::kRuntime);
}

TEST_F(CliTest, SweepSortedAndIndependentOfJobs) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out_dir("s1"), "--jobs", "1"}), cli::kOk) << err_.str();
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out_dir("s3"), "--jobs", "3"}), cli::kOk);
  const auto csv = read(out_dir("s1/sweep.csv"));
  EXPECT_EQ(csv, read(out_dir("s3/sweep.csv")));
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> keys;
  std::getline(in, line);
  while (std::getline(in, line)) keys.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(keys, (std::vector<std::string>{"seed-000001", "seed-000002", "seed-000003"}));
  for (const auto& k : keys) {
    EXPECT_TRUE(fs::exists(out_dir("s1/" + k + "/report.json")));
    EXPECT_EQ(read(out_dir("s1/" + k + "/curves.csv")), read(out_dir("s3/" + k + "/curves.csv")));
  }
  const auto summary = io::read_json_file(out_dir("s1/sweep_summary.json"));
  EXPECT_EQ(summary["cells"], 3);
}

TEST_F(CliTest, SweepGridOverBeta) {
  auto j = small_config();
  j["sweep"] = Json{{"seeds", {1}}, {"beta", {0.1, 1.0}}};
  ASSERT_EQ(run({"sweep", "--config", write_config(j), "--out", out_dir("s")}), cli::kOk) << err_.str();
  const auto csv = read(out_dir("s/sweep.csv"));
  EXPECT_NE(csv.find("seed-000001_beta-0.1,1,0.1,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("seed-000001_beta-1,1,1,"), std::string::npos) << csv;
}

TEST_F(CliTest, SweepRejectsSeedFlag) {
  EXPECT_EQ(run({"sweep", "--config", write_config(small_config()), "--seed", "3"}), cli::kUsage);
}

TEST_F(CliTest, ShippedConfigsParse) {
  for (const char* name : {"fixture.json", "separable.json", "nonseparable.json"}) {
    const auto path = std::string(INSPO_CONFIG_DIR) + "/" + name;
    EXPECT_NO_THROW(experiment::build_world(experiment::config_from_json(io::read_json_file(path))))
        << name;
  }
}

}  // namespace
}  // namespace inspo
