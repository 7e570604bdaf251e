/*
Copyright 2026 The DAELM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "daelm/daelm.hpp"
#include "oracles.hpp"

namespace daelm {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + DAELM_CLI_PATH + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(oracle::temp_dir("cli"));
    SyntheticCorpusOptions opt;
    opt.classes = 6;
    opt.per_class = 12;
    opt.dims = 6;
    opt.batches = kGasBatches;
    opt.shift = 1.0;
    opt.seed = 8;
    write_corpus(*dir_ / "data", make_synthetic_corpus(opt));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }

  static std::string data() { return "--data-dir " + (*dir_ / "data").string() + " --features 6"; }
  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, NoArgumentsPrintsUsage) {
  const auto r = run("");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("bench"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("bench --bogus 1 " + data()).code, 1);
  EXPECT_EQ(run("bench --method svm " + data()).code, 1);
  EXPECT_EQ(run("bench --runs 0 " + data()).code, 1);
}

TEST_F(CliTest, HelpListsPublishedDefaults) {
  const auto r = run("bench --help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"--hidden", "1000", "--runs", "10", "--activation", "radbas", "--c-s",
                        "0.01", "0.001", "--c-t", "--c-tu", "100", "--guides", "30", "50",
                        "--format", "--jobs", "--seed", "--setting", "--data-dir", "--config"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  for (const char* sub : {"validate-data", "select-guides", "train", "predict", "sweep"})
    EXPECT_EQ(run(std::string(sub) + " --help").code, 0) << sub;
}

TEST_F(CliTest, MissingDataDirIsDataError) {
  EXPECT_EQ(run("bench --data-dir /nonexistent/path").code, 2);
  EXPECT_EQ(run("validate-data --data-dir /nonexistent/path").code, 2);
}

TEST_F(CliTest, DataDirFromEnvironment) {
  const auto r =
      run("validate-data --features 6", "DAELM_DATA_DIR=" + (*dir_ / "data").string());
  EXPECT_NE(r.out.find("status=mismatch"), std::string::npos);
}

TEST_F(CliTest, ValidateDataFlagsSyntheticCorpus) {
  const auto r = run("validate-data " + data());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("batch 1 total: 72 != 445"), std::string::npos);
  EXPECT_NE(r.out.find("status=mismatch"), std::string::npos);
}

TEST_F(CliTest, SelectGuidesMatchesLibrary) {
  const auto r = run("select-guides " + data() + " --batch 3 --guides 5");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto corpus = load_corpus(*dir_ / "data", kGasBatches, 6);
  const auto g = ssa_select(apply_scaler(fit_scaler(corpus), corpus[2]), 5);
  std::string expected;
  for (Index i : g.indices) expected += std::to_string(i) + "\n";
  EXPECT_EQ(r.out, expected);
  EXPECT_EQ(run("select-guides " + data() + " --batch 11").code, 1);
}

TEST_F(CliTest, BenchCsvIsByteIdenticalAcrossInvocations) {
  const auto a = *dir_ / "a.csv", b = *dir_ / "b.csv";
  const std::string args = "bench --setting 2 --method daelm-t --guides 8 --runs 2 --hidden 80 " +
                           data() + " --format csv --out ";
  ASSERT_EQ(run(args + a.string()).code, 0);
  ASSERT_EQ(run(args + b.string() + " --jobs 3").code, 0);
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.rfind("source,target,run,accuracy\n", 0), 0u);
  EXPECT_NE(text.find("\n9,10,1,"), std::string::npos);
}

TEST_F(CliTest, BenchTableAndGuideLimit) {
  const auto r = run("bench --method daelm-s --guides 6 --runs 1 --hidden 60 " + data());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("DAELM-S(6)"), std::string::npos);
  EXPECT_NE(r.out.find("Batch 10"), std::string::npos);
  EXPECT_NE(r.out.find("Average"), std::string::npos);
  EXPECT_EQ(run("bench --guides 72 --runs 1 --hidden 10 " + data()).code, 2);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  const auto cfg = *dir_ / "bench.ini";
  std::ofstream(cfg) << "# flat key = value\nmethod = elm\nguides = 4\nruns = 1\nhidden = 40\n"
                        "format = csv\n";
  const auto r = run("bench --config " + cfg.string() + " " + data());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("source,target,run,accuracy\n", 0), 0u);
  const auto direct = run("bench --method elm --guides 4 --runs 1 --hidden 40 --format csv " + data());
  EXPECT_EQ(r.out, direct.out);
  const auto table = run("bench --config " + cfg.string() + " --format table " + data());
  EXPECT_NE(table.out.find("ELM-rbf"), std::string::npos);
}

TEST_F(CliTest, SweepEmitsGuideColumn) {
  const auto r = run("sweep --method daelm-s --ks 4,6 --runs 1 --hidden 40 " + data());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("k,source,target,run,accuracy\n4,1,2,0,", 0), 0u);
  EXPECT_NE(r.out.find("\n6,1,10,0,"), std::string::npos);
  EXPECT_EQ(run("sweep --ks 1 " + data()).code, 1);
}

TEST_F(CliTest, TrainThenPredictRoundTrip) {
  const auto model = *dir_ / "model.txt";
  for (const char* method : {"elm", "daelm-s", "daelm-t"}) {
    const auto t = run(std::string("train --method ") + method +
                       " --source 1 --target 2 --guides 6 --hidden 50 --seed 4 " + data() +
                       " --model " + model.string());
    ASSERT_EQ(t.code, 0) << t.out;
    EXPECT_NE(t.out.find("evaluated 66 accuracy"), std::string::npos);

    const auto p = run("predict --model " + model.string() + " --input " +
                       (*dir_ / "data" / "batch2.dat").string());
    ASSERT_EQ(p.code, 0) << p.out;
    EXPECT_NE(p.out.find("accuracy"), std::string::npos);

    // Predictions follow from the saved classifier and scaler exactly.
    std::ifstream in(model);
    std::string tag, value;
    in >> tag >> value >> tag >> value;
    const auto scaler = read_scaler(in);
    const auto classifier = read_classifier(in);
    const auto batch = load_batch(*dir_ / "data" / "batch2.dat", 6);
    std::string expected;
    for (int label : predict(classifier, apply_scaler(scaler, batch)).labels)
      expected += std::to_string(label) + "\n";
    EXPECT_EQ(p.out.substr(0, expected.size()), expected);
  }
  EXPECT_EQ(run("train --method daelm-s " + data() + " --model " + model.string()).code, 1);
  EXPECT_EQ(run("predict --model /nonexistent --input x").code, 2);
}

}  // namespace
}  // namespace daelm
