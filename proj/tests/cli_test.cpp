// Copyright 2026 The emq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("emq_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + " \"" EMQ_CLI_PATH "\" " + args + " > \"" + (dir_ / "stdout.txt").string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::string out_flag() const { return "--out-dir \"" + dir_.string() + "\" --no-timestamp"; }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

TEST_F(CliTest, AttackWritesReports) {
    ASSERT_EQ(run("attack --n 4 --m 8 --trials 10 " + out_flag()), 0) << slurp(dir_ / "stdout.txt");
    const auto csv = slurp(dir_ / "attack.csv");
    EXPECT_NE(csv.find("success_rate"), std::string::npos);
    std::ifstream jsonl(dir_ / "attack.jsonl");
    std::string line;
    int records = 0;
    while (std::getline(jsonl, line)) {
        const auto j = nlohmann::json::parse(line);
        if (records == 0) EXPECT_TRUE(j.at("timestamp").is_null());
        ++records;
    }
    EXPECT_EQ(records, 11);
}

TEST_F(CliTest, DeterministicWithoutTimestamp) {
    ASSERT_EQ(run("attack --n 3 --trials 5 --seed 9 " + out_flag()), 0);
    const auto first = slurp(dir_ / "attack.jsonl");
    ASSERT_EQ(run("attack --n 3 --trials 5 --seed 9 -j 1 " + out_flag()), 0);
    EXPECT_EQ(slurp(dir_ / "attack.jsonl"), first);
}

TEST_F(CliTest, ZeroTrialsGiveEmptyReport) {
    ASSERT_EQ(run("attack --n 3 --trials 0 " + out_flag()), 0);
    std::ifstream csv(dir_ / "attack.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    EXPECT_EQ(lines, 1);
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(run("attack --n 40 " + out_flag()), 2);
    EXPECT_EQ(run("bound --epsilon 0.9 " + out_flag()), 2);
    EXPECT_EQ(run("qdegree --p 4 " + out_flag()), 2);
    EXPECT_EQ(run("frobnicate " + out_flag()), 2);
    EXPECT_EQ(run(""), 2);
}

TEST_F(CliTest, ViolationExitsOne) {
    // The qdegree checks at p = 2, n = 3 include criteria that do not hold.
    EXPECT_EQ(run("qdegree --corpus 5 " + out_flag()), 1);
    EXPECT_TRUE(fs::exists(dir_ / "qdegree.json"));
}

TEST_F(CliTest, SubgroupsAndBound) {
    ASSERT_EQ(run("subgroups --primes 2,3 --n-max 3 " + out_flag()), 0);
    const auto sub = slurp(dir_ / "subgroups.csv");
    EXPECT_EQ(sub.find("MISMATCH"), std::string::npos);
    EXPECT_NE(sub.find("2,3,1,7,7,MATCH"), std::string::npos);

    const auto gp = (dir_ / "bound.gp").string();
    ASSERT_EQ(run("bound --n-min 64 --n-max 128 --n-step 64 --gnuplot-script \"" + gp + "\" " + out_flag()), 0);
    const auto bound = slurp(dir_ / "bound.csv");
    EXPECT_NE(bound.find("64,16.35"), std::string::npos);
    EXPECT_TRUE(fs::exists(gp));
}

TEST_F(CliTest, ConfigFileAndEnvironmentDirectory) {
    {
        std::ofstream cfg(dir_ / "run.ini");
        cfg << "[bound]\nn-min=8\nn-max=16\nn-step=8\n";
    }
    ASSERT_EQ(run("--config \"" + (dir_ / "run.ini").string() + "\" bound --no-timestamp",
                  "EMQ_OUTPUT_DIR=\"" + dir_.string() + "\""),
              0)
        << slurp(dir_ / "stdout.txt");
    const auto bound = slurp(dir_ / "bound.csv");
    EXPECT_NE(bound.find("\n8,"), std::string::npos);
    EXPECT_NE(bound.find("\n16,"), std::string::npos);
    EXPECT_EQ(bound.find("\n24,"), std::string::npos);
}

}  // namespace
