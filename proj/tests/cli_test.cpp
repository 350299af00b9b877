// Copyright 2026 The Kettle Authors
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

#include "kettle/kettle.hpp"
#include "test_support.hpp"

namespace {

using namespace kettle;
namespace ts = testing_support;

// One CLI workspace shared by the suite: project, keys, boot fixture,
// allow-list, trust store, and a built bundle.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new ts::TempDir("kettle-cli-test");
    const auto& root = dir_->path();
    ts::write_fixture_project(root / "proj");
    write_file(root / "boot.json",
               boot_components_to_json(ts::demo_boot_components()));

    auto keygen = ts::run_cli(
        {"keygen", "--seed", std::string(64, '4'), "--out",
         (root / "keys.json").string(), "--truststore",
         (root / "trust.json").string(), "--firmware", "3", "--json"});
    ASSERT_EQ(keygen.exit_code, 0) << keygen.output;

    auto add = ts::run_cli(
        {"allowlist", "add", "--file", (root / "allow.json").string(),
         "--measurement", ts::kDemoBootMeasurementHex, "--kettle-version",
         "0.4.0", "--platform", "0", "--min-firmware", "1"});
    ASSERT_EQ(add.exit_code, 0) << add.output;

    auto build = ts::run_cli(
        {"build", "--lock", (root / "proj/kettle.lock.json").string(),
         "--config", (root / "proj/kettle-build.json").string(), "--out",
         (root / "out").string(), "--nonce", to_hex(ts::fixture_nonce()),
         "--boot-fixture", (root / "boot.json").string(), "--platform-keys",
         (root / "keys.json").string()});
    ASSERT_EQ(build.exit_code, 0) << build.output;
  }

  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::filesystem::path root() { return dir_->path(); }

  static std::vector<std::string> verify_args(
      const std::string& bundle = "out") {
    return {"verify",
            "--bundle", (root() / bundle).string(),
            "--allowlist", (root() / "allow.json").string(),
            "--truststore", (root() / "trust.json").string(),
            "--expect-repo", ts::kFixtureRepository,
            "--expect-ref", ts::kFixtureRef,
            "--expect-nonce", to_hex(ts::fixture_nonce())};
  }

  static ts::TempDir* dir_;
};

ts::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, BuildProducedTheBundle) {
  EXPECT_TRUE(std::filesystem::exists(root() / "out/provenance.json"));
  EXPECT_TRUE(std::filesystem::exists(root() / "out/evidence.json"));
  EXPECT_TRUE(std::filesystem::exists(root() / "out/artifacts/app.bin"));
}

TEST_F(CliTest, VerifyPassesOnUntamperedBundle) {
  auto result = ts::run_cli(verify_args());
  EXPECT_EQ(result.exit_code, 0) << result.output;
}

TEST_F(CliTest, VerifyJsonCarriesTheOutcomeShape) {
  auto args = verify_args();
  args.push_back("--json");
  auto result = ts::run_cli(args);
  ASSERT_EQ(result.exit_code, 0) << result.output;
  Json j = Json::parse(result.output);
  EXPECT_EQ(j["passed"], true);
  ASSERT_EQ(j["step_results"].size(), 4u);
  EXPECT_EQ(j["step_results"][0]["step"], "attestation");
}

TEST_F(CliTest, MissingConfigFlagIsUsageError) {
  auto result = ts::run_cli(
      {"build", "--lock", (root() / "proj/kettle.lock.json").string(),
       "--out", (root() / "out2").string(), "--boot-fixture",
       (root() / "boot.json").string(), "--platform-keys",
       (root() / "keys.json").string()});
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, CorruptedDependencyFailsTheBuildNamingIt) {
  ts::TempDir scratch("kettle-cli-badblob");
  ts::write_fixture_project(scratch.path());
  std::string blob = ts::kProjectDepBlob;
  blob[0] ^= 0x01;
  write_file(scratch.path() / "deps/dep.blob", blob);
  auto result = ts::run_cli(
      {"build", "--lock", (scratch.path() / "kettle.lock.json").string(),
       "--config", (scratch.path() / "kettle-build.json").string(), "--out",
       (scratch.path() / "out").string(), "--boot-fixture",
       (root() / "boot.json").string(), "--platform-keys",
       (root() / "keys.json").string()});
  EXPECT_EQ(result.exit_code, 1);
  EXPECT_NE(result.output.find("fixture-dep"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(scratch.path() / "out/provenance.json"));
}

TEST_F(CliTest, SwappedArtifactFlagsTheArtifactStep) {
  ts::TempDir scratch("kettle-cli-swap");
  std::filesystem::copy(root() / "out", scratch.path() / "out",
                        std::filesystem::copy_options::recursive);
  write_file(scratch.path() / "out/artifacts/app.bin",
             std::string("swapped bytes"));
  auto args = verify_args();
  args[2] = (scratch.path() / "out").string();
  args.push_back("--json");
  auto result = ts::run_cli(args);
  EXPECT_EQ(result.exit_code, 1);
  Json j = Json::parse(result.output);
  EXPECT_EQ(j["step_results"][2]["step"], "artifact");
  EXPECT_FALSE(j["step_results"][2]["passed"]);
}

TEST_F(CliTest, MeasurementMissingFromAllowlistFlagsAttestation) {
  // a different allow-list whose only measurement is not the bundle's
  ts::TempDir scratch("kettle-cli-allow");
  auto add = ts::run_cli(
      {"allowlist", "add", "--file", (scratch.path() / "allow.json").string(),
       "--measurement", std::string(96, 'e'), "--kettle-version", "0.4.0"});
  ASSERT_EQ(add.exit_code, 0) << add.output;
  auto args = verify_args();
  args[4] = (scratch.path() / "allow.json").string();
  args.push_back("--json");
  auto result = ts::run_cli(args);
  EXPECT_EQ(result.exit_code, 1);
  Json j = Json::parse(result.output);
  EXPECT_EQ(j["step_results"][0]["step"], "attestation");
  EXPECT_FALSE(j["step_results"][0]["passed"]);
}

TEST_F(CliTest, MalformedBundleIsUsageError) {
  ts::TempDir scratch("kettle-cli-corrupt");
  std::filesystem::copy(root() / "out", scratch.path() / "out",
                        std::filesystem::copy_options::recursive);
  write_file(scratch.path() / "out/evidence.json", std::string("%%%"));
  auto args = verify_args();
  args[2] = (scratch.path() / "out").string();
  auto result = ts::run_cli(args);
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, AllowlistCheckHonorsTheFirmwareFloor) {
  auto ok = ts::run_cli({"allowlist", "check", "--file",
                         (root() / "allow.json").string(), "--measurement",
                         ts::kDemoBootMeasurementHex, "--firmware", "3",
                         "--min-version", "0.1.0"});
  EXPECT_EQ(ok.exit_code, 0) << ok.output;
  auto low = ts::run_cli({"allowlist", "check", "--file",
                          (root() / "allow.json").string(), "--measurement",
                          ts::kDemoBootMeasurementHex, "--firmware", "0",
                          "--min-version", "0.1.0"});
  EXPECT_EQ(low.exit_code, 1);
}

TEST_F(CliTest, DuplicateAllowlistEntryIsRejected) {
  auto result = ts::run_cli(
      {"allowlist", "add", "--file", (root() / "allow.json").string(),
       "--measurement", ts::kDemoBootMeasurementHex, "--kettle-version",
       "0.4.0", "--platform", "0"});
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, InclusionProveAndVerifyRoundTrip) {
  auto prove = ts::run_cli(
      {"prove-inclusion", "--lock", (root() / "proj/kettle.lock.json").string(),
       "--label", "dep.fixture-dep@1.0.0", "--out",
       (root() / "proof.json").string(), "--json"});
  ASSERT_EQ(prove.exit_code, 0) << prove.output;
  Json j = Json::parse(prove.output);
  std::string root_hex = j["root_hex"];

  auto verify = ts::run_cli({"verify-inclusion", "--root", root_hex, "--proof",
                             (root() / "proof.json").string()});
  EXPECT_EQ(verify.exit_code, 0) << verify.output;

  // tampered proof file fails with exit 1
  std::string proof_text = read_file(root() / "proof.json");
  size_t pos = proof_text.find("\"leaf_digest_hex\":\"");
  ASSERT_NE(pos, std::string::npos);
  pos += std::string("\"leaf_digest_hex\":\"").size();
  proof_text[pos] = proof_text[pos] == 'a' ? 'b' : 'a';
  write_file(root() / "proof-tampered.json", proof_text);
  auto tampered = ts::run_cli({"verify-inclusion", "--root", root_hex,
                               "--proof",
                               (root() / "proof-tampered.json").string()});
  EXPECT_EQ(tampered.exit_code, 1);
}

TEST_F(CliTest, ProveInclusionUnknownLabelIsUsageError) {
  auto result = ts::run_cli(
      {"prove-inclusion", "--lock", (root() / "proj/kettle.lock.json").string(),
       "--label", "dep.nonexistent@0.0.0"});
  EXPECT_EQ(result.exit_code, 2);
}

TEST_F(CliTest, KeygenIsDeterministicUnderASeed) {
  auto a = ts::run_cli({"keygen", "--seed", std::string(64, '7'), "--out",
                        (root() / "ka.json").string(), "--json"});
  auto b = ts::run_cli({"keygen", "--seed", std::string(64, '7'), "--out",
                        (root() / "kb.json").string(), "--json"});
  ASSERT_EQ(a.exit_code, 0);
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(Json::parse(a.output)["root_key_id_hex"],
            Json::parse(b.output)["root_key_id_hex"]);
  EXPECT_EQ(read_file(root() / "ka.json"), read_file(root() / "kb.json"));
}

TEST_F(CliTest, ConfidentialDemoHonestRunExitsZero) {
  auto result = ts::run_cli(
      {"confidential-demo", "--lock",
       (root() / "proj/kettle.lock.json").string(), "--config",
       (root() / "proj/kettle-build.json").string(), "--json"});
  ASSERT_EQ(result.exit_code, 0) << result.output;
  Json j = Json::parse(result.output);
  EXPECT_FALSE(j["aborted"]);
  EXPECT_TRUE(j["verify"]["passed"]);
  EXPECT_EQ(j["transcript"]["plaintext_source_bytes"], 0);
}

TEST_F(CliTest, ConfidentialDemoTamperScenariosAbort) {
  for (const char* scenario :
       {"replayed-cvm", "wrong-measurement", "substituted-channel-key",
        "unknown-root"}) {
    auto result = ts::run_cli(
        {"confidential-demo", "--lock",
         (root() / "proj/kettle.lock.json").string(), "--config",
         (root() / "proj/kettle-build.json").string(), "--tamper", scenario,
         "--json"});
    EXPECT_EQ(result.exit_code, 1) << scenario << ": " << result.output;
    Json j = Json::parse(result.output);
    EXPECT_TRUE(j["aborted"]) << scenario;
    EXPECT_EQ(j["transcript"]["plaintext_source_bytes"], 0) << scenario;
  }
}

TEST_F(CliTest, ConfidentialDemoUnknownScenarioIsUsageError) {
  auto result = ts::run_cli(
      {"confidential-demo", "--lock",
       (root() / "proj/kettle.lock.json").string(), "--config",
       (root() / "proj/kettle-build.json").string(), "--tamper", "bogus"});
  EXPECT_EQ(result.exit_code, 2);
}

}  // namespace
