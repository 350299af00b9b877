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

#include "kettle/verifier.hpp"

#include <gtest/gtest.h>

#include "kettle/orchestrator.hpp"
#include "test_support.hpp"

namespace {

using namespace kettle;
namespace ts = testing_support;

// One shared fixture bundle; each test mutates its own copy.
class VerifierTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    project_ = new ts::TempDir("kettle-verify-proj");
    out_ = new ts::TempDir("kettle-verify-out");
    LockManifest lock = ts::write_fixture_project(project_->path());
    PlatformKeys keys = ts::fixture_platform_keys();
    SimulatedPlatform platform(keys);
    BuildRequest request;
    request.nonce = ts::fixture_nonce();
    request.config_path = project_->path() / "kettle-build.json";
    OrchestratorOptions options;
    options.clock = [] { return std::time_t{1768473000}; };
    bundle_ = new EvidenceBundle(run_attested_build(
        request, lock, project_->path(), platform, ts::demo_boot_components(),
        out_->path(), options));
  }

  static void TearDownTestSuite() {
    delete bundle_;
    delete out_;
    delete project_;
    bundle_ = nullptr;
    out_ = nullptr;
    project_ = nullptr;
  }

  EvidenceBundle bundle() const { return *bundle_; }
  VerificationPolicy policy() const {
    return ts::fixture_policy(
        measure_boot_chain(ts::demo_boot_components()), ts::fixture_nonce());
  }
  TrustStore store() const { return ts::fixture_trust_store(); }

  static ts::TempDir* project_;
  static ts::TempDir* out_;
  static EvidenceBundle* bundle_;
};

ts::TempDir* VerifierTest::project_ = nullptr;
ts::TempDir* VerifierTest::out_ = nullptr;
EvidenceBundle* VerifierTest::bundle_ = nullptr;

void expect_fail_at(const VerificationOutcome& outcome, VerifyStep step) {
  EXPECT_FALSE(outcome.passed);
  EXPECT_FALSE(outcome.step(step).passed);
  // everything before the failing step passed, everything after stayed
  // unevaluated
  for (size_t i = 0; i < static_cast<size_t>(step); ++i) {
    EXPECT_TRUE(outcome.step_results[i].passed)
        << "step " << verify_step_name(outcome.step_results[i].step);
  }
  for (size_t i = static_cast<size_t>(step) + 1; i < 4; ++i) {
    EXPECT_EQ(outcome.step_results[i].reason, "not evaluated");
  }
}

TEST_F(VerifierTest, UntamperedBundlePassesAllFourSteps) {
  VerificationOutcome outcome = verify_bundle(bundle(), policy(), store());
  EXPECT_TRUE(outcome.passed);
  ASSERT_EQ(outcome.step_results.size(), 4u);
  for (const StepResult& r : outcome.step_results) {
    EXPECT_TRUE(r.passed) << verify_step_name(r.step);
  }
}

TEST_F(VerifierTest, ProvenanceByteEditFailsAtBinding) {
  EvidenceBundle tampered = bundle();
  // flip a hex digit inside the embedded nonce; the statement still parses
  size_t pos = tampered.provenance_bytes.find(to_hex(ts::fixture_nonce()));
  ASSERT_NE(pos, std::string::npos);
  tampered.provenance_bytes[pos] =
      tampered.provenance_bytes[pos] == '0' ? '1' : '0';
  expect_fail_at(verify_bundle(tampered, policy(), store()),
                 VerifyStep::binding);
}

TEST_F(VerifierTest, SwappedArtifactFailsAtArtifact) {
  EvidenceBundle tampered = bundle();
  tampered.artifacts[0].bytes = to_byte_vector("malicious replacement");
  expect_fail_at(verify_bundle(tampered, policy(), store()),
                 VerifyStep::artifact);
}

TEST_F(VerifierTest, UnknownRootFailsAtAttestation) {
  EvidenceBundle tampered = bundle();
  std::array<uint8_t, 32> rogue_seed{};
  rogue_seed.fill(0x66);
  PlatformKeys rogue = platform_keygen(rogue_seed, platform_sim, 3);
  SimulatedPlatform rogue_platform(rogue);
  tampered.report = rogue_platform.issue_report(
      bundle().report.measurement, bundle().report.host_data,
      bundle().report.report_data);
  tampered.chain = rogue.chain;
  VerificationOutcome outcome = verify_bundle(tampered, policy(), store());
  expect_fail_at(outcome, VerifyStep::attestation);
  EXPECT_NE(outcome.step(VerifyStep::attestation).reason.find("UnknownRoot"),
            std::string::npos);
}

TEST_F(VerifierTest, WrongMeasurementFailsAtAttestation) {
  // same trusted platform, different boot chain (modified kettle component)
  auto boot = ts::demo_boot_components();
  boot.back().content.push_back(0x00);
  PlatformKeys keys = ts::fixture_platform_keys();
  SimulatedPlatform platform(keys);
  EvidenceBundle tampered = bundle();
  tampered.report = platform.issue_report(measure_boot_chain(boot),
                                          bundle().report.host_data,
                                          bundle().report.report_data);
  VerificationOutcome outcome = verify_bundle(tampered, policy(), store());
  expect_fail_at(outcome, VerifyStep::attestation);
  EXPECT_NE(outcome.step(VerifyStep::attestation).reason.find("allow-list"),
            std::string::npos);
}

TEST_F(VerifierTest, WrongNonceFailsAtAttestation) {
  VerificationPolicy p = policy();
  p.expected_nonce[0] ^= 0xff;
  expect_fail_at(verify_bundle(bundle(), p, store()), VerifyStep::attestation);
}

TEST_F(VerifierTest, WrongExpectedRepositoryFailsAtPolicy) {
  VerificationPolicy p = policy();
  p.expected_repository = "https://github.com/org/other";
  expect_fail_at(verify_bundle(bundle(), p, store()), VerifyStep::policy);
}

TEST_F(VerifierTest, WrongExpectedRefFailsAtPolicy) {
  VerificationPolicy p = policy();
  p.expected_ref = "refs/heads/release";
  expect_fail_at(verify_bundle(bundle(), p, store()), VerifyStep::policy);
}

TEST_F(VerifierTest, MissingSubjectArtifactFailsAtArtifact) {
  EvidenceBundle tampered = bundle();
  tampered.artifacts.clear();
  expect_fail_at(verify_bundle(tampered, policy(), store()),
                 VerifyStep::artifact);
}

TEST_F(VerifierTest, PolicyPlatformMismatchFailsAtAttestation) {
  VerificationPolicy p = policy();
  p.required_platform = platform_tdx;
  expect_fail_at(verify_bundle(bundle(), p, store()), VerifyStep::attestation);
}

TEST_F(VerifierTest, OutcomeJsonCarriesExactlyTheOutcomeFields) {
  VerificationOutcome outcome = verify_bundle(bundle(), policy(), store());
  Json j = Json::parse(outcome_to_json(outcome));
  ASSERT_TRUE(j.is_object());
  EXPECT_EQ(j.size(), 2u);
  EXPECT_EQ(j["passed"], true);
  ASSERT_EQ(j["step_results"].size(), 4u);
  for (const Json& step : j["step_results"]) {
    EXPECT_EQ(step.size(), 3u);
    EXPECT_TRUE(step.contains("step"));
    EXPECT_TRUE(step.contains("passed"));
    EXPECT_TRUE(step.contains("reason"));
  }
}

// --- check_allowlist ----------------------------------------------------------

TEST(CheckAllowlist, AcceptsMatchingEntry) {
  Measurement m{};
  m.fill(0x11);
  VerificationPolicy policy;
  policy.allowlist.push_back({m, SemVer{1, 2, 0}, platform_sim, 3});
  policy.min_version = SemVer{1, 0, 0};
  policy.required_platform = platform_sim;
  AllowlistMatch match = check_allowlist(m, 3, policy);
  EXPECT_TRUE(match.ok);
  ASSERT_TRUE(match.entry.has_value());
  EXPECT_EQ(match.entry->min_firmware, 3u);
}

TEST(CheckAllowlist, RejectsFirmwareBelowEntryFloor) {
  Measurement m{};
  m.fill(0x11);
  VerificationPolicy policy;
  policy.allowlist.push_back({m, SemVer{1, 2, 0}, platform_sim, 3});
  policy.min_version = SemVer{1, 0, 0};
  policy.required_platform = platform_sim;
  EXPECT_FALSE(check_allowlist(m, 2, policy).ok);
}

TEST(CheckAllowlist, RejectsMeasurementOffByOneDigit) {
  Measurement m{};
  m.fill(0x11);
  VerificationPolicy policy;
  policy.allowlist.push_back({m, SemVer{1, 2, 0}, platform_sim, 3});
  policy.min_version = SemVer{1, 0, 0};
  policy.required_platform = platform_sim;
  Measurement other = m;
  other[0] ^= 0x01;
  AllowlistMatch match = check_allowlist(other, 3, policy);
  EXPECT_FALSE(match.ok);
  EXPECT_EQ(match.reason, "measurement not in allow-list");
}

TEST(CheckAllowlist, RejectsVersionBelowPolicyMinimum) {
  Measurement m{};
  m.fill(0x11);
  VerificationPolicy policy;
  policy.allowlist.push_back({m, SemVer{0, 9, 9}, platform_sim, 0});
  policy.min_version = SemVer{1, 0, 0};
  policy.required_platform = platform_sim;
  EXPECT_FALSE(check_allowlist(m, 9, policy).ok);
}

// --- load_allowlist ------------------------------------------------------------

std::string entry_json(const std::string& measurement,
                       const std::string& version, int platform,
                       int firmware) {
  return R"({"measurement_hex": ")" + measurement + R"(", "kettle_version": ")" +
         version + R"(", "platform_id": )" + std::to_string(platform) +
         R"(, "min_firmware": )" + std::to_string(firmware) + "}";
}

TEST(LoadAllowlist, LoadsOneValidEntry) {
  std::string text = "[" + entry_json(std::string(96, 'a'), "1.2.3", 0, 1) + "]";
  auto entries = load_allowlist(text);
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].kettle_version, (SemVer{1, 2, 3}));
}

TEST(LoadAllowlist, RejectsDuplicateMeasurementPlatformPair) {
  std::string text = "[" + entry_json(std::string(96, 'a'), "1.2.3", 0, 1) +
                     "," + entry_json(std::string(96, 'a'), "1.3.0", 0, 2) + "]";
  try {
    load_allowlist(text);
    FAIL() << "expected DuplicateEntry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::duplicate_entry);
  }
}

TEST(LoadAllowlist, AcceptsSameMeasurementOnDifferentPlatforms) {
  std::string text = "[" + entry_json(std::string(96, 'a'), "1.2.3", 0, 1) +
                     "," + entry_json(std::string(96, 'a'), "1.2.3", 1, 1) + "]";
  EXPECT_EQ(load_allowlist(text).size(), 2u);
}

TEST(LoadAllowlist, RejectsShortMeasurement) {
  std::string text = "[" + entry_json(std::string(95, 'a'), "1.2.3", 0, 1) + "]";
  try {
    load_allowlist(text);
    FAIL() << "expected MalformedAllowList";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_allowlist);
  }
}

TEST(LoadAllowlist, RejectsPreReleaseVersions) {
  std::string text =
      "[" + entry_json(std::string(96, 'a'), "1.2.3-rc1", 0, 1) + "]";
  EXPECT_THROW(load_allowlist(text), Error);
}

TEST(LoadAllowlist, RoundTripsThroughJson) {
  std::string text = "[" + entry_json(std::string(96, 'a'), "1.2.3", 0, 1) +
                     "," + entry_json(std::string(96, 'b'), "2.0.0", 1, 7) + "]";
  auto entries = load_allowlist(text);
  auto reloaded = load_allowlist(allowlist_to_json(entries));
  ASSERT_EQ(reloaded.size(), entries.size());
  EXPECT_EQ(reloaded[1].min_firmware, 7u);
}

TEST(SemVerParse, OrdersAndRejects) {
  EXPECT_EQ(parse_semver("1.2.3"), (SemVer{1, 2, 3}));
  EXPECT_LT(*parse_semver("0.9.9"), *parse_semver("1.0.0"));
  EXPECT_LT(*parse_semver("1.2.3"), *parse_semver("1.10.0"));
  EXPECT_FALSE(parse_semver("1.2").has_value());
  EXPECT_FALSE(parse_semver("1.2.3.4").has_value());
  EXPECT_FALSE(parse_semver("v1.2.3").has_value());
  EXPECT_FALSE(parse_semver("1.2.3-beta").has_value());
}

}  // namespace
