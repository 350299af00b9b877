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

#include "kettle/confidential.hpp"

#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

namespace {

using namespace kettle;
namespace ts = testing_support;

ConfidentialSessionParams session_params(
    TamperScenario tamper = TamperScenario::none) {
  ConfidentialSessionParams params;
  params.lock_bytes = ts::fixture_project_lock_json();
  params.config_bytes = ts::fixture_project_build_json();
  params.source_files = {
      {"main.txt", to_byte_vector(ts::kProjectSource)},
      {"deps/dep.blob", to_byte_vector(ts::kProjectDepBlob)},
      {"lockfile.lock", to_byte_vector(ts::kProjectRawLockfile)},
  };
  params.boot_fixture = ts::demo_boot_components();
  params.platform_keys = ts::fixture_platform_keys();
  params.store = ts::fixture_trust_store();
  params.build_nonce = ts::fixture_nonce();
  params.policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), params.build_nonce);
  params.tamper = tamper;
  params.build_options.clock = [] { return std::time_t{1768473000}; };
  return params;
}

TEST(ClientBegin, DrawsDistinct32ByteNonces) {
  std::set<std::array<uint8_t, 32>> seen;
  for (int i = 0; i < 1000; ++i) {
    std::array<uint8_t, 32> nonce = client_begin();
    EXPECT_EQ(nonce.size(), 32u);
    EXPECT_TRUE(seen.insert(nonce).second) << "nonce repeated at draw " << i;
  }
}

TEST(CvmPreattest, SatisfiesThePreAttestationInvariants) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  std::array<uint8_t, 32> nonce_p = client_begin();
  PreAttestation pa = cvm.preattest(nonce_p);

  EXPECT_EQ(pa.nonce_p, nonce_p);
  EXPECT_TRUE(std::equal(nonce_p.begin(), nonce_p.end(),
                         pa.report.host_data.begin()));
  EXPECT_EQ(pa.report.report_data,
            channel_binding_report_data(pa.channel_public_key, nonce_p));
  // trailing 32 bytes zero-filled
  for (size_t i = 32; i < 64; ++i) EXPECT_EQ(pa.report.report_data[i], 0);
  EXPECT_TRUE(
      verify_report(pa.report, pa.chain, ts::fixture_trust_store()).ok);
}

TEST(CvmPreattest, FreshChannelKeyPerLaunch) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  PreAttestation a = cvm.preattest(client_begin());
  PreAttestation b = cvm.preattest(client_begin());
  EXPECT_NE(a.channel_public_key, b.channel_public_key);
}

TEST(ClientVerifyPreattestation, AcceptsGenuinePreAttestation) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  std::array<uint8_t, 32> nonce_p = client_begin();
  PreAttestation pa = cvm.preattest(nonce_p);
  VerificationPolicy policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), nonce_p);
  PreAttestationCheck check = client_verify_preattestation(
      pa, nonce_p, policy, ts::fixture_trust_store());
  EXPECT_TRUE(check.ok) << check.detail;
}

TEST(ClientVerifyPreattestation, RejectsReplayedHostData) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  std::array<uint8_t, 32> stale_nonce = client_begin();
  PreAttestation pa = cvm.preattest(stale_nonce);
  std::array<uint8_t, 32> fresh_nonce = client_begin();
  VerificationPolicy policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), fresh_nonce);
  PreAttestationCheck check = client_verify_preattestation(
      pa, fresh_nonce, policy, ts::fixture_trust_store());
  EXPECT_FALSE(check.ok);
  EXPECT_EQ(check.reason, PreAttestationReason::stale_or_shared_cvm);
}

TEST(ClientVerifyPreattestation, RejectsSubstitutedChannelKey) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  std::array<uint8_t, 32> nonce_p = client_begin();
  PreAttestation pa = cvm.preattest(nonce_p);
  pa.channel_public_key = x25519_generate().public_key;
  VerificationPolicy policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), nonce_p);
  PreAttestationCheck check = client_verify_preattestation(
      pa, nonce_p, policy, ts::fixture_trust_store());
  EXPECT_FALSE(check.ok);
  EXPECT_EQ(check.reason, PreAttestationReason::channel_binding_mismatch);
}

TEST(ClientVerifyPreattestation, EveryBindingInputMatters) {
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  std::array<uint8_t, 32> nonce_p = client_begin();
  PreAttestation genuine = cvm.preattest(nonce_p);
  VerificationPolicy policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), nonce_p);
  TrustStore store = ts::fixture_trust_store();

  ASSERT_TRUE(client_verify_preattestation(genuine, nonce_p, policy, store).ok);

  {  // altered channel key
    PreAttestation pa = genuine;
    pa.channel_public_key[0] ^= 0x01;
    EXPECT_FALSE(client_verify_preattestation(pa, nonce_p, policy, store).ok);
  }
  {  // altered nonce
    std::array<uint8_t, 32> other = nonce_p;
    other[0] ^= 0x01;
    EXPECT_FALSE(client_verify_preattestation(genuine, other, policy, store).ok);
  }
  {  // altered measurement (re-signed by the same platform)
    auto boot = ts::demo_boot_components();
    boot[5].content.push_back(0xff);
    CvmActor other_cvm(ts::fixture_platform_keys(), boot);
    PreAttestation pa = other_cvm.preattest(nonce_p);
    EXPECT_FALSE(client_verify_preattestation(pa, nonce_p, policy, store).ok);
  }
  {  // altered chain
    PreAttestation pa = genuine;
    pa.chain.firmware_version += 1;
    EXPECT_FALSE(client_verify_preattestation(pa, nonce_p, policy, store).ok);
  }
}

// --- sealing ------------------------------------------------------------------

TEST(SealSource, RoundTripsThroughTheChannelKey) {
  X25519KeyPair channel = x25519_generate();
  std::array<uint8_t, 32> nonce_p = client_begin();
  Bytes archive = to_byte_vector("sealed archive bytes");
  SealedSource sealed = seal_to_channel(channel.public_key, nonce_p, archive);
  EXPECT_EQ(open_sealed_source(sealed, channel.private_key), archive);
}

TEST(SealSource, WrongChannelKeyFailsAuthentication) {
  X25519KeyPair channel = x25519_generate();
  X25519KeyPair other = x25519_generate();
  std::array<uint8_t, 32> nonce_p = client_begin();
  SealedSource sealed = seal_to_channel(channel.public_key, nonce_p,
                                        to_byte_vector("secret"));
  try {
    open_sealed_source(sealed, other.private_key);
    FAIL() << "expected authentication failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::aead_failure);
  }
}

TEST(SealSource, CiphertextRevealsNoPlaintextBytes) {
  X25519KeyPair channel = x25519_generate();
  std::array<uint8_t, 32> nonce_p = client_begin();
  Bytes archive = to_byte_vector(
      "proprietary-source-marker proprietary-source-marker");
  SealedSource sealed = seal_to_channel(channel.public_key, nonce_p, archive);
  std::string ct = to_string(sealed.ciphertext);
  EXPECT_EQ(ct.find("proprietary-source-marker"), std::string::npos);
}

TEST(SealSource, RefusesWithoutVerifiedPreAttestation) {
  RequesterSession session;
  session.begin();
  try {
    session.seal_source(to_byte_vector("source"));
    FAIL() << "expected PreAttestationNotVerified";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::pre_attestation_not_verified);
  }
}

TEST(SealSource, RefusesAfterFailedVerification) {
  RequesterSession session;
  session.begin();
  CvmActor cvm(ts::fixture_platform_keys(), ts::demo_boot_components());
  PreAttestation pa = cvm.preattest(client_begin());  // wrong nonce inside
  VerificationPolicy policy = ts::fixture_policy(
      measure_boot_chain(ts::demo_boot_components()), session.nonce_p());
  PreAttestationCheck check = session.verify_preattestation(
      pa, policy, ts::fixture_trust_store());
  EXPECT_FALSE(check.ok);
  EXPECT_THROW(session.seal_source(to_byte_vector("source")), Error);
}

TEST(SourceArchive, RoundTrips) {
  SourceArchive files = {
      {"a/b.txt", to_byte_vector("alpha")},
      {"c.bin", Bytes{0x00, 0x01, 0xff}},
  };
  SourceArchive parsed = archive_from_bytes(archive_to_bytes(files));
  EXPECT_EQ(parsed, files);
}

// --- full sessions -----------------------------------------------------------

TEST(ConfidentialSession, HonestRunProducesLinkedReportsAndAVerifiableBundle) {
  ConfidentialSessionParams params = session_params();
  SessionResult result = confidential_build_session(params);

  ASSERT_FALSE(result.aborted()) << *result.abort_reason;
  ASSERT_TRUE(result.bundle.has_value());
  ASSERT_TRUE(result.transcript.pre_attestation.has_value());
  ASSERT_TRUE(result.transcript.build_report.has_value());

  // the two attestations share a launch measurement
  EXPECT_EQ(result.transcript.pre_attestation->report.measurement,
            result.transcript.build_report->measurement);

  // the verifier-facing chain is unchanged: the standard verifier accepts it
  VerificationOutcome outcome =
      verify_bundle(*result.bundle, params.policy, params.store);
  EXPECT_TRUE(outcome.passed);

  // second report carries statement digest ‖ build nonce
  Digest32 digest = sha256(result.bundle->provenance_bytes);
  EXPECT_TRUE(std::equal(digest.begin(), digest.end(),
                         result.bundle->report.report_data.begin()));
  EXPECT_TRUE(std::equal(params.build_nonce.begin(), params.build_nonce.end(),
                         result.bundle->report.report_data.begin() + 32));

  // all requester→host traffic after stage 2 is opaque to the host
  bool saw_stage3 = false;
  for (const TranscriptMessage& m : result.transcript.host_observed) {
    if (m.stage == "3" && m.direction == "requester->host") {
      saw_stage3 = true;
      EXPECT_TRUE(m.opaque);
    }
  }
  EXPECT_TRUE(saw_stage3);
  EXPECT_EQ(result.transcript.plaintext_source_bytes(), 0u);

  // the sealed payload the host relayed is recorded in its wire form
  ASSERT_TRUE(result.transcript.sealed_source.has_value());
  Json sealed = sealed_source_to_json(*result.transcript.sealed_source);
  EXPECT_TRUE(sealed.contains("ephemeral_public_key_hex"));
  EXPECT_TRUE(sealed.contains("aead_nonce_hex"));
  EXPECT_TRUE(sealed.contains("ciphertext_b64"));
  EXPECT_TRUE(sealed.contains("aad_hex"));
}

struct TamperCase {
  TamperScenario scenario;
  PreAttestationReason reason;
};

TEST(ConfidentialSession, EveryStageTwoTamperAbortsWithZeroDisclosure) {
  const TamperCase cases[] = {
      {TamperScenario::wrong_measurement,
       PreAttestationReason::measurement_not_allowed},
      {TamperScenario::replayed_cvm, PreAttestationReason::stale_or_shared_cvm},
      {TamperScenario::substituted_channel_key,
       PreAttestationReason::channel_binding_mismatch},
      {TamperScenario::unknown_root, PreAttestationReason::report_invalid},
  };
  for (const TamperCase& c : cases) {
    SessionResult result = confidential_build_session(session_params(c.scenario));
    EXPECT_TRUE(result.aborted());
    EXPECT_FALSE(result.bundle.has_value());
    ASSERT_TRUE(result.abort_reason.has_value());
    EXPECT_NE(result.abort_reason->find(pre_attestation_reason_name(c.reason)),
              std::string::npos)
        << *result.abort_reason;
    // no plaintext source ever reached the host, and no sealed payload was
    // sent at all
    EXPECT_EQ(result.transcript.plaintext_source_bytes(), 0u);
    for (const TranscriptMessage& m : result.transcript.host_observed) {
      EXPECT_NE(m.kind, "sealed_source");
    }
  }
}

TEST(ConfidentialSession, TamperScenarioNamesParse) {
  EXPECT_EQ(tamper_scenario_from_name("replayed-cvm"),
            TamperScenario::replayed_cvm);
  EXPECT_EQ(tamper_scenario_from_name("none"), TamperScenario::none);
  EXPECT_FALSE(tamper_scenario_from_name("bogus").has_value());
}

}  // namespace
