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

#ifndef KETTLE_CONFIDENTIAL_HPP
#define KETTLE_CONFIDENTIAL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kettle/orchestrator.hpp"
#include "kettle/verifier.hpp"

namespace kettle {

// Pre-attested confidential build, three stages:
//
//   1. The requester submits a fresh nonce_p. The hypervisor commits it into
//      the CVM's host_data; the booted CVM generates a channel keypair in
//      its memory and returns a report whose report_data leads with
//      SHA-256(channel_pubkey ‖ nonce_p).
//   2. The requester verifies code identity (measurement), CVM uniqueness
//      (host_data = nonce_p), and freshness plus channel binding
//      (report_data) before disclosing anything. Any failure aborts with
//      zero source bytes sent.
//   3. Source travels as a sealed payload only the CVM's channel key can
//      open; the standard attested build follows inside the CVM and
//      produces a second report with the same launch measurement.
//
// The paper-facing TLS session is modeled as a one-shot HPKE-style sealed
// payload: the property exercised is key-binding-before-disclosure, not
// record-layer mechanics.

inline constexpr std::string_view confidential_context = "kettle-confidential-v1";

struct PreAttestation {
  std::array<uint8_t, 32> nonce_p{};
  X25519Public channel_public_key{};
  AttestationReport report;
  PlatformCertChain chain;
};

struct SealedSource {
  X25519Public ephemeral_public_key{};
  std::array<uint8_t, aead_nonce_size> aead_nonce{};
  Bytes ciphertext;  // AEAD ciphertext with tag appended
  Bytes aad;         // "kettle-confidential-v1" ‖ nonce_p
};

inline Bytes confidential_aad(const std::array<uint8_t, 32>& nonce_p) {
  Bytes aad = to_byte_vector(confidential_context);
  append(aad, nonce_p);
  return aad;
}

inline std::array<uint8_t, 64> channel_binding_report_data(
    const X25519Public& channel_public_key,
    const std::array<uint8_t, 32>& nonce_p) {
  Bytes bound;
  bound.reserve(64);
  append(bound, channel_public_key);
  append(bound, nonce_p);
  Digest32 digest = sha256(bound);
  std::array<uint8_t, 64> report_data{};  // trailing 32 bytes stay zero
  std::copy(digest.begin(), digest.end(), report_data.begin());
  return report_data;
}

inline std::array<uint8_t, 32> client_begin() { return random_array<32>(); }

// --- sealing (HPKE-style: X25519 + HKDF-SHA-256 + ChaCha20-Poly1305) -------

inline SealedSource seal_to_channel(const X25519Public& channel_public_key,
                                    const std::array<uint8_t, 32>& nonce_p,
                                    ByteView plaintext) {
  SealedSource sealed;
  X25519KeyPair ephemeral = x25519_generate();
  sealed.ephemeral_public_key = ephemeral.public_key;
  sealed.aad = confidential_aad(nonce_p);
  std::array<uint8_t, 32> shared =
      x25519_shared_secret(ephemeral.private_key, channel_public_key);
  std::array<uint8_t, 32> key = hkdf_sha256(shared, {}, sealed.aad);
  sealed.aead_nonce = random_array<aead_nonce_size>();
  sealed.ciphertext = aead_seal(key, sealed.aead_nonce, sealed.aad, plaintext);
  return sealed;
}

inline Bytes open_sealed_source(const SealedSource& sealed,
                                const X25519Secret& channel_private_key) {
  std::array<uint8_t, 32> shared =
      x25519_shared_secret(channel_private_key, sealed.ephemeral_public_key);
  std::array<uint8_t, 32> key = hkdf_sha256(shared, {}, sealed.aad);
  std::optional<Bytes> plaintext =
      aead_open(key, sealed.aead_nonce, sealed.aad, sealed.ciphertext);
  if (!plaintext) {
    throw Error(Errc::aead_failure, "sealed source fails authentication");
  }
  return *plaintext;
}

// --- stage 2 checks --------------------------------------------------------

enum class PreAttestationReason {
  ok,
  report_invalid,
  measurement_not_allowed,
  stale_or_shared_cvm,
  channel_binding_mismatch,
};

inline const char* pre_attestation_reason_name(PreAttestationReason r) {
  switch (r) {
    case PreAttestationReason::ok: return "ok";
    case PreAttestationReason::report_invalid: return "ReportInvalid";
    case PreAttestationReason::measurement_not_allowed:
      return "MeasurementNotAllowed";
    case PreAttestationReason::stale_or_shared_cvm: return "StaleOrSharedCvm";
    case PreAttestationReason::channel_binding_mismatch:
      return "ChannelBindingMismatch";
  }
  return "?";
}

struct PreAttestationCheck {
  bool ok = false;
  PreAttestationReason reason = PreAttestationReason::ok;
  std::string detail;
};

// Code identity (measurement), CVM uniqueness (host_data), freshness plus
// channel binding (report_data) — all checked before any source leaves the
// requester.
inline PreAttestationCheck client_verify_preattestation(
    const PreAttestation& pa, const std::array<uint8_t, 32>& nonce_p,
    const VerificationPolicy& policy, const TrustStore& store) {
  ReportVerification rv = verify_report(pa.report, pa.chain, store);
  if (!rv.ok) {
    return {false, PreAttestationReason::report_invalid,
            report_check_name(rv.reason)};
  }
  if (pa.chain.platform_id != policy.required_platform) {
    return {false, PreAttestationReason::measurement_not_allowed,
            "platform mismatch"};
  }
  AllowlistMatch match = check_allowlist(pa.report.measurement,
                                         pa.chain.firmware_version, policy);
  if (!match.ok) {
    return {false, PreAttestationReason::measurement_not_allowed, match.reason};
  }
  if (!std::equal(nonce_p.begin(), nonce_p.end(), pa.report.host_data.begin())) {
    return {false, PreAttestationReason::stale_or_shared_cvm,
            "host_data does not carry this request's nonce"};
  }
  if (pa.report.report_data !=
      channel_binding_report_data(pa.channel_public_key, nonce_p)) {
    return {false, PreAttestationReason::channel_binding_mismatch,
            "report_data does not bind the presented channel key"};
  }
  return {true, PreAttestationReason::ok, ""};
}

// Requester-side protocol state: the nonce from client_begin and, once
// stage 2 passes, the verified channel key. Sealing refuses to run against
// an unverified pre-attestation.
class RequesterSession {
 public:
  const std::array<uint8_t, 32>& begin() {
    nonce_p_ = client_begin();
    verified_.reset();
    return nonce_p_;
  }

  const std::array<uint8_t, 32>& nonce_p() const { return nonce_p_; }

  PreAttestationCheck verify_preattestation(const PreAttestation& pa,
                                            const VerificationPolicy& policy,
                                            const TrustStore& store) {
    PreAttestationCheck check =
        client_verify_preattestation(pa, nonce_p_, policy, store);
    if (check.ok) {
      verified_ = pa;
    }
    return check;
  }

  SealedSource seal_source(ByteView source_archive) const {
    if (!verified_) {
      throw Error(Errc::pre_attestation_not_verified,
                  "refusing to seal source before the pre-attestation "
                  "verifies");
    }
    return seal_to_channel(verified_->channel_public_key, nonce_p_,
                           source_archive);
  }

 private:
  std::array<uint8_t, 32> nonce_p_{};
  std::optional<PreAttestation> verified_;
};

// --- source archive ---------------------------------------------------------
// Flat file map, serialized as JSON {path: base64}; carries the project
// files the CVM materializes before the build.

using SourceArchive = std::map<std::string, Bytes>;

inline Bytes archive_to_bytes(const SourceArchive& files) {
  Json j = Json::object();
  for (const auto& [path, bytes] : files) {
    j[path] = base64_encode(bytes);
  }
  return to_byte_vector(j.dump());
}

inline SourceArchive archive_from_bytes(ByteView bytes) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(to_string(bytes), err);
  require_object(j, "source archive", err);
  SourceArchive files;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      throw Error(err, "archive entries must be base64 strings");
    }
    detail::check_artifact_name(it.key());
    files[it.key()] = base64_decode(it.value().get<std::string>());
  }
  return files;
}

// --- CVM actor ---------------------------------------------------------------

// Simulated confidential VM: boots from a fixture (which fixes its launch
// measurement), keeps the channel private key inside, and runs the standard
// attested build after unsealing. The channel key never leaves the actor.
class CvmActor {
 public:
  CvmActor(PlatformKeys keys, std::vector<BootComponent> boot_fixture)
      : platform_(std::move(keys)), boot_fixture_(std::move(boot_fixture)) {}

  PreAttestation preattest(const std::array<uint8_t, 32>& launch_nonce) {
    launch_nonce_ = launch_nonce;
    channel_ = x25519_generate();  // fresh keypair per launch
    PreAttestation pa;
    pa.nonce_p = launch_nonce;
    pa.channel_public_key = channel_.public_key;
    pa.report = platform_.issue_report(
        measure_boot_chain(boot_fixture_), launch_nonce,
        channel_binding_report_data(channel_.public_key, launch_nonce));
    pa.chain = platform_.chain();
    return pa;
  }

  // Unseals 32-byte build nonce ‖ archive, materializes the project, and
  // runs the standard build flow to a second report.
  EvidenceBundle build_from_sealed(const SealedSource& sealed,
                                   std::string_view lock_bytes,
                                   std::string_view config_bytes,
                                   const OrchestratorOptions& options = {}) {
    Bytes plaintext = open_sealed_source(sealed, channel_.private_key);
    if (plaintext.size() < 32) {
      throw Error(Errc::malformed_input, "sealed payload too short");
    }
    std::array<uint8_t, 32> build_nonce{};
    std::copy_n(plaintext.begin(), 32, build_nonce.begin());
    SourceArchive files = archive_from_bytes(
        ByteView(plaintext.data() + 32, plaintext.size() - 32));

    detail::TempDir project("kettle-cvm-src-");
    for (const auto& [path, bytes] : files) {
      write_file(project.path() / path, ByteView(bytes));
    }
    write_file(project.path() / "kettle.lock.json", lock_bytes);
    write_file(project.path() / "kettle-build.json", config_bytes);

    LockManifest lock = parse_lock_manifest(lock_bytes);
    BuildRequest request;
    request.nonce = build_nonce;
    request.config_path = project.path() / "kettle-build.json";

    detail::TempDir out("kettle-cvm-out-");
    return run_attested_build(request, lock, project.path(), platform_,
                              boot_fixture_, out.path(), options);
  }

  const PlatformCertChain& chain() const { return platform_.chain(); }

 private:
  SimulatedPlatform platform_;
  std::vector<BootComponent> boot_fixture_;
  std::array<uint8_t, 32> launch_nonce_{};
  X25519KeyPair channel_;
};

// --- session ---------------------------------------------------------------

struct TranscriptMessage {
  std::string stage;      // "1", "2", "3"
  std::string direction;  // "requester->host", "host->cvm", ...
  std::string kind;       // launch_request, pre_attestation, sealed_source, ...
  size_t length = 0;
  bool opaque = false;  // true when the host sees only ciphertext
};

struct SessionTranscript {
  std::optional<PreAttestation> pre_attestation;
  std::optional<AttestationReport> build_report;
  std::optional<SealedSource> sealed_source;  // what the host saw in stage 3
  std::vector<TranscriptMessage> host_observed;

  // Bytes of source material the host could read in plaintext. The only
  // source-bearing message kind is the sealed payload; anything non-opaque
  // of that kind would count here.
  size_t plaintext_source_bytes() const {
    size_t total = 0;
    for (const TranscriptMessage& m : host_observed) {
      if (m.kind == "sealed_source" && !m.opaque) total += m.length;
    }
    return total;
  }
};

enum class TamperScenario {
  none,
  wrong_measurement,        // CVM boots a modified kettle component
  replayed_cvm,             // host answers with a stale pre-attestation
  substituted_channel_key,  // host swaps the channel key in transit
  unknown_root,             // CVM platform chains to an untrusted root
};

inline std::optional<TamperScenario> tamper_scenario_from_name(
    std::string_view name) {
  if (name == "none") return TamperScenario::none;
  if (name == "wrong-measurement") return TamperScenario::wrong_measurement;
  if (name == "replayed-cvm") return TamperScenario::replayed_cvm;
  if (name == "substituted-channel-key")
    return TamperScenario::substituted_channel_key;
  if (name == "unknown-root") return TamperScenario::unknown_root;
  return std::nullopt;
}

struct ConfidentialSessionParams {
  std::string lock_bytes;
  std::string config_bytes;
  SourceArchive source_files;  // project files incl. dependency blobs
  std::vector<BootComponent> boot_fixture;
  PlatformKeys platform_keys;
  VerificationPolicy policy;  // allow-list, min version, platform
  TrustStore store;
  std::array<uint8_t, 32> build_nonce{};  // fresh; sealed with the source
  TamperScenario tamper = TamperScenario::none;
  OrchestratorOptions build_options;
};

struct SessionResult {
  SessionTranscript transcript;
  std::optional<EvidenceBundle> bundle;
  std::optional<std::string> abort_reason;  // set iff stage 2 failed

  bool aborted() const { return abort_reason.has_value(); }
};

// Runs requester, host, and CVM in-process with the host relaying (and,
// under a tamper scenario, interfering with) every message. The requester
// never hands plaintext source to the host: stage 2 failure ends the
// session with the transcript showing zero plaintext source bytes.
inline SessionResult confidential_build_session(
    const ConfidentialSessionParams& params) {
  SessionResult result;
  std::vector<TranscriptMessage>& wire = result.transcript.host_observed;

  // Stage 1: launch request and pre-attestation.
  RequesterSession requester;
  std::array<uint8_t, 32> nonce_p = requester.begin();
  wire.push_back({"1", "requester->host", "launch_request", nonce_p.size(),
                  false});

  CvmActor cvm = [&] {
    if (params.tamper == TamperScenario::wrong_measurement) {
      std::vector<BootComponent> modified = params.boot_fixture;
      modified.back().content.push_back(0x00);  // not the published kettle
      return CvmActor(params.platform_keys, std::move(modified));
    }
    if (params.tamper == TamperScenario::unknown_root) {
      PlatformKeys rogue =
          platform_keygen(std::nullopt, params.platform_keys.chain.platform_id,
                          params.platform_keys.chain.firmware_version);
      return CvmActor(std::move(rogue), params.boot_fixture);
    }
    return CvmActor(params.platform_keys, params.boot_fixture);
  }();

  std::array<uint8_t, 32> launch_nonce = nonce_p;
  if (params.tamper == TamperScenario::replayed_cvm) {
    // the host hands back a CVM provisioned for some earlier request
    launch_nonce = random_array<32>();
  }
  wire.push_back({"1", "host->cvm", "launch_request", launch_nonce.size(),
                  false});
  PreAttestation pa = cvm.preattest(launch_nonce);
  if (params.tamper == TamperScenario::substituted_channel_key) {
    pa.channel_public_key = x25519_generate().public_key;  // host MITM key
  }
  wire.push_back({"1", "cvm->requester", "pre_attestation",
                  encode_report(pa.report).size() + 64, false});
  result.transcript.pre_attestation = pa;

  // Stage 2: verification before transmission.
  PreAttestationCheck check =
      requester.verify_preattestation(pa, params.policy, params.store);
  if (!check.ok) {
    result.abort_reason = std::string(pre_attestation_reason_name(check.reason)) +
                          (check.detail.empty() ? "" : ": " + check.detail);
    return result;  // walked away; no source disclosed
  }

  // Stage 3: sealed delivery and the standard attested build.
  Bytes plaintext;
  append(plaintext, params.build_nonce);
  append(plaintext, archive_to_bytes(params.source_files));
  SealedSource sealed = requester.seal_source(plaintext);
  result.transcript.sealed_source = sealed;
  wire.push_back({"3", "requester->host", "sealed_source",
                  sealed.ciphertext.size(), true});
  wire.push_back({"3", "host->cvm", "sealed_source", sealed.ciphertext.size(),
                  true});

  EvidenceBundle bundle = cvm.build_from_sealed(
      sealed, params.lock_bytes, params.config_bytes, params.build_options);
  wire.push_back({"3", "cvm->requester", "evidence_bundle",
                  bundle.provenance_bytes.size() +
                      encode_report(bundle.report).size(),
                  false});
  result.transcript.build_report = bundle.report;
  result.bundle = std::move(bundle);
  return result;
}

// --- wire forms for the demo CLI ---------------------------------------------

inline Json sealed_source_to_json(const SealedSource& sealed) {
  return Json{
      {"ephemeral_public_key_hex", to_hex(sealed.ephemeral_public_key)},
      {"aead_nonce_hex", to_hex(sealed.aead_nonce)},
      {"ciphertext_b64", base64_encode(sealed.ciphertext)},
      {"aad_hex", to_hex(sealed.aad)},
  };
}

inline Json transcript_to_json(const SessionTranscript& transcript) {
  Json messages = Json::array();
  for (const TranscriptMessage& m : transcript.host_observed) {
    messages.push_back({{"stage", m.stage},
                        {"direction", m.direction},
                        {"kind", m.kind},
                        {"length", m.length},
                        {"opaque", m.opaque}});
  }
  Json j{{"host_observed", messages},
         {"plaintext_source_bytes", transcript.plaintext_source_bytes()}};
  if (transcript.pre_attestation) {
    j["pre_attestation_measurement_hex"] =
        to_hex(transcript.pre_attestation->report.measurement);
  }
  if (transcript.build_report) {
    j["build_report_measurement_hex"] =
        to_hex(transcript.build_report->measurement);
  }
  if (transcript.sealed_source) {
    j["sealed_source"] = sealed_source_to_json(*transcript.sealed_source);
  }
  return j;
}

}  // namespace kettle

#endif  // KETTLE_CONFIDENTIAL_HPP
