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

#ifndef KETTLE_VERIFIER_HPP
#define KETTLE_VERIFIER_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "kettle/attestation.hpp"
#include "kettle/bundle.hpp"
#include "kettle/provenance.hpp"

namespace kettle {

// Three-component semantic version; pre-release tags are rejected because
// "version v or later" needs a total order.
struct SemVer {
  int major = 0;
  int minor = 0;
  int patch = 0;

  friend auto operator<=>(const SemVer&, const SemVer&) = default;
};

inline std::optional<SemVer> parse_semver(std::string_view s) {
  SemVer v;
  int* parts[3] = {&v.major, &v.minor, &v.patch};
  size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start || pos - start > 9) return std::nullopt;
    int value = 0;
    for (size_t k = start; k < pos; ++k) value = value * 10 + (s[k] - '0');
    *parts[i] = value;
    if (i < 2) {
      if (pos >= s.size() || s[pos] != '.') return std::nullopt;
      ++pos;
    }
  }
  if (pos != s.size()) return std::nullopt;  // no pre-release or build tags
  return v;
}

inline std::string semver_string(const SemVer& v) {
  return std::to_string(v.major) + "." + std::to_string(v.minor) + "." +
         std::to_string(v.patch);
}

struct AllowListEntry {
  Measurement measurement{};
  SemVer kettle_version;
  uint8_t platform_id = platform_sim;
  uint32_t min_firmware = 0;
};

struct VerificationPolicy {
  std::vector<AllowListEntry> allowlist;
  SemVer min_version;
  uint8_t required_platform = platform_sim;
  std::string expected_repository;
  std::string expected_ref;
  std::array<uint8_t, 32> expected_nonce{};
};

// --- allow-list file: [ {measurement_hex, kettle_version, platform_id,
// min_firmware} ] --------------------------------------------------------

inline std::vector<AllowListEntry> load_allowlist(std::string_view bytes) {
  constexpr Errc err = Errc::malformed_allowlist;
  Json j = parse_json(bytes, err);
  if (!j.is_array()) {
    throw Error(err, "allow-list must be a JSON array");
  }
  std::vector<AllowListEntry> out;
  for (const Json& e : j) {
    require_object(e, "allow-list entry", err);
    require_known_fields(
        e, {"measurement_hex", "kettle_version", "platform_id", "min_firmware"},
        "allow-list entry", err);
    AllowListEntry entry;
    entry.measurement = from_hex_fixed<48>(
        get_hex(e, "measurement_hex", "allow-list entry", 96, err));
    std::string version = get_string(e, "kettle_version", "allow-list entry", err);
    auto v = parse_semver(version);
    if (!v) {
      throw Error(err, "kettle_version '" + version +
                           "' is not a plain three-component version");
    }
    entry.kettle_version = *v;
    entry.platform_id = static_cast<uint8_t>(
        get_uint(e, "platform_id", "allow-list entry", err, 255));
    entry.min_firmware = static_cast<uint32_t>(
        get_uint(e, "min_firmware", "allow-list entry", err, UINT32_MAX));
    for (const AllowListEntry& existing : out) {
      if (existing.measurement == entry.measurement &&
          existing.platform_id == entry.platform_id) {
        throw Error(Errc::duplicate_entry,
                    "allow-list already has this measurement for platform " +
                        platform_name(entry.platform_id));
      }
    }
    out.push_back(entry);
  }
  return out;
}

inline std::string allowlist_to_json(
    std::span<const AllowListEntry> entries) {
  Json j = Json::array();
  for (const AllowListEntry& e : entries) {
    j.push_back({
        {"measurement_hex", to_hex(e.measurement)},
        {"kettle_version", semver_string(e.kettle_version)},
        {"platform_id", e.platform_id},
        {"min_firmware", e.min_firmware},
    });
  }
  return j.dump(2) + "\n";
}

// --- allow-list policy check ---------------------------------------------

struct AllowlistMatch {
  bool ok = false;
  std::optional<AllowListEntry> entry;
  std::string reason;
};

// Accept measurements that appear in the allow-list at version ≥ the policy
// minimum, on the required platform, with chain firmware ≥ the entry floor.
inline AllowlistMatch check_allowlist(const Measurement& measurement,
                                      uint32_t chain_firmware,
                                      const VerificationPolicy& policy) {
  bool measurement_seen = false;
  std::string reason;
  for (const AllowListEntry& entry : policy.allowlist) {
    if (entry.measurement != measurement) continue;
    measurement_seen = true;
    if (entry.platform_id != policy.required_platform) {
      reason = "allow-list entry is for platform " +
               platform_name(entry.platform_id) + ", policy requires " +
               platform_name(policy.required_platform);
      continue;
    }
    if (entry.kettle_version < policy.min_version) {
      reason = "allow-list entry version " +
               semver_string(entry.kettle_version) + " below policy minimum " +
               semver_string(policy.min_version);
      continue;
    }
    if (chain_firmware < entry.min_firmware) {
      reason = "chain firmware " + std::to_string(chain_firmware) +
               " below entry minimum " + std::to_string(entry.min_firmware);
      continue;
    }
    return {true, entry, ""};
  }
  if (!measurement_seen) {
    reason = "measurement not in allow-list";
  }
  return {false, std::nullopt, reason};
}

// --- bundle verification -----------------------------------------------------

enum class VerifyStep { attestation, binding, artifact, policy };

inline const char* verify_step_name(VerifyStep s) {
  switch (s) {
    case VerifyStep::attestation: return "attestation";
    case VerifyStep::binding: return "binding";
    case VerifyStep::artifact: return "artifact";
    case VerifyStep::policy: return "policy";
  }
  return "?";
}

struct StepResult {
  VerifyStep step;
  bool passed = false;
  std::string reason;
};

struct VerificationOutcome {
  bool passed = false;
  std::vector<StepResult> step_results;

  const StepResult& step(VerifyStep s) const {
    return step_results[static_cast<size_t>(s)];
  }
};

inline std::string outcome_to_json(const VerificationOutcome& outcome) {
  Json steps = Json::array();
  for (const StepResult& r : outcome.step_results) {
    steps.push_back({{"step", verify_step_name(r.step)},
                     {"passed", r.passed},
                     {"reason", r.reason}});
  }
  return Json{{"passed", outcome.passed}, {"step_results", steps}}.dump();
}

// Walks the evidence chain in order; each check is meaningful only if the
// previous one passed, so evaluation stops at the first failure and later
// steps stay "not evaluated".
//
//   attestation  report signature chains to a trusted root, measurement is
//                allow-listed under policy, report_data carries the request
//                nonce (and the provenance nonce field agrees once parsed)
//   binding      SHA-256(provenance.json bytes) equals report_data[0..31]
//   artifact     every distributed artifact digest equals its subject digest
//   policy       externalParameters equal the verifier's expectations
//
// Pure and offline: nothing is read beyond the bundle and policy values.
inline VerificationOutcome verify_bundle(const EvidenceBundle& bundle,
                                         const VerificationPolicy& policy,
                                         const TrustStore& store) {
  VerificationOutcome outcome;
  outcome.step_results = {
      {VerifyStep::attestation, false, "not evaluated"},
      {VerifyStep::binding, false, "not evaluated"},
      {VerifyStep::artifact, false, "not evaluated"},
      {VerifyStep::policy, false, "not evaluated"},
  };
  auto fail = [&](VerifyStep step, std::string reason) {
    outcome.step_results[static_cast<size_t>(step)] = {step, false,
                                                       std::move(reason)};
    outcome.passed = false;
    return outcome;
  };
  auto pass = [&](VerifyStep step) {
    outcome.step_results[static_cast<size_t>(step)] = {step, true, "ok"};
  };

  // Step 1: the TEE attestation.
  ReportVerification rv = verify_report(bundle.report, bundle.chain, store);
  if (!rv.ok) {
    return fail(VerifyStep::attestation,
                std::string("report verification failed: ") +
                    report_check_name(rv.reason));
  }
  if (bundle.chain.platform_id != policy.required_platform) {
    return fail(VerifyStep::attestation,
                "report platform " + platform_name(bundle.chain.platform_id) +
                    " does not match required " +
                    platform_name(policy.required_platform));
  }
  AllowlistMatch match = check_allowlist(
      bundle.report.measurement, bundle.chain.firmware_version, policy);
  if (!match.ok) {
    return fail(VerifyStep::attestation, match.reason);
  }
  if (!std::equal(policy.expected_nonce.begin(), policy.expected_nonce.end(),
                  bundle.report.report_data.begin() + 32)) {
    return fail(VerifyStep::attestation,
                "report_data nonce does not match the build request nonce");
  }
  pass(VerifyStep::attestation);

  // Step 2: the provenance binding.
  Digest32 digest = sha256(bundle.provenance_bytes);
  if (!std::equal(digest.begin(), digest.end(),
                  bundle.report.report_data.begin())) {
    return fail(VerifyStep::binding,
                "SHA-256(provenance.json) does not match report_data");
  }
  ProvenanceStatement statement;
  try {
    statement = parse_statement(bundle.provenance_bytes);
  } catch (const Error& e) {
    throw Error(Errc::corrupt_bundle,
                std::string("provenance does not parse: ") + e.what());
  }
  pass(VerifyStep::binding);

  // Freshness cross-check deferred until the statement is parsed, but
  // reported under step 1 where the nonce comparison belongs.
  if (statement.predicate.build_nonce != to_hex(policy.expected_nonce)) {
    return fail(VerifyStep::attestation,
                "provenance build_nonce does not match the request nonce");
  }

  // Step 3: the artifact binding.
  if (bundle.artifacts.size() != statement.subjects.size()) {
    return fail(VerifyStep::artifact,
                "bundle has " + std::to_string(bundle.artifacts.size()) +
                    " artifacts but provenance names " +
                    std::to_string(statement.subjects.size()) + " subjects");
  }
  for (const Subject& subject : statement.subjects) {
    auto it = std::find_if(
        bundle.artifacts.begin(), bundle.artifacts.end(),
        [&](const auto& a) { return a.name == subject.name; });
    if (it == bundle.artifacts.end()) {
      return fail(VerifyStep::artifact,
                  "subject '" + subject.name + "' missing from bundle");
    }
    std::string actual = to_hex(sha256(it->bytes));
    if (actual != subject.digest_sha256) {
      return fail(VerifyStep::artifact,
                  "artifact '" + subject.name +
                      "' digest does not match provenance (" + actual +
                      " != " + subject.digest_sha256 + ")");
    }
  }
  pass(VerifyStep::artifact);

  // Step 4: attacker-influenceable parameters against expectations.
  if (statement.predicate.external_repository != policy.expected_repository) {
    return fail(VerifyStep::policy,
                "repository '" + statement.predicate.external_repository +
                    "' does not match expected '" +
                    policy.expected_repository + "'");
  }
  if (statement.predicate.external_ref != policy.expected_ref) {
    return fail(VerifyStep::policy,
                "ref '" + statement.predicate.external_ref +
                    "' does not match expected '" + policy.expected_ref + "'");
  }
  pass(VerifyStep::policy);

  outcome.passed = true;
  return outcome;
}

}  // namespace kettle

#endif  // KETTLE_VERIFIER_HPP
