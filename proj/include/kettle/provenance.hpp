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

#ifndef KETTLE_PROVENANCE_HPP
#define KETTLE_PROVENANCE_HPP

#include <cctype>
#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kettle/canonical_json.hpp"
#include "kettle/crypto.hpp"
#include "kettle/lock_manifest.hpp"

namespace kettle {

inline constexpr std::string_view statement_type_v1 =
    "https://in-toto.io/Statement/v1";
inline constexpr std::string_view slsa_predicate_type_v1 =
    "https://slsa.dev/provenance/v1";
inline constexpr std::string_view default_builder_id =
    "https://kettle.confidential.ai/tee-builder/v1";

struct Subject {
  std::string name;
  std::string digest_sha256;  // 64 lowercase hex
};

struct ResourceDescriptor {
  std::string uri;  // PURL or git+https form
  std::map<std::string, std::string> digest;  // sha256 / gitCommit
  std::optional<std::string> name;
};

struct SlsaPredicate {
  std::string build_type;
  std::string external_repository;
  std::string external_ref;
  std::string tee_platform;
  std::string kettle_version;
  bool source_signed = false;
  std::string input_merkle_root;  // 64 lowercase hex
  std::string build_nonce;        // 64 lowercase hex
  std::vector<ResourceDescriptor> resolved_dependencies;
  std::string builder_id;
  std::string invocation_id;
  std::string started_on;   // RFC 3339 UTC, second precision
  std::string finished_on;
};

struct ProvenanceStatement {
  std::vector<Subject> subjects;
  SlsaPredicate predicate;
};

struct BuildMetadata {
  std::string build_type;
  std::string builder_id = std::string(default_builder_id);
  std::string invocation_id;
  std::string started_on;
  std::string finished_on;
  std::string tee_platform;
  std::string kettle_version = std::string(kettle::kettle_version);
};

// --- timestamps ----------------------------------------------------------

inline bool is_rfc3339_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SSZ, exactly
  if (s.size() != 20) return false;
  auto digit = [&](size_t i) { return std::isdigit(static_cast<unsigned char>(s[i])) != 0; };
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u}) {
    if (!digit(i)) return false;
  }
  if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != 'Z') {
    return false;
  }
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  int hour = (s[11] - '0') * 10 + (s[12] - '0');
  int minute = (s[14] - '0') * 10 + (s[15] - '0');
  int second = (s[17] - '0') * 10 + (s[18] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31 && hour <= 23 &&
         minute <= 59 && second <= 60;
}

inline std::string format_rfc3339_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

// --- assembly ------------------------------------------------------------

inline ProvenanceStatement assemble_statement(
    const InputManifest& manifest, const LockManifest& lock,
    const std::vector<std::pair<std::string, std::string>>& outputs,
    const BuildMetadata& meta, const std::array<uint8_t, 32>& nonce) {
  if (outputs.empty()) {
    throw Error(Errc::no_outputs, "a build must produce at least one output");
  }
  if (!manifest.merkle_root) {
    throw Error(Errc::invalid_argument,
                "input manifest has no merkle root; build the tree first");
  }
  if (meta.build_type.empty() || meta.builder_id.empty()) {
    throw Error(Errc::invalid_argument,
                "build_type and builder_id must be non-empty URIs");
  }
  if (!is_rfc3339_utc(meta.started_on) || !is_rfc3339_utc(meta.finished_on) ||
      meta.finished_on < meta.started_on) {
    throw Error(Errc::invalid_argument, "invalid build timestamps");
  }

  ProvenanceStatement st;
  for (const auto& [name, digest_hex] : outputs) {
    st.subjects.push_back({name, digest_hex});
  }

  SlsaPredicate& p = st.predicate;
  p.build_type = meta.build_type;
  p.external_repository = lock.source.repository;
  p.external_ref = lock.source.ref;
  p.tee_platform = meta.tee_platform;
  p.kettle_version = meta.kettle_version;
  p.source_signed = lock.source.signed_;
  p.input_merkle_root = to_hex(*manifest.merkle_root);
  p.build_nonce = to_hex(nonce);

  // the source resolution always leads the dependency list
  ResourceDescriptor git;
  git.uri = "git+" + lock.source.repository + "@" + lock.source.ref;
  git.digest["gitCommit"] = lock.source.commit_id;
  p.resolved_dependencies.push_back(std::move(git));
  for (const DependencyEntry& dep : lock.dependencies) {
    ResourceDescriptor rd;
    rd.uri = dep.purl;
    rd.digest["sha256"] = dep.digest;
    p.resolved_dependencies.push_back(std::move(rd));
  }

  p.builder_id = meta.builder_id;
  p.invocation_id = meta.invocation_id;
  p.started_on = meta.started_on;
  p.finished_on = meta.finished_on;
  return st;
}

// --- canonical serialization ----------------------------------------------
// The canonical bytes are the signing target: the attestation report's
// report-data field commits to SHA-256 of exactly these bytes, so the
// on-disk provenance.json must be this serialization and nothing else.

inline std::string canonical_encode(const ProvenanceStatement& st) {
  using CV = CanonicalValue;

  CV::Array subjects;
  for (const Subject& s : st.subjects) {
    subjects.push_back(CV(CV::Object{
        {"digest", CV(CV::Object{{"sha256", CV(s.digest_sha256)}})},
        {"name", CV(s.name)},
    }));
  }

  CV::Array resolved;
  for (const ResourceDescriptor& rd : st.predicate.resolved_dependencies) {
    CV::Object digest;
    for (const auto& [alg, value] : rd.digest) {
      digest.emplace(alg, CV(value));
    }
    CV::Object entry{{"digest", CV(std::move(digest))}, {"uri", CV(rd.uri)}};
    if (rd.name) entry.emplace("name", CV(*rd.name));
    resolved.push_back(CV(std::move(entry)));
  }

  CV::Object build_definition{
      {"buildType", CV(st.predicate.build_type)},
      {"externalParameters",
       CV(CV::Object{{"ref", CV(st.predicate.external_ref)},
                     {"repository", CV(st.predicate.external_repository)}})},
      {"internalParameters",
       CV(CV::Object{{"build_nonce", CV(st.predicate.build_nonce)},
                     {"input_merkle_root", CV(st.predicate.input_merkle_root)},
                     {"kettle_version", CV(st.predicate.kettle_version)},
                     {"source_signed", CV(st.predicate.source_signed)},
                     {"tee_platform", CV(st.predicate.tee_platform)}})},
      {"resolvedDependencies", CV(std::move(resolved))},
  };

  CV::Object run_details{
      {"builder", CV(CV::Object{{"id", CV(st.predicate.builder_id)}})},
      {"metadata",
       CV(CV::Object{{"finishedOn", CV(st.predicate.finished_on)},
                     {"invocationId", CV(st.predicate.invocation_id)},
                     {"startedOn", CV(st.predicate.started_on)}})},
  };

  CV root(CV::Object{
      {"_type", CV(statement_type_v1)},
      {"predicate", CV(CV::Object{{"buildDefinition", CV(std::move(build_definition))},
                                  {"runDetails", CV(std::move(run_details))}})},
      {"predicateType", CV(slsa_predicate_type_v1)},
      {"subject", CV(std::move(subjects))},
  });
  return root.encode();
}

inline Digest32 statement_digest(const ProvenanceStatement& st) {
  return sha256(canonical_encode(st));
}

// --- parsing ---------------------------------------------------------------
// Strict: the digest binds exact bytes, so unknown fields are rejected
// rather than ignored. Accepts any JSON formatting (whitespace, key order);
// canonical_encode(parse(x)) is the fixpoint form.

inline ProvenanceStatement parse_statement(std::string_view bytes) {
  constexpr Errc err = Errc::malformed_statement;
  Json j = parse_json(bytes, err);
  require_object(j, "statement", err);
  require_known_fields(j, {"_type", "subject", "predicateType", "predicate"},
                       "statement", Errc::unknown_field);

  // reject values outside the canonical schema (floats, nulls) up front
  try {
    to_canonical(j);
  } catch (const Error& e) {
    throw Error(err, e.what());
  }

  if (get_string(j, "_type", "statement", err) != statement_type_v1) {
    throw Error(Errc::wrong_statement_type, "unsupported statement _type");
  }
  if (get_string(j, "predicateType", "statement", err) !=
      slsa_predicate_type_v1) {
    throw Error(Errc::wrong_statement_type, "unsupported predicateType");
  }

  ProvenanceStatement st;

  const Json& subjects = require_field(j, "subject", "statement", err);
  if (!subjects.is_array() || subjects.empty()) {
    throw Error(err, "subject must be a non-empty array");
  }
  for (const Json& s : subjects) {
    require_object(s, "subject", err);
    require_known_fields(s, {"name", "digest"}, "subject", Errc::unknown_field);
    Subject subject;
    subject.name = get_string(s, "name", "subject", err);
    if (subject.name.empty()) {
      throw Error(err, "subject name must be non-empty");
    }
    const Json& digest = require_field(s, "digest", "subject", err);
    require_object(digest, "subject digest", err);
    require_known_fields(digest, {"sha256"}, "subject digest",
                         Errc::unknown_field);
    subject.digest_sha256 = get_hex(digest, "sha256", "subject digest", 64, err);
    st.subjects.push_back(std::move(subject));
  }

  const Json& predicate = require_field(j, "predicate", "statement", err);
  require_object(predicate, "predicate", err);
  require_known_fields(predicate, {"buildDefinition", "runDetails"},
                       "predicate", Errc::unknown_field);

  const Json& bd = require_field(predicate, "buildDefinition", "predicate", err);
  require_object(bd, "buildDefinition", err);
  require_known_fields(bd,
                       {"buildType", "externalParameters", "internalParameters",
                        "resolvedDependencies"},
                       "buildDefinition", Errc::unknown_field);
  SlsaPredicate& p = st.predicate;
  p.build_type = get_string(bd, "buildType", "buildDefinition", err);
  if (p.build_type.empty()) {
    throw Error(err, "buildType must be a non-empty URI");
  }

  const Json& ext = require_field(bd, "externalParameters", "buildDefinition", err);
  require_object(ext, "externalParameters", err);
  require_known_fields(ext, {"repository", "ref"}, "externalParameters",
                       Errc::unknown_field);
  p.external_repository = get_string(ext, "repository", "externalParameters", err);
  p.external_ref = get_string(ext, "ref", "externalParameters", err);

  const Json& internal = require_field(bd, "internalParameters",
                                       "buildDefinition", err);
  require_object(internal, "internalParameters", err);
  require_known_fields(internal,
                       {"tee_platform", "kettle_version", "source_signed",
                        "input_merkle_root", "build_nonce"},
                       "internalParameters", Errc::unknown_field);
  p.tee_platform = get_string(internal, "tee_platform", "internalParameters", err);
  p.kettle_version =
      get_string(internal, "kettle_version", "internalParameters", err);
  p.source_signed = get_bool(internal, "source_signed", "internalParameters", err);
  p.input_merkle_root =
      get_hex(internal, "input_merkle_root", "internalParameters", 64, err);
  p.build_nonce = get_hex(internal, "build_nonce", "internalParameters", 64, err);

  const Json& resolved = require_field(bd, "resolvedDependencies",
                                       "buildDefinition", err);
  if (!resolved.is_array() || resolved.empty()) {
    throw Error(err, "resolvedDependencies must be a non-empty array");
  }
  for (const Json& r : resolved) {
    require_object(r, "resolvedDependencies entry", err);
    require_known_fields(r, {"uri", "digest", "name"},
                         "resolvedDependencies entry", Errc::unknown_field);
    ResourceDescriptor rd;
    rd.uri = get_string(r, "uri", "resolvedDependencies entry", err);
    const Json& digest = require_field(r, "digest", "resolvedDependencies entry", err);
    require_object(digest, "resource digest", err);
    require_known_fields(digest, {"sha256", "gitCommit"}, "resource digest",
                         Errc::unknown_field);
    if (digest.empty()) {
      throw Error(err, "resource digest must have at least one entry");
    }
    for (auto it = digest.begin(); it != digest.end(); ++it) {
      if (!it.value().is_string()) {
        throw Error(err, "resource digest values must be strings");
      }
      rd.digest[it.key()] = it.value().get<std::string>();
    }
    if (r.contains("name")) {
      rd.name = get_string(r, "name", "resolvedDependencies entry", err);
    }
    p.resolved_dependencies.push_back(std::move(rd));
  }

  const Json& rd = require_field(predicate, "runDetails", "predicate", err);
  require_object(rd, "runDetails", err);
  require_known_fields(rd, {"builder", "metadata"}, "runDetails",
                       Errc::unknown_field);
  const Json& builder = require_field(rd, "builder", "runDetails", err);
  require_object(builder, "builder", err);
  require_known_fields(builder, {"id"}, "builder", Errc::unknown_field);
  p.builder_id = get_string(builder, "id", "builder", err);
  if (p.builder_id.empty()) {
    throw Error(err, "builder.id must be a non-empty URI");
  }
  const Json& metadata = require_field(rd, "metadata", "runDetails", err);
  require_object(metadata, "metadata", err);
  require_known_fields(metadata, {"invocationId", "startedOn", "finishedOn"},
                       "metadata", Errc::unknown_field);
  p.invocation_id = get_string(metadata, "invocationId", "metadata", err);
  p.started_on = get_string(metadata, "startedOn", "metadata", err);
  p.finished_on = get_string(metadata, "finishedOn", "metadata", err);
  if (!is_rfc3339_utc(p.started_on) || !is_rfc3339_utc(p.finished_on)) {
    throw Error(err, "timestamps must be RFC 3339 UTC, second precision");
  }
  if (p.finished_on < p.started_on) {
    throw Error(err, "finishedOn precedes startedOn");
  }

  return st;
}

}  // namespace kettle

#endif  // KETTLE_PROVENANCE_HPP
