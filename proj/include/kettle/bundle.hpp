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

#ifndef KETTLE_BUNDLE_HPP
#define KETTLE_BUNDLE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "kettle/attestation.hpp"
#include "kettle/provenance.hpp"

namespace kettle {

// The verifier's sole input: built artifacts, the canonical provenance bytes
// exactly as digested, and the attestation evidence (report + cert chain).
//
// Bundle directory layout:
//   artifacts/<name>   output files
//   provenance.json    canonical statement bytes (the signing target)
//   evidence.json      {report_b64, chain{...}}
//   build.log          captured build output (informational)
struct EvidenceBundle {
  struct Artifact {
    std::string name;
    Bytes bytes;
  };

  std::vector<Artifact> artifacts;
  std::string provenance_bytes;
  AttestationReport report;
  PlatformCertChain chain;
  std::string build_log;
};

namespace detail {

inline void check_artifact_name(const std::string& name) {
  if (name.empty() || name.front() == '/') {
    throw Error(Errc::invalid_argument, "artifact names must be relative");
  }
  std::filesystem::path p(name);
  for (const auto& part : p) {
    if (part == "..") {
      throw Error(Errc::invalid_argument,
                  "artifact names must not contain '..'");
    }
  }
}

}  // namespace detail

inline std::string evidence_to_json(const EvidenceBundle& bundle) {
  Json j{
      {"report_b64", base64_encode(encode_report(bundle.report))},
      {"chain", chain_to_json(bundle.chain)},
  };
  return j.dump(2) + "\n";
}

inline void write_bundle(const EvidenceBundle& bundle,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "artifacts");
  for (const EvidenceBundle::Artifact& a : bundle.artifacts) {
    detail::check_artifact_name(a.name);
    write_file(out_dir / "artifacts" / a.name, ByteView(a.bytes));
  }
  write_file(out_dir / "provenance.json", bundle.provenance_bytes);
  write_file(out_dir / "evidence.json", evidence_to_json(bundle));
  write_file(out_dir / "build.log", bundle.build_log);
}

inline EvidenceBundle read_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  EvidenceBundle bundle;

  fs::path provenance_path = dir / "provenance.json";
  fs::path evidence_path = dir / "evidence.json";
  if (!fs::exists(provenance_path)) {
    throw Error(Errc::missing_file, provenance_path.string());
  }
  if (!fs::exists(evidence_path)) {
    throw Error(Errc::missing_file, evidence_path.string());
  }
  bundle.provenance_bytes = read_file(provenance_path);
  try {
    parse_statement(bundle.provenance_bytes);
  } catch (const Error& e) {
    throw Error(Errc::corrupt_bundle,
                std::string("provenance.json does not parse: ") + e.what());
  }

  try {
    Json ev = parse_json(read_file(evidence_path), Errc::corrupt_bundle);
    require_object(ev, "evidence.json", Errc::corrupt_bundle);
    require_known_fields(ev, {"report_b64", "chain"}, "evidence.json",
                         Errc::corrupt_bundle);
    std::string report_b64 =
        get_string(ev, "report_b64", "evidence.json", Errc::corrupt_bundle);
    bundle.report = decode_report(base64_decode(report_b64));
    bundle.chain = chain_from_json(
        require_field(ev, "chain", "evidence.json", Errc::corrupt_bundle),
        Errc::corrupt_bundle);
  } catch (const Error& e) {
    if (e.code() == Errc::corrupt_bundle) throw;
    throw Error(Errc::corrupt_bundle,
                std::string("evidence.json invalid: ") + e.what());
  }

  fs::path artifacts_dir = dir / "artifacts";
  if (fs::exists(artifacts_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(artifacts_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string name =
          fs::relative(entry.path(), artifacts_dir).generic_string();
      bundle.artifacts.push_back({name, read_file_bytes(entry.path())});
    }
    std::sort(bundle.artifacts.begin(), bundle.artifacts.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
  }

  fs::path log_path = dir / "build.log";
  if (fs::exists(log_path)) {
    bundle.build_log = read_file(log_path);
  }
  return bundle;
}

}  // namespace kettle

#endif  // KETTLE_BUNDLE_HPP
