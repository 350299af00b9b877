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

#ifndef KETTLE_ERRORS_HPP
#define KETTLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kettle {

// Every failure the library raises carries one of these codes so callers
// (and the CLI exit-code mapping) can dispatch without string matching.
enum class Errc {
  // lock manifest / input verification
  malformed_manifest,
  duplicate_dependency,
  bad_digest,
  input_mismatch,
  missing_blob,
  // merkle
  empty_manifest,
  index_out_of_range,
  // provenance
  no_outputs,
  non_canonicalizable,
  malformed_statement,
  unknown_field,
  wrong_statement_type,
  // attestation
  size_mismatch,
  bad_magic,
  bad_length,
  unsupported_version,
  wrong_order,
  missing_component,
  empty_trust_store,
  // orchestrator
  command_not_found,
  non_zero_exit,
  no_outputs_matched,
  missing_file,
  corrupt_bundle,
  // verifier
  malformed_allowlist,
  duplicate_entry,
  // confidential flow
  pre_attestation_not_verified,
  aborted_before_disclosure,
  aead_failure,
  // plumbing
  malformed_input,
  crypto_failure,
  io_failure,
  invalid_argument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_manifest: return "MalformedManifest";
    case Errc::duplicate_dependency: return "DuplicateDependency";
    case Errc::bad_digest: return "BadDigest";
    case Errc::input_mismatch: return "InputMismatch";
    case Errc::missing_blob: return "MissingBlob";
    case Errc::empty_manifest: return "EmptyManifest";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::no_outputs: return "NoOutputs";
    case Errc::non_canonicalizable: return "NonCanonicalizable";
    case Errc::malformed_statement: return "MalformedStatement";
    case Errc::unknown_field: return "UnknownField";
    case Errc::wrong_statement_type: return "WrongStatementType";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::bad_magic: return "BadMagic";
    case Errc::bad_length: return "BadLength";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::wrong_order: return "WrongOrder";
    case Errc::missing_component: return "MissingComponent";
    case Errc::empty_trust_store: return "EmptyTrustStore";
    case Errc::command_not_found: return "CommandNotFound";
    case Errc::non_zero_exit: return "NonZeroExit";
    case Errc::no_outputs_matched: return "NoOutputsMatched";
    case Errc::missing_file: return "MissingFile";
    case Errc::corrupt_bundle: return "CorruptBundle";
    case Errc::malformed_allowlist: return "MalformedAllowList";
    case Errc::duplicate_entry: return "DuplicateEntry";
    case Errc::pre_attestation_not_verified: return "PreAttestationNotVerified";
    case Errc::aborted_before_disclosure: return "AbortedBeforeDisclosure";
    case Errc::aead_failure: return "AeadFailure";
    case Errc::malformed_input: return "MalformedInput";
    case Errc::crypto_failure: return "CryptoFailure";
    case Errc::io_failure: return "IoFailure";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Dependency substitution detected before the build: carries enough structure
// for callers to name the offending input.
class InputMismatchError : public Error {
 public:
  InputMismatchError(std::string name, std::string expected_hex,
                     std::string actual_hex)
      : Error(Errc::input_mismatch,
              "dependency '" + name + "' digest " + actual_hex +
                  " does not match manifest entry " + expected_hex),
        name_(std::move(name)),
        expected_(std::move(expected_hex)),
        actual_(std::move(actual_hex)) {}

  const std::string& name() const { return name_; }
  const std::string& expected_hex() const { return expected_; }
  const std::string& actual_hex() const { return actual_; }

 private:
  std::string name_;
  std::string expected_;
  std::string actual_;
};

class BuildFailedError : public Error {
 public:
  explicit BuildFailedError(int exit_status, const std::string& command)
      : Error(Errc::non_zero_exit, "build command '" + command +
                                       "' exited with status " +
                                       std::to_string(exit_status)),
        exit_status_(exit_status) {}

  int exit_status() const { return exit_status_; }

 private:
  int exit_status_;
};

}  // namespace kettle

#endif  // KETTLE_ERRORS_HPP
