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

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "kettle/kettle.hpp"

namespace fs = std::filesystem;
using kettle::Errc;
using kettle::Error;
using kettle::Json;

namespace {

// Exit contract: 0 success, 1 verification/build failure, 2 usage or
// malformed input.
constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::input_mismatch:
    case Errc::missing_blob:
    case Errc::command_not_found:
    case Errc::non_zero_exit:
    case Errc::no_outputs_matched:
    case Errc::pre_attestation_not_verified:
    case Errc::aborted_before_disclosure:
    case Errc::aead_failure:
    case Errc::crypto_failure:
      return exit_failure;
    default:
      return exit_usage;  // malformed files, bad flags, broken bundles
  }
}

std::array<uint8_t, 32> parse_nonce32(const std::string& hex) {
  if (hex.size() != 64 || !kettle::is_lower_hex(hex)) {
    throw Error(Errc::malformed_input, "nonce must be 64 lowercase hex chars");
  }
  return kettle::from_hex_fixed<32>(hex);
}

kettle::SemVer parse_version_flag(const std::string& text) {
  auto v = kettle::parse_semver(text);
  if (!v) {
    throw Error(Errc::malformed_input,
                "'" + text + "' is not a three-component version");
  }
  return *v;
}

std::vector<kettle::BootComponent> load_boot_fixture(const fs::path& path) {
  return kettle::boot_components_from_json(kettle::read_file(path));
}

void emit(const Json& j) { std::cout << j.dump() << "\n"; }

// --- build ------------------------------------------------------------------

struct BuildArgs {
  std::string lock_path;
  std::string config_path;
  std::string out_dir;
  std::string nonce_hex;
  std::string boot_fixture_path;
  std::string platform_keys_path;
  bool json = false;
};

int cmd_build(const BuildArgs& args) {
  kettle::LockManifest lock =
      kettle::parse_lock_manifest(kettle::read_file(args.lock_path));
  kettle::PlatformKeys keys =
      kettle::platform_keys_from_json(kettle::read_file(args.platform_keys_path));
  kettle::SimulatedPlatform platform(keys);
  std::vector<kettle::BootComponent> boot =
      load_boot_fixture(args.boot_fixture_path);

  kettle::BuildRequest request;
  request.nonce = args.nonce_hex.empty() ? kettle::random_array<32>()
                                         : parse_nonce32(args.nonce_hex);
  request.config_path = args.config_path;

  fs::path project_dir = fs::absolute(args.lock_path).parent_path();
  kettle::EvidenceBundle bundle =
      kettle::run_attested_build(request, lock, project_dir, platform, boot,
                                 args.out_dir);

  kettle::ProvenanceStatement statement =
      kettle::parse_statement(bundle.provenance_bytes);
  if (args.json) {
    Json subjects = Json::array();
    for (const kettle::Subject& s : statement.subjects) {
      subjects.push_back({{"name", s.name}, {"sha256", s.digest_sha256}});
    }
    emit(Json{{"out_dir", args.out_dir},
              {"nonce_hex", kettle::to_hex(request.nonce)},
              {"measurement_hex", kettle::to_hex(bundle.report.measurement)},
              {"subjects", subjects}});
  } else {
    std::cout << "bundle written to " << args.out_dir << "\n";
    std::cout << "measurement " << kettle::to_hex(bundle.report.measurement)
              << "\n";
    std::cout << "nonce " << kettle::to_hex(request.nonce) << "\n";
    for (const kettle::Subject& s : statement.subjects) {
      std::cout << "subject " << s.name << " sha256 " << s.digest_sha256
                << "\n";
    }
  }
  return exit_ok;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string bundle_dir;
  std::string allowlist_path;
  std::string truststore_path;
  std::string expect_repo;
  std::string expect_ref;
  std::string expect_nonce_hex;
  std::string min_version = "0.0.0";
  uint32_t platform_id = kettle::platform_sim;
  bool json = false;
};

int cmd_verify(const VerifyArgs& args) {
  kettle::EvidenceBundle bundle = kettle::read_bundle(args.bundle_dir);
  kettle::TrustStore store =
      kettle::trust_store_from_json(kettle::read_file(args.truststore_path));

  kettle::VerificationPolicy policy;
  policy.allowlist =
      kettle::load_allowlist(kettle::read_file(args.allowlist_path));
  policy.min_version = parse_version_flag(args.min_version);
  policy.required_platform = static_cast<uint8_t>(args.platform_id);
  policy.expected_repository = args.expect_repo;
  policy.expected_ref = args.expect_ref;
  policy.expected_nonce = parse_nonce32(args.expect_nonce_hex);

  kettle::VerificationOutcome outcome =
      kettle::verify_bundle(bundle, policy, store);
  if (args.json) {
    std::cout << kettle::outcome_to_json(outcome) << "\n";
  } else {
    for (const kettle::StepResult& r : outcome.step_results) {
      std::cout << "step " << kettle::verify_step_name(r.step) << ": "
                << (r.passed ? "pass" : r.reason) << "\n";
    }
    std::cout << (outcome.passed ? "verification passed"
                                 : "verification FAILED")
              << "\n";
  }
  return outcome.passed ? exit_ok : exit_failure;
}

// --- allowlist ---------------------------------------------------------------

struct AllowlistAddArgs {
  std::string file;
  std::string measurement_hex;
  std::string version = "0.4.0";
  uint32_t platform_id = kettle::platform_sim;
  uint32_t min_firmware = 0;
  bool json = false;
};

int cmd_allowlist_add(const AllowlistAddArgs& args) {
  std::vector<kettle::AllowListEntry> entries;
  if (fs::exists(args.file)) {
    entries = kettle::load_allowlist(kettle::read_file(args.file));
  }
  if (args.measurement_hex.size() != 96 ||
      !kettle::is_lower_hex(args.measurement_hex)) {
    throw Error(Errc::malformed_input,
                "--measurement must be 96 lowercase hex chars");
  }
  kettle::AllowListEntry entry;
  entry.measurement = kettle::from_hex_fixed<48>(args.measurement_hex);
  entry.kettle_version = parse_version_flag(args.version);
  entry.platform_id = static_cast<uint8_t>(args.platform_id);
  entry.min_firmware = args.min_firmware;
  for (const kettle::AllowListEntry& existing : entries) {
    if (existing.measurement == entry.measurement &&
        existing.platform_id == entry.platform_id) {
      throw Error(Errc::duplicate_entry,
                  "this measurement/platform pair is already listed");
    }
  }
  entries.push_back(entry);
  kettle::write_file(fs::path(args.file), kettle::allowlist_to_json(entries));
  if (args.json) {
    emit(Json{{"file", args.file}, {"entries", entries.size()}});
  } else {
    std::cout << "allow-list now has " << entries.size() << " entries\n";
  }
  return exit_ok;
}

struct AllowlistCheckArgs {
  std::string file;
  std::string measurement_hex;
  uint32_t firmware = 0;
  std::string min_version = "0.0.0";
  uint32_t platform_id = kettle::platform_sim;
  bool json = false;
};

int cmd_allowlist_check(const AllowlistCheckArgs& args) {
  kettle::VerificationPolicy policy;
  policy.allowlist = kettle::load_allowlist(kettle::read_file(args.file));
  policy.min_version = parse_version_flag(args.min_version);
  policy.required_platform = static_cast<uint8_t>(args.platform_id);
  if (args.measurement_hex.size() != 96 ||
      !kettle::is_lower_hex(args.measurement_hex)) {
    throw Error(Errc::malformed_input,
                "--measurement must be 96 lowercase hex chars");
  }
  kettle::AllowlistMatch match = kettle::check_allowlist(
      kettle::from_hex_fixed<48>(args.measurement_hex), args.firmware, policy);
  if (args.json) {
    emit(Json{{"accepted", match.ok},
              {"reason", match.ok ? "ok" : match.reason}});
  } else {
    std::cout << (match.ok ? "accepted" : "rejected: " + match.reason) << "\n";
  }
  return match.ok ? exit_ok : exit_failure;
}

// --- inclusion proofs ----------------------------------------------------------

struct ProveInclusionArgs {
  std::string lock_path;
  std::string label;
  int64_t index = -1;
  std::string out_path;
  bool json = false;
};

int cmd_prove_inclusion(const ProveInclusionArgs& args) {
  kettle::LockManifest lock =
      kettle::parse_lock_manifest(kettle::read_file(args.lock_path));
  kettle::InputManifest inputs = kettle::enumerate_inputs(lock);
  kettle::MerkleTree tree = kettle::build_tree(inputs);

  size_t leaf_index = 0;
  if (!args.label.empty()) {
    bool found = false;
    for (size_t i = 0; i < inputs.ordered_leaves.size(); ++i) {
      if (inputs.ordered_leaves[i].label == args.label) {
        leaf_index = i;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(Errc::malformed_input,
                  "no leaf labelled '" + args.label + "'");
    }
  } else if (args.index >= 0) {
    leaf_index = static_cast<size_t>(args.index);
  } else {
    throw Error(Errc::malformed_input, "pass --label or --index");
  }

  kettle::InclusionProof proof = kettle::prove_inclusion(tree, leaf_index);
  std::string proof_json = kettle::proof_to_json(proof);
  if (!args.out_path.empty()) {
    kettle::write_file(fs::path(args.out_path), proof_json + "\n");
  }
  if (args.json) {
    emit(Json{{"root_hex", kettle::to_hex(tree.root())},
              {"label", inputs.ordered_leaves[leaf_index].label},
              {"proof", Json::parse(proof_json)}});
  } else {
    std::cout << "root " << kettle::to_hex(tree.root()) << "\n";
    std::cout << "leaf " << leaf_index << " ("
              << inputs.ordered_leaves[leaf_index].label << ")\n";
    std::cout << proof_json << "\n";
  }
  return exit_ok;
}

struct VerifyInclusionArgs {
  std::string root_hex;
  std::string proof_path;
  bool json = false;
};

int cmd_verify_inclusion(const VerifyInclusionArgs& args) {
  if (args.root_hex.size() != 64 || !kettle::is_lower_hex(args.root_hex)) {
    throw Error(Errc::malformed_input, "--root must be 64 lowercase hex chars");
  }
  kettle::InclusionProof proof =
      kettle::proof_from_json(kettle::read_file(args.proof_path));
  bool ok = kettle::verify_inclusion(
      kettle::from_hex_fixed<32>(args.root_hex), proof);
  if (args.json) {
    emit(Json{{"verified", ok}});
  } else {
    std::cout << (ok ? "inclusion verified" : "inclusion NOT verified") << "\n";
  }
  return ok ? exit_ok : exit_failure;
}

// --- keygen ------------------------------------------------------------------

struct KeygenArgs {
  std::string seed_hex;
  std::string out_path;
  std::string truststore_path;
  uint32_t platform_id = kettle::platform_sim;
  uint32_t firmware = 1;
  bool json = false;
};

int cmd_keygen(const KeygenArgs& args) {
  std::optional<std::array<uint8_t, 32>> seed;
  if (!args.seed_hex.empty()) {
    seed = parse_nonce32(args.seed_hex);
  }
  kettle::PlatformKeys keys = kettle::platform_keygen(
      seed, static_cast<uint8_t>(args.platform_id), args.firmware);
  kettle::write_file(fs::path(args.out_path),
                     kettle::platform_keys_to_json(keys));

  if (!args.truststore_path.empty()) {
    kettle::TrustStore store;
    if (fs::exists(args.truststore_path)) {
      store = kettle::trust_store_from_json(
          kettle::read_file(args.truststore_path));
    }
    store.roots[keys.chain.root_key_id] = keys.root.public_key;
    kettle::write_file(fs::path(args.truststore_path),
                       kettle::trust_store_to_json(store));
  }

  if (args.json) {
    emit(Json{{"keys_file", args.out_path},
              {"root_key_id_hex", kettle::to_hex(keys.chain.root_key_id)},
              {"platform_public_key_hex",
               kettle::to_hex(keys.chain.platform_public_key)}});
  } else {
    std::cout << "platform keys written to " << args.out_path << "\n";
    std::cout << "root key id " << kettle::to_hex(keys.chain.root_key_id)
              << "\n";
  }
  return exit_ok;
}

// --- confidential demo -----------------------------------------------------------

struct DemoArgs {
  std::string lock_path;
  std::string config_path;
  std::string boot_fixture_path;
  std::string tamper = "none";
  std::string seed_hex;
  std::string nonce_hex;
  bool json = false;
};

int cmd_confidential_demo(const DemoArgs& args) {
  auto scenario = kettle::tamper_scenario_from_name(args.tamper);
  if (!scenario) {
    throw Error(Errc::malformed_input,
                "unknown --tamper scenario '" + args.tamper +
                    "' (wrong-measurement, replayed-cvm, "
                    "substituted-channel-key, unknown-root, none)");
  }

  kettle::ConfidentialSessionParams params;
  params.lock_bytes = kettle::read_file(args.lock_path);
  params.config_bytes = kettle::read_file(args.config_path);
  params.tamper = *scenario;

  // project files travel inside the sealed archive
  fs::path project_dir = fs::absolute(args.lock_path).parent_path();
  fs::path lock_abs = fs::absolute(args.lock_path);
  fs::path config_abs = fs::absolute(args.config_path);
  for (const auto& entry : fs::recursive_directory_iterator(project_dir)) {
    if (!entry.is_regular_file()) continue;
    fs::path abs = fs::absolute(entry.path());
    if (abs == lock_abs || abs == config_abs) continue;
    std::string rel = fs::relative(abs, project_dir).generic_string();
    params.source_files[rel] = kettle::read_file_bytes(abs);
  }

  params.boot_fixture =
      args.boot_fixture_path.empty()
          ? std::vector<kettle::BootComponent>{
                {kettle::ComponentKind::firmware,
                 kettle::to_byte_vector("OVMF-demo-1.0")},
                {kettle::ComponentKind::kernel,
                 kettle::to_byte_vector("vmlinuz-demo")},
                {kettle::ComponentKind::cmdline,
                 kettle::to_byte_vector("console=ttyS0 ro quiet")},
                {kettle::ComponentKind::initrd,
                 kettle::to_byte_vector("initrd-demo")},
                {kettle::ComponentKind::vm_image,
                 kettle::to_byte_vector("kettle-os-demo")},
                {kettle::ComponentKind::kettle,
                 kettle::to_byte_vector("kettle-binary-demo")}}
          : load_boot_fixture(args.boot_fixture_path);

  std::optional<std::array<uint8_t, 32>> seed;
  if (!args.seed_hex.empty()) seed = parse_nonce32(args.seed_hex);
  params.platform_keys = kettle::platform_keygen(seed);
  params.store.roots[params.platform_keys.chain.root_key_id] =
      params.platform_keys.root.public_key;
  params.build_nonce = args.nonce_hex.empty() ? kettle::random_array<32>()
                                              : parse_nonce32(args.nonce_hex);

  kettle::LockManifest lock = kettle::parse_lock_manifest(params.lock_bytes);
  params.policy.allowlist.push_back(
      {kettle::measure_boot_chain(params.boot_fixture),
       *kettle::parse_semver(std::string(kettle::kettle_version)),
       params.platform_keys.chain.platform_id,
       params.platform_keys.chain.firmware_version});
  params.policy.min_version = kettle::SemVer{0, 1, 0};
  params.policy.required_platform = params.platform_keys.chain.platform_id;
  params.policy.expected_repository = lock.source.repository;
  params.policy.expected_ref = lock.source.ref;
  params.policy.expected_nonce = params.build_nonce;

  kettle::SessionResult result = kettle::confidential_build_session(params);

  Json output{{"tamper", args.tamper},
              {"aborted", result.aborted()},
              {"transcript", kettle::transcript_to_json(result.transcript)}};
  if (result.aborted()) {
    output["abort_reason"] = *result.abort_reason;
  } else {
    kettle::VerificationOutcome outcome =
        kettle::verify_bundle(*result.bundle, params.policy, params.store);
    output["verify"] = Json::parse(kettle::outcome_to_json(outcome));
  }
  if (args.json) {
    emit(output);
  } else if (result.aborted()) {
    std::cout << "AbortedBeforeDisclosure: " << *result.abort_reason << "\n";
    std::cout << "plaintext source bytes observed by host: "
              << result.transcript.plaintext_source_bytes() << "\n";
  } else {
    std::cout << "confidential build completed\n";
    std::cout << output["transcript"].dump(2) << "\n";
    std::cout << "verifier: "
              << (output["verify"]["passed"].get<bool>() ? "passed" : "failed")
              << "\n";
  }
  return result.aborted() ? exit_failure : exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kettle — attested builds on a simulated TEE platform"};
  app.require_subcommand(1);

  BuildArgs build_args;
  CLI::App* build = app.add_subcommand("build", "run an attested build");
  build->add_option("--lock", build_args.lock_path, "kettle.lock.json path")
      ->required();
  build->add_option("--config", build_args.config_path, "kettle-build.json path")
      ->required();
  build->add_option("--out", build_args.out_dir, "bundle output directory")
      ->required();
  build->add_option("--nonce", build_args.nonce_hex,
                    "build request nonce (64 hex); random when omitted");
  build->add_option("--boot-fixture", build_args.boot_fixture_path,
                    "boot components JSON")
      ->required();
  build->add_option("--platform-keys", build_args.platform_keys_path,
                    "simulated platform keys JSON")
      ->required();
  build->add_flag("--json", build_args.json, "machine-readable output");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "verify an evidence bundle");
  verify->add_option("--bundle", verify_args.bundle_dir, "bundle directory")
      ->required();
  verify->add_option("--allowlist", verify_args.allowlist_path,
                     "allowlist.json path")
      ->required();
  verify->add_option("--truststore", verify_args.truststore_path,
                     "trust store JSON path")
      ->required();
  verify->add_option("--expect-repo", verify_args.expect_repo,
                     "expected source repository")
      ->required();
  verify->add_option("--expect-ref", verify_args.expect_ref,
                     "expected source ref")
      ->required();
  verify->add_option("--expect-nonce", verify_args.expect_nonce_hex,
                     "expected build nonce (64 hex)")
      ->required();
  verify->add_option("--min-version", verify_args.min_version,
                     "minimum kettle version");
  verify->add_option("--platform", verify_args.platform_id,
                     "required platform id (0=sim, 1=sev-snp, 2=tdx)");
  verify->add_flag("--json", verify_args.json, "machine-readable output");

  CLI::App* allowlist =
      app.add_subcommand("allowlist", "manage measurement allow-lists");
  allowlist->require_subcommand(1);
  AllowlistAddArgs al_add_args;
  CLI::App* al_add = allowlist->add_subcommand("add", "add a measurement");
  al_add->add_option("--file", al_add_args.file, "allowlist.json path")
      ->required();
  al_add->add_option("--measurement", al_add_args.measurement_hex,
                     "launch measurement (96 hex)")
      ->required();
  al_add->add_option("--kettle-version", al_add_args.version,
                     "kettle version of the entry");
  al_add->add_option("--platform", al_add_args.platform_id, "platform id");
  al_add->add_option("--min-firmware", al_add_args.min_firmware,
                     "minimum firmware version");
  al_add->add_flag("--json", al_add_args.json, "machine-readable output");

  AllowlistCheckArgs al_check_args;
  CLI::App* al_check =
      allowlist->add_subcommand("check", "check a measurement against policy");
  al_check->add_option("--file", al_check_args.file, "allowlist.json path")
      ->required();
  al_check->add_option("--measurement", al_check_args.measurement_hex,
                       "launch measurement (96 hex)")
      ->required();
  al_check->add_option("--firmware", al_check_args.firmware,
                       "chain firmware version");
  al_check->add_option("--min-version", al_check_args.min_version,
                       "policy minimum version");
  al_check->add_option("--platform", al_check_args.platform_id,
                       "required platform id");
  al_check->add_flag("--json", al_check_args.json, "machine-readable output");

  ProveInclusionArgs prove_args;
  CLI::App* prove = app.add_subcommand(
      "prove-inclusion", "prove one input's membership in the manifest tree");
  prove->add_option("--lock", prove_args.lock_path, "kettle.lock.json path")
      ->required();
  prove->add_option("--label", prove_args.label,
                    "leaf label (e.g. dep.serde@1.0.228)");
  prove->add_option("--index", prove_args.index, "leaf index");
  prove->add_option("--out", prove_args.out_path, "write proof JSON here");
  prove->add_flag("--json", prove_args.json, "machine-readable output");

  VerifyInclusionArgs vinc_args;
  CLI::App* vinc = app.add_subcommand("verify-inclusion",
                                      "check an inclusion proof against a root");
  vinc->add_option("--root", vinc_args.root_hex, "merkle root (64 hex)")
      ->required();
  vinc->add_option("--proof", vinc_args.proof_path, "proof JSON path")
      ->required();
  vinc->add_flag("--json", vinc_args.json, "machine-readable output");

  KeygenArgs keygen_args;
  CLI::App* keygen =
      app.add_subcommand("keygen", "generate simulated platform keys");
  keygen->add_option("--seed", keygen_args.seed_hex,
                     "deterministic seed (64 hex); random when omitted");
  keygen->add_option("--out", keygen_args.out_path, "platform keys output path")
      ->required();
  keygen->add_option("--truststore", keygen_args.truststore_path,
                     "also add the root to this trust store file");
  keygen->add_option("--platform", keygen_args.platform_id, "platform id");
  keygen->add_option("--firmware", keygen_args.firmware, "firmware version");
  keygen->add_flag("--json", keygen_args.json, "machine-readable output");

  DemoArgs demo_args;
  CLI::App* demo = app.add_subcommand(
      "confidential-demo",
      "run the three-actor pre-attested confidential build locally");
  demo->add_option("--lock", demo_args.lock_path, "kettle.lock.json path")
      ->required();
  demo->add_option("--config", demo_args.config_path, "kettle-build.json path")
      ->required();
  demo->add_option("--boot-fixture", demo_args.boot_fixture_path,
                   "boot components JSON (builtin demo chain when omitted)");
  demo->add_option("--tamper", demo_args.tamper,
                   "host tamper scenario to simulate");
  demo->add_option("--seed", demo_args.seed_hex,
                   "deterministic platform key seed (64 hex)");
  demo->add_option("--nonce", demo_args.nonce_hex,
                   "build nonce (64 hex); random when omitted");
  demo->add_flag("--json", demo_args.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*build) return cmd_build(build_args);
    if (*verify) return cmd_verify(verify_args);
    if (*al_add) return cmd_allowlist_add(al_add_args);
    if (*al_check) return cmd_allowlist_check(al_check_args);
    if (*prove) return cmd_prove_inclusion(prove_args);
    if (*vinc) return cmd_verify_inclusion(vinc_args);
    if (*keygen) return cmd_keygen(keygen_args);
    if (*demo) return cmd_confidential_demo(demo_args);
  } catch (const Error& e) {
    std::cerr << "kettle: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "kettle: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}
