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

#ifndef KETTLE_ORCHESTRATOR_HPP
#define KETTLE_ORCHESTRATOR_HPP

#include <fcntl.h>
#include <fnmatch.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kettle/bundle.hpp"
#include "kettle/lock_manifest.hpp"
#include "kettle/merkle.hpp"
#include "kettle/provenance.hpp"
#include "kettle/verifier.hpp"

namespace kettle {

struct BuildRequest {
  std::array<uint8_t, 32> nonce{};  // fresh per request
  std::filesystem::path config_path;
};

struct BuildConfig {
  std::string build_type;
  std::vector<std::vector<std::string>> commands;
  std::vector<std::string> output_globs;
  std::vector<std::string> env_allowlist;
};

// kettle-build.json: { "build_type": URI, "commands": [[argv...]],
// "outputs": [globs], "env_allowlist": [names] }
inline BuildConfig load_build_config(std::string_view bytes) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(bytes, err);
  require_object(j, "kettle-build.json", err);
  require_known_fields(j, {"build_type", "commands", "outputs", "env_allowlist"},
                       "kettle-build.json", err);
  BuildConfig config;
  config.build_type = get_string(j, "build_type", "kettle-build.json", err);
  if (config.build_type.empty()) {
    throw Error(err, "build_type must be a non-empty URI");
  }
  const Json& commands = require_field(j, "commands", "kettle-build.json", err);
  if (!commands.is_array() || commands.empty()) {
    throw Error(err, "commands must be a non-empty array");
  }
  for (const Json& argv : commands) {
    if (!argv.is_array() || argv.empty()) {
      throw Error(err, "each command must be a non-empty argv array");
    }
    std::vector<std::string> cmd;
    for (const Json& arg : argv) {
      if (!arg.is_string()) {
        throw Error(err, "command arguments must be strings");
      }
      cmd.push_back(arg.get<std::string>());
    }
    config.commands.push_back(std::move(cmd));
  }
  const Json& outputs = require_field(j, "outputs", "kettle-build.json", err);
  if (!outputs.is_array() || outputs.empty()) {
    throw Error(err, "outputs must be a non-empty array of globs");
  }
  for (const Json& glob : outputs) {
    if (!glob.is_string()) {
      throw Error(err, "output globs must be strings");
    }
    config.output_globs.push_back(glob.get<std::string>());
  }
  const Json& env = require_field(j, "env_allowlist", "kettle-build.json", err);
  if (!env.is_array()) {
    throw Error(err, "env_allowlist must be an array");
  }
  for (const Json& name : env) {
    if (!name.is_string()) {
      throw Error(err, "env_allowlist entries must be strings");
    }
    config.env_allowlist.push_back(name.get<std::string>());
  }
  return config;
}

// Injectable clock so test bundles can be byte-identical across runs.
using BuildClock = std::function<std::time_t()>;

struct OrchestratorOptions {
  BuildClock clock = [] { return std::time(nullptr); };
  std::string builder_id = std::string(default_builder_id);
  std::string kettle_version_override;  // empty → library version
  std::string invocation_id_override;   // empty → derived from the nonce
};

namespace detail {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix) {
    namespace fs = std::filesystem;
    std::random_device rd;
    for (int attempt = 0; attempt < 16; ++attempt) {
      fs::path candidate =
          fs::temp_directory_path() /
          (prefix + std::to_string(::getpid()) + "-" + std::to_string(rd()));
      std::error_code ec;
      if (fs::create_directory(candidate, ec) && !ec) {
        path_ = candidate;
        return;
      }
    }
    throw Error(Errc::io_failure, "cannot create temporary directory");
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Copies the project into the workspace, skipping `exclude` (a bundle
// directory nested inside the project must not leak stale artifacts into a
// rebuild).
inline void copy_tree(const std::filesystem::path& from,
                      const std::filesystem::path& to,
                      const std::filesystem::path& exclude = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(to);
  auto it = fs::recursive_directory_iterator(from);
  for (auto entry = fs::begin(it); entry != fs::end(it); ++entry) {
    if (!exclude.empty() && entry->path() == exclude) {
      entry.disable_recursion_pending();
      continue;
    }
    fs::path rel = fs::relative(entry->path(), from);
    if (entry->is_directory()) {
      fs::create_directories(to / rel);
    } else if (entry->is_regular_file()) {
      fs::create_directories((to / rel).parent_path());
      fs::copy_file(entry->path(), to / rel,
                    fs::copy_options::overwrite_existing);
    }
  }
}

inline std::string shell_join(const std::vector<std::string>& argv) {
  std::string out;
  for (const std::string& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

// Resolves argv[0] the way exec would, but against the scrubbed PATH, so a
// missing binary is CommandNotFound rather than a 127 exit.
inline std::optional<std::string> resolve_program(
    const std::string& name, const std::filesystem::path& workspace,
    const std::vector<std::string>& env) {
  namespace fs = std::filesystem;
  auto executable = [](const fs::path& p) {
    return fs::exists(p) && fs::is_regular_file(p) &&
           ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) {
    fs::path p = fs::path(name).is_absolute() ? fs::path(name)
                                              : workspace / name;
    if (executable(p)) return p.string();
    return std::nullopt;
  }
  for (const std::string& var : env) {
    if (var.rfind("PATH=", 0) != 0) continue;
    std::string path_value = var.substr(5);
    size_t start = 0;
    while (start <= path_value.size()) {
      size_t end = path_value.find(':', start);
      std::string dir = path_value.substr(
          start, end == std::string::npos ? std::string::npos : end - start);
      if (!dir.empty()) {
        fs::path p = fs::path(dir) / name;
        if (executable(p)) return p.string();
      }
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Runs the configured commands in `workspace` with the environment reduced
// to the allow-list plus SOURCE_DATE_EPOCH=0 and HOME=workspace. Output is
// appended to `log_path`.
inline void execute_build(const BuildConfig& config,
                          const std::filesystem::path& workspace,
                          const std::filesystem::path& log_path) {
  std::vector<std::string> env;
  for (const std::string& name : config.env_allowlist) {
    if (name == "SOURCE_DATE_EPOCH" || name == "HOME") continue;
    if (const char* value = std::getenv(name.c_str())) {
      env.push_back(name + "=" + value);
    }
  }
  env.push_back("SOURCE_DATE_EPOCH=0");
  env.push_back("HOME=" + workspace.string());

  for (const std::vector<std::string>& argv : config.commands) {
    std::optional<std::string> program =
        detail::resolve_program(argv[0], workspace, env);
    if (!program) {
      throw Error(Errc::command_not_found,
                  "'" + argv[0] + "' not found in the scrubbed PATH");
    }

    int log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (log_fd < 0) {
      throw Error(Errc::io_failure, "cannot open build log");
    }

    std::vector<char*> argv_ptrs;
    for (const std::string& a : argv) {
      argv_ptrs.push_back(const_cast<char*>(a.c_str()));
    }
    argv_ptrs.push_back(nullptr);
    std::vector<char*> env_ptrs;
    for (const std::string& e : env) {
      env_ptrs.push_back(const_cast<char*>(e.c_str()));
    }
    env_ptrs.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) {
      ::close(log_fd);
      throw Error(Errc::io_failure, "fork failed");
    }
    if (pid == 0) {
      if (::chdir(workspace.c_str()) != 0) _exit(126);
      ::dup2(log_fd, STDOUT_FILENO);
      ::dup2(log_fd, STDERR_FILENO);
      ::close(log_fd);
      ::execve(program->c_str(), argv_ptrs.data(), env_ptrs.data());
      _exit(127);
    }
    ::close(log_fd);
    int status = 0;
    if (::waitpid(pid, &status, 0) < 0) {
      throw Error(Errc::io_failure, "waitpid failed");
    }
    if (!WIFEXITED(status)) {
      throw BuildFailedError(128, detail::shell_join(argv));
    }
    if (WEXITSTATUS(status) != 0) {
      throw BuildFailedError(WEXITSTATUS(status), detail::shell_join(argv));
    }
  }
}

// Digests every workspace file whose relative path matches any glob.
// Entries come back sorted by name; an empty match set is an error.
inline std::vector<std::pair<std::string, std::string>> digest_outputs(
    const std::filesystem::path& workspace,
    std::span<const std::string> globs) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(workspace)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), workspace).generic_string();
    bool matched = false;
    for (const std::string& glob : globs) {
      if (::fnmatch(glob.c_str(), rel.c_str(), 0) == 0) {
        matched = true;
        break;
      }
    }
    if (matched) {
      out.emplace_back(rel, to_hex(sha256(read_file_bytes(entry.path()))));
    }
  }
  if (out.empty()) {
    throw Error(Errc::no_outputs_matched,
                "no workspace file matches the output globs");
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The end-to-end attested build: verify pinned inputs, enumerate them into
// the Merkle tree, measure the simulated boot chain, run the build in a
// scrubbed throwaway workspace, digest outputs, assemble and canonically
// encode the provenance, obtain the attestation report whose report_data is
// SHA-256(provenance) ‖ nonce, and write the bundle to `out_dir`.
//
// Input verification runs before anything else: a substituted dependency
// fails the build before the (simulated) CVM would even launch.
inline EvidenceBundle run_attested_build(
    const BuildRequest& request, const LockManifest& lock,
    const std::filesystem::path& project_dir, const SimulatedPlatform& platform,
    std::span<const BootComponent> boot_fixture,
    const std::filesystem::path& out_dir,
    const OrchestratorOptions& options = {}) {
  namespace fs = std::filesystem;

  BlobResolver resolver = local_path_resolver(lock, project_dir);
  verify_pinned_inputs(lock, resolver);

  InputManifest inputs = enumerate_inputs(lock);
  build_tree(inputs);

  Measurement measurement = measure_boot_chain(boot_fixture);

  BuildConfig config = load_build_config(read_file(request.config_path));

  detail::TempDir workspace("kettle-build-");
  std::error_code out_ec;
  fs::path out_abs = fs::weakly_canonical(out_dir, out_ec);
  detail::copy_tree(fs::canonical(project_dir), workspace.path(),
                    out_ec ? fs::path{} : out_abs);
  fs::path log_path = workspace.path().parent_path() /
                      (workspace.path().filename().string() + ".log");
  struct LogCleanup {
    fs::path path;
    ~LogCleanup() {
      std::error_code ec;
      fs::remove(path, ec);
    }
  } log_cleanup{log_path};

  std::string started_on = format_rfc3339_utc(options.clock());
  execute_build(config, workspace.path(), log_path);
  std::vector<std::pair<std::string, std::string>> outputs =
      digest_outputs(workspace.path(), config.output_globs);
  std::string finished_on = format_rfc3339_utc(options.clock());

  BuildMetadata meta;
  meta.build_type = config.build_type;
  meta.builder_id = options.builder_id;
  meta.invocation_id =
      options.invocation_id_override.empty()
          ? "build-" + to_hex(ByteView(request.nonce.data(), 4))
          : options.invocation_id_override;
  meta.started_on = started_on;
  meta.finished_on = finished_on;
  meta.tee_platform = platform_name(platform.platform_id());
  if (!options.kettle_version_override.empty()) {
    meta.kettle_version = options.kettle_version_override;
  }

  ProvenanceStatement statement =
      assemble_statement(inputs, lock, outputs, meta, request.nonce);
  std::string provenance_bytes = canonical_encode(statement);
  Digest32 digest = sha256(provenance_bytes);

  std::array<uint8_t, 64> report_data{};
  std::copy(digest.begin(), digest.end(), report_data.begin());
  std::copy(request.nonce.begin(), request.nonce.end(),
            report_data.begin() + 32);
  AttestationReport report = platform.issue_report(
      measurement, std::array<uint8_t, 32>{}, report_data);

  EvidenceBundle bundle;
  for (const auto& [name, digest_hex] : outputs) {
    bundle.artifacts.push_back(
        {name, read_file_bytes(workspace.path() / name)});
  }
  bundle.provenance_bytes = std::move(provenance_bytes);
  bundle.report = report;
  bundle.chain = platform.chain();
  if (fs::exists(log_path)) {
    bundle.build_log = read_file(log_path);
  }

  write_bundle(bundle, out_dir);
  return bundle;
}

}  // namespace kettle

#endif  // KETTLE_ORCHESTRATOR_HPP
