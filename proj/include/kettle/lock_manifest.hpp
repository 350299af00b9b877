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

#ifndef KETTLE_LOCK_MANIFEST_HPP
#define KETTLE_LOCK_MANIFEST_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kettle/crypto.hpp"
#include "kettle/json_util.hpp"

namespace kettle {

struct SourceIdentity {
  std::string repository;
  std::string ref;
  std::string commit_id;    // 40 or 64 lowercase hex, stored verbatim
  std::string tree_digest;  // 64 lowercase hex
  bool signed_ = false;     // repository signature present
};

struct DependencyEntry {
  std::string name;
  std::string version;
  std::string purl;
  std::string digest;  // 64 lowercase hex, SHA-256 of the package bytes
  std::optional<std::string> local_path;  // pre-fetched blob, project-relative
};

struct ToolchainEntry {
  std::string tool_name;
  std::string digest;  // 64 lowercase hex
};

struct LockManifest {
  SourceIdentity source;
  std::string lockfile_digest;  // 64 lowercase hex over the raw lockfile bytes
  std::vector<DependencyEntry> dependencies;  // sorted ascending by name
  std::vector<ToolchainEntry> toolchain;      // declared order preserved
};

// One enumerated build input: the label gives domain separation between leaf
// kinds, the bytes are label ‖ 0x00 ‖ raw 32-byte digest of the object.
struct InputLeaf {
  std::string label;
  Bytes leaf_bytes;
};

struct InputManifest {
  std::vector<InputLeaf> ordered_leaves;
  std::optional<Digest32> merkle_root;  // filled by build_tree
};

namespace detail {

inline void check_hex_digest(const std::string& value, size_t hex_len,
                             const std::string& what) {
  if (value.size() != hex_len || !is_lower_hex(value)) {
    throw Error(Errc::bad_digest, what + " must be " +
                                      std::to_string(hex_len) +
                                      " lowercase hex chars");
  }
}

inline void check_commit_id(const std::string& value) {
  if ((value.size() != 40 && value.size() != 64) || !is_lower_hex(value)) {
    throw Error(Errc::bad_digest,
                "commit_id must be 40 or 64 lowercase hex chars");
  }
}

// local_path must stay inside the project directory.
inline void check_local_path(const std::string& path) {
  if (path.empty() || path.front() == '/') {
    throw Error(Errc::malformed_manifest,
                "dependency path must be relative and non-empty");
  }
  std::filesystem::path p(path);
  for (const auto& part : p) {
    if (part == "..") {
      throw Error(Errc::malformed_manifest,
                  "dependency path must not contain '..'");
    }
  }
}

}  // namespace detail

inline LockManifest parse_lock_manifest(std::string_view raw_bytes) {
  constexpr Errc err = Errc::malformed_manifest;
  Json j = parse_json(raw_bytes, err);
  require_object(j, "kettle.lock.json", err);
  require_known_fields(
      j, {"source", "lockfile_sha256", "dependencies", "toolchain"},
      "kettle.lock.json", err);

  LockManifest m;

  const Json& src = require_field(j, "source", "kettle.lock.json", err);
  require_object(src, "source", err);
  require_known_fields(
      src, {"repository", "ref", "commit_id", "tree_digest", "signed"},
      "source", err);
  m.source.repository = get_string(src, "repository", "source", err);
  if (m.source.repository.empty()) {
    throw Error(err, "source.repository must be non-empty");
  }
  m.source.ref = get_string(src, "ref", "source", err);
  m.source.commit_id = get_string(src, "commit_id", "source", err);
  detail::check_commit_id(m.source.commit_id);
  m.source.tree_digest = get_string(src, "tree_digest", "source", err);
  detail::check_hex_digest(m.source.tree_digest, 64, "source.tree_digest");
  m.source.signed_ = get_bool(src, "signed", "source", err);

  m.lockfile_digest = get_string(j, "lockfile_sha256", "kettle.lock.json", err);
  detail::check_hex_digest(m.lockfile_digest, 64, "lockfile_sha256");

  const Json& deps = require_field(j, "dependencies", "kettle.lock.json", err);
  if (!deps.is_array()) {
    throw Error(err, "dependencies must be an array");
  }
  std::set<std::string> dep_names;
  for (const Json& d : deps) {
    require_object(d, "dependency entry", err);
    require_known_fields(d, {"name", "version", "purl", "sha256", "path"},
                         "dependency entry", err);
    DependencyEntry e;
    e.name = get_string(d, "name", "dependency entry", err);
    e.version = get_string(d, "version", "dependency entry", err);
    if (e.name.empty() || e.version.empty()) {
      throw Error(err, "dependency name and version must be non-empty");
    }
    e.purl = get_string(d, "purl", "dependency entry", err);
    if (e.purl.rfind("pkg:", 0) != 0) {
      throw Error(err, "purl for '" + e.name + "' must begin with \"pkg:\"");
    }
    e.digest = get_string(d, "sha256", "dependency entry", err);
    detail::check_hex_digest(e.digest, 64, "dependency sha256");
    if (d.contains("path")) {
      e.local_path = get_string(d, "path", "dependency entry", err);
      detail::check_local_path(*e.local_path);
    }
    if (!dep_names.insert(e.name).second) {
      throw Error(Errc::duplicate_dependency,
                  "dependency '" + e.name + "' listed twice");
    }
    m.dependencies.push_back(std::move(e));
  }
  // canonical order regardless of file order
  std::sort(m.dependencies.begin(), m.dependencies.end(),
            [](const DependencyEntry& a, const DependencyEntry& b) {
              return a.name < b.name;
            });

  const Json& tools = require_field(j, "toolchain", "kettle.lock.json", err);
  if (!tools.is_array()) {
    throw Error(err, "toolchain must be an array");
  }
  std::set<std::string> tool_names;
  for (const Json& t : tools) {
    require_object(t, "toolchain entry", err);
    require_known_fields(t, {"tool", "sha256"}, "toolchain entry", err);
    ToolchainEntry e;
    e.tool_name = get_string(t, "tool", "toolchain entry", err);
    if (e.tool_name.empty()) {
      throw Error(err, "toolchain tool name must be non-empty");
    }
    e.digest = get_string(t, "sha256", "toolchain entry", err);
    detail::check_hex_digest(e.digest, 64, "toolchain sha256");
    if (!tool_names.insert(e.tool_name).second) {
      throw Error(err, "toolchain entry '" + e.tool_name + "' listed twice");
    }
    m.toolchain.push_back(std::move(e));
  }

  return m;
}

// Resolves a dependency name to its pre-fetched bytes; nullopt when the
// resolver has nothing for that name.
using BlobResolver =
    std::function<std::optional<Bytes>(const std::string& name)>;

enum class InputCheck { ok, unchecked };

struct InputCheckEntry {
  std::string name;
  InputCheck status;
  std::string digest_hex;
};

struct InputVerificationReport {
  std::vector<InputCheckEntry> entries;

  bool all_checked() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) {
      return e.status == InputCheck::ok;
    });
  }
};

// Runs before any build step. A digest mismatch signals dependency
// substitution and aborts the pipeline via InputMismatchError.
inline InputVerificationReport verify_pinned_inputs(
    const LockManifest& manifest, const BlobResolver& blob_resolver) {
  InputVerificationReport report;
  for (const DependencyEntry& dep : manifest.dependencies) {
    std::optional<Bytes> blob = blob_resolver(dep.name);
    if (!blob) {
      if (dep.local_path) {
        throw Error(Errc::missing_blob,
                    "no bytes for dependency '" + dep.name + "' (path " +
                        *dep.local_path + ")");
      }
      report.entries.push_back({dep.name, InputCheck::unchecked, dep.digest});
      continue;
    }
    std::string actual = to_hex(sha256(*blob));
    if (actual != dep.digest) {
      throw InputMismatchError(dep.name, dep.digest, actual);
    }
    report.entries.push_back({dep.name, InputCheck::ok, dep.digest});
  }
  return report;
}

// Reads dependency blobs from their manifest paths under `project_dir`.
inline BlobResolver local_path_resolver(const LockManifest& manifest,
                                        const std::filesystem::path& project_dir) {
  return [&manifest, project_dir](
             const std::string& name) -> std::optional<Bytes> {
    for (const DependencyEntry& dep : manifest.dependencies) {
      if (dep.name == name && dep.local_path) {
        std::filesystem::path p = project_dir / *dep.local_path;
        if (!std::filesystem::exists(p)) return std::nullopt;
        return read_file_bytes(p);
      }
    }
    return std::nullopt;
  };
}

namespace detail {

inline InputLeaf make_leaf(std::string label, const Digest32& digest) {
  InputLeaf leaf;
  leaf.leaf_bytes = to_byte_vector(label);
  leaf.leaf_bytes.push_back(0x00);
  append(leaf.leaf_bytes, digest);
  leaf.label = std::move(label);
  return leaf;
}

}  // namespace detail

// Canonical leaf order: source commit, source tree, lockfile, dependencies
// lexicographic by name, toolchain in declared order. Pure: equal manifests
// yield byte-identical leaf lists on every platform, whatever order the
// caller stored the dependencies in.
inline InputManifest enumerate_inputs(const LockManifest& manifest) {
  InputManifest out;

  // Commit ids may be 20-byte SHA-1 values; they are re-digested with
  // SHA-256 over the verbatim hex string so every leaf carries a 32-byte
  // digest and the commit/tree values stay coupled.
  out.ordered_leaves.push_back(
      detail::make_leaf("src.commit", sha256(manifest.source.commit_id)));
  out.ordered_leaves.push_back(detail::make_leaf(
      "src.tree", from_hex_fixed<32>(manifest.source.tree_digest)));
  out.ordered_leaves.push_back(
      detail::make_leaf("lockfile", from_hex_fixed<32>(manifest.lockfile_digest)));
  std::vector<const DependencyEntry*> deps;
  deps.reserve(manifest.dependencies.size());
  for (const DependencyEntry& dep : manifest.dependencies) deps.push_back(&dep);
  std::sort(deps.begin(), deps.end(),
            [](const DependencyEntry* a, const DependencyEntry* b) {
              return a->name < b->name;
            });
  for (const DependencyEntry* dep : deps) {
    out.ordered_leaves.push_back(
        detail::make_leaf("dep." + dep->name + "@" + dep->version,
                          from_hex_fixed<32>(dep->digest)));
  }
  for (const ToolchainEntry& tool : manifest.toolchain) {
    out.ordered_leaves.push_back(detail::make_leaf(
        "tool." + tool.tool_name, from_hex_fixed<32>(tool.digest)));
  }
  return out;
}

}  // namespace kettle

#endif  // KETTLE_LOCK_MANIFEST_HPP
