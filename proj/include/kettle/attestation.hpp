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

#ifndef KETTLE_ATTESTATION_HPP
#define KETTLE_ATTESTATION_HPP

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kettle/crypto.hpp"
#include "kettle/json_util.hpp"

namespace kettle {

// Software stand-in for a SEV-SNP/TDX-class attestation platform: measured
// boot register, fixed-layout signed reports, and a vendor-rooted key chain.
// Registers are SHA-384 wide and signatures are Ed25519 (deterministic, so
// identical inputs give identical reports).

using Measurement = Digest48;

enum class ComponentKind : uint8_t {
  firmware = 0,
  kernel = 1,
  cmdline = 2,
  initrd = 3,
  vm_image = 4,
  kettle = 5,
};

inline const char* component_kind_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::firmware: return "firmware";
    case ComponentKind::kernel: return "kernel";
    case ComponentKind::cmdline: return "cmdline";
    case ComponentKind::initrd: return "initrd";
    case ComponentKind::vm_image: return "vm_image";
    case ComponentKind::kettle: return "kettle";
  }
  return "?";
}

struct BootComponent {
  ComponentKind kind;
  Bytes content;
};

struct MeasurementRegister {
  Measurement value{};  // 48 zero bytes before the first extension
};

// One-way register extension:
//   new = SHA-384(old ‖ SHA-384(kind_tag ‖ content))
// The kind tag keeps component domains separate; the fold makes the final
// value depend on every byte loaded and the order it was loaded in.
inline MeasurementRegister extend(const MeasurementRegister& reg,
                                  const BootComponent& component) {
  Bytes tagged;
  tagged.reserve(1 + component.content.size());
  tagged.push_back(static_cast<uint8_t>(component.kind));
  append(tagged, component.content);
  Digest48 component_digest = sha384(tagged);

  Bytes buf;
  buf.reserve(reg.value.size() + component_digest.size());
  append(buf, reg.value);
  append(buf, component_digest);
  MeasurementRegister out;
  out.value = sha384(buf);
  return out;
}

inline constexpr std::array<ComponentKind, 6> boot_chain_order = {
    ComponentKind::firmware, ComponentKind::kernel, ComponentKind::cmdline,
    ComponentKind::initrd,   ComponentKind::vm_image, ComponentKind::kettle,
};

inline Measurement measure_boot_chain(
    std::span<const BootComponent> components) {
  if (components.size() != boot_chain_order.size()) {
    throw Error(Errc::missing_component,
                "boot chain must have all six components, got " +
                    std::to_string(components.size()));
  }
  for (size_t i = 0; i < components.size(); ++i) {
    if (components[i].kind != boot_chain_order[i]) {
      throw Error(Errc::wrong_order,
                  std::string("boot component ") + std::to_string(i) +
                      " is " + component_kind_name(components[i].kind) +
                      ", expected " +
                      component_kind_name(boot_chain_order[i]));
    }
  }
  MeasurementRegister reg;
  for (const BootComponent& c : components) {
    reg = extend(reg, c);
  }
  return reg.value;
}

// --- report layout ---------------------------------------------------------
// magic(4) version(2) platform_id(1) firmware_version(4) measurement(48)
// host_data(32) report_data(64) signature(64) = 219 bytes, integers
// big-endian, Ed25519 signature over the leading 155 bytes.

inline constexpr std::array<uint8_t, 4> report_magic = {'K', 'T', 'L', 'R'};
inline constexpr uint16_t report_version = 1;
inline constexpr size_t report_signed_size = 155;
inline constexpr size_t report_encoded_size = 219;

inline constexpr uint8_t platform_sim = 0;
inline constexpr uint8_t platform_sev_snp = 1;
inline constexpr uint8_t platform_tdx = 2;

inline std::string platform_name(uint8_t platform_id) {
  switch (platform_id) {
    case platform_sim: return "sim";
    case platform_sev_snp: return "sev-snp";
    case platform_tdx: return "tdx";
    default: return "platform-" + std::to_string(platform_id);
  }
}

struct AttestationReport {
  std::array<uint8_t, 4> magic = report_magic;
  uint16_t version = report_version;
  uint8_t platform_id = platform_sim;
  uint32_t firmware_version = 0;
  Measurement measurement{};
  std::array<uint8_t, 32> host_data{};
  std::array<uint8_t, 64> report_data{};
  Ed25519Signature signature{};
};

namespace detail {

inline Bytes encode_report_body(const AttestationReport& r) {
  Bytes out;
  out.reserve(report_signed_size);
  append(out, r.magic);
  put_be16(out, r.version);
  out.push_back(r.platform_id);
  put_be32(out, r.firmware_version);
  append(out, r.measurement);
  append(out, r.host_data);
  append(out, r.report_data);
  return out;
}

}  // namespace detail

inline Bytes encode_report(const AttestationReport& r) {
  Bytes out = detail::encode_report_body(r);
  append(out, r.signature);
  return out;
}

inline AttestationReport decode_report(ByteView bytes) {
  if (bytes.size() != report_encoded_size) {
    throw Error(Errc::bad_length, "report must be " +
                                      std::to_string(report_encoded_size) +
                                      " bytes, got " +
                                      std::to_string(bytes.size()));
  }
  AttestationReport r;
  std::copy_n(bytes.begin(), 4, r.magic.begin());
  if (r.magic != report_magic) {
    throw Error(Errc::bad_magic, "report magic mismatch");
  }
  r.version = static_cast<uint16_t>((uint16_t(bytes[4]) << 8) | bytes[5]);
  if (r.version != report_version) {
    throw Error(Errc::unsupported_version,
                "report version " + std::to_string(r.version));
  }
  r.platform_id = bytes[6];
  r.firmware_version = (uint32_t(bytes[7]) << 24) | (uint32_t(bytes[8]) << 16) |
                       (uint32_t(bytes[9]) << 8) | uint32_t(bytes[10]);
  std::copy_n(bytes.begin() + 11, 48, r.measurement.begin());
  std::copy_n(bytes.begin() + 59, 32, r.host_data.begin());
  std::copy_n(bytes.begin() + 91, 64, r.report_data.begin());
  std::copy_n(bytes.begin() + 155, 64, r.signature.begin());
  return r;
}

// --- vendor key chain --------------------------------------------------------

struct PlatformCertChain {
  Ed25519Public platform_public_key{};
  uint8_t platform_id = platform_sim;
  uint32_t firmware_version = 0;
  Ed25519Signature root_signature{};  // over pubkey ‖ platform_id ‖ fw (be32)
  Digest32 root_key_id{};             // SHA-256 of the root public key
};

struct TrustStore {
  std::map<Digest32, Ed25519Public> roots;
};

namespace detail {

inline Bytes chain_signed_message(const PlatformCertChain& chain) {
  Bytes msg;
  msg.reserve(32 + 1 + 4);
  append(msg, chain.platform_public_key);
  msg.push_back(chain.platform_id);
  put_be32(msg, chain.firmware_version);
  return msg;
}

}  // namespace detail

struct PlatformKeys {
  Ed25519KeyPair root;
  Ed25519KeyPair platform;
  PlatformCertChain chain;
};

// Stands in for vendor key provisioning. Deterministic when seeded, so test
// chains are reproducible.
inline PlatformKeys platform_keygen(
    std::optional<std::array<uint8_t, 32>> seed = std::nullopt,
    uint8_t platform_id = platform_sim, uint32_t firmware_version = 1) {
  PlatformKeys keys;
  if (seed) {
    Bytes root_seed_input = to_byte_vector("kettle-sim-root");
    append(root_seed_input, *seed);
    Bytes platform_seed_input = to_byte_vector("kettle-sim-platform");
    append(platform_seed_input, *seed);
    keys.root = ed25519_from_seed(sha256(root_seed_input));
    keys.platform = ed25519_from_seed(sha256(platform_seed_input));
  } else {
    keys.root = ed25519_generate();
    keys.platform = ed25519_generate();
  }
  keys.chain.platform_public_key = keys.platform.public_key;
  keys.chain.platform_id = platform_id;
  keys.chain.firmware_version = firmware_version;
  keys.chain.root_key_id = sha256(keys.root.public_key);
  keys.chain.root_signature = ed25519_sign(
      keys.root.private_key, detail::chain_signed_message(keys.chain));
  return keys;
}

// Holds the platform attestation key; report issuance serializes on an
// internal guard so one platform instance can serve multiple threads.
class SimulatedPlatform {
 public:
  explicit SimulatedPlatform(PlatformKeys keys) : keys_(std::move(keys)) {}

  const PlatformCertChain& chain() const { return keys_.chain; }
  uint8_t platform_id() const { return keys_.chain.platform_id; }
  uint32_t firmware_version() const { return keys_.chain.firmware_version; }

  // report_data is guest-controlled and copied verbatim, never interpreted.
  AttestationReport issue_report(const Measurement& measurement,
                                 const std::array<uint8_t, 32>& host_data,
                                 const std::array<uint8_t, 64>& report_data) const {
    std::lock_guard<std::mutex> lock(key_guard_);
    AttestationReport r;
    r.platform_id = keys_.chain.platform_id;
    r.firmware_version = keys_.chain.firmware_version;
    r.measurement = measurement;
    r.host_data = host_data;
    r.report_data = report_data;
    r.signature = ed25519_sign(keys_.platform.private_key,
                               detail::encode_report_body(r));
    return r;
  }

 private:
  PlatformKeys keys_;
  mutable std::mutex key_guard_;
};

// --- verification -------------------------------------------------------------

enum class ReportCheck {
  ok,
  unknown_root,
  bad_root_signature,
  chain_mismatch,
  bad_report_signature,
};

inline const char* report_check_name(ReportCheck c) {
  switch (c) {
    case ReportCheck::ok: return "ok";
    case ReportCheck::unknown_root: return "UnknownRoot";
    case ReportCheck::bad_root_signature: return "BadRootSignature";
    case ReportCheck::chain_mismatch: return "ChainMismatch";
    case ReportCheck::bad_report_signature: return "BadReportSignature";
  }
  return "?";
}

struct ReportVerification {
  bool ok = false;
  ReportCheck reason = ReportCheck::ok;
};

inline ReportVerification verify_report(const AttestationReport& report,
                                        const PlatformCertChain& chain,
                                        const TrustStore& store) {
  if (store.roots.empty()) {
    throw Error(Errc::empty_trust_store, "trust store has no roots");
  }
  auto root = store.roots.find(chain.root_key_id);
  if (root == store.roots.end()) {
    return {false, ReportCheck::unknown_root};
  }
  if (!ed25519_verify(root->second, detail::chain_signed_message(chain),
                      chain.root_signature)) {
    return {false, ReportCheck::bad_root_signature};
  }
  if (report.platform_id != chain.platform_id ||
      report.firmware_version != chain.firmware_version) {
    return {false, ReportCheck::chain_mismatch};
  }
  if (!ed25519_verify(chain.platform_public_key,
                      detail::encode_report_body(report), report.signature)) {
    return {false, ReportCheck::bad_report_signature};
  }
  return {true, ReportCheck::ok};
}

// --- wire forms ----------------------------------------------------------------

inline Json chain_to_json(const PlatformCertChain& chain) {
  return Json{
      {"platform_public_key_hex", to_hex(chain.platform_public_key)},
      {"platform_id", chain.platform_id},
      {"firmware_version", chain.firmware_version},
      {"root_signature_hex", to_hex(chain.root_signature)},
      {"root_key_id_hex", to_hex(chain.root_key_id)},
  };
}

inline PlatformCertChain chain_from_json(const Json& j, Errc err) {
  require_object(j, "cert chain", err);
  require_known_fields(j,
                       {"platform_public_key_hex", "platform_id",
                        "firmware_version", "root_signature_hex",
                        "root_key_id_hex"},
                       "cert chain", err);
  PlatformCertChain chain;
  chain.platform_public_key = from_hex_fixed<32>(
      get_hex(j, "platform_public_key_hex", "cert chain", 64, err));
  chain.platform_id =
      static_cast<uint8_t>(get_uint(j, "platform_id", "cert chain", err, 255));
  chain.firmware_version = static_cast<uint32_t>(
      get_uint(j, "firmware_version", "cert chain", err, UINT32_MAX));
  chain.root_signature = from_hex_fixed<64>(
      get_hex(j, "root_signature_hex", "cert chain", 128, err));
  chain.root_key_id =
      from_hex_fixed<32>(get_hex(j, "root_key_id_hex", "cert chain", 64, err));
  return chain;
}

// Trust store file: JSON map root_key_id_hex → root_public_key_hex.
inline std::string trust_store_to_json(const TrustStore& store) {
  Json j = Json::object();
  for (const auto& [id, key] : store.roots) {
    j[to_hex(id)] = to_hex(key);
  }
  return j.dump(2) + "\n";
}

inline TrustStore trust_store_from_json(std::string_view text) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(text, err);
  require_object(j, "trust store", err);
  TrustStore store;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key().size() != 64 || !is_lower_hex(it.key()) ||
        !it.value().is_string()) {
      throw Error(err, "trust store entries map 64-hex ids to 64-hex keys");
    }
    std::string key = it.value().get<std::string>();
    if (key.size() != 64 || !is_lower_hex(key)) {
      throw Error(err, "trust store entries map 64-hex ids to 64-hex keys");
    }
    store.roots[from_hex_fixed<32>(it.key())] = from_hex_fixed<32>(key);
  }
  return store;
}

// Platform key file for the CLI: private keys plus platform identity;
// everything else (public keys, chain, root id) is re-derived on load.
inline std::string platform_keys_to_json(const PlatformKeys& keys) {
  Json j{
      {"root_private_key_hex", to_hex(keys.root.private_key)},
      {"platform_private_key_hex", to_hex(keys.platform.private_key)},
      {"platform_id", keys.chain.platform_id},
      {"firmware_version", keys.chain.firmware_version},
  };
  return j.dump(2) + "\n";
}

inline PlatformKeys platform_keys_from_json(std::string_view text) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(text, err);
  require_object(j, "platform keys", err);
  require_known_fields(j,
                       {"root_private_key_hex", "platform_private_key_hex",
                        "platform_id", "firmware_version"},
                       "platform keys", err);
  PlatformKeys keys;
  keys.root = ed25519_from_seed(from_hex_fixed<32>(
      get_hex(j, "root_private_key_hex", "platform keys", 64, err)));
  keys.platform = ed25519_from_seed(from_hex_fixed<32>(
      get_hex(j, "platform_private_key_hex", "platform keys", 64, err)));
  keys.chain.platform_public_key = keys.platform.public_key;
  keys.chain.platform_id = static_cast<uint8_t>(
      get_uint(j, "platform_id", "platform keys", err, 255));
  keys.chain.firmware_version = static_cast<uint32_t>(
      get_uint(j, "firmware_version", "platform keys", err, UINT32_MAX));
  keys.chain.root_key_id = sha256(keys.root.public_key);
  keys.chain.root_signature = ed25519_sign(
      keys.root.private_key, detail::chain_signed_message(keys.chain));
  return keys;
}

// Boot fixture file: {"firmware": b64, "kernel": b64, "cmdline": b64,
// "initrd": b64, "vm_image": b64, "kettle": b64}.
inline std::vector<BootComponent> boot_components_from_json(
    std::string_view text) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(text, err);
  require_object(j, "boot fixture", err);
  require_known_fields(
      j, {"firmware", "kernel", "cmdline", "initrd", "vm_image", "kettle"},
      "boot fixture", err);
  std::vector<BootComponent> out;
  for (ComponentKind kind : boot_chain_order) {
    std::string b64 =
        get_string(j, component_kind_name(kind), "boot fixture", err);
    out.push_back({kind, base64_decode(b64)});
  }
  return out;
}

inline std::string boot_components_to_json(
    std::span<const BootComponent> components) {
  Json j = Json::object();
  for (const BootComponent& c : components) {
    j[component_kind_name(c.kind)] = base64_encode(c.content);
  }
  return j.dump(2) + "\n";
}

}  // namespace kettle

#endif  // KETTLE_ATTESTATION_HPP
