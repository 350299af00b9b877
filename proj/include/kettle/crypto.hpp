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

#ifndef KETTLE_CRYPTO_HPP
#define KETTLE_CRYPTO_HPP

#include <array>
#include <memory>
#include <optional>

#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include "kettle/errors.hpp"
#include "kettle/support.hpp"

namespace kettle {

using Digest32 = std::array<uint8_t, 32>;  // SHA-256 width
using Digest48 = std::array<uint8_t, 48>;  // SHA-384 width

namespace detail {

struct EvpPkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct EvpMdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct EvpPkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct EvpCipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, EvpMdCtxDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, EvpPkeyCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, EvpCipherCtxDeleter>;

[[noreturn]] inline void crypto_fail(const char* what) {
  throw Error(Errc::crypto_failure, what);
}

}  // namespace detail

inline Digest32 sha256(ByteView data) {
  Digest32 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    detail::crypto_fail("SHA-256 failed");
  }
  return out;
}

inline Digest32 sha256(std::string_view data) { return sha256(as_bytes(data)); }

inline Digest48 sha384(ByteView data) {
  Digest48 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha384(),
                 nullptr) != 1 ||
      len != out.size()) {
    detail::crypto_fail("SHA-384 failed");
  }
  return out;
}

inline void random_fill(uint8_t* out, size_t len) {
  if (RAND_bytes(out, static_cast<int>(len)) != 1) {
    detail::crypto_fail("RAND_bytes failed");
  }
}

template <size_t N>
std::array<uint8_t, N> random_array() {
  std::array<uint8_t, N> out{};
  random_fill(out.data(), N);
  return out;
}

// --- Ed25519 -----------------------------------------------------------

using Ed25519Seed = std::array<uint8_t, 32>;   // raw private key
using Ed25519Public = std::array<uint8_t, 32>;
using Ed25519Signature = std::array<uint8_t, 64>;

struct Ed25519KeyPair {
  Ed25519Seed private_key{};
  Ed25519Public public_key{};
};

namespace detail {

inline PkeyPtr ed25519_private(const Ed25519Seed& seed) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                           seed.data(), seed.size()));
  if (!key) crypto_fail("Ed25519 private key import failed");
  return key;
}

inline PkeyPtr ed25519_public(const Ed25519Public& pub) {
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                          pub.data(), pub.size()));
  if (!key) crypto_fail("Ed25519 public key import failed");
  return key;
}

}  // namespace detail

inline Ed25519KeyPair ed25519_from_seed(const Ed25519Seed& seed) {
  auto key = detail::ed25519_private(seed);
  Ed25519KeyPair pair;
  pair.private_key = seed;
  size_t len = pair.public_key.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pair.public_key.data(), &len) !=
          1 ||
      len != pair.public_key.size()) {
    detail::crypto_fail("Ed25519 public key derivation failed");
  }
  return pair;
}

inline Ed25519KeyPair ed25519_generate() {
  return ed25519_from_seed(random_array<32>());
}

inline Ed25519Signature ed25519_sign(const Ed25519Seed& seed, ByteView msg) {
  auto key = detail::ed25519_private(seed);
  detail::MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) detail::crypto_fail("EVP_MD_CTX_new failed");
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) !=
      1) {
    detail::crypto_fail("Ed25519 sign init failed");
  }
  Ed25519Signature sig{};
  size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size()) !=
          1 ||
      len != sig.size()) {
    detail::crypto_fail("Ed25519 sign failed");
  }
  return sig;
}

inline bool ed25519_verify(const Ed25519Public& pub, ByteView msg,
                           const Ed25519Signature& sig) {
  detail::PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                                  pub.data(), pub.size()));
  if (!key) return false;
  detail::MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) !=
      1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(),
                          msg.size()) == 1;
}

// --- X25519 ------------------------------------------------------------

using X25519Secret = std::array<uint8_t, 32>;
using X25519Public = std::array<uint8_t, 32>;

struct X25519KeyPair {
  X25519Secret private_key{};
  X25519Public public_key{};
};

inline X25519KeyPair x25519_from_secret(const X25519Secret& secret) {
  detail::PkeyPtr key(EVP_PKEY_new_raw_private_key(
      EVP_PKEY_X25519, nullptr, secret.data(), secret.size()));
  if (!key) detail::crypto_fail("X25519 private key import failed");
  X25519KeyPair pair;
  pair.private_key = secret;
  size_t len = pair.public_key.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pair.public_key.data(), &len) !=
          1 ||
      len != pair.public_key.size()) {
    detail::crypto_fail("X25519 public key derivation failed");
  }
  return pair;
}

inline X25519KeyPair x25519_generate() {
  return x25519_from_secret(random_array<32>());
}

inline std::array<uint8_t, 32> x25519_shared_secret(
    const X25519Secret& own_private, const X25519Public& peer_public) {
  detail::PkeyPtr own(EVP_PKEY_new_raw_private_key(
      EVP_PKEY_X25519, nullptr, own_private.data(), own_private.size()));
  detail::PkeyPtr peer(EVP_PKEY_new_raw_public_key(
      EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
  if (!own || !peer) detail::crypto_fail("X25519 key import failed");
  detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new(own.get(), nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) {
    detail::crypto_fail("X25519 derive init failed");
  }
  std::array<uint8_t, 32> shared{};
  size_t len = shared.size();
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 ||
      len != shared.size()) {
    detail::crypto_fail("X25519 derive failed");
  }
  return shared;
}

// --- HKDF-SHA-256 ------------------------------------------------------

inline std::array<uint8_t, 32> hkdf_sha256(ByteView ikm, ByteView salt,
                                           ByteView info) {
  detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(),
                                 static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(),
                                  static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(),
                                  static_cast<int>(info.size())) != 1) {
    detail::crypto_fail("HKDF setup failed");
  }
  std::array<uint8_t, 32> out{};
  size_t len = out.size();
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    detail::crypto_fail("HKDF derive failed");
  }
  return out;
}

// --- ChaCha20-Poly1305 AEAD ---------------------------------------------
// Ciphertext carries the 16-byte tag appended.

inline constexpr size_t aead_nonce_size = 12;
inline constexpr size_t aead_tag_size = 16;

inline Bytes aead_seal(const std::array<uint8_t, 32>& key,
                       const std::array<uint8_t, aead_nonce_size>& nonce,
                       ByteView aad, ByteView plaintext) {
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, nullptr,
                         nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, aead_nonce_size,
                          nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(),
                         nonce.data()) != 1) {
    detail::crypto_fail("AEAD seal init failed");
  }
  int out_len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &out_len, aad.data(),
                        static_cast<int>(aad.size())) != 1) {
    detail::crypto_fail("AEAD aad failed");
  }
  Bytes out(plaintext.size() + aead_tag_size);
  if (EVP_EncryptUpdate(ctx.get(), out.data(), &out_len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    detail::crypto_fail("AEAD encrypt failed");
  }
  int total = out_len;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &out_len) != 1) {
    detail::crypto_fail("AEAD final failed");
  }
  total += out_len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, aead_tag_size,
                          out.data() + total) != 1) {
    detail::crypto_fail("AEAD tag failed");
  }
  out.resize(static_cast<size_t>(total) + aead_tag_size);
  return out;
}

inline std::optional<Bytes> aead_open(
    const std::array<uint8_t, 32>& key,
    const std::array<uint8_t, aead_nonce_size>& nonce, ByteView aad,
    ByteView ciphertext_with_tag) {
  if (ciphertext_with_tag.size() < aead_tag_size) return std::nullopt;
  size_t ct_len = ciphertext_with_tag.size() - aead_tag_size;
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr, nullptr,
                         nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, aead_nonce_size,
                          nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(),
                         nonce.data()) != 1) {
    detail::crypto_fail("AEAD open init failed");
  }
  int out_len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &out_len, aad.data(),
                        static_cast<int>(aad.size())) != 1) {
    detail::crypto_fail("AEAD aad failed");
  }
  Bytes out(ct_len);
  if (ct_len > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &out_len,
                        ciphertext_with_tag.data(),
                        static_cast<int>(ct_len)) != 1) {
    return std::nullopt;
  }
  int total = out_len;
  Bytes tag(ciphertext_with_tag.begin() + static_cast<std::ptrdiff_t>(ct_len),
            ciphertext_with_tag.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, aead_tag_size,
                          tag.data()) != 1) {
    detail::crypto_fail("AEAD set tag failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &out_len) != 1) {
    return std::nullopt;  // authentication failure
  }
  out.resize(static_cast<size_t>(total + out_len));
  return out;
}

}  // namespace kettle

#endif  // KETTLE_CRYPTO_HPP
