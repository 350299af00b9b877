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

#ifndef KETTLE_MERKLE_HPP
#define KETTLE_MERKLE_HPP

#include <string>
#include <vector>

#include "kettle/crypto.hpp"
#include "kettle/json_util.hpp"
#include "kettle/lock_manifest.hpp"

namespace kettle {

// Deterministic SHA-256 Merkle tree over the enumerated build inputs.
//
//   leaf  = SHA-256(0x00 ‖ len64be(leaf_bytes) ‖ leaf_bytes)
//   node  = SHA-256(0x01 ‖ len64be(left) ‖ left ‖ len64be(right) ‖ right)
//
// The 0x00/0x01 prefixes separate the leaf and node domains, and the
// explicit 8-byte big-endian length prefixes keep the construction free of
// length-extension ambiguity. An unpaired node at any level is promoted
// unchanged to the next level (no self-pairing).
struct MerkleTree {
  std::vector<std::vector<Digest32>> levels;  // levels[0] = leaf digests
  size_t leaf_count = 0;

  const Digest32& root() const { return levels.back().front(); }
};

enum class SiblingSide { left, right };

struct ProofSibling {
  Digest32 digest{};
  SiblingSide side = SiblingSide::left;
};

struct InclusionProof {
  size_t leaf_index = 0;
  Digest32 leaf_digest{};
  std::vector<ProofSibling> siblings;  // leaf level upward
};

inline Digest32 merkle_leaf_digest(ByteView leaf_bytes) {
  Bytes buf;
  buf.reserve(1 + 8 + leaf_bytes.size());
  buf.push_back(0x00);
  append(buf, be64(leaf_bytes.size()));
  append(buf, leaf_bytes);
  return sha256(buf);
}

inline Digest32 merkle_node_digest(const Digest32& left, const Digest32& right) {
  Bytes buf;
  buf.reserve(1 + 8 + 32 + 8 + 32);
  buf.push_back(0x01);
  append(buf, be64(left.size()));
  append(buf, left);
  append(buf, be64(right.size()));
  append(buf, right);
  return sha256(buf);
}

// Builds the tree and records the root back into the manifest.
inline MerkleTree build_tree(InputManifest& manifest) {
  if (manifest.ordered_leaves.empty()) {
    throw Error(Errc::empty_manifest, "input manifest has no leaves");
  }
  MerkleTree tree;
  tree.leaf_count = manifest.ordered_leaves.size();
  std::vector<Digest32> level;
  level.reserve(tree.leaf_count);
  for (const InputLeaf& leaf : manifest.ordered_leaves) {
    level.push_back(merkle_leaf_digest(leaf.leaf_bytes));
  }
  tree.levels.push_back(level);
  while (tree.levels.back().size() > 1) {
    const std::vector<Digest32>& below = tree.levels.back();
    std::vector<Digest32> above;
    above.reserve((below.size() + 1) / 2);
    for (size_t i = 0; i + 1 < below.size(); i += 2) {
      above.push_back(merkle_node_digest(below[i], below[i + 1]));
    }
    if (below.size() % 2 == 1) {
      above.push_back(below.back());  // promoted unchanged
    }
    tree.levels.push_back(std::move(above));
  }
  manifest.merkle_root = tree.root();
  return tree;
}

inline InclusionProof prove_inclusion(const MerkleTree& tree,
                                      size_t leaf_index) {
  if (leaf_index >= tree.leaf_count) {
    throw Error(Errc::index_out_of_range,
                "leaf index " + std::to_string(leaf_index) + " not in [0, " +
                    std::to_string(tree.leaf_count) + ")");
  }
  InclusionProof proof;
  proof.leaf_index = leaf_index;
  proof.leaf_digest = tree.levels[0][leaf_index];
  size_t pos = leaf_index;
  for (size_t level = 0; level + 1 < tree.levels.size(); ++level) {
    const std::vector<Digest32>& nodes = tree.levels[level];
    size_t sibling = pos ^ 1;
    if (sibling < nodes.size()) {
      proof.siblings.push_back(
          {nodes[sibling],
           sibling < pos ? SiblingSide::left : SiblingSide::right});
    }
    // a promoted node contributes no sibling at this level
    pos /= 2;
  }
  return proof;
}

inline bool verify_inclusion(const Digest32& root,
                             const InclusionProof& proof) {
  Digest32 acc = proof.leaf_digest;
  for (const ProofSibling& s : proof.siblings) {
    acc = s.side == SiblingSide::left ? merkle_node_digest(s.digest, acc)
                                      : merkle_node_digest(acc, s.digest);
  }
  return acc == root;
}

// --- proof wire form -----------------------------------------------------
// {leaf_index, leaf_digest_hex, siblings: [{digest_hex, side}]}

inline std::string proof_to_json(const InclusionProof& proof) {
  Json j;
  j["leaf_index"] = proof.leaf_index;
  j["leaf_digest_hex"] = to_hex(proof.leaf_digest);
  j["siblings"] = Json::array();
  for (const ProofSibling& s : proof.siblings) {
    j["siblings"].push_back(
        {{"digest_hex", to_hex(s.digest)},
         {"side", s.side == SiblingSide::left ? "left" : "right"}});
  }
  return j.dump();
}

inline InclusionProof proof_from_json(std::string_view text) {
  constexpr Errc err = Errc::malformed_input;
  Json j = parse_json(text, err);
  require_object(j, "inclusion proof", err);
  require_known_fields(j, {"leaf_index", "leaf_digest_hex", "siblings"},
                       "inclusion proof", err);
  InclusionProof proof;
  proof.leaf_index =
      get_uint(j, "leaf_index", "inclusion proof", err, SIZE_MAX);
  proof.leaf_digest = from_hex_fixed<32>(
      get_hex(j, "leaf_digest_hex", "inclusion proof", 64, err));
  const Json& siblings = require_field(j, "siblings", "inclusion proof", err);
  if (!siblings.is_array()) {
    throw Error(err, "siblings must be an array");
  }
  for (const Json& s : siblings) {
    require_object(s, "proof sibling", err);
    require_known_fields(s, {"digest_hex", "side"}, "proof sibling", err);
    ProofSibling sib;
    sib.digest =
        from_hex_fixed<32>(get_hex(s, "digest_hex", "proof sibling", 64, err));
    std::string side = get_string(s, "side", "proof sibling", err);
    if (side == "left") {
      sib.side = SiblingSide::left;
    } else if (side == "right") {
      sib.side = SiblingSide::right;
    } else {
      throw Error(err, "side must be \"left\" or \"right\"");
    }
    proof.siblings.push_back(sib);
  }
  return proof;
}

}  // namespace kettle

#endif  // KETTLE_MERKLE_HPP
