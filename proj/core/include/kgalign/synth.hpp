// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <filesystem>

#include "kgalign/kg.hpp"

namespace kgalign {

struct SyntheticPair {
    KgPair pair;
    AlignmentSeedSet truth;  // complete ground-truth alignment
};

/// Random source graph plus an isomorphic copy with systematically
/// transformed names (a deterministic per-token suffix map). Source
/// entities get ids 0..n-1, targets n..2n-1; ground truth aligns i with
/// n+i. Deterministic for a fixed rng_seed.
SyntheticPair generate_synthetic_pair(int entity_count, int relation_count, int triple_count,
                                      std::uint64_t rng_seed);

/// Writes the dataset-directory layout (ent_ids_*, rel_ids_*, triples_*,
/// ref_ent_ids) plus a word-vector file "vectors.txt" covering every token
/// of both sides, with target-token vectors placed near their source
/// counterparts.
void write_synthetic_dataset(const SyntheticPair& synth, const std::filesystem::path& dir,
                             std::uint64_t rng_seed);

}  // namespace kgalign
