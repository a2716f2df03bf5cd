// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgalign/kg.hpp"
#include "kgalign/llm.hpp"

namespace kgalign {

/// One question round of the elimination protocol.
struct ChoiceRound {
    int index = 0;                           // 1-based
    std::vector<EntityId> options;           // presented order, carried winner first
    std::vector<EntityId> fresh;             // options presented for the first time
    std::optional<EntityId> carried;         // winner carried in from the previous round
    std::string raw_response;                // final raw response for the round
    int retries_used = 0;
    bool parse_failed = false;               // unresolvable after the retry budget
    std::optional<EntityId> selected;        // nullopt = none answer
};

struct ProtocolResult {
    std::optional<EntityId> prediction;  // nullopt when the final round answered none
    std::vector<ChoiceRound> rounds;
    bool any_parse_failure = false;
};

struct ProtocolOptions {
    int retry_budget = 2;  // re-asks per round after a parse failure
};

/// Iterative multi-choice elimination over a deduplicated candidate list.
/// The first round presents the first up-to-4 candidates in list order;
/// each later round presents the carried winner (first) plus up to 3 fresh
/// candidates drawn at random from the unasked pool (up to 4 when there is
/// no carried winner), until the pool is empty. Deterministic for a fixed
/// rng_seed and a deterministic backend.
ProtocolResult iterative_predict(LlmBackend& backend, EntityId target_entity,
                                 const std::string& target_name,
                                 const std::vector<EntityId>& union_candidates,
                                 const std::function<std::string(EntityId)>& name_of,
                                 std::uint64_t rng_seed, const ProtocolOptions& opts = {});

}  // namespace kgalign
