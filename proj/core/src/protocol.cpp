// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/protocol.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "kgalign/rng.hpp"

namespace kgalign {
namespace {

// Draws up to `quota` candidates from the pool in the given scan order,
// skipping candidates whose name collides with a name already used in the
// round. Taken candidates are removed from the pool.
std::vector<EntityId> take_fresh(std::vector<EntityId>& pool,
                                 const std::vector<std::size_t>& scan_order, std::size_t quota,
                                 std::set<std::string>& used_names,
                                 const std::function<std::string(EntityId)>& name_of) {
    std::vector<EntityId> taken;
    std::vector<bool> remove(pool.size(), false);
    for (std::size_t pos : scan_order) {
        if (taken.size() >= quota) break;
        const EntityId id = pool[pos];
        const std::string name = name_of(id);
        if (used_names.count(name) != 0) continue;
        used_names.insert(name);
        taken.push_back(id);
        remove[pos] = true;
    }
    std::vector<EntityId> rest;
    rest.reserve(pool.size() - taken.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!remove[i]) rest.push_back(pool[i]);
    }
    pool = std::move(rest);
    return taken;
}

}  // namespace

ProtocolResult iterative_predict(LlmBackend& backend, EntityId /*target_entity*/,
                                 const std::string& target_name,
                                 const std::vector<EntityId>& union_candidates,
                                 const std::function<std::string(EntityId)>& name_of,
                                 std::uint64_t rng_seed, const ProtocolOptions& opts) {
    if (union_candidates.empty()) {
        throw std::runtime_error("candidate union is empty");
    }
    {
        std::unordered_set<EntityId> distinct(union_candidates.begin(), union_candidates.end());
        if (distinct.size() != union_candidates.size()) {
            throw std::runtime_error("candidate union contains duplicates");
        }
    }

    Rng rng(rng_seed);
    ProtocolResult result;
    std::vector<EntityId> pool = union_candidates;
    std::optional<EntityId> winner;
    int round_index = 0;

    while (!pool.empty()) {
        ++round_index;
        ChoiceRound round;
        round.index = round_index;
        round.carried = winner;

        std::set<std::string> used_names;
        if (winner) used_names.insert(name_of(*winner));

        std::vector<std::size_t> scan_order(pool.size());
        for (std::size_t i = 0; i < scan_order.size(); ++i) scan_order[i] = i;
        if (round_index > 1) rng.shuffle(scan_order);  // round 1 keeps union order

        const std::size_t quota = winner ? 3 : 4;
        round.fresh = take_fresh(pool, scan_order, quota, used_names, name_of);
        if (round.fresh.empty()) {
            // Every remaining candidate shares the carried winner's name;
            // present them on their own so the pool still drains.
            round.carried.reset();
            used_names.clear();
            round.fresh = take_fresh(pool, scan_order, 4, used_names, name_of);
        }

        round.options.clear();
        if (round.carried) round.options.push_back(*round.carried);
        round.options.insert(round.options.end(), round.fresh.begin(), round.fresh.end());

        std::vector<std::string> option_names;
        option_names.reserve(round.options.size());
        for (EntityId id : round.options) option_names.push_back(name_of(id));

        const Prompt prompt = build_multichoice_prompt(target_name, option_names);
        bool resolved = false;
        for (int attempt = 0; attempt <= opts.retry_budget; ++attempt) {
            round.raw_response = backend.complete(prompt);
            const ChoiceResolution res = parse_choice(round.raw_response, option_names);
            if (std::holds_alternative<ParseFailure>(res)) {
                round.retries_used = attempt + 1;
                continue;
            }
            if (const std::size_t* idx = std::get_if<std::size_t>(&res)) {
                round.selected = round.options[*idx];
            } else {
                round.selected.reset();
            }
            resolved = true;
            break;
        }
        if (!resolved) {
            round.parse_failed = true;
            result.any_parse_failure = true;
            round.selected.reset();
        }

        if (round.carried || round.selected) {
            // A drain round (no carried option) that answers none leaves the
            // previous winner standing; any selected option replaces it.
            winner = round.selected;
        }
        result.rounds.push_back(std::move(round));
    }

    result.prediction = winner;
    return result;
}

}  // namespace kgalign
