// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "kgalign/synth.hpp"
#include "kgalign/train.hpp"

using namespace kgalign;

namespace {

// Embedding matrix with hand-placed 1-D rows for the given ids.
EmbeddingMatrix hand_embeddings(const std::vector<std::pair<EntityId, double>>& rows) {
    EmbeddingMatrix emb;
    std::vector<EntityId> ids;
    for (const auto& [id, value] : rows) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    emb.index = EntityIndexer(ids);
    emb.rows.resize(static_cast<Eigen::Index>(ids.size()), 1);
    for (const auto& [id, value] : rows) {
        emb.rows(emb.index.row(id), 0) = value;
    }
    return emb;
}

KgPair two_sided_pair(const std::vector<EntityId>& source_ids,
                      const std::vector<EntityId>& target_ids) {
    std::vector<std::pair<EntityId, std::string>> src, tgt;
    for (EntityId id : source_ids) src.emplace_back(id, "s" + std::to_string(id));
    for (EntityId id : target_ids) tgt.emplace_back(id, "t" + std::to_string(id));
    return KgPair(KnowledgeGraph::from_parts(std::move(src), {}, {}),
                  KnowledgeGraph::from_parts(std::move(tgt), {}, {}));
}

}  // namespace

TEST_CASE("triplet loss follows the hinge arithmetic") {
    SUBCASE("inactive hinge contributes zero") {
        // pos distance 0, neg distance 5, margin 3
        auto emb = hand_embeddings({{0, 0.0}, {10, 0.0}, {1, std::sqrt(5.0)}, {11, 0.0}});
        NegativePool pool({{0, 11}, {10, 1}});
        AlignmentSeedSet seeds({{0, 10}});
        CHECK(triplet_loss(emb, seeds, pool, 3.0) == doctest::Approx(0.0));
    }
    SUBCASE("active hinge contributes margin + pos - neg") {
        // pos distance 2, neg distance 1, margin 3 -> 4
        auto emb = hand_embeddings({{0, 0.0}, {10, std::sqrt(2.0)}, {1, 1.0}, {11, 0.0}});
        NegativePool pool({{0, 11}, {10, 1}});
        AlignmentSeedSet seeds({{0, 10}});
        CHECK(triplet_loss(emb, seeds, pool, 3.0) == doctest::Approx(4.0));
    }
    SUBCASE("empty seed set scores zero") {
        auto emb = hand_embeddings({{0, 0.0}});
        CHECK(triplet_loss(emb, AlignmentSeedSet({}), NegativePool(), 3.0) == 0.0);
    }
    SUBCASE("a missing pooled negative is an error") {
        auto emb = hand_embeddings({{0, 0.0}, {10, 0.0}});
        AlignmentSeedSet seeds({{0, 10}});
        CHECK_THROWS_AS(triplet_loss(emb, seeds, NegativePool(), 3.0), std::runtime_error);
    }
}

TEST_CASE("update_negative_pool picks the nearest non-aligned opposite entity") {
    auto pair = two_sided_pair({0}, {10, 11, 12});

    SUBCASE("nearest other target wins") {
        // source 0 at 0.0; aligned target 10 at 0.1; others at 0.2 and 5.0
        auto emb = hand_embeddings({{0, 0.0}, {10, 0.1}, {11, 0.2}, {12, 5.0}});
        NegativePool pool = update_negative_pool(emb, AlignmentSeedSet({{0, 10}}), pair);
        CHECK(pool.negative_of(0) == 11);
    }
    SUBCASE("the aligned counterpart is excluded even when nearest") {
        auto emb = hand_embeddings({{0, 0.0}, {10, 0.0}, {11, 0.7}, {12, 5.0}});
        NegativePool pool = update_negative_pool(emb, AlignmentSeedSet({{0, 10}}), pair);
        CHECK(pool.negative_of(0) == 11);
    }
    SUBCASE("distance ties resolve to the lower entity id") {
        auto emb = hand_embeddings({{0, 0.0}, {10, 9.0}, {11, 1.0}, {12, -1.0}});
        NegativePool pool = update_negative_pool(emb, AlignmentSeedSet({{0, 10}}), pair);
        CHECK(pool.negative_of(0) == 11);
    }
    SUBCASE("both sides of every seed get a negative") {
        auto pair2 = two_sided_pair({0, 1}, {10, 11});
        auto emb = hand_embeddings({{0, 0.0}, {1, 1.0}, {10, 0.1}, {11, 1.1}});
        NegativePool pool = update_negative_pool(emb, AlignmentSeedSet({{0, 10}}), pair2);
        CHECK(pool.has(0));
        CHECK(pool.has(10));
        CHECK(pool.negative_of(0) == 11);
        CHECK(pool.negative_of(10) == 1);
    }
    SUBCASE("an opposite graph with fewer than two entities is an error") {
        auto tiny = two_sided_pair({0}, {10});
        auto emb = hand_embeddings({{0, 0.0}, {10, 0.1}});
        CHECK_THROWS_AS(update_negative_pool(emb, AlignmentSeedSet({{0, 10}}), tiny),
                        std::runtime_error);
    }
}

TEST_CASE("augment_seeds adds exactly the unseeded mutual nearest neighbors") {
    auto pair = two_sided_pair({0, 1, 2}, {10, 11, 12});

    SUBCASE("a mutual pair is added") {
        auto emb = hand_embeddings(
            {{0, 0.0}, {1, 5.0}, {2, 9.0}, {10, 0.1}, {11, 5.1}, {12, 9.1}});
        AlignmentSeedSet current({{2, 12}});
        AlignmentSeedSet grown = augment_seeds(emb, pair, current);
        CHECK(grown.size() == 3);
        CHECK(grown.target_of(0) == 10);
        CHECK(grown.target_of(1) == 11);
    }
    SUBCASE("one-sided nearest does not qualify") {
        // 1's nearest target is 10, but 10's nearest source is 0.
        auto emb = hand_embeddings(
            {{0, 0.0}, {1, 0.3}, {2, 9.0}, {10, 0.1}, {11, 6.0}, {12, 9.1}});
        AlignmentSeedSet grown = augment_seeds(emb, pair, AlignmentSeedSet({{2, 12}}));
        CHECK(grown.size() == 2);  // only (0,10) joins
        CHECK(grown.target_of(0) == 10);
        CHECK(grown.target_of(1) == -1);
    }
    SUBCASE("already seeded entities are never re-paired") {
        auto emb = hand_embeddings(
            {{0, 0.0}, {1, 5.0}, {2, 9.0}, {10, 0.1}, {11, 5.1}, {12, 9.1}});
        AlignmentSeedSet current({{0, 11}});  // 0 and 11 are taken
        AlignmentSeedSet grown = augment_seeds(emb, pair, current);
        // 1's nearest is 11 (seeded) and 10's nearest is 0 (seeded): no additions
        // except the mutual unseeded pair (2,12).
        CHECK(grown.size() == 2);
        CHECK(grown.target_of(2) == 12);
        CHECK(grown.target_of(0) == 11);
    }
}

TEST_CASE("training reduces the loss on the toy pair and is bit-deterministic") {
    SyntheticPair synth = generate_synthetic_pair(10, 3, 20, 77);
    auto [train_pairs, test_pairs] = split_seeds(synth.truth, 0.3, 5);
    REQUIRE(train_pairs.size() == 3);

    TrainConfig config;
    config.dim = 8;
    config.layers = 2;
    config.epochs = 12;
    config.batch_size = 4;
    config.learning_rate = 0.03;
    config.rng_seed = 123;

    TrainResult a = train(synth.pair, train_pairs, config);
    CHECK(a.final_loss < a.initial_loss);
    CHECK(a.embeddings.dim() == (config.layers + 1) * config.dim);

    TrainResult b = train(synth.pair, train_pairs, config);
    REQUIRE(a.embeddings.rows.size() == b.embeddings.rows.size());
    CHECK(std::memcmp(a.embeddings.rows.data(), b.embeddings.rows.data(),
                      sizeof(double) * static_cast<std::size_t>(a.embeddings.rows.size())) == 0);
    CHECK(a.initial_loss == b.initial_loss);
    CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("training aborts with a diagnostic on a non-finite loss") {
    SyntheticPair synth = generate_synthetic_pair(10, 3, 20, 7);
    auto [train_pairs, test_pairs] = split_seeds(synth.truth, 0.3, 5);

    TrainConfig config;
    config.dim = 4;
    config.layers = 1;
    config.epochs = 8;
    config.batch_size = 4;
    config.learning_rate = 1e18;  // guaranteed blow-up
    CHECK_THROWS_WITH_AS(train(synth.pair, train_pairs, config),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("training requires seeds and validates the config") {
    SyntheticPair synth = generate_synthetic_pair(5, 2, 10, 7);
    TrainConfig config;
    CHECK_THROWS_AS(train(synth.pair, AlignmentSeedSet({}), config), std::runtime_error);
    config.dim = 0;
    CHECK_THROWS_AS(train(synth.pair, synth.truth, config), std::runtime_error);
}

TEST_CASE("init_parameters is deterministic, shaped, and unit-norm on relations") {
    SyntheticPair synth = generate_synthetic_pair(10, 3, 20, 7);
    TrainConfig config;
    config.dim = 8;
    config.layers = 2;
    config.rng_seed = 55;

    ModelParams a = init_parameters(synth.pair, config);
    CHECK(a.entity_init.rows() == 20);
    CHECK(a.entity_init.cols() == 8);
    // base relations of both sides, their inverses, and the self-loop
    CHECK(a.relation_emb.rows() == 2 * 6 + 1);
    for (Eigen::Index r = 0; r < a.relation_emb.rows(); ++r) {
        CHECK(std::abs(a.relation_emb.row(r).norm() - 1.0) <= 1e-9);
    }
    ModelParams b = init_parameters(synth.pair, config);
    CHECK((a.entity_init - b.entity_init).norm() == 0.0);
    CHECK((a.relation_emb - b.relation_emb).norm() == 0.0);
}
