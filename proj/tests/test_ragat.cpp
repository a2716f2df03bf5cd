// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include <doctest.h>

#include <Eigen/Dense>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "kgalign/ragat.hpp"
#include "kgalign/rng.hpp"
#include "kgalign/synth.hpp"
#include "kgalign/train.hpp"

using namespace kgalign;

namespace {

Eigen::VectorXd random_unit(Rng& rng, int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v / v.norm();
}

Eigen::VectorXd random_vec(Rng& rng, int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.uniform(-2.0, 2.0);
    return v;
}

}  // namespace

TEST_CASE("householder_reflect flips the axis and fixes the orthogonal complement") {
    Eigen::VectorXd axis = Eigen::VectorXd::Zero(4);
    axis[0] = 1.0;
    Eigen::VectorXd e1 = axis;
    Eigen::VectorXd e2 = Eigen::VectorXd::Zero(4);
    e2[1] = 1.0;

    CHECK((householder_reflect(axis, e1) + e1).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((householder_reflect(axis, e2) - e2).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("householder_reflect preserves norms and is an involution") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 3 + static_cast<int>(rng.next_below(40));
        const Eigen::VectorXd axis = random_unit(rng, d);
        const Eigen::VectorXd x = random_vec(rng, d);
        const Eigen::VectorXd rx = householder_reflect(axis, x);
        CHECK(std::abs(rx.norm() - x.norm()) <= 1e-9 * std::max(1.0, x.norm()));
        CHECK((householder_reflect(axis, rx) - x).norm() <= 1e-9 * std::max(1.0, x.norm()));
    }
}

TEST_CASE("householder_reflect is an isometry within a shared hyperplane") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 5 + static_cast<int>(rng.next_below(30));
        const Eigen::VectorXd axis = random_unit(rng, d);
        const Eigen::VectorXd x = random_vec(rng, d);
        const Eigen::VectorXd y = random_vec(rng, d);
        const double before = (x - y).norm();
        const double after = (householder_reflect(axis, x) - householder_reflect(axis, y)).norm();
        CHECK(std::abs(before - after) <= 1e-9 * std::max(1.0, before));
    }
}

TEST_CASE("householder_reflect rejects non-unit axes") {
    Eigen::VectorXd axis = Eigen::VectorXd::Constant(3, 0.7);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_WITH_AS(householder_reflect(axis, x), doctest::Contains("unit"),
                         std::runtime_error);
    CHECK_THROWS_AS(householder_reflect(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(4)),
                    std::runtime_error);
}

TEST_CASE("materialized reflection matrices are orthogonal") {
    Rng rng(19);
    const int d = 40;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd axis = random_unit(rng, d);
        const Eigen::MatrixXd m =
            Eigen::MatrixXd::Identity(d, d) - 2.0 * axis * axis.transpose();
        CHECK((m.transpose() * m - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-12);
    }
}

TEST_CASE("a two-edge entity with equal states gets attention 0.5 per edge") {
    // One triple a->b plus a's self-loop: exactly two edges for a. With
    // h_a == h_b both edge logits coincide, so the softmax is uniform.
    auto kg = KnowledgeGraph::from_parts({{0, "a"}, {1, "b"}}, {{0, "r"}},
                                         {Triple{0, 0, 1}});
    const NeighborIndex index = build_adjacency(kg);
    REQUIRE(index.edges_of(0).size() == 2);

    TrainConfig config;
    config.dim = 4;
    config.layers = 1;
    ModelParams params = init_parameters(index, config);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 4);
    h.row(0) << 0.3, -0.2, 0.5, 0.1;
    h.row(1) = h.row(0);

    const auto alpha = attention_weights(params, 1, index, h, 0);
    REQUIRE(alpha.size() == 2);
    CHECK(alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("attention weights sum to one for every entity") {
    SyntheticPair synth = generate_synthetic_pair(12, 3, 24, 5);
    const NeighborIndex index = build_adjacency(synth.pair.merged());
    TrainConfig config;
    config.dim = 6;
    config.layers = 2;
    config.rng_seed = 3;
    ModelParams params = init_parameters(index, config);

    const Eigen::MatrixXd& h = params.entity_init;
    for (int row = 0; row < index.entities().size(); ++row) {
        const auto alpha = attention_weights(params, 1, index, h, row);
        double sum = 0.0;
        for (double a : alpha) {
            CHECK(a >= 0.0);
            sum += a;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("an entity with only a self-loop reduces to a single-edge update") {
    auto kg = KnowledgeGraph::from_parts({{0, "only"}}, {}, {});
    const NeighborIndex index = build_adjacency(kg);
    REQUIRE(index.edges_of(0).size() == 1);

    TrainConfig config;
    config.dim = 3;
    config.layers = 1;
    config.rng_seed = 11;
    ModelParams params = init_parameters(index, config);

    const Eigen::MatrixXd out = ragat_layer(params, 1, index, params.entity_init);
    const Eigen::VectorXd self_rel =
        params.relation_emb.row(index.relation_row(index.self_relation())).transpose();
    const Eigen::VectorXd expected =
        householder_reflect(self_rel, params.entity_init.row(0).transpose())
            .array()
            .tanh()
            .matrix();
    CHECK((out.row(0).transpose() - expected).norm() <= 1e-12);
}

TEST_CASE("forward concatenates the input state and all layer states") {
    SyntheticPair synth = generate_synthetic_pair(8, 2, 16, 21);
    const NeighborIndex index = build_adjacency(synth.pair.merged());
    TrainConfig config;
    config.dim = 5;
    config.layers = 2;
    config.rng_seed = 2;
    ModelParams params = init_parameters(index, config);

    ForwardTrace trace;
    const EmbeddingMatrix emb = forward_traced(params, index, trace);
    CHECK(emb.dim() == (config.layers + 1) * config.dim);
    CHECK(emb.rows.rows() == index.entities().size());
    CHECK((emb.rows.middleCols(0, config.dim) - params.entity_init).norm() == 0.0);
    CHECK((emb.rows.middleCols(config.dim, config.dim) - trace.states[1]).norm() == 0.0);

    const EmbeddingMatrix again = forward(params, index);
    CHECK((emb.rows - again.rows).norm() == 0.0);
}

TEST_CASE("analytic gradients match central finite differences on a small pair") {
    SyntheticPair synth = generate_synthetic_pair(6, 2, 12, 33);
    auto [train, test] = split_seeds(synth.truth, 0.5, 1);

    TrainConfig config;
    config.dim = 4;
    config.layers = 2;
    config.rng_seed = 9;
    const auto result = kgtest::finite_difference_check(synth.pair, train, config, 1e-5);
    INFO("worst block: ", result.worst_block);
    CHECK(result.max_rel_error <= 1e-4);
}

TEST_CASE("checkpoints round-trip the parameter blocks") {
    kgtest::TempDir dir;
    SyntheticPair synth = generate_synthetic_pair(5, 2, 10, 3);
    TrainConfig config;
    config.dim = 4;
    config.layers = 3;
    ModelParams params = init_parameters(synth.pair, config);

    save_checkpoint(dir.file("p.ckpt"), params);
    ModelParams back = load_checkpoint(dir.file("p.ckpt"));
    CHECK((params.entity_init - back.entity_init).norm() == 0.0);
    CHECK((params.relation_emb - back.relation_emb).norm() == 0.0);
    REQUIRE(back.attention.size() == 3);
    for (int l = 0; l < 3; ++l) {
        CHECK((params.attention[l] - back.attention[l]).norm() == 0.0);
    }
}
