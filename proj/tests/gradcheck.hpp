// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <string>

#include "kgalign/kg.hpp"
#include "kgalign/ragat.hpp"
#include "kgalign/train.hpp"

namespace kgtest {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_block;
};

// Central-difference check of the analytic gradients of the triplet loss
// through the full forward pass, over every parameter block. The negative
// pool is frozen to the one computed at the evaluation point.
inline GradCheckResult finite_difference_check(const kgalign::KgPair& pair,
                                               const kgalign::AlignmentSeedSet& seeds,
                                               const kgalign::TrainConfig& config,
                                               double step) {
    using namespace kgalign;

    const NeighborIndex index = build_adjacency(pair.merged());
    ModelParams params = init_parameters(index, config);

    const EmbeddingMatrix at_point = forward(params, index);
    const NegativePool pool = update_negative_pool(at_point, seeds, pair);

    auto loss_at = [&](const ModelParams& p) {
        return triplet_loss(forward(p, index), seeds, pool, config.margin);
    };

    ForwardTrace trace;
    const EmbeddingMatrix emb = forward_traced(params, index, trace);
    Eigen::MatrixXd d_output;
    triplet_loss_grad(emb, seeds, pool, config.margin, d_output);
    const ParamGradients analytic = backward(params, index, trace, d_output);

    GradCheckResult result;
    auto compare = [&](double* value, double analytic_grad, const std::string& block) {
        const double original = *value;
        *value = original + step;
        const double up = loss_at(params);
        *value = original - step;
        const double down = loss_at(params);
        *value = original;
        const double fd = (up - down) / (2.0 * step);
        const double scale = std::max({std::abs(analytic_grad), std::abs(fd), 1e-8});
        const double rel = std::abs(analytic_grad - fd) / scale;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_block = block;
        }
    };

    for (Eigen::Index r = 0; r < params.entity_init.rows(); ++r) {
        for (Eigen::Index c = 0; c < params.entity_init.cols(); ++c) {
            compare(&params.entity_init(r, c), analytic.entity_init(r, c), "entity_init");
        }
    }
    for (Eigen::Index r = 0; r < params.relation_emb.rows(); ++r) {
        for (Eigen::Index c = 0; c < params.relation_emb.cols(); ++c) {
            compare(&params.relation_emb(r, c), analytic.relation_emb(r, c), "relation_emb");
        }
    }
    for (std::size_t l = 0; l < params.attention.size(); ++l) {
        for (Eigen::Index c = 0; c < params.attention[l].size(); ++c) {
            compare(&params.attention[l][c], analytic.attention[l][c],
                    "attention[" + std::to_string(l) + "]");
        }
    }
    return result;
}

}  // namespace kgtest
