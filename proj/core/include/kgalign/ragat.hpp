// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "kgalign/kg.hpp"

namespace kgalign {

/// Trainable parameters of the relation-aware graph attention network.
/// Both graphs of a pair are embedded by this single parameter set over
/// their union graph. Relation rows are kept unit-norm between optimizer
/// steps; layers share the relation embeddings and own one attention
/// vector each.
struct ModelParams {
    Eigen::MatrixXd entity_init;             // |E_total| x d
    Eigen::MatrixXd relation_emb;            // |R_total| x d, unit rows at rest
    std::vector<Eigen::VectorXd> attention;  // one length-d vector per layer

    int layer_count() const { return static_cast<int>(attention.size()); }
    int dim() const { return static_cast<int>(entity_init.cols()); }
};

/// Per-entity output embeddings: the concatenation of the input state and
/// every layer's hidden state, so d_out = (layers + 1) * d.
struct EmbeddingMatrix {
    Eigen::MatrixXd rows;  // |E_total| x d_out
    EntityIndexer index;

    int dim() const { return static_cast<int>(rows.cols()); }
    Eigen::VectorXd row_of(EntityId id) const { return rows.row(index.row(id)); }
};

/// Gradients for every parameter block, same shapes as ModelParams.
struct ParamGradients {
    Eigen::MatrixXd entity_init;
    Eigen::MatrixXd relation_emb;
    std::vector<Eigen::VectorXd> attention;
};

/// Reflects x across the hyperplane orthogonal to the unit vector axis:
/// x - 2 (axis . x) axis. An isometry; applying it twice restores x.
/// Throws when ||axis|| deviates from 1 by more than 1e-6.
Eigen::VectorXd householder_reflect(const Eigen::VectorXd& axis, const Eigen::VectorXd& x);

/// One attention layer: row i becomes
///   tanh( sum_k alpha_ik * reflect(r_ik, h_jk) )
/// with alpha = softmax over i's edges of q . tanh(h_i + h_j).
/// `layer` is 1-based and selects the attention vector.
Eigen::MatrixXd ragat_layer(const ModelParams& params, int layer, const NeighborIndex& index,
                            const Eigen::MatrixXd& h_in);

/// Attention weights of one entity row in a given layer (diagnostics/tests).
std::vector<double> attention_weights(const ModelParams& params, int layer,
                                      const NeighborIndex& index, const Eigen::MatrixXd& h_in,
                                      int row);

/// Full forward pass: concatenation of the input state and all layer states.
EmbeddingMatrix forward(const ModelParams& params, const NeighborIndex& index);

/// Forward pass that also keeps every intermediate state for backprop.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> states;  // H^0 .. H^l
};
EmbeddingMatrix forward_traced(const ModelParams& params, const NeighborIndex& index,
                               ForwardTrace& trace);

/// Backpropagates d(loss)/d(output rows) through the traced forward pass.
ParamGradients backward(const ModelParams& params, const NeighborIndex& index,
                        const ForwardTrace& trace, const Eigen::MatrixXd& d_output);

/// Checkpoints: entity block, relation block, then one 1 x d block per layer
/// attention vector, all in the binary matrix-block format.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace kgalign
