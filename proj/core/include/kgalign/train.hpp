// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <unordered_map>

#include "kgalign/kg.hpp"
#include "kgalign/ragat.hpp"

namespace kgalign {

struct TrainConfig {
    int dim = 300;
    int layers = 2;
    double margin = 3.0;
    double learning_rate = 0.005;
    int batch_size = 1024;
    int epochs = 12;
    int augment_every = 5;  // mutual-nearest-neighbor seed augmentation cadence
    std::uint64_t rng_seed = 0;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;

    void validate() const;
};

/// Hardest negative per seed entity: the nearest non-aligned entity of the
/// opposite graph in the current vector space.
class NegativePool {
public:
    NegativePool() = default;
    explicit NegativePool(std::unordered_map<EntityId, EntityId> negatives)
        : negatives_(std::move(negatives)) {}

    EntityId negative_of(EntityId id) const;
    bool has(EntityId id) const { return negatives_.count(id) != 0; }
    std::size_t size() const { return negatives_.size(); }

private:
    std::unordered_map<EntityId, EntityId> negatives_;
};

ModelParams init_parameters(const NeighborIndex& index, const TrainConfig& config);
ModelParams init_parameters(const KgPair& pair, const TrainConfig& config);

/// Hinge loss over seed pairs:
///   sum max(0, margin + dist(e_i, e_j) - dist(neg_i, neg_j))
/// with dist the squared L2 distance between output embeddings.
double triplet_loss(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                    const NegativePool& pool, double margin);

/// Loss plus its gradient w.r.t. the output embedding rows.
double triplet_loss_grad(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                         const NegativePool& pool, double margin, Eigen::MatrixXd& d_output);

NegativePool update_negative_pool(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                                  const KgPair& pair);

/// Adds every cross-graph pair of mutual nearest neighbors whose two
/// entities are both unseeded. Existing seeds are never removed.
AlignmentSeedSet augment_seeds(const EmbeddingMatrix& emb, const KgPair& pair,
                               const AlignmentSeedSet& current);

struct TrainResult {
    EmbeddingMatrix embeddings;
    ModelParams params;
    AlignmentSeedSet final_seeds;  // train seeds plus augmented pairs
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Mini-batched RMSProp training of the triplet loss, with the negative
/// pool refreshed against the current embeddings at every step and seed
/// augmentation every `augment_every` epochs. Deterministic for a fixed
/// rng_seed.
TrainResult train(const KgPair& pair, const AlignmentSeedSet& train_seeds,
                  const TrainConfig& config);

}  // namespace kgalign
