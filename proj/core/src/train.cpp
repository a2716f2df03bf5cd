// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kgalign/parallel.hpp"
#include "kgalign/rng.hpp"

namespace kgalign {
namespace {

constexpr std::size_t kScanSpan = 128;  // rows per similarity-scan task

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.uniform(-bound, bound);
        }
    }
}

void renormalize_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double norm = m.row(r).norm();
        if (norm > 1e-12) {
            m.row(r) /= norm;
        } else {
            m.row(r).setZero();
            m(r, 0) = 1.0;
        }
    }
}

std::vector<int> side_rows(const EmbeddingMatrix& emb, const KnowledgeGraph& side) {
    std::vector<int> rows;
    rows.reserve(side.entity_count());
    for (EntityId id : side.entity_ids()) rows.push_back(emb.index.row(id));
    return rows;
}

// For each query row, the id of the nearest entity among `to_rows` by
// squared L2 distance, optionally excluding one id per query. Ties resolve
// to the lowest entity id (to_rows is in ascending-id order).
std::vector<EntityId> nearest_opposite(const EmbeddingMatrix& emb,
                                       const std::vector<int>& from_rows,
                                       const std::vector<int>& to_rows,
                                       const std::vector<EntityId>& excluded) {
    const Eigen::Index d = emb.rows.cols();
    const std::size_t nt = to_rows.size();
    Eigen::MatrixXd to_block(static_cast<Eigen::Index>(nt), d);
    Eigen::VectorXd to_norms(static_cast<Eigen::Index>(nt));
    for (std::size_t j = 0; j < nt; ++j) {
        to_block.row(static_cast<Eigen::Index>(j)) = emb.rows.row(to_rows[j]);
        to_norms[static_cast<Eigen::Index>(j)] =
            to_block.row(static_cast<Eigen::Index>(j)).squaredNorm();
    }

    std::vector<EntityId> result(from_rows.size(), -1);
    parallel_for_spans(0, from_rows.size(), kScanSpan, [&](std::size_t lo, std::size_t hi) {
        const Eigen::Index c = static_cast<Eigen::Index>(hi - lo);
        Eigen::MatrixXd from_block(c, d);
        for (Eigen::Index i = 0; i < c; ++i) {
            from_block.row(i) = emb.rows.row(from_rows[lo + static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd dots = from_block * to_block.transpose();
        for (Eigen::Index i = 0; i < c; ++i) {
            const double from_norm = from_block.row(i).squaredNorm();
            const EntityId skip = excluded.empty() ? -1 : excluded[lo + static_cast<std::size_t>(i)];
            double best = std::numeric_limits<double>::infinity();
            EntityId best_id = -1;
            for (std::size_t j = 0; j < nt; ++j) {
                const EntityId candidate = emb.index.id(to_rows[j]);
                if (candidate == skip) continue;
                const double dist = from_norm + to_norms[static_cast<Eigen::Index>(j)] -
                                    2.0 * dots(i, static_cast<Eigen::Index>(j));
                if (dist < best) {
                    best = dist;
                    best_id = candidate;
                }
            }
            result[lo + static_cast<std::size_t>(i)] = best_id;
        }
    });
    return result;
}

double pair_distance(const EmbeddingMatrix& emb, EntityId a, EntityId b) {
    return (emb.rows.row(emb.index.row(a)) - emb.rows.row(emb.index.row(b))).squaredNorm();
}

struct RmsPropState {
    Eigen::MatrixXd entity_cache;
    Eigen::MatrixXd relation_cache;
    std::vector<Eigen::VectorXd> attention_cache;

    explicit RmsPropState(const ModelParams& params) {
        entity_cache = Eigen::MatrixXd::Zero(params.entity_init.rows(), params.entity_init.cols());
        relation_cache =
            Eigen::MatrixXd::Zero(params.relation_emb.rows(), params.relation_emb.cols());
        for (const auto& q : params.attention) {
            attention_cache.push_back(Eigen::VectorXd::Zero(q.size()));
        }
    }

    static void apply(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
                      Eigen::MatrixXd& cache, const TrainConfig& config) {
        cache = config.rms_decay * cache +
                (1.0 - config.rms_decay) * grad.array().square().matrix();
        param.array() -=
            config.learning_rate * grad.array() / (cache.array().sqrt() + config.rms_epsilon);
    }

    void step(ModelParams& params, const ParamGradients& grads, const TrainConfig& config) {
        apply(params.entity_init, grads.entity_init, entity_cache, config);
        apply(params.relation_emb, grads.relation_emb, relation_cache, config);
        for (std::size_t l = 0; l < params.attention.size(); ++l) {
            Eigen::VectorXd& q = params.attention[l];
            Eigen::VectorXd& cache = attention_cache[l];
            const Eigen::VectorXd& g = grads.attention[l];
            cache = config.rms_decay * cache +
                    (1.0 - config.rms_decay) * g.array().square().matrix();
            q.array() -=
                config.learning_rate * g.array() / (cache.array().sqrt() + config.rms_epsilon);
        }
    }
};

}  // namespace

void TrainConfig::validate() const {
    if (dim < 1) throw std::runtime_error("dim must be positive");
    if (layers < 1) throw std::runtime_error("layers must be positive");
    if (!(margin > 0.0)) throw std::runtime_error("margin must be positive");
    if (!(learning_rate > 0.0)) throw std::runtime_error("learning rate must be positive");
    if (batch_size < 1) throw std::runtime_error("batch size must be positive");
    if (epochs < 1) throw std::runtime_error("epochs must be positive");
    if (augment_every < 1) throw std::runtime_error("augment cadence must be positive");
    if (!(rms_decay > 0.0) || rms_decay >= 1.0) {
        throw std::runtime_error("rms decay must lie in (0, 1)");
    }
    if (!(rms_epsilon > 0.0)) throw std::runtime_error("rms epsilon must be positive");
}

EntityId NegativePool::negative_of(EntityId id) const {
    auto it = negatives_.find(id);
    if (it == negatives_.end()) {
        throw std::runtime_error("no pooled negative for entity " + std::to_string(id));
    }
    return it->second;
}

ModelParams init_parameters(const NeighborIndex& index, const TrainConfig& config) {
    config.validate();
    const int n = index.entities().size();
    const int r = static_cast<int>(index.relation_ids().size());
    const double bound = std::sqrt(6.0 / static_cast<double>(config.dim));

    Rng rng(config.rng_seed);
    ModelParams params;
    params.entity_init.resize(n, config.dim);
    fill_uniform(params.entity_init, bound, rng);
    params.relation_emb.resize(r, config.dim);
    fill_uniform(params.relation_emb, bound, rng);
    renormalize_rows(params.relation_emb);
    for (int l = 0; l < config.layers; ++l) {
        Eigen::MatrixXd q(1, config.dim);
        fill_uniform(q, bound, rng);
        params.attention.push_back(q.row(0).transpose());
    }
    return params;
}

ModelParams init_parameters(const KgPair& pair, const TrainConfig& config) {
    return init_parameters(build_adjacency(pair.merged()), config);
}

double triplet_loss(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                    const NegativePool& pool, double margin) {
    double loss = 0.0;
    for (const auto& [s, t] : seeds.pairs()) {
        const double pos = pair_distance(emb, s, t);
        const double neg = pair_distance(emb, pool.negative_of(s), pool.negative_of(t));
        loss += std::max(0.0, margin + pos - neg);
    }
    return loss;
}

double triplet_loss_grad(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                         const NegativePool& pool, double margin, Eigen::MatrixXd& d_output) {
    d_output = Eigen::MatrixXd::Zero(emb.rows.rows(), emb.rows.cols());
    double loss = 0.0;
    for (const auto& [s, t] : seeds.pairs()) {
        const EntityId ns = pool.negative_of(s);
        const EntityId nt = pool.negative_of(t);
        const double pos = pair_distance(emb, s, t);
        const double neg = pair_distance(emb, ns, nt);
        const double hinge = margin + pos - neg;
        if (hinge <= 0.0) continue;
        loss += hinge;
        const int rs = emb.index.row(s), rt = emb.index.row(t);
        const int rns = emb.index.row(ns), rnt = emb.index.row(nt);
        const Eigen::RowVectorXd dp = 2.0 * (emb.rows.row(rs) - emb.rows.row(rt));
        d_output.row(rs) += dp;
        d_output.row(rt) -= dp;
        const Eigen::RowVectorXd dn = 2.0 * (emb.rows.row(rns) - emb.rows.row(rnt));
        d_output.row(rns) -= dn;
        d_output.row(rnt) += dn;
    }
    return loss;
}

NegativePool update_negative_pool(const EmbeddingMatrix& emb, const AlignmentSeedSet& seeds,
                                  const KgPair& pair) {
    if (pair.source().entity_count() < 2 || pair.target().entity_count() < 2) {
        throw std::runtime_error("negative pool needs at least two entities per graph");
    }
    const std::vector<int> source_rows = side_rows(emb, pair.source());
    const std::vector<int> target_rows = side_rows(emb, pair.target());

    std::vector<int> seed_source_rows, seed_target_rows;
    std::vector<EntityId> excluded_targets, excluded_sources;
    seed_source_rows.reserve(seeds.size());
    seed_target_rows.reserve(seeds.size());
    for (const auto& [s, t] : seeds.pairs()) {
        seed_source_rows.push_back(emb.index.row(s));
        excluded_targets.push_back(t);
        seed_target_rows.push_back(emb.index.row(t));
        excluded_sources.push_back(s);
    }

    const std::vector<EntityId> source_negatives =
        nearest_opposite(emb, seed_source_rows, target_rows, excluded_targets);
    const std::vector<EntityId> target_negatives =
        nearest_opposite(emb, seed_target_rows, source_rows, excluded_sources);

    std::unordered_map<EntityId, EntityId> negatives;
    negatives.reserve(seeds.size() * 2);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        negatives[seeds.pairs()[i].first] = source_negatives[i];
        negatives[seeds.pairs()[i].second] = target_negatives[i];
    }
    return NegativePool(std::move(negatives));
}

AlignmentSeedSet augment_seeds(const EmbeddingMatrix& emb, const KgPair& pair,
                               const AlignmentSeedSet& current) {
    std::vector<int> free_source_rows, free_target_rows;
    std::vector<EntityId> free_sources, free_targets;
    for (EntityId id : pair.source().entity_ids()) {
        if (!current.contains_source(id)) {
            free_sources.push_back(id);
            free_source_rows.push_back(emb.index.row(id));
        }
    }
    for (EntityId id : pair.target().entity_ids()) {
        if (!current.contains_target(id)) {
            free_targets.push_back(id);
            free_target_rows.push_back(emb.index.row(id));
        }
    }
    if (free_sources.empty() || free_targets.empty()) return current;

    const std::vector<int> all_source_rows = side_rows(emb, pair.source());
    const std::vector<int> all_target_rows = side_rows(emb, pair.target());
    const std::vector<EntityId> no_exclusions;

    // Nearest neighbors are taken over the full opposite side; a pair only
    // qualifies when both endpoints are unseeded and mutually nearest.
    const std::vector<EntityId> nearest_target =
        nearest_opposite(emb, free_source_rows, all_target_rows, no_exclusions);
    const std::vector<EntityId> nearest_source =
        nearest_opposite(emb, free_target_rows, all_source_rows, no_exclusions);

    std::unordered_map<EntityId, EntityId> target_best;
    target_best.reserve(free_targets.size());
    for (std::size_t j = 0; j < free_targets.size(); ++j) {
        target_best[free_targets[j]] = nearest_source[j];
    }

    std::vector<std::pair<EntityId, EntityId>> pairs = current.pairs();
    for (std::size_t i = 0; i < free_sources.size(); ++i) {
        const EntityId s = free_sources[i];
        const EntityId t = nearest_target[i];
        auto it = target_best.find(t);  // absent when t is already seeded
        if (it != target_best.end() && it->second == s) {
            pairs.emplace_back(s, t);
        }
    }
    return AlignmentSeedSet(std::move(pairs));
}

TrainResult train(const KgPair& pair, const AlignmentSeedSet& train_seeds,
                  const TrainConfig& config) {
    config.validate();
    if (train_seeds.empty()) throw std::runtime_error("training requires at least one seed pair");

    const NeighborIndex index = build_adjacency(pair.merged());
    ModelParams params = init_parameters(index, config);
    RmsPropState optimizer(params);
    AlignmentSeedSet seeds = train_seeds;

    double initial_loss = 0.0;
    double final_loss = 0.0;
    bool first_step = true;

    ForwardTrace trace;
    Eigen::MatrixXd d_output;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(seeds.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng epoch_rng(Rng::derive(config.rng_seed, static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(order);

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::pair<EntityId, EntityId>> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(seeds.pairs()[order[i]]);
            }

            const EmbeddingMatrix emb = forward_traced(params, index, trace);
            const NegativePool pool = update_negative_pool(emb, seeds, pair);
            if (first_step) {
                initial_loss = triplet_loss(emb, seeds, pool, config.margin);
                first_step = false;
            }

            const AlignmentSeedSet batch_set(std::move(batch));
            const double batch_loss =
                triplet_loss_grad(emb, batch_set, pool, config.margin, d_output);
            if (!std::isfinite(batch_loss)) {
                std::ostringstream os;
                os << "non-finite loss at epoch " << epoch << " (batch starting at " << start
                   << "); lower the learning rate or check the input graphs";
                throw std::runtime_error(os.str());
            }

            const ParamGradients grads = backward(params, index, trace, d_output);
            optimizer.step(params, grads, config);
            renormalize_rows(params.relation_emb);
        }

        if (epoch % config.augment_every == 0) {
            const EmbeddingMatrix emb = forward(params, index);
            seeds = augment_seeds(emb, pair, seeds);
        }
    }

    TrainResult result;
    result.embeddings = forward(params, index);
    const NegativePool final_pool = update_negative_pool(result.embeddings, seeds, pair);
    final_loss = triplet_loss(result.embeddings, seeds, final_pool, config.margin);
    result.params = std::move(params);
    result.final_seeds = std::move(seeds);
    result.initial_loss = initial_loss;
    result.final_loss = final_loss;
    return result;
}

}  // namespace kgalign
