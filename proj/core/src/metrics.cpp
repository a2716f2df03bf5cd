// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace kgalign {
namespace {

// Rank of the true target within a score row under (score desc, id asc).
std::size_t rank_of_truth(const Eigen::VectorXd& row, const std::vector<EntityId>& target_ids,
                          EntityId truth) {
    auto it = std::find(target_ids.begin(), target_ids.end(), truth);
    if (it == target_ids.end()) {
        throw std::runtime_error("true target " + std::to_string(truth) +
                                 " has no similarity column");
    }
    const Eigen::Index truth_col = it - target_ids.begin();
    const double truth_score = row[truth_col];
    std::size_t rank = 1;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (j == truth_col) continue;
        if (row[j] > truth_score ||
            (row[j] == truth_score && target_ids[static_cast<std::size_t>(j)] < truth)) {
            ++rank;
        }
    }
    return rank;
}

}  // namespace

double hits_at_k(const SimilarityMatrix& matrix, const AlignmentSeedSet& test_pairs, int k) {
    if (k < 1) throw std::runtime_error("k must be at least 1");
    if (test_pairs.empty()) throw std::runtime_error("no test pairs to evaluate");
    std::size_t hits = 0;
    for (const auto& [s, t] : test_pairs.pairs()) {
        auto it = std::lower_bound(matrix.source_ids.begin(), matrix.source_ids.end(), s);
        if (it == matrix.source_ids.end() || *it != s) {
            throw std::runtime_error("test source " + std::to_string(s) +
                                     " has no similarity row");
        }
        const Eigen::Index row = it - matrix.source_ids.begin();
        if (rank_of_truth(matrix.scores.row(row).transpose(), matrix.target_ids, t) <=
            static_cast<std::size_t>(k)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(test_pairs.size());
}

double hits_at_k(const std::function<Eigen::VectorXd(EntityId)>& row_of,
                 const std::vector<EntityId>& target_ids, const AlignmentSeedSet& test_pairs,
                 int k) {
    if (k < 1) throw std::runtime_error("k must be at least 1");
    if (test_pairs.empty()) throw std::runtime_error("no test pairs to evaluate");
    std::size_t hits = 0;
    for (const auto& [s, t] : test_pairs.pairs()) {
        if (rank_of_truth(row_of(s), target_ids, t) <= static_cast<std::size_t>(k)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test_pairs.size());
}

double hits_at_1(const std::vector<std::pair<EntityId, EntityId>>& predictions,
                 const AlignmentSeedSet& test_pairs) {
    if (test_pairs.empty()) throw std::runtime_error("no test pairs to evaluate");
    std::unordered_map<EntityId, EntityId> by_source;
    by_source.reserve(predictions.size());
    for (const auto& [s, p] : predictions) by_source[s] = p;
    std::size_t hits = 0;
    for (const auto& [s, t] : test_pairs.pairs()) {
        auto it = by_source.find(s);
        if (it == by_source.end()) {
            throw std::runtime_error("no prediction for test source " + std::to_string(s));
        }
        if (it->second == t) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test_pairs.size());
}

}  // namespace kgalign
