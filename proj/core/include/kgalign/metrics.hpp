// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "kgalign/kg.hpp"
#include "kgalign/similarity.hpp"

namespace kgalign {

/// Fraction of test pairs whose true target ranks within the top k of the
/// source's similarity row. Ranking ties break by ascending target id,
/// matching candidate ordering.
double hits_at_k(const SimilarityMatrix& matrix, const AlignmentSeedSet& test_pairs, int k);

/// Row-at-a-time variant for callers that never materialize the similarity
/// matrix. `row_of` must return scores over `target_ids` (same order).
double hits_at_k(const std::function<Eigen::VectorXd(EntityId)>& row_of,
                 const std::vector<EntityId>& target_ids, const AlignmentSeedSet& test_pairs,
                 int k);

/// Hits@1 over a prediction list: every test source must have a prediction;
/// a prediction of -1 means "no equivalent" and never scores.
double hits_at_1(const std::vector<std::pair<EntityId, EntityId>>& predictions,
                 const AlignmentSeedSet& test_pairs);

}  // namespace kgalign
