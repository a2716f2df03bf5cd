// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgalign/kg.hpp"

namespace kgalign {

enum class Metric { Cosine, NegativeL2 };

/// Dense cross-graph similarity scores: rows are source entities, columns
/// target entities, both in ascending-id order.
struct SimilarityMatrix {
    Eigen::MatrixXd scores;
    Metric metric = Metric::Cosine;
    std::vector<EntityId> source_ids;  // row -> id
    std::vector<EntityId> target_ids;  // column -> id
};

/// Cosine similarity or negative L2 distance between all row pairs of A and
/// B. A zero row scores 0 against everything under cosine.
SimilarityMatrix similarity_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   Metric metric, std::vector<EntityId> source_ids,
                                   std::vector<EntityId> target_ids);

/// One row of the similarity matrix, for callers that never materialize the
/// full matrix.
Eigen::VectorXd similarity_row(const Eigen::RowVectorXd& a, const Eigen::MatrixXd& b,
                               Metric metric);

enum class Channel { Structural, Name, Edit };
std::string channel_name(Channel c);
Channel channel_from_name(const std::string& name);

struct Candidate {
    EntityId target;
    double score;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Top candidates for one source entity, ordered by descending score with
/// ties broken by ascending target id.
struct CandidateSet {
    EntityId source = -1;
    Channel channel = Channel::Structural;
    std::vector<Candidate> items;
};

CandidateSet top_k_candidates(const SimilarityMatrix& matrix, EntityId source, int k);

/// Top-k over a raw score row; `target_ids` gives the column -> id mapping.
CandidateSet top_k_from_row(const Eigen::VectorXd& row, const std::vector<EntityId>& target_ids,
                            EntityId source, Channel channel, int k);

/// Minimal number of single-code-point insertions, deletions and
/// substitutions turning s1 into s2. Strings are compared by Unicode code
/// point; invalid UTF-8 bytes are treated as single code points.
std::size_t edit_distance(const std::string& s1, const std::string& s2);

/// 1 - d(s1,s2) / max(|s1|, |s2|), in [0,1]. Two empty strings score 1.
double edit_similarity(const std::string& s1, const std::string& s2);

/// The k targets whose names are closest to `virtual_name` by edit
/// similarity.
CandidateSet edit_candidates(const std::string& virtual_name,
                             const std::map<EntityId, std::string>& target_names, int k);

/// Line format: "source-id<TAB>channel<TAB>target:score,target:score,..."
std::string serialize_candidates(const CandidateSet& set);
CandidateSet parse_candidates(const std::string& line);
void write_candidate_file(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets);
std::vector<CandidateSet> read_candidate_file(const std::filesystem::path& path);

std::vector<std::uint32_t> decode_utf8(const std::string& s);

}  // namespace kgalign
