// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgalign/kg.hpp"

namespace kgalign {

/// Pretrained word vectors loaded from a text file: one token followed by
/// its d_w components per line, space-separated. Tokens containing spaces
/// (as found in some published vector files) are supported by taking the
/// trailing d_w fields as the vector.
class WordVectorStore {
public:
    WordVectorStore() = default;

    bool empty() const { return vectors_.empty(); }
    std::size_t size() const { return vectors_.size(); }
    int dim() const { return dim_; }
    const Eigen::VectorXf* find(const std::string& token) const;

    friend WordVectorStore load_word_vectors(const std::filesystem::path& path);

private:
    std::unordered_map<std::string, Eigen::VectorXf> vectors_;
    int dim_ = 0;
};

WordVectorStore load_word_vectors(const std::filesystem::path& path);

/// Lowercases and splits on whitespace, underscores, hyphens, commas and
/// parentheses; empty tokens are dropped. Bytes outside ASCII pass through.
std::vector<std::string> tokenize_name(const std::string& name);

struct NameEmbedding {
    Eigen::VectorXd vector;
    bool all_oov = false;  // no token was in vocabulary; vector is zero
};

/// Mean of the in-vocabulary token vectors of the (URI-stripped) name.
NameEmbedding name_embedding(const WordVectorStore& store, const std::string& name);

/// Per-entity name embeddings for one graph side, rows in ascending-id
/// order (matching the side's entity_ids()).
struct NameEmbeddingMatrix {
    Eigen::MatrixXd rows;            // |E_side| x d_w
    std::vector<bool> all_oov;       // flag per row
    std::vector<EntityId> ids;       // row -> entity id
};

NameEmbeddingMatrix build_name_embeddings(const WordVectorStore& store,
                                          const KnowledgeGraph& side);

}  // namespace kgalign
