// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kgalign {

using EntityId = std::int64_t;
using RelationId = std::int64_t;

struct Triple {
    EntityId head;
    RelationId relation;
    EntityId tail;

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// A knowledge graph: entities and relations with surface names, plus
/// integer-id relational triples. Immutable after construction; all ids
/// referenced by triples are validated against the dictionaries.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    static KnowledgeGraph from_parts(std::vector<std::pair<EntityId, std::string>> entities,
                                     std::vector<std::pair<RelationId, std::string>> relations,
                                     std::vector<Triple> triples);

    bool has_entity(EntityId id) const { return entity_names_.count(id) != 0; }
    bool has_relation(RelationId id) const { return relation_names_.count(id) != 0; }
    const std::string& entity_name(EntityId id) const;
    const std::string& relation_name(RelationId id) const;

    std::size_t entity_count() const { return entity_ids_.size(); }
    std::size_t relation_count() const { return relation_ids_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    /// Entity ids in ascending order.
    const std::vector<EntityId>& entity_ids() const { return entity_ids_; }
    /// Relation ids in ascending order.
    const std::vector<RelationId>& relation_ids() const { return relation_ids_; }
    const std::vector<Triple>& triples() const { return triples_; }

    friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;

private:
    std::unordered_map<EntityId, std::string> entity_names_;
    std::unordered_map<RelationId, std::string> relation_names_;
    std::vector<EntityId> entity_ids_;
    std::vector<RelationId> relation_ids_;
    std::vector<Triple> triples_;
};

/// Source and target graphs of one alignment task. Entity and relation id
/// spaces must be disjoint so that the owning side of any id is recoverable.
class KgPair {
public:
    enum class Side { Source, Target };

    KgPair(KnowledgeGraph source, KnowledgeGraph target);

    const KnowledgeGraph& source() const { return source_; }
    const KnowledgeGraph& target() const { return target_; }
    const KnowledgeGraph& graph(Side s) const { return s == Side::Source ? source_ : target_; }

    Side side_of(EntityId id) const;
    const std::string& entity_name(EntityId id) const;

    /// Union graph over both sides; ids are unchanged.
    KnowledgeGraph merged() const;

private:
    KnowledgeGraph source_;
    KnowledgeGraph target_;
};

/// Known equivalent-entity pairs. One-to-one: no source and no target id
/// appears twice.
class AlignmentSeedSet {
public:
    AlignmentSeedSet() = default;
    explicit AlignmentSeedSet(std::vector<std::pair<EntityId, EntityId>> pairs);

    const std::vector<std::pair<EntityId, EntityId>>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    bool contains_source(EntityId id) const { return by_source_.count(id) != 0; }
    bool contains_target(EntityId id) const { return by_target_.count(id) != 0; }
    /// Aligned counterpart, or -1 when the id is not seeded on that side.
    EntityId target_of(EntityId source) const;
    EntityId source_of(EntityId target) const;

    friend bool operator==(const AlignmentSeedSet& a, const AlignmentSeedSet& b) {
        return a.pairs_ == b.pairs_;
    }

private:
    std::vector<std::pair<EntityId, EntityId>> pairs_;
    std::unordered_map<EntityId, EntityId> by_source_;
    std::unordered_map<EntityId, EntityId> by_target_;
};

/// Dense row numbering for a set of entity ids (ascending id order).
class EntityIndexer {
public:
    EntityIndexer() = default;
    explicit EntityIndexer(std::vector<EntityId> sorted_ids);

    int row(EntityId id) const;
    EntityId id(int row) const { return ids_[static_cast<std::size_t>(row)]; }
    int size() const { return static_cast<int>(ids_.size()); }
    const std::vector<EntityId>& ids() const { return ids_; }

private:
    std::vector<EntityId> ids_;
    std::unordered_map<EntityId, int> rows_;
};

/// Aggregation edges per entity: every triple contributes a forward and an
/// inverse edge, and every entity carries a self-loop under a dedicated
/// relation id. Edge lists are sorted by (neighbor id, relation id).
class NeighborIndex {
public:
    struct Edge {
        EntityId neighbor;
        RelationId relation;
        int neighbor_row;  // dense row of `neighbor`

        friend bool operator==(const Edge&, const Edge&) = default;
    };

    /// Edges of one entity, by dense row.
    const std::vector<Edge>& edges(int row) const { return edges_[static_cast<std::size_t>(row)]; }
    const std::vector<Edge>& edges_of(EntityId id) const { return edges(entities_.row(id)); }

    std::size_t total_edges() const { return total_edges_; }
    const EntityIndexer& entities() const { return entities_; }

    /// All relation ids with an embedding row (base + inverse + self-loop),
    /// ascending.
    const std::vector<RelationId>& relation_ids() const { return relation_ids_; }
    int relation_row(RelationId id) const;
    RelationId inverse_offset() const { return inverse_offset_; }
    RelationId self_relation() const { return self_relation_; }

    friend NeighborIndex build_adjacency(const KnowledgeGraph& kg);

private:
    EntityIndexer entities_;
    std::vector<std::vector<Edge>> edges_;
    std::vector<RelationId> relation_ids_;
    std::unordered_map<RelationId, int> relation_rows_;
    RelationId inverse_offset_ = 0;
    RelationId self_relation_ = 0;
    std::size_t total_edges_ = 0;
};

/// File parsing.
///
/// Dataset files are UTF-8, tab-separated, one record per line:
///   entity/relation files: "<id>\t<name>"
///   triple files:          "<head>\t<relation>\t<tail>"
///   seed files:            "<source-id>\t<target-id>"
KnowledgeGraph parse_kg_files(const std::filesystem::path& entity_file,
                              const std::filesystem::path& relation_file,
                              const std::filesystem::path& triple_file);

void write_kg_files(const KnowledgeGraph& kg,
                    const std::filesystem::path& entity_file,
                    const std::filesystem::path& relation_file,
                    const std::filesystem::path& triple_file);

AlignmentSeedSet parse_seed_pairs(const std::filesystem::path& path, const KgPair& pair);
void write_seed_pairs(const AlignmentSeedSet& seeds, const std::filesystem::path& path);

/// Deterministic shuffle-split. |train| = round(fraction * |seeds|).
std::pair<AlignmentSeedSet, AlignmentSeedSet> split_seeds(const AlignmentSeedSet& seeds,
                                                          double train_fraction,
                                                          std::uint64_t rng_seed);

NeighborIndex build_adjacency(const KnowledgeGraph& kg);

/// Human-readable form of a (possibly URI) entity name: the text after the
/// final '/' when the name looks like a URI, otherwise the name itself.
std::string strip_uri_prefix(const std::string& name);

/// A DBP15K-style dataset directory:
///   ent_ids_1, rel_ids_1, triples_1   (source side)
///   ent_ids_2, rel_ids_2, triples_2   (target side)
///   ref_ent_ids                       (reference alignment)
struct Dataset {
    KgPair pair;
    AlignmentSeedSet reference;
};
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace kgalign
