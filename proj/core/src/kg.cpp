// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/kg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "kgalign/rng.hpp"

namespace kgalign {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line,
                          const std::string& msg) {
    std::ostringstream os;
    os << file.string() << ":" << line << ": " << msg;
    fail(os.str());
}

std::int64_t parse_int_field(const std::string& field, const std::filesystem::path& file,
                             std::size_t line) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        fail_at(file, line, "malformed integer field '" + field + "'");
    }
    if (value < 0) {
        fail_at(file, line, "negative id '" + field + "'");
    }
    return value;
}

void rtrim(std::string& s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                          s.back() == '\n')) {
        s.pop_back();
    }
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::ifstream open_or_fail(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    return in;
}

// id<TAB>name files
std::vector<std::pair<std::int64_t, std::string>> parse_id_name_file(
    const std::filesystem::path& path) {
    std::ifstream in = open_or_fail(path);
    std::vector<std::pair<std::int64_t, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        rtrim(line);
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2) {
            fail_at(path, lineno, "expected 'id<TAB>name', got " +
                                      std::to_string(fields.size()) + " fields");
        }
        std::int64_t id = parse_int_field(fields[0], path, lineno);
        out.emplace_back(id, fields[1]);
    }
    return out;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::from_parts(
    std::vector<std::pair<EntityId, std::string>> entities,
    std::vector<std::pair<RelationId, std::string>> relations, std::vector<Triple> triples) {
    KnowledgeGraph kg;
    for (auto& [id, name] : entities) {
        if (!kg.entity_names_.emplace(id, std::move(name)).second) {
            fail("duplicate entity id " + std::to_string(id));
        }
        kg.entity_ids_.push_back(id);
    }
    for (auto& [id, name] : relations) {
        if (!kg.relation_names_.emplace(id, std::move(name)).second) {
            fail("duplicate relation id " + std::to_string(id));
        }
        kg.relation_ids_.push_back(id);
    }
    std::sort(kg.entity_ids_.begin(), kg.entity_ids_.end());
    std::sort(kg.relation_ids_.begin(), kg.relation_ids_.end());
    for (const Triple& t : triples) {
        if (!kg.has_entity(t.head)) {
            fail("triple references unknown head entity " + std::to_string(t.head));
        }
        if (!kg.has_relation(t.relation)) {
            fail("triple references unknown relation " + std::to_string(t.relation));
        }
        if (!kg.has_entity(t.tail)) {
            fail("triple references unknown tail entity " + std::to_string(t.tail));
        }
    }
    kg.triples_ = std::move(triples);
    return kg;
}

const std::string& KnowledgeGraph::entity_name(EntityId id) const {
    auto it = entity_names_.find(id);
    if (it == entity_names_.end()) fail("unknown entity id " + std::to_string(id));
    return it->second;
}

const std::string& KnowledgeGraph::relation_name(RelationId id) const {
    auto it = relation_names_.find(id);
    if (it == relation_names_.end()) fail("unknown relation id " + std::to_string(id));
    return it->second;
}

KgPair::KgPair(KnowledgeGraph source, KnowledgeGraph target)
    : source_(std::move(source)), target_(std::move(target)) {
    for (EntityId id : target_.entity_ids()) {
        if (source_.has_entity(id)) {
            fail("entity id " + std::to_string(id) + " appears on both sides");
        }
    }
    for (RelationId id : target_.relation_ids()) {
        if (source_.has_relation(id) && source_.relation_name(id) != target_.relation_name(id)) {
            fail("relation id " + std::to_string(id) +
                 " appears on both sides with different names");
        }
    }
}

KgPair::Side KgPair::side_of(EntityId id) const {
    if (source_.has_entity(id)) return Side::Source;
    if (target_.has_entity(id)) return Side::Target;
    fail("entity id " + std::to_string(id) + " belongs to neither side");
}

const std::string& KgPair::entity_name(EntityId id) const {
    return graph(side_of(id)).entity_name(id);
}

KnowledgeGraph KgPair::merged() const {
    std::vector<std::pair<EntityId, std::string>> entities;
    entities.reserve(source_.entity_count() + target_.entity_count());
    for (EntityId id : source_.entity_ids()) entities.emplace_back(id, source_.entity_name(id));
    for (EntityId id : target_.entity_ids()) entities.emplace_back(id, target_.entity_name(id));

    std::vector<std::pair<RelationId, std::string>> relations;
    for (RelationId id : source_.relation_ids()) {
        relations.emplace_back(id, source_.relation_name(id));
    }
    for (RelationId id : target_.relation_ids()) {
        if (!source_.has_relation(id)) relations.emplace_back(id, target_.relation_name(id));
    }

    std::vector<Triple> triples = source_.triples();
    triples.insert(triples.end(), target_.triples().begin(), target_.triples().end());
    return KnowledgeGraph::from_parts(std::move(entities), std::move(relations),
                                      std::move(triples));
}

AlignmentSeedSet::AlignmentSeedSet(std::vector<std::pair<EntityId, EntityId>> pairs)
    : pairs_(std::move(pairs)) {
    for (const auto& [s, t] : pairs_) {
        if (!by_source_.emplace(s, t).second) {
            fail("source entity " + std::to_string(s) + " appears in more than one seed pair");
        }
        if (!by_target_.emplace(t, s).second) {
            fail("target entity " + std::to_string(t) + " appears in more than one seed pair");
        }
    }
}

EntityId AlignmentSeedSet::target_of(EntityId source) const {
    auto it = by_source_.find(source);
    return it == by_source_.end() ? -1 : it->second;
}

EntityId AlignmentSeedSet::source_of(EntityId target) const {
    auto it = by_target_.find(target);
    return it == by_target_.end() ? -1 : it->second;
}

EntityIndexer::EntityIndexer(std::vector<EntityId> sorted_ids) : ids_(std::move(sorted_ids)) {
    rows_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        rows_[ids_[i]] = static_cast<int>(i);
    }
}

int EntityIndexer::row(EntityId id) const {
    auto it = rows_.find(id);
    if (it == rows_.end()) fail("entity id " + std::to_string(id) + " is not indexed");
    return it->second;
}

int NeighborIndex::relation_row(RelationId id) const {
    auto it = relation_rows_.find(id);
    if (it == relation_rows_.end()) fail("relation id " + std::to_string(id) + " is not indexed");
    return it->second;
}

KnowledgeGraph parse_kg_files(const std::filesystem::path& entity_file,
                              const std::filesystem::path& relation_file,
                              const std::filesystem::path& triple_file) {
    auto entities = parse_id_name_file(entity_file);
    auto relations = parse_id_name_file(relation_file);

    std::ifstream in = open_or_fail(triple_file);
    std::vector<Triple> triples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        rtrim(line);
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3) {
            fail_at(triple_file, lineno, "expected 'head<TAB>relation<TAB>tail', got " +
                                             std::to_string(fields.size()) + " fields");
        }
        triples.push_back(Triple{parse_int_field(fields[0], triple_file, lineno),
                                 parse_int_field(fields[1], triple_file, lineno),
                                 parse_int_field(fields[2], triple_file, lineno)});
    }
    try {
        return KnowledgeGraph::from_parts(std::move(entities), std::move(relations),
                                          std::move(triples));
    } catch (const std::exception& e) {
        fail("while loading " + entity_file.string() + " / " + relation_file.string() + " / " +
             triple_file.string() + ": " + e.what());
    }
}

void write_kg_files(const KnowledgeGraph& kg, const std::filesystem::path& entity_file,
                    const std::filesystem::path& relation_file,
                    const std::filesystem::path& triple_file) {
    std::ofstream ents(entity_file);
    if (!ents) fail("cannot write " + entity_file.string());
    for (EntityId id : kg.entity_ids()) {
        ents << id << '\t' << kg.entity_name(id) << '\n';
    }
    std::ofstream rels(relation_file);
    if (!rels) fail("cannot write " + relation_file.string());
    for (RelationId id : kg.relation_ids()) {
        rels << id << '\t' << kg.relation_name(id) << '\n';
    }
    std::ofstream trips(triple_file);
    if (!trips) fail("cannot write " + triple_file.string());
    for (const Triple& t : kg.triples()) {
        trips << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    }
}

AlignmentSeedSet parse_seed_pairs(const std::filesystem::path& path, const KgPair& pair) {
    std::ifstream in = open_or_fail(path);
    std::vector<std::pair<EntityId, EntityId>> pairs;
    std::set<EntityId> seen_sources, seen_targets;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        rtrim(line);
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2) {
            fail_at(path, lineno, "expected 'source-id<TAB>target-id', got " +
                                      std::to_string(fields.size()) + " fields");
        }
        EntityId s = parse_int_field(fields[0], path, lineno);
        EntityId t = parse_int_field(fields[1], path, lineno);
        if (!pair.source().has_entity(s)) {
            fail_at(path, lineno, "unknown source entity " + std::to_string(s));
        }
        if (!pair.target().has_entity(t)) {
            fail_at(path, lineno, "unknown target entity " + std::to_string(t));
        }
        if (!seen_sources.insert(s).second) {
            fail_at(path, lineno, "source entity " + std::to_string(s) + " seeded twice");
        }
        if (!seen_targets.insert(t).second) {
            fail_at(path, lineno, "target entity " + std::to_string(t) + " seeded twice");
        }
        pairs.emplace_back(s, t);
    }
    return AlignmentSeedSet(std::move(pairs));
}

void write_seed_pairs(const AlignmentSeedSet& seeds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path.string());
    for (const auto& [s, t] : seeds.pairs()) {
        out << s << '\t' << t << '\n';
    }
}

std::pair<AlignmentSeedSet, AlignmentSeedSet> split_seeds(const AlignmentSeedSet& seeds,
                                                          double train_fraction,
                                                          std::uint64_t rng_seed) {
    if (!(train_fraction > 0.0) || train_fraction > 1.0) {
        fail("train fraction must lie in (0, 1]");
    }
    const std::size_t n = seeds.size();
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(rng_seed);
    rng.shuffle(order);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train && i < n; ++i) in_train[order[i]] = true;

    std::vector<std::pair<EntityId, EntityId>> train, test;
    train.reserve(n_train);
    test.reserve(n - std::min(n, n_train));
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? train : test).push_back(seeds.pairs()[i]);
    }
    return {AlignmentSeedSet(std::move(train)), AlignmentSeedSet(std::move(test))};
}

NeighborIndex build_adjacency(const KnowledgeGraph& kg) {
    NeighborIndex index;
    index.entities_ = EntityIndexer(kg.entity_ids());

    // Inverse relations live at base-id + offset; offset is the relation
    // count when ids are contiguous from zero, and max-id + 1 otherwise so
    // inverse ids can never collide with base ids.
    RelationId max_rel = -1;
    for (RelationId r : kg.relation_ids()) max_rel = std::max(max_rel, r);
    const RelationId offset = max_rel + 1;
    index.inverse_offset_ = offset;
    index.self_relation_ = 2 * offset;

    index.relation_ids_.reserve(2 * kg.relation_count() + 1);
    for (RelationId r : kg.relation_ids()) index.relation_ids_.push_back(r);
    for (RelationId r : kg.relation_ids()) index.relation_ids_.push_back(r + offset);
    index.relation_ids_.push_back(index.self_relation_);
    for (std::size_t i = 0; i < index.relation_ids_.size(); ++i) {
        index.relation_rows_[index.relation_ids_[i]] = static_cast<int>(i);
    }

    const int n = index.entities_.size();
    index.edges_.resize(static_cast<std::size_t>(n));
    for (int row = 0; row < n; ++row) {
        EntityId id = index.entities_.id(row);
        index.edges_[static_cast<std::size_t>(row)].push_back(
            NeighborIndex::Edge{id, index.self_relation_, row});
    }
    for (const Triple& t : kg.triples()) {
        int head_row = index.entities_.row(t.head);
        int tail_row = index.entities_.row(t.tail);
        index.edges_[static_cast<std::size_t>(head_row)].push_back(
            NeighborIndex::Edge{t.tail, t.relation, tail_row});
        index.edges_[static_cast<std::size_t>(tail_row)].push_back(
            NeighborIndex::Edge{t.head, t.relation + offset, head_row});
    }
    index.total_edges_ = 0;
    for (auto& list : index.edges_) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
            return a.neighbor != b.neighbor ? a.neighbor < b.neighbor : a.relation < b.relation;
        });
        index.total_edges_ += list.size();
    }
    return index;
}

std::string strip_uri_prefix(const std::string& name) {
    if (name.find("://") == std::string::npos) return name;
    std::size_t slash = name.rfind('/');
    if (slash == std::string::npos || slash + 1 >= name.size()) return name;
    return name.substr(slash + 1);
}

Dataset load_dataset(const std::filesystem::path& dir) {
    KnowledgeGraph source =
        parse_kg_files(dir / "ent_ids_1", dir / "rel_ids_1", dir / "triples_1");
    KnowledgeGraph target =
        parse_kg_files(dir / "ent_ids_2", dir / "rel_ids_2", dir / "triples_2");
    KgPair pair(std::move(source), std::move(target));
    AlignmentSeedSet reference = parse_seed_pairs(dir / "ref_ent_ids", pair);
    return Dataset{std::move(pair), std::move(reference)};
}

}  // namespace kgalign
