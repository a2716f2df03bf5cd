// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/synth.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>

#include "kgalign/names.hpp"
#include "kgalign/rng.hpp"

namespace kgalign {
namespace {

const char* kAdjectives[] = {"amber",  "crimson", "golden", "hollow", "iron",
                             "lunar",  "misty",   "north",  "quiet",  "rapid",
                             "silver", "stone",   "tidal",  "velvet", "wild"};
const char* kNouns[] = {"bridge", "canyon", "forest", "garden", "harbor",
                        "island", "meadow", "orchard", "palace", "river",
                        "spring", "summit", "temple", "valley", "willow"};

std::string source_entity_name(int i) {
    const int a = i % static_cast<int>(std::size(kAdjectives));
    const int b = (i / static_cast<int>(std::size(kAdjectives))) %
                  static_cast<int>(std::size(kNouns));
    return std::string(kAdjectives[a]) + " " + kNouns[b] + " e" + std::to_string(i);
}

// Per-token suffix map: every token of the source name gains a trailing 'o'.
std::string transform_name(const std::string& name) {
    std::string out;
    for (const std::string& token : tokenize_name(name)) {
        if (!out.empty()) out += ' ';
        out += token + "o";
    }
    return out;
}

}  // namespace

SyntheticPair generate_synthetic_pair(int entity_count, int relation_count, int triple_count,
                                      std::uint64_t rng_seed) {
    if (entity_count < 1 || relation_count < 1 || triple_count < 1) {
        throw std::runtime_error("entity, relation and triple counts must be positive");
    }
    if (triple_count < entity_count) {
        throw std::runtime_error("need at least one triple per entity");
    }

    Rng rng(rng_seed);
    const EntityId n = entity_count;
    const RelationId r = relation_count;

    std::vector<std::pair<EntityId, std::string>> src_entities, tgt_entities;
    for (int i = 0; i < entity_count; ++i) {
        const std::string name = source_entity_name(i);
        src_entities.emplace_back(i, name);
        tgt_entities.emplace_back(n + i, transform_name(name));
    }

    std::vector<std::pair<RelationId, std::string>> src_relations, tgt_relations;
    for (int i = 0; i < relation_count; ++i) {
        src_relations.emplace_back(i, "relation_" + std::to_string(i));
        tgt_relations.emplace_back(r + i, "relation_" + std::to_string(i) + "_t");
    }

    std::vector<Triple> src_triples;
    src_triples.reserve(static_cast<std::size_t>(triple_count));
    // Spanning links first so the graph is connected.
    for (EntityId i = 1; i < n; ++i) {
        const EntityId parent = static_cast<EntityId>(rng.next_below(static_cast<std::uint64_t>(i)));
        const RelationId rel = static_cast<RelationId>(rng.next_below(static_cast<std::uint64_t>(r)));
        src_triples.push_back(Triple{i, rel, parent});
    }
    while (src_triples.size() < static_cast<std::size_t>(triple_count)) {
        const EntityId h = static_cast<EntityId>(rng.next_below(static_cast<std::uint64_t>(n)));
        const EntityId t = static_cast<EntityId>(rng.next_below(static_cast<std::uint64_t>(n)));
        const RelationId rel = static_cast<RelationId>(rng.next_below(static_cast<std::uint64_t>(r)));
        src_triples.push_back(Triple{h, rel, t});
    }

    std::vector<Triple> tgt_triples;
    tgt_triples.reserve(src_triples.size());
    for (const Triple& t : src_triples) {
        tgt_triples.push_back(Triple{t.head + n, t.relation + r, t.tail + n});
    }

    std::vector<std::pair<EntityId, EntityId>> truth;
    truth.reserve(static_cast<std::size_t>(entity_count));
    for (EntityId i = 0; i < n; ++i) truth.emplace_back(i, n + i);

    KnowledgeGraph source = KnowledgeGraph::from_parts(std::move(src_entities),
                                                       std::move(src_relations),
                                                       std::move(src_triples));
    KnowledgeGraph target = KnowledgeGraph::from_parts(std::move(tgt_entities),
                                                       std::move(tgt_relations),
                                                       std::move(tgt_triples));
    return SyntheticPair{KgPair(std::move(source), std::move(target)),
                         AlignmentSeedSet(std::move(truth))};
}

void write_synthetic_dataset(const SyntheticPair& synth, const std::filesystem::path& dir,
                             std::uint64_t rng_seed) {
    std::filesystem::create_directories(dir);
    write_kg_files(synth.pair.source(), dir / "ent_ids_1", dir / "rel_ids_1",
                   dir / "triples_1");
    write_kg_files(synth.pair.target(), dir / "ent_ids_2", dir / "rel_ids_2",
                   dir / "triples_2");
    write_seed_pairs(synth.truth, dir / "ref_ent_ids");

    // Word vectors: source tokens get random coordinates, their suffixed
    // counterparts sit nearby so the name channel carries real signal.
    std::set<std::string> source_tokens;
    for (EntityId id : synth.pair.source().entity_ids()) {
        for (const std::string& tok : tokenize_name(synth.pair.source().entity_name(id))) {
            source_tokens.insert(tok);
        }
    }
    const int dim = 16;
    Rng rng(Rng::derive(rng_seed, 0x76656374));
    std::ofstream out(dir / "vectors.txt");
    if (!out) throw std::runtime_error("cannot write " + (dir / "vectors.txt").string());
    for (const std::string& token : source_tokens) {
        std::vector<double> base(dim);
        for (double& v : base) v = rng.uniform(-1.0, 1.0);
        out << token;
        for (double v : base) out << ' ' << v;
        out << '\n';
        out << token << 'o';
        for (double v : base) out << ' ' << v + rng.uniform(-0.05, 0.05);
        out << '\n';
    }
}

}  // namespace kgalign
