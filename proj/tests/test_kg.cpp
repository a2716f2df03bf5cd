// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include <doctest.h>

#include "helpers.hpp"
#include "kgalign/kg.hpp"

using namespace kgalign;
using kgtest::TempDir;
using kgtest::write_file;

namespace {

KnowledgeGraph parse_fixture(TempDir& dir, const std::string& ents, const std::string& rels,
                             const std::string& trips) {
    write_file(dir.file("ents"), ents);
    write_file(dir.file("rels"), rels);
    write_file(dir.file("trips"), trips);
    return parse_kg_files(dir.file("ents"), dir.file("rels"), dir.file("trips"));
}

KgPair tiny_pair() {
    auto source = KnowledgeGraph::from_parts({{0, "a"}, {1, "b"}}, {{0, "r"}},
                                             {Triple{0, 0, 1}});
    auto target = KnowledgeGraph::from_parts({{10, "x"}, {11, "y"}}, {{5, "s"}},
                                             {Triple{10, 5, 11}});
    return KgPair(std::move(source), std::move(target));
}

}  // namespace

TEST_CASE("parse_kg_files reads a tiny fixture") {
    TempDir dir;
    auto kg = parse_fixture(dir, "0\tfoo\n1\tbar\n", "0\tlikes\n", "0\t0\t1\n");
    CHECK(kg.entity_count() == 2);
    CHECK(kg.relation_count() == 1);
    CHECK(kg.triple_count() == 1);
    CHECK(kg.entity_name(0) == "foo");
    CHECK(kg.relation_name(0) == "likes");
    CHECK(kg.triples()[0] == Triple{0, 0, 1});
}

TEST_CASE("parse_kg_files rejects duplicate entity ids") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(parse_fixture(dir, "0\tfoo\n0\tbar\n", "0\tr\n", ""),
                         doctest::Contains("duplicate entity id 0"), std::runtime_error);
}

TEST_CASE("parse_kg_files rejects dangling triple ids") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(parse_fixture(dir, "0\tfoo\n", "0\tr\n", "0\t0\t7\n"),
                         doctest::Contains("unknown tail entity 7"), std::runtime_error);
}

TEST_CASE("parse_kg_files reports the offending line number") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(parse_fixture(dir, "0\tfoo\nnot-an-id\tbar\n", "0\tr\n", ""),
                         doctest::Contains(":2:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_fixture(dir, "0\tfoo\n", "0\tr\n", "0\t0\n"),
                         doctest::Contains(":1:"), std::runtime_error);
}

TEST_CASE("negative ids are rejected") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(parse_fixture(dir, "-3\tfoo\n", "0\tr\n", ""),
                         doctest::Contains("negative id"), std::runtime_error);
}

TEST_CASE("names keep internal tabs out but trailing whitespace is trimmed") {
    TempDir dir;
    auto kg = parse_fixture(dir, "0\tfoo bar  \r\n", "0\tr\n", "");
    CHECK(kg.entity_name(0) == "foo bar");
}

TEST_CASE("graph round-trips through the file format") {
    TempDir dir;
    auto kg = parse_fixture(dir, "0\tfoo\n3\tbär\n7\tbaz\n", "1\tlikes\n4\thates\n",
                            "0\t1\t3\n7\t4\t0\n0\t1\t7\n");
    write_kg_files(kg, dir.file("e2"), dir.file("r2"), dir.file("t2"));
    auto again = parse_kg_files(dir.file("e2"), dir.file("r2"), dir.file("t2"));
    CHECK(kg == again);
}

TEST_CASE("parse_seed_pairs reads and validates") {
    TempDir dir;
    auto pair = tiny_pair();

    SUBCASE("single pair") {
        write_file(dir.file("ref"), "0\t10\n");
        auto seeds = parse_seed_pairs(dir.file("ref"), pair);
        CHECK(seeds.size() == 1);
        CHECK(seeds.target_of(0) == 10);
        CHECK(seeds.source_of(10) == 0);
    }
    SUBCASE("unknown id") {
        write_file(dir.file("ref"), "0\t999\n");
        CHECK_THROWS_WITH_AS(parse_seed_pairs(dir.file("ref"), pair),
                             doctest::Contains("unknown target entity 999"), std::runtime_error);
    }
    SUBCASE("duplicate source") {
        write_file(dir.file("ref"), "0\t10\n0\t11\n");
        CHECK_THROWS_WITH_AS(parse_seed_pairs(dir.file("ref"), pair),
                             doctest::Contains("seeded twice"), std::runtime_error);
    }
    SUBCASE("duplicate target") {
        write_file(dir.file("ref"), "0\t10\n1\t10\n");
        CHECK_THROWS_WITH_AS(parse_seed_pairs(dir.file("ref"), pair),
                             doctest::Contains("seeded twice"), std::runtime_error);
    }
}

TEST_CASE("split_seeds partitions deterministically") {
    std::vector<std::pair<EntityId, EntityId>> pairs;
    for (EntityId i = 0; i < 15000; ++i) pairs.emplace_back(i, 100000 + i);
    AlignmentSeedSet seeds(pairs);

    auto [train, test] = split_seeds(seeds, 0.3, 7);
    CHECK(train.size() == 4500);
    CHECK(test.size() == 10500);

    // disjoint and exhaustive
    for (const auto& [s, t] : train.pairs()) CHECK_FALSE(test.contains_source(s));
    CHECK(train.size() + test.size() == seeds.size());

    auto [train2, test2] = split_seeds(seeds, 0.3, 7);
    CHECK(train.pairs() == train2.pairs());
    CHECK(test.pairs() == test2.pairs());

    auto [train3, test3] = split_seeds(seeds, 0.3, 8);
    CHECK(train.pairs() != train3.pairs());
}

TEST_CASE("split_seeds with fraction 1.0 keeps everything in train") {
    AlignmentSeedSet seeds({{0, 10}, {1, 11}, {2, 12}});
    auto [train, test] = split_seeds(seeds, 1.0, 0);
    CHECK(train.size() == 3);
    CHECK(test.empty());
}

TEST_CASE("AlignmentSeedSet enforces one-to-one") {
    CHECK_THROWS_AS(AlignmentSeedSet({{0, 10}, {0, 11}}), std::runtime_error);
    CHECK_THROWS_AS(AlignmentSeedSet({{0, 10}, {1, 10}}), std::runtime_error);
}

TEST_CASE("build_adjacency adds forward, inverse and self-loop edges") {
    auto kg = KnowledgeGraph::from_parts({{0, "a"}, {1, "b"}, {2, "c"}},
                                         {{0, "r0"}, {1, "r1"}},
                                         {Triple{0, 1, 1}, Triple{0, 0, 2}});
    auto index = build_adjacency(kg);

    CHECK(index.inverse_offset() == 2);
    CHECK(index.self_relation() == 4);
    CHECK(index.total_edges() == 2 * kg.triple_count() + kg.entity_count());

    // a: self + two forward edges, sorted by (neighbor, relation)
    const auto& a_edges = index.edges_of(0);
    REQUIRE(a_edges.size() == 3);
    CHECK(a_edges[0] == NeighborIndex::Edge{0, 4, 0});
    CHECK(a_edges[1] == NeighborIndex::Edge{1, 1, 1});
    CHECK(a_edges[2] == NeighborIndex::Edge{2, 0, 2});

    // b: self + inverse of (a, r1, b) at relation 1 + offset
    const auto& b_edges = index.edges_of(1);
    REQUIRE(b_edges.size() == 2);
    CHECK(b_edges[0] == NeighborIndex::Edge{0, 3, 0});
    CHECK(b_edges[1] == NeighborIndex::Edge{1, 4, 1});

    // relation universe: base, inverses, self
    CHECK(index.relation_ids() == std::vector<RelationId>{0, 1, 2, 3, 4});
}

TEST_CASE("build_adjacency gives isolated entities a self-loop only") {
    auto kg = KnowledgeGraph::from_parts({{0, "a"}, {5, "lonely"}}, {{0, "r"}}, {});
    auto index = build_adjacency(kg);
    const auto& edges = index.edges_of(5);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].neighbor == 5);
    CHECK(edges[0].relation == index.self_relation());
}

TEST_CASE("build_adjacency is a pure function") {
    auto kg = KnowledgeGraph::from_parts({{0, "a"}, {1, "b"}}, {{0, "r"}},
                                         {Triple{0, 0, 1}, Triple{1, 0, 0}});
    auto i1 = build_adjacency(kg);
    auto i2 = build_adjacency(kg);
    REQUIRE(i1.total_edges() == i2.total_edges());
    for (EntityId id : kg.entity_ids()) {
        CHECK(i1.edges_of(id) == i2.edges_of(id));
    }
}

TEST_CASE("KgPair recovers the side of any id and rejects overlap") {
    auto pair = tiny_pair();
    CHECK(pair.side_of(0) == KgPair::Side::Source);
    CHECK(pair.side_of(11) == KgPair::Side::Target);
    CHECK_THROWS_AS(pair.side_of(42), std::runtime_error);

    auto overlapping_a =
        KnowledgeGraph::from_parts({{0, "a"}}, {}, {});
    auto overlapping_b =
        KnowledgeGraph::from_parts({{0, "x"}}, {}, {});
    CHECK_THROWS_WITH_AS(KgPair(std::move(overlapping_a), std::move(overlapping_b)),
                         doctest::Contains("both sides"), std::runtime_error);
}

TEST_CASE("merged union keeps ids and triples from both sides") {
    auto pair = tiny_pair();
    auto merged = pair.merged();
    CHECK(merged.entity_count() == 4);
    CHECK(merged.relation_count() == 2);
    CHECK(merged.triple_count() == 2);
    CHECK(merged.entity_name(11) == "y");
}

TEST_CASE("strip_uri_prefix keeps plain names and strips URIs") {
    CHECK(strip_uri_prefix("Joe Biden") == "Joe Biden");
    CHECK(strip_uri_prefix("http://dbpedia.org/resource/Joe_Biden") == "Joe_Biden");
    CHECK(strip_uri_prefix("https://example.org/a/b/Last") == "Last");
    CHECK(strip_uri_prefix("no/scheme/here") == "no/scheme/here");
}

TEST_CASE("load_dataset reads the directory layout") {
    TempDir dir;
    write_file(dir.file("ent_ids_1"), "0\ta\n1\tb\n");
    write_file(dir.file("rel_ids_1"), "0\tr\n");
    write_file(dir.file("triples_1"), "0\t0\t1\n");
    write_file(dir.file("ent_ids_2"), "10\tx\n11\ty\n");
    write_file(dir.file("rel_ids_2"), "5\ts\n");
    write_file(dir.file("triples_2"), "10\t5\t11\n");
    write_file(dir.file("ref_ent_ids"), "0\t10\n1\t11\n");

    Dataset ds = load_dataset(dir.path());
    CHECK(ds.pair.source().entity_count() == 2);
    CHECK(ds.pair.target().entity_count() == 2);
    CHECK(ds.reference.size() == 2);
}
