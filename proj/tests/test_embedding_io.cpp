// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "kgalign/embedding_io.hpp"

using namespace kgalign;
using kgtest::TempDir;

TEST_CASE("matrix blocks round-trip bit-exactly") {
    TempDir dir;
    Eigen::MatrixXd m(2, 3);
    m << 1.0, -0.0, 3.5e-300, -1.25, 1e308, 0.1;
    write_matrix_file(dir.file("m.bin"), m);
    Eigen::MatrixXd back = read_matrix_file(dir.file("m.bin"));
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) {
            CHECK(std::memcmp(&m(r, c), &back(r, c), sizeof(double)) == 0);
        }
    }
}

TEST_CASE("the on-disk layout is magic, LE counts, LE float64 payload") {
    TempDir dir;
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 1.0;
    write_matrix_file(dir.file("one.bin"), m);
    const std::string bytes = kgtest::read_file(dir.file("one.bin"));
    REQUIRE(bytes.size() == 4 + 8 + 8 + 8);
    CHECK(bytes.substr(0, 4) == "EMB1");
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
    CHECK(p[4] == 1);   // row count, little-endian
    CHECK(p[11] == 0);
    CHECK(p[12] == 1);  // dim
    // IEEE-754 of 1.0 is 0x3FF0000000000000, stored little-endian
    CHECK(p[20 + 7] == 0x3f);
    CHECK(p[20 + 6] == 0xf0);
    CHECK(p[20] == 0x00);
}

TEST_CASE("truncated or corrupt blocks are rejected") {
    TempDir dir;
    kgtest::write_file(dir.file("bad.bin"), "EMB1 nonsense");
    CHECK_THROWS_AS(read_matrix_file(dir.file("bad.bin")), std::runtime_error);
    kgtest::write_file(dir.file("magic.bin"), "NOPE");
    CHECK_THROWS_AS(read_matrix_file(dir.file("magic.bin")), std::runtime_error);
}
