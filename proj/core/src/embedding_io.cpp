// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/embedding_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace kgalign {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u64_le(std::vector<char>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

void write_matrix_block(std::ostream& out, const Eigen::MatrixXd& m) {
    std::vector<char> header;
    header.insert(header.end(), kMagic, kMagic + 4);
    put_u64_le(header, static_cast<std::uint64_t>(m.rows()));
    put_u64_le(header, static_cast<std::uint64_t>(m.cols()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::vector<char> payload;
    payload.reserve(static_cast<std::size_t>(m.size()) * 8);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_u64_le(payload, std::bit_cast<std::uint64_t>(m(r, c)));
        }
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw std::runtime_error("failed writing matrix block");
}

Eigen::MatrixXd read_matrix_block(std::istream& in) {
    unsigned char header[20];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in) throw std::runtime_error("truncated matrix block header");
    if (std::memcmp(header, kMagic, 4) != 0) {
        throw std::runtime_error("bad matrix block magic (expected EMB1)");
    }
    const std::uint64_t rows = get_u64_le(header + 4);
    const std::uint64_t cols = get_u64_le(header + 12);
    if (rows > (1ull << 32) || cols > (1ull << 24)) {
        throw std::runtime_error("implausible matrix block dimensions");
    }
    const std::size_t count = static_cast<std::size_t>(rows * cols);
    std::vector<unsigned char> payload(count * 8);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (!in) throw std::runtime_error("truncated matrix block payload");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t offset = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = std::bit_cast<double>(get_u64_le(payload.data() + offset));
            offset += 8;
        }
    }
    return m;
}

bool at_stream_end(std::istream& in) { return in.peek() == std::char_traits<char>::eof(); }

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_matrix_block(out, m);
}

Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_matrix_block(in);
}

}  // namespace kgalign
