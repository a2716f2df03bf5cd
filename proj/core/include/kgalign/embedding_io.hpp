// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>

namespace kgalign {

// Binary matrix block:
//   magic "EMB1"
//   row count, dim: little-endian uint64
//   payload: row-major float64, little-endian
//
// A checkpoint file is a sequence of such blocks.

void write_matrix_block(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_block(std::istream& in);
bool at_stream_end(std::istream& in);

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path);

}  // namespace kgalign
