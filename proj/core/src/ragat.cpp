// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/ragat.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "kgalign/embedding_io.hpp"
#include "kgalign/parallel.hpp"

namespace kgalign {
namespace {

// Raw reflection formula without the unit-norm guard; used inside the
// network so the forward pass stays differentiable in the relation rows.
inline void reflect_into(const Eigen::RowVectorXd& axis, const Eigen::RowVectorXd& x,
                         Eigen::RowVectorXd& out) {
    out = x - 2.0 * axis.dot(x) * axis;
}

void check_layer_args(const ModelParams& params, int layer, const NeighborIndex& index,
                      const Eigen::MatrixXd& h_in) {
    if (layer < 1 || layer > params.layer_count()) {
        throw std::runtime_error("layer index out of range");
    }
    if (h_in.rows() != index.entities().size()) {
        throw std::runtime_error("state row count does not match entity count");
    }
    if (h_in.cols() != params.dim() || params.relation_emb.cols() != params.dim()) {
        throw std::runtime_error("embedding dimension mismatch");
    }
}

// Softmax over edge logits for one entity; max-stabilized.
void edge_attention(const ModelParams& params, const Eigen::VectorXd& q,
                    const NeighborIndex& index, const Eigen::MatrixXd& h_in, int row,
                    std::vector<double>& alpha) {
    const auto& edges = index.edges(row);
    alpha.resize(edges.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Eigen::RowVectorXd edge_emb =
            (h_in.row(row) + h_in.row(edges[k].neighbor_row)).array().tanh().matrix();
        alpha[k] = q.dot(edge_emb);
        max_logit = std::max(max_logit, alpha[k]);
    }
    double denom = 0.0;
    for (double& a : alpha) {
        a = std::exp(a - max_logit);
        denom += a;
    }
    for (double& a : alpha) a /= denom;
}

}  // namespace

Eigen::VectorXd householder_reflect(const Eigen::VectorXd& axis, const Eigen::VectorXd& x) {
    if (axis.size() != x.size()) {
        throw std::runtime_error("reflection axis and vector dimensions differ");
    }
    if (std::abs(axis.norm() - 1.0) > 1e-6) {
        throw std::runtime_error("reflection axis is not unit-norm");
    }
    return x - 2.0 * axis.dot(x) * axis;
}

Eigen::MatrixXd ragat_layer(const ModelParams& params, int layer, const NeighborIndex& index,
                            const Eigen::MatrixXd& h_in) {
    check_layer_args(params, layer, index, h_in);
    const Eigen::VectorXd& q = params.attention[static_cast<std::size_t>(layer - 1)];
    const int n = index.entities().size();
    const int d = params.dim();
    Eigen::MatrixXd h_out(n, d);

    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t i) {
        const int row = static_cast<int>(i);
        const auto& edges = index.edges(row);
        std::vector<double> alpha;
        edge_attention(params, q, index, h_in, row, alpha);
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
        Eigen::RowVectorXd reflected(d);
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const Eigen::RowVectorXd rel =
                params.relation_emb.row(index.relation_row(edges[k].relation));
            const Eigen::RowVectorXd neighbor = h_in.row(edges[k].neighbor_row);
            reflect_into(rel, neighbor, reflected);
            acc += alpha[k] * reflected;
        }
        h_out.row(row) = acc.array().tanh().matrix();
    });
    return h_out;
}

std::vector<double> attention_weights(const ModelParams& params, int layer,
                                      const NeighborIndex& index, const Eigen::MatrixXd& h_in,
                                      int row) {
    check_layer_args(params, layer, index, h_in);
    std::vector<double> alpha;
    edge_attention(params, params.attention[static_cast<std::size_t>(layer - 1)], index, h_in,
                   row, alpha);
    return alpha;
}

EmbeddingMatrix forward(const ModelParams& params, const NeighborIndex& index) {
    ForwardTrace trace;
    return forward_traced(params, index, trace);
}

EmbeddingMatrix forward_traced(const ModelParams& params, const NeighborIndex& index,
                               ForwardTrace& trace) {
    const int n = index.entities().size();
    const int d = params.dim();
    const int layers = params.layer_count();
    if (layers < 1) throw std::runtime_error("model must have at least one layer");
    if (params.entity_init.rows() != n) {
        throw std::runtime_error("entity_init row count does not match entity count");
    }

    trace.states.clear();
    trace.states.reserve(static_cast<std::size_t>(layers) + 1);
    trace.states.push_back(params.entity_init);
    for (int layer = 1; layer <= layers; ++layer) {
        trace.states.push_back(ragat_layer(params, layer, index, trace.states.back()));
    }

    EmbeddingMatrix out;
    out.rows.resize(n, static_cast<Eigen::Index>(layers + 1) * d);
    for (int layer = 0; layer <= layers; ++layer) {
        out.rows.middleCols(static_cast<Eigen::Index>(layer) * d, d) =
            trace.states[static_cast<std::size_t>(layer)];
    }
    out.index = index.entities();
    return out;
}

ParamGradients backward(const ModelParams& params, const NeighborIndex& index,
                        const ForwardTrace& trace, const Eigen::MatrixXd& d_output) {
    const int n = index.entities().size();
    const int d = params.dim();
    const int layers = params.layer_count();
    if (static_cast<int>(trace.states.size()) != layers + 1) {
        throw std::runtime_error("forward trace does not match the model");
    }
    if (d_output.rows() != n || d_output.cols() != static_cast<Eigen::Index>(layers + 1) * d) {
        throw std::runtime_error("output gradient has wrong shape");
    }

    ParamGradients grads;
    grads.entity_init = Eigen::MatrixXd::Zero(n, d);
    grads.relation_emb = Eigen::MatrixXd::Zero(params.relation_emb.rows(), d);
    grads.attention.assign(static_cast<std::size_t>(layers), Eigen::VectorXd::Zero(d));

    // d_state: gradient w.r.t. the current layer's output, seeded from the
    // matching slice of the concatenated output gradient.
    Eigen::MatrixXd d_state = d_output.middleCols(static_cast<Eigen::Index>(layers) * d, d);

    for (int layer = layers; layer >= 1; --layer) {
        const Eigen::MatrixXd& x = trace.states[static_cast<std::size_t>(layer - 1)];
        const Eigen::MatrixXd& y = trace.states[static_cast<std::size_t>(layer)];
        const Eigen::VectorXd& q = params.attention[static_cast<std::size_t>(layer - 1)];
        Eigen::VectorXd& dq = grads.attention[static_cast<std::size_t>(layer - 1)];
        Eigen::MatrixXd d_x = Eigen::MatrixXd::Zero(n, d);

        std::vector<double> alpha;
        Eigen::RowVectorXd reflected(d);
        for (int row = 0; row < n; ++row) {
            const Eigen::RowVectorXd dy = d_state.row(row);
            if (dy.isZero(0.0)) continue;
            const auto& edges = index.edges(row);
            edge_attention(params, q, index, x, row, alpha);

            // dz = dy * (1 - y^2), through the output tanh
            const Eigen::RowVectorXd dz =
                (dy.array() * (1.0 - y.row(row).array().square())).matrix();

            // First pass: d(alpha) per edge, for the softmax backward.
            std::vector<double> d_alpha(edges.size());
            double weighted = 0.0;  // sum_u alpha_u * d_alpha_u
            for (std::size_t k = 0; k < edges.size(); ++k) {
                const Eigen::RowVectorXd rel =
                    params.relation_emb.row(index.relation_row(edges[k].relation));
                reflect_into(rel, x.row(edges[k].neighbor_row), reflected);
                d_alpha[k] = dz.dot(reflected);
                weighted += alpha[k] * d_alpha[k];
            }

            for (std::size_t k = 0; k < edges.size(); ++k) {
                const int j = edges[k].neighbor_row;
                const int rel_row = index.relation_row(edges[k].relation);
                const Eigen::RowVectorXd rel = params.relation_emb.row(rel_row);
                const Eigen::RowVectorXd xj = x.row(j);

                // Message branch: m = xj - 2 (rel . xj) rel, scaled by alpha.
                const Eigen::RowVectorXd dm = alpha[k] * dz;
                const double rel_dot_xj = rel.dot(xj);
                const double rel_dot_dm = rel.dot(dm);
                d_x.row(j) += dm - 2.0 * rel_dot_dm * rel;
                grads.relation_emb.row(rel_row) -=
                    2.0 * (rel_dot_dm * xj + rel_dot_xj * dm);

                // Attention branch through softmax and the edge embedding.
                const double ds = alpha[k] * (d_alpha[k] - weighted);
                if (ds != 0.0) {
                    const Eigen::RowVectorXd edge_emb =
                        (x.row(row) + xj).array().tanh().matrix();
                    dq += ds * edge_emb.transpose();
                    const Eigen::RowVectorXd du =
                        (ds * (q.transpose().array() * (1.0 - edge_emb.array().square())))
                            .matrix();
                    d_x.row(row) += du;
                    d_x.row(j) += du;
                }
            }
        }

        if (layer > 1) {
            d_state = d_x + d_output.middleCols(static_cast<Eigen::Index>(layer - 1) * d, d);
        } else {
            grads.entity_init = d_x + d_output.middleCols(0, d);
        }
    }
    return grads;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_matrix_block(out, params.entity_init);
    write_matrix_block(out, params.relation_emb);
    for (const auto& q : params.attention) {
        write_matrix_block(out, q.transpose());
    }
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    ModelParams params;
    params.entity_init = read_matrix_block(in);
    params.relation_emb = read_matrix_block(in);
    while (!at_stream_end(in)) {
        Eigen::MatrixXd block = read_matrix_block(in);
        if (block.rows() != 1) throw std::runtime_error("attention block must be a row vector");
        params.attention.push_back(block.row(0).transpose());
    }
    if (params.attention.empty()) {
        throw std::runtime_error("checkpoint has no attention vectors");
    }
    return params;
}

}  // namespace kgalign
