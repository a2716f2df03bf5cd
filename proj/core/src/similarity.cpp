// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "kgalign/parallel.hpp"

namespace kgalign {
namespace {

double cosine(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;  // zero vectors never win
    return a.dot(b) / (na * nb);
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool candidate_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.target < b.target;
}

}  // namespace

SimilarityMatrix similarity_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   Metric metric, std::vector<EntityId> source_ids,
                                   std::vector<EntityId> target_ids) {
    if (a.cols() != b.cols()) throw std::runtime_error("embedding dimensions differ");
    if (static_cast<Eigen::Index>(source_ids.size()) != a.rows() ||
        static_cast<Eigen::Index>(target_ids.size()) != b.rows()) {
        throw std::runtime_error("id lists do not match matrix shapes");
    }
    SimilarityMatrix m;
    m.metric = metric;
    m.source_ids = std::move(source_ids);
    m.target_ids = std::move(target_ids);
    m.scores.resize(a.rows(), b.rows());
    parallel_for_spans(0, static_cast<std::size_t>(a.rows()), 64,
                       [&](std::size_t lo, std::size_t hi) {
                           for (std::size_t i = lo; i < hi; ++i) {
                               m.scores.row(static_cast<Eigen::Index>(i)) =
                                   similarity_row(a.row(static_cast<Eigen::Index>(i)), b, metric)
                                       .transpose();
                           }
                       });
    return m;
}

Eigen::VectorXd similarity_row(const Eigen::RowVectorXd& a, const Eigen::MatrixXd& b,
                               Metric metric) {
    if (a.cols() != b.cols()) throw std::runtime_error("embedding dimensions differ");
    Eigen::VectorXd row(b.rows());
    if (metric == Metric::Cosine) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            row[j] = cosine(a, b.row(j));
        }
    } else {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            row[j] = -(a - b.row(j)).norm();
        }
    }
    return row;
}

std::string channel_name(Channel c) {
    switch (c) {
        case Channel::Structural: return "structural";
        case Channel::Name: return "name";
        case Channel::Edit: return "edit";
    }
    throw std::runtime_error("unknown channel");
}

Channel channel_from_name(const std::string& name) {
    if (name == "structural") return Channel::Structural;
    if (name == "name") return Channel::Name;
    if (name == "edit") return Channel::Edit;
    throw std::runtime_error("unknown channel '" + name + "'");
}

CandidateSet top_k_from_row(const Eigen::VectorXd& row, const std::vector<EntityId>& target_ids,
                            EntityId source, Channel channel, int k) {
    if (k < 1) throw std::runtime_error("k must be at least 1");
    if (static_cast<Eigen::Index>(target_ids.size()) != row.size()) {
        throw std::runtime_error("target id list does not match row length");
    }
    CandidateSet set;
    set.source = source;
    set.channel = channel;
    set.items.reserve(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        set.items.push_back(Candidate{target_ids[static_cast<std::size_t>(j)], row[j]});
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), set.items.size());
    std::partial_sort(set.items.begin(), set.items.begin() + static_cast<std::ptrdiff_t>(keep),
                      set.items.end(), candidate_before);
    set.items.resize(keep);
    return set;
}

CandidateSet top_k_candidates(const SimilarityMatrix& matrix, EntityId source, int k) {
    auto it = std::lower_bound(matrix.source_ids.begin(), matrix.source_ids.end(), source);
    if (it == matrix.source_ids.end() || *it != source) {
        throw std::runtime_error("source entity " + std::to_string(source) +
                                 " has no similarity row");
    }
    const Eigen::Index row = it - matrix.source_ids.begin();
    return top_k_from_row(matrix.scores.row(row).transpose(), matrix.target_ids, source,
                          matrix.metric == Metric::Cosine ? Channel::Structural : Channel::Name,
                          k);
}

std::vector<std::uint32_t> decode_utf8(const std::string& s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        std::uint32_t cp = c;
        if ((c & 0x80u) == 0) {
            len = 1;
        } else if ((c & 0xe0u) == 0xc0u) {
            len = 2;
            cp = c & 0x1fu;
        } else if ((c & 0xf0u) == 0xe0u) {
            len = 3;
            cp = c & 0x0fu;
        } else if ((c & 0xf8u) == 0xf0u) {
            len = 4;
            cp = c & 0x07u;
        } else {
            out.push_back(c);  // stray continuation byte
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(c);
            ++i;
            continue;
        }
        bool valid = true;
        std::uint32_t decoded = cp;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char cont = static_cast<unsigned char>(s[i + k]);
            if ((cont & 0xc0u) != 0x80u) {
                valid = false;
                break;
            }
            decoded = (decoded << 6) | (cont & 0x3fu);
        }
        if (!valid) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(decoded);
        i += len;
    }
    return out;
}

std::size_t edit_distance(const std::string& s1, const std::string& s2) {
    const std::vector<std::uint32_t> a = decode_utf8(s1);
    const std::vector<std::uint32_t> b = decode_utf8(s2);
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;

    std::vector<std::size_t> prev(n + 1), curr(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({curr[j - 1] + 1, prev[j] + 1, subst});
        }
        std::swap(prev, curr);
    }
    return prev[n];
}

double edit_similarity(const std::string& s1, const std::string& s2) {
    const std::size_t len1 = decode_utf8(s1).size();
    const std::size_t len2 = decode_utf8(s2).size();
    const std::size_t longest = std::max(len1, len2);
    if (longest == 0) return 1.0;  // two empty names are identical
    return 1.0 - static_cast<double>(edit_distance(s1, s2)) / static_cast<double>(longest);
}

CandidateSet edit_candidates(const std::string& virtual_name,
                             const std::map<EntityId, std::string>& target_names, int k) {
    if (k < 1) throw std::runtime_error("k must be at least 1");
    if (target_names.empty()) throw std::runtime_error("no target names to rank");

    std::vector<std::pair<EntityId, const std::string*>> targets;
    targets.reserve(target_names.size());
    for (const auto& [id, name] : target_names) targets.emplace_back(id, &name);

    std::vector<double> scores(targets.size());
    parallel_for_spans(0, targets.size(), 256, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            scores[i] = edit_similarity(virtual_name, *targets[i].second);
        }
    });

    CandidateSet set;
    set.source = -1;
    set.channel = Channel::Edit;
    set.items.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        set.items.push_back(Candidate{targets[i].first, scores[i]});
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), set.items.size());
    std::partial_sort(set.items.begin(), set.items.begin() + static_cast<std::ptrdiff_t>(keep),
                      set.items.end(), candidate_before);
    set.items.resize(keep);
    return set;
}

std::string serialize_candidates(const CandidateSet& set) {
    std::string line = std::to_string(set.source);
    line += '\t';
    line += channel_name(set.channel);
    line += '\t';
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        if (i > 0) line += ',';
        line += std::to_string(set.items[i].target);
        line += ':';
        line += format_score(set.items[i].score);
    }
    return line;
}

CandidateSet parse_candidates(const std::string& line) {
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
        throw std::runtime_error("malformed candidate line: " + line);
    }
    CandidateSet set;
    set.source = std::stoll(line.substr(0, tab1));
    set.channel = channel_from_name(line.substr(tab1 + 1, tab2 - tab1 - 1));
    std::size_t pos = tab2 + 1;
    while (pos < line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string item = line.substr(pos, comma - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("malformed candidate item: " + item);
        }
        set.items.push_back(
            Candidate{std::stoll(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        pos = comma + 1;
    }
    return set;
}

void write_candidate_file(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& set : sets) out << serialize_candidates(set) << '\n';
}

std::vector<CandidateSet> read_candidate_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<CandidateSet> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        sets.push_back(parse_candidates(line));
    }
    return sets;
}

}  // namespace kgalign
