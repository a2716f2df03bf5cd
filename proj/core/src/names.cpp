// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/names.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kgalign/parallel.hpp"

namespace kgalign {
namespace {

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line,
                          const std::string& msg) {
    std::ostringstream os;
    os << file.string() << ":" << line << ": " << msg;
    throw std::runtime_error(os.str());
}

bool parse_float(const std::string& field, float& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_spaces(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

bool is_separator(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '_' || c == '-' ||
           c == ',' || c == '(' || c == ')';
}

}  // namespace

const Eigen::VectorXf* WordVectorStore::find(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

WordVectorStore load_word_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    WordVectorStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_spaces(line);
        if (store.dim_ == 0) {
            if (fields.size() < 2) {
                fail_at(path, lineno, "expected a token followed by vector components");
            }
            store.dim_ = static_cast<int>(fields.size()) - 1;
        }
        const std::size_t d = static_cast<std::size_t>(store.dim_);
        if (fields.size() < d + 1) {
            fail_at(path, lineno, "expected " + std::to_string(store.dim_) +
                                      " components, found " +
                                      std::to_string(fields.size() - 1));
        }
        // The token is everything before the trailing d components.
        std::string token = fields[0];
        for (std::size_t i = 1; i + d < fields.size(); ++i) {
            token += ' ';
            token += fields[i];
        }
        Eigen::VectorXf vec(store.dim_);
        for (std::size_t i = 0; i < d; ++i) {
            float value = 0.0f;
            if (!parse_float(fields[fields.size() - d + i], value)) {
                fail_at(path, lineno,
                        "unparseable vector component '" + fields[fields.size() - d + i] + "'");
            }
            vec[static_cast<Eigen::Index>(i)] = value;
        }
        if (!store.vectors_.emplace(std::move(token), std::move(vec)).second) {
            fail_at(path, lineno, "duplicate token");
        }
    }
    return store;
}

std::vector<std::string> tokenize_name(const std::string& name) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : name) {
        if (is_separator(c)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

NameEmbedding name_embedding(const WordVectorStore& store, const std::string& name) {
    if (store.empty()) {
        throw std::runtime_error("word vector store is empty");
    }
    NameEmbedding out;
    out.vector = Eigen::VectorXd::Zero(store.dim());
    int hits = 0;
    for (const std::string& token : tokenize_name(strip_uri_prefix(name))) {
        if (const Eigen::VectorXf* vec = store.find(token)) {
            out.vector += vec->cast<double>();
            ++hits;
        }
    }
    if (hits == 0) {
        out.all_oov = true;
        return out;
    }
    out.vector /= static_cast<double>(hits);
    return out;
}

NameEmbeddingMatrix build_name_embeddings(const WordVectorStore& store,
                                          const KnowledgeGraph& side) {
    NameEmbeddingMatrix out;
    out.ids = side.entity_ids();
    out.rows.resize(static_cast<Eigen::Index>(out.ids.size()), store.dim());
    out.all_oov.assign(out.ids.size(), false);
    std::vector<char> flags(out.ids.size(), 0);
    parallel_for(0, out.ids.size(), [&](std::size_t i) {
        NameEmbedding emb = name_embedding(store, side.entity_name(out.ids[i]));
        out.rows.row(static_cast<Eigen::Index>(i)) = emb.vector.transpose();
        flags[i] = emb.all_oov ? 1 : 0;
    });
    for (std::size_t i = 0; i < flags.size(); ++i) out.all_oov[i] = flags[i] != 0;
    return out;
}

}  // namespace kgalign
