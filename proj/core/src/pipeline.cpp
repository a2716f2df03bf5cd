// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "kgalign/embedding_io.hpp"
#include "kgalign/metrics.hpp"
#include "kgalign/names.hpp"
#include "kgalign/parallel.hpp"
#include "kgalign/protocol.hpp"
#include "kgalign/ragat.hpp"
#include "kgalign/rng.hpp"

namespace kgalign {
namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// cache keys

struct Fnv1a {
    std::uint64_t state = 1469598103934665603ULL;

    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state ^= p[i];
            state *= 1099511628211ULL;
        }
    }
    void add(const std::string& s) {
        bytes(s.data(), s.size());
        bytes("\x1f", 1);
    }
    void add(std::uint64_t v) { bytes(&v, sizeof(v)); }
    void add(double v) { bytes(&v, sizeof(v)); }
    void add(int v) { add(static_cast<std::uint64_t>(v)); }

    void file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw PhaseError("cannot hash missing file " + path.string());
        char buf[1 << 16];
        while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
            bytes(buf, static_cast<std::size_t>(in.gcount()));
        }
    }

    std::string hex() const {
        char out[17];
        std::snprintf(out, sizeof(out), "%016llx",
                      static_cast<unsigned long long>(state));
        return out;
    }
};

std::uint64_t dataset_digest(const std::filesystem::path& dir) {
    Fnv1a h;
    for (const char* name : {"ent_ids_1", "rel_ids_1", "triples_1", "ent_ids_2", "rel_ids_2",
                             "triples_2", "ref_ent_ids"}) {
        h.file(dir / name);
    }
    return h.state;
}

// ---------------------------------------------------------------------------
// small helpers

std::string display_name(const KnowledgeGraph& g, EntityId id) {
    return strip_uri_prefix(g.entity_name(id));
}

class CountingBackend : public LlmBackend {
public:
    explicit CountingBackend(LlmBackend& inner) : inner_(inner) {}
    std::string complete(const Prompt& prompt) override {
        requests_.fetch_add(1, std::memory_order_relaxed);
        return inner_.complete(prompt);
    }
    std::size_t requests() const { return requests_.load(); }

private:
    LlmBackend& inner_;
    std::atomic<std::size_t> requests_{0};
};

template <typename Fn>
auto phase(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw PhaseError("phase " + name + ": " + e.what());
    }
}

std::string join_channels(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ',';
        out += p;
    }
    return out;
}

struct VirtualEntity {
    std::string name;
    bool fallback = false;  // extraction failed; source name used instead
};

}  // namespace

void PipelineConfig::validate() const {
    if (dataset_dir.empty()) throw ValidationError("dataset_dir is required");
    if (k < 1) throw ValidationError("k must be at least 1");
    if (!channel_structural && !channel_name && !channel_edit) {
        throw ValidationError("at least one candidate channel must be enabled");
    }
    if (channel_name && word_vectors.empty()) {
        throw ValidationError("the name channel requires word_vectors");
    }
    if (backend != "mock" && backend != "live") {
        throw ValidationError("backend must be 'mock' or 'live'");
    }
    if (!(train_fraction > 0.0) || train_fraction >= 1.0) {
        throw ValidationError("train_fraction must lie in (0, 1); the remainder is the test set");
    }
    if (splits < 1) throw ValidationError("splits must be at least 1");
    if (llm_concurrency < 1) throw ValidationError("llm_concurrency must be at least 1");
    if (demo_count < 1) throw ValidationError("demo_count must be at least 1");
    try {
        train.validate();
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    auto bad = [&](const std::string& msg) -> ValidationError {
        return ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            const std::size_t b = s.find_first_not_of(ws);
            if (b == std::string::npos) return std::string();
            return s.substr(b, s.find_last_not_of(ws) - b + 1);
        };
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw bad("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dataset_dir") cfg.dataset_dir = value;
            else if (key == "word_vectors") cfg.word_vectors = value;
            else if (key == "out_dir") cfg.out_dir = value;
            else if (key == "k") cfg.k = std::stoi(value);
            else if (key == "train_fraction") cfg.train_fraction = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "splits") cfg.splits = std::stoi(value);
            else if (key == "backend") cfg.backend = value;
            else if (key == "llm_concurrency") cfg.llm_concurrency = std::stoi(value);
            else if (key == "demo_count") cfg.demo_count = std::stoi(value);
            else if (key == "target_language") cfg.target_language = value;
            else if (key == "ablate") {
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    item = trim(item);
                    if (item == "structural") cfg.channel_structural = false;
                    else if (item == "name") cfg.channel_name = false;
                    else if (item == "edit") cfg.channel_edit = false;
                    else if (item == "llm") cfg.use_llm = false;
                    else if (!item.empty()) throw bad("unknown ablation '" + item + "'");
                }
            }
            else if (key == "train.dim") cfg.train.dim = std::stoi(value);
            else if (key == "train.layers") cfg.train.layers = std::stoi(value);
            else if (key == "train.margin") cfg.train.margin = std::stod(value);
            else if (key == "train.lr") cfg.train.learning_rate = std::stod(value);
            else if (key == "train.batch_size") cfg.train.batch_size = std::stoi(value);
            else if (key == "train.epochs") cfg.train.epochs = std::stoi(value);
            else if (key == "train.augment_every") cfg.train.augment_every = std::stoi(value);
            else if (key == "train.rms_decay") cfg.train.rms_decay = std::stod(value);
            else if (key == "train.rms_epsilon") cfg.train.rms_epsilon = std::stod(value);
            else if (key == "train.seed") {
                cfg.train.rng_seed = std::stoull(value);
                cfg.train_seed_overridden = true;
            }
            else if (key == "live.endpoint") cfg.live.endpoint = value;
            else if (key == "live.model") cfg.live.model = value;
            else if (key == "live.temperature") cfg.live.temperature = std::stod(value);
            else if (key == "live.api_key_env") cfg.live.api_key_env = value;
            else if (key == "live.timeout_seconds") cfg.live.timeout_seconds = std::stoi(value);
            else if (key == "live.transport_retries") {
                cfg.live.transport_retries = std::stoi(value);
            }
            else if (key == "live.system_preamble") cfg.live.system_preamble = value;
            else throw bad("unknown key '" + key + "'");
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw bad("cannot parse value for '" + key + "'");
        }
    }
    return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// phase implementations

struct TrainedEmbeddings {
    EmbeddingMatrix emb;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

TrainedEmbeddings train_structural(const PipelineConfig& cfg, const Dataset& ds,
                                   const AlignmentSeedSet& train_pairs,
                                   std::uint64_t dataset_hash, std::uint64_t split_seed) {
    TrainConfig tc = cfg.train;
    if (!cfg.train_seed_overridden) tc.rng_seed = Rng::derive(cfg.seed, 2);

    Fnv1a key;
    key.add(dataset_hash);
    key.add(cfg.train_fraction);
    key.add(split_seed);
    key.add(tc.dim);
    key.add(tc.layers);
    key.add(tc.margin);
    key.add(tc.learning_rate);
    key.add(tc.batch_size);
    key.add(tc.epochs);
    key.add(tc.augment_every);
    key.add(tc.rng_seed);
    key.add(tc.rms_decay);
    key.add(tc.rms_epsilon);

    const auto cache_dir = cfg.out_dir / "cache";
    std::filesystem::create_directories(cache_dir);
    const auto emb_path = cache_dir / ("emb_" + key.hex() + ".bin");
    const auto ckpt_path = cache_dir / ("ckpt_" + key.hex() + ".bin");
    const auto meta_path = cache_dir / ("meta_" + key.hex() + ".json");

    TrainedEmbeddings out;
    if (std::filesystem::exists(emb_path) && std::filesystem::exists(meta_path)) {
        out.emb.rows = read_matrix_file(emb_path);
        out.emb.index = EntityIndexer(ds.pair.merged().entity_ids());
        if (out.emb.rows.rows() != out.emb.index.size()) {
            throw PhaseError("cached embeddings do not match the dataset");
        }
        std::ifstream meta(meta_path);
        ordered_json j = ordered_json::parse(meta);
        out.initial_loss = j.at("initial_loss").get<double>();
        out.final_loss = j.at("final_loss").get<double>();
        if (std::filesystem::exists(ckpt_path)) {
            std::filesystem::copy_file(ckpt_path, cfg.out_dir / "params.ckpt",
                                       std::filesystem::copy_options::overwrite_existing);
        }
    } else {
        TrainResult result = train(ds.pair, train_pairs, tc);
        out.emb = std::move(result.embeddings);
        out.initial_loss = result.initial_loss;
        out.final_loss = result.final_loss;
        write_matrix_file(emb_path, out.emb.rows);
        save_checkpoint(ckpt_path, result.params);
        std::ofstream meta(meta_path);
        ordered_json j;
        j["initial_loss"] = out.initial_loss;
        j["final_loss"] = out.final_loss;
        j["final_seed_count"] = result.final_seeds.size();
        meta << j.dump(2) << '\n';
        std::filesystem::copy_file(ckpt_path, cfg.out_dir / "params.ckpt",
                                   std::filesystem::copy_options::overwrite_existing);
    }
    write_matrix_file(cfg.out_dir / "embeddings.bin", out.emb.rows);
    return out;
}

std::vector<VirtualEntity> generate_virtual_entities(
    const PipelineConfig& cfg, const Dataset& ds, const AlignmentSeedSet& train_pairs,
    const std::vector<EntityId>& test_sources, LlmBackend& backend,
    std::uint64_t dataset_hash) {
    Fnv1a key;
    key.add(dataset_hash);
    key.add(cfg.backend);
    if (cfg.backend == "live") {
        key.add(cfg.live.endpoint);
        key.add(cfg.live.model);
    }
    key.add(cfg.demo_count);
    key.add(cfg.target_language);
    const auto cache_path = cfg.out_dir / "cache" / ("virt_" + key.hex() + ".tsv");

    std::vector<VirtualEntity> out(test_sources.size());
    if (std::filesystem::exists(cache_path)) {
        std::ifstream in(cache_path);
        std::unordered_map<EntityId, VirtualEntity> cached;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::size_t t1 = line.find('\t');
            const std::size_t t2 = line.rfind('\t');
            if (t1 == std::string::npos || t2 == t1) continue;
            VirtualEntity v;
            v.name = line.substr(t1 + 1, t2 - t1 - 1);
            v.fallback = line.substr(t2 + 1) == "fallback";
            cached[std::stoll(line.substr(0, t1))] = std::move(v);
        }
        bool complete = true;
        for (std::size_t i = 0; i < test_sources.size(); ++i) {
            auto it = cached.find(test_sources[i]);
            if (it == cached.end()) {
                complete = false;
                break;
            }
            out[i] = it->second;
        }
        if (complete) return out;
    }

    std::vector<std::pair<std::string, std::string>> demos;
    for (const auto& [s, t] : train_pairs.pairs()) {
        if (static_cast<int>(demos.size()) >= cfg.demo_count) break;
        demos.emplace_back(display_name(ds.pair.source(), s), display_name(ds.pair.target(), t));
    }
    if (demos.empty()) throw PhaseError("no train seeds available for prompt demonstrations");

    constexpr int kExtractionRetries = 2;
    parallel_for_spans(
        0, test_sources.size(), 1,
        [&](std::size_t lo, std::size_t) {
            const EntityId id = test_sources[lo];
            const std::string name = display_name(ds.pair.source(), id);
            const Prompt prompt =
                build_virtual_entity_prompt(name, demos, cfg.target_language);
            VirtualEntity v;
            v.fallback = true;
            v.name = name;
            for (int attempt = 0; attempt <= kExtractionRetries; ++attempt) {
                const std::string response = backend.complete(prompt);
                if (auto extracted = parse_virtual_entity(response)) {
                    v.name = *extracted;
                    v.fallback = false;
                    break;
                }
            }
            out[lo] = std::move(v);
        },
        static_cast<unsigned>(cfg.llm_concurrency));

    std::ofstream cache(cache_path);
    for (std::size_t i = 0; i < test_sources.size(); ++i) {
        cache << test_sources[i] << '\t' << out[i].name << '\t'
              << (out[i].fallback ? "fallback" : "ok") << '\n';
    }
    std::ofstream copy(cfg.out_dir / "virtual_names.tsv");
    for (std::size_t i = 0; i < test_sources.size(); ++i) {
        copy << test_sources[i] << '\t' << out[i].name << '\t'
             << (out[i].fallback ? "fallback" : "ok") << '\n';
    }
    return out;
}

}  // namespace

AlignmentReport run_alignment(const PipelineConfig& config, PipelineStage stage) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    std::filesystem::create_directories(config.out_dir);

    // --- load ---------------------------------------------------------------
    Dataset ds = phase("load", [&] { return load_dataset(config.dataset_dir); });
    const std::uint64_t dataset_hash =
        phase("load", [&] { return dataset_digest(config.dataset_dir); });

    // --- split --------------------------------------------------------------
    const std::uint64_t split_seed = Rng::derive(config.seed, 1);
    auto [train_pairs, test_pairs] = phase("split", [&] {
        auto parts = split_seeds(ds.reference, config.train_fraction, split_seed);
        if (parts.first.empty()) throw std::runtime_error("empty training split");
        if (parts.second.empty()) throw std::runtime_error("empty test split");
        write_seed_pairs(parts.first, config.out_dir / "train_pairs.tsv");
        write_seed_pairs(parts.second, config.out_dir / "test_pairs.tsv");
        return parts;
    });

    std::vector<EntityId> test_sources;
    test_sources.reserve(test_pairs.size());
    for (const auto& [s, t] : test_pairs.pairs()) test_sources.push_back(s);
    std::sort(test_sources.begin(), test_sources.end());

    // --- structural embeddings ----------------------------------------------
    TrainedEmbeddings trained = phase("train", [&] {
        return train_structural(config, ds, train_pairs, dataset_hash, split_seed);
    });
    const EmbeddingMatrix& emb = trained.emb;

    if (stage == PipelineStage::Train) {
        AlignmentReport r;
        r.test_pairs = test_pairs.size();
        r.initial_loss = trained.initial_loss;
        r.final_loss = trained.final_loss;
        r.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return r;
    }

    const std::vector<EntityId>& target_ids = ds.pair.target().entity_ids();
    Eigen::MatrixXd target_struct(static_cast<Eigen::Index>(target_ids.size()), emb.dim());
    for (std::size_t j = 0; j < target_ids.size(); ++j) {
        target_struct.row(static_cast<Eigen::Index>(j)) = emb.rows.row(emb.index.row(target_ids[j]));
    }
    auto struct_row = [&](EntityId source) -> Eigen::VectorXd {
        return similarity_row(emb.rows.row(emb.index.row(source)), target_struct,
                              Metric::Cosine);
    };

    // --- name embeddings ----------------------------------------------------
    NameEmbeddingMatrix source_names, target_names_emb;
    if (config.channel_name) {
        phase("names", [&] {
            const WordVectorStore store = load_word_vectors(config.word_vectors);
            source_names = build_name_embeddings(store, ds.pair.source());
            target_names_emb = build_name_embeddings(store, ds.pair.target());
            return 0;
        });
    }

    // --- backend -------------------------------------------------------------
    std::unique_ptr<LlmBackend> owned_backend;
    if (config.backend == "mock") {
        std::map<std::string, std::string> truth_names;
        for (const auto& [s, t] : ds.reference.pairs()) {
            truth_names[display_name(ds.pair.source(), s)] =
                display_name(ds.pair.target(), t);
        }
        owned_backend = std::make_unique<NameOracleBackend>(std::move(truth_names));
    } else {
        owned_backend = make_live_backend(config.live);
    }
    CountingBackend backend(*owned_backend);

    // --- virtual entities (edit channel) -------------------------------------
    std::vector<VirtualEntity> virtuals;
    if (config.channel_edit) {
        virtuals = phase("virtual", [&] {
            return generate_virtual_entities(config, ds, train_pairs, test_sources, backend,
                                             dataset_hash);
        });
    }

    // --- candidates -----------------------------------------------------------
    std::map<EntityId, std::string> target_display_names;
    for (EntityId id : target_ids) {
        target_display_names[id] = display_name(ds.pair.target(), id);
    }

    struct PerEntityCandidates {
        CandidateSet structural, name, edit;
    };
    std::vector<PerEntityCandidates> candidates(test_sources.size());
    phase("candidates", [&] {
        parallel_for_spans(0, test_sources.size(), 16, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const EntityId source = test_sources[i];
                PerEntityCandidates& c = candidates[i];
                if (config.channel_structural) {
                    c.structural = top_k_from_row(struct_row(source), target_ids, source,
                                                  Channel::Structural, config.k);
                }
                if (config.channel_name) {
                    const Eigen::Index row =
                        std::lower_bound(source_names.ids.begin(), source_names.ids.end(),
                                         source) -
                        source_names.ids.begin();
                    const Eigen::VectorXd scores = similarity_row(
                        source_names.rows.row(row), target_names_emb.rows, Metric::NegativeL2);
                    c.name = top_k_from_row(scores, target_names_emb.ids, source, Channel::Name,
                                            config.k);
                }
                if (config.channel_edit) {
                    c.edit = edit_candidates(virtuals[i].name, target_display_names, config.k);
                    c.edit.source = source;
                }
            }
        });

        auto dump = [&](Channel channel, const std::filesystem::path& path) {
            std::vector<CandidateSet> sets;
            sets.reserve(candidates.size());
            for (const auto& c : candidates) {
                switch (channel) {
                    case Channel::Structural: sets.push_back(c.structural); break;
                    case Channel::Name: sets.push_back(c.name); break;
                    case Channel::Edit: sets.push_back(c.edit); break;
                }
            }
            write_candidate_file(path, sets);
        };
        if (config.channel_structural) {
            dump(Channel::Structural, config.out_dir / "candidates_structural.tsv");
        }
        if (config.channel_name) dump(Channel::Name, config.out_dir / "candidates_name.tsv");
        if (config.channel_edit) dump(Channel::Edit, config.out_dir / "candidates_edit.tsv");
        return 0;
    });

    if (stage == PipelineStage::Candidates) {
        AlignmentReport r;
        r.test_pairs = test_pairs.size();
        r.initial_loss = trained.initial_loss;
        r.final_loss = trained.final_loss;
        r.llm_requests = backend.requests();
        r.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return r;
    }

    // --- prediction -------------------------------------------------------------
    struct PerEntityOutcome {
        EntityPrediction prediction;
        ordered_json transcript = ordered_json::array();
    };
    std::vector<PerEntityOutcome> outcomes(test_sources.size());

    phase("predict", [&] {
        parallel_for_spans(
            0, test_sources.size(), 1,
            [&](std::size_t i, std::size_t) {
                const EntityId source = test_sources[i];
                const PerEntityCandidates& c = candidates[i];
                PerEntityOutcome& o = outcomes[i];
                o.prediction.source = source;
                o.prediction.truth = test_pairs.target_of(source);

                std::vector<EntityId> union_list;
                auto extend = [&](const CandidateSet& set) {
                    for (const Candidate& cand : set.items) {
                        if (std::find(union_list.begin(), union_list.end(), cand.target) ==
                            union_list.end()) {
                            union_list.push_back(cand.target);
                        }
                    }
                };
                extend(c.structural);
                extend(c.name);
                extend(c.edit);
                if (union_list.empty()) {
                    throw std::runtime_error("no candidates for entity " +
                                             std::to_string(source));
                }

                const EntityId structural_top =
                    c.structural.items.empty() ? union_list.front()
                                               : c.structural.items.front().target;

                EntityId predicted = -1;
                if (!config.use_llm) {
                    predicted = structural_top;
                    o.prediction.provenance = c.structural.items.empty()
                                                  ? "fallback:union-top"
                                                  : "structural-top";
                } else {
                    if (config.channel_edit && !virtuals.empty()) {
                        ordered_json rec;
                        rec["type"] = "virtual";
                        rec["source"] = source;
                        rec["virtual_name"] = virtuals[i].name;
                        rec["fallback"] = virtuals[i].fallback;
                        o.transcript.push_back(std::move(rec));
                    }
                    const std::string source_name = display_name(ds.pair.source(), source);
                    auto name_of = [&](EntityId id) { return target_display_names.at(id); };
                    const ProtocolResult result = iterative_predict(
                        backend, source, source_name, union_list, name_of,
                        Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(source)));

                    for (const ChoiceRound& round : result.rounds) {
                        ordered_json rec;
                        rec["type"] = "choice";
                        rec["target"] = source;
                        rec["round"] = round.index;
                        ordered_json opts = ordered_json::array();
                        for (EntityId id : round.options) {
                            opts.push_back({{"id", id}, {"name", name_of(id)}});
                        }
                        rec["options"] = std::move(opts);
                        rec["carried"] =
                            round.carried ? ordered_json(*round.carried) : ordered_json();
                        rec["response"] = round.raw_response;
                        rec["resolution"] =
                            round.parse_failed
                                ? "parse_failure"
                                : (round.selected ? "selected:" + std::to_string(*round.selected)
                                                  : "none");
                        o.transcript.push_back(std::move(rec));
                    }

                    o.prediction.rounds = static_cast<int>(result.rounds.size());
                    o.prediction.parse_failure = result.any_parse_failure;
                    if (result.prediction) {
                        predicted = *result.prediction;
                        std::vector<std::string> from;
                        auto contains = [&](const CandidateSet& set) {
                            return std::any_of(set.items.begin(), set.items.end(),
                                               [&](const Candidate& cand) {
                                                   return cand.target == predicted;
                                               });
                        };
                        if (contains(c.structural)) from.push_back("structural");
                        if (contains(c.name)) from.push_back("name");
                        if (contains(c.edit)) from.push_back("edit");
                        o.prediction.provenance = join_channels(from);
                    } else {
                        predicted = structural_top;
                        o.prediction.fallback = true;
                        o.prediction.provenance = c.structural.items.empty()
                                                      ? "fallback:union-top"
                                                      : "fallback:structural";
                    }
                }
                o.prediction.predicted = predicted;
                o.prediction.correct = predicted == o.prediction.truth;
            },
            static_cast<unsigned>(config.llm_concurrency));

        std::ofstream transcripts(config.out_dir / "transcripts.jsonl");
        for (const auto& o : outcomes) {
            for (const auto& rec : o.transcript) transcripts << rec.dump() << '\n';
        }
        return 0;
    });

    // --- metrics / report --------------------------------------------------------
    AlignmentReport report = phase("report", [&] {
        AlignmentReport r;
        r.test_pairs = test_pairs.size();
        r.initial_loss = trained.initial_loss;
        r.final_loss = trained.final_loss;

        std::vector<std::pair<EntityId, EntityId>> predicted_pairs;
        for (const auto& o : outcomes) {
            r.predictions.push_back(o.prediction);
            predicted_pairs.emplace_back(o.prediction.source, o.prediction.predicted);
            if (o.prediction.fallback) ++r.fallback_count;
            if (o.prediction.parse_failure) ++r.parse_failure_count;
            r.total_rounds += static_cast<std::size_t>(o.prediction.rounds);
            r.max_rounds =
                std::max(r.max_rounds, static_cast<std::size_t>(o.prediction.rounds));
        }
        if (r.predictions.size() != test_pairs.size()) {
            throw std::runtime_error("prediction count does not match test pairs");
        }
        r.hits_at_1 = hits_at_1(predicted_pairs, test_pairs);
        r.hits_at_10_structural = hits_at_k(struct_row, target_ids, test_pairs, 10);

        auto hit_rate = [&](auto select) {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < test_sources.size(); ++i) {
                const CandidateSet& set = select(candidates[i]);
                const EntityId truth = test_pairs.target_of(test_sources[i]);
                for (const Candidate& cand : set.items) {
                    if (cand.target == truth) {
                        ++hits;
                        break;
                    }
                }
            }
            return static_cast<double>(hits) / static_cast<double>(test_sources.size());
        };
        if (config.channel_structural) {
            r.channel_hit_rate["structural"] =
                hit_rate([](const PerEntityCandidates& c) -> const CandidateSet& {
                    return c.structural;
                });
        }
        if (config.channel_name) {
            r.channel_hit_rate["name"] = hit_rate(
                [](const PerEntityCandidates& c) -> const CandidateSet& { return c.name; });
        }
        if (config.channel_edit) {
            r.channel_hit_rate["edit"] = hit_rate(
                [](const PerEntityCandidates& c) -> const CandidateSet& { return c.edit; });
        }
        r.llm_requests = backend.requests();
        return r;
    });

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    phase("report", [&] {
        ordered_json j;
        j["dataset"] = {
            {"dir", config.dataset_dir.string()},
            {"source_entities", ds.pair.source().entity_count()},
            {"source_relations", ds.pair.source().relation_count()},
            {"source_triples", ds.pair.source().triple_count()},
            {"target_entities", ds.pair.target().entity_count()},
            {"target_relations", ds.pair.target().relation_count()},
            {"target_triples", ds.pair.target().triple_count()},
            {"reference_pairs", ds.reference.size()},
        };
        j["config"] = {
            {"k", config.k},
            {"train_fraction", config.train_fraction},
            {"seed", config.seed},
            {"backend", config.backend},
            {"channels",
             {{"structural", config.channel_structural},
              {"name", config.channel_name},
              {"edit", config.channel_edit}}},
            {"use_llm", config.use_llm},
            {"train",
             {{"dim", config.train.dim},
              {"layers", config.train.layers},
              {"margin", config.train.margin},
              {"lr", config.train.learning_rate},
              {"batch_size", config.train.batch_size},
              {"epochs", config.train.epochs},
              {"augment_every", config.train.augment_every}}},
        };
        j["metrics"] = {
            {"test_pairs", report.test_pairs},
            {"hits_at_1", report.hits_at_1},
            {"hits_at_10_structural", report.hits_at_10_structural},
            {"channel_hit_rate", report.channel_hit_rate},
            {"fallback_count", report.fallback_count},
            {"parse_failure_count", report.parse_failure_count},
            {"llm_requests", report.llm_requests},
            {"total_rounds", report.total_rounds},
            {"max_rounds", report.max_rounds},
            {"initial_loss", report.initial_loss},
            {"final_loss", report.final_loss},
        };
        ordered_json preds = ordered_json::array();
        for (const auto& p : report.predictions) {
            preds.push_back({{"source", p.source},
                             {"predicted", p.predicted},
                             {"truth", p.truth},
                             {"correct", p.correct},
                             {"fallback", p.fallback},
                             {"parse_failure", p.parse_failure},
                             {"rounds", p.rounds},
                             {"provenance", p.provenance}});
        }
        j["predictions"] = std::move(preds);
        std::ofstream out(config.out_dir / "report.json");
        out << j.dump(2) << '\n';

        std::ofstream summary(config.out_dir / "summary.txt");
        summary << "alignment summary\n";
        summary << "-----------------\n";
        summary << "dataset:               " << config.dataset_dir.string() << "\n";
        summary << "test pairs:            " << report.test_pairs << "\n";
        summary << "hits@1 (predictions):  " << report.hits_at_1 << "\n";
        summary << "hits@10 (structural):  " << report.hits_at_10_structural << "\n";
        for (const auto& [channel, rate] : report.channel_hit_rate) {
            summary << "candidate hit rate (" << channel << "): " << rate << "\n";
        }
        summary << "fallback predictions:  " << report.fallback_count << "\n";
        summary << "parse failures:        " << report.parse_failure_count << "\n";
        summary << "llm requests:          " << report.llm_requests << "\n";
        summary << "total choice rounds:   " << report.total_rounds << "\n";
        summary << "initial loss:          " << report.initial_loss << "\n";
        summary << "final loss:            " << report.final_loss << "\n";
        summary << "runtime (s):           " << report.runtime_seconds << "\n";
        return 0;
    });

    return report;
}

std::vector<AlignmentReport> run_alignment_splits(const PipelineConfig& config) {
    config.validate();
    if (config.splits == 1) return {run_alignment(config)};

    std::vector<AlignmentReport> reports;
    for (int i = 0; i < config.splits; ++i) {
        PipelineConfig split_config = config;
        split_config.seed = config.seed + static_cast<std::uint64_t>(i);
        split_config.out_dir = config.out_dir / ("split_" + std::to_string(i));
        split_config.splits = 1;
        reports.push_back(run_alignment(split_config));
    }

    double mean_h1 = 0.0, mean_h10 = 0.0;
    for (const auto& r : reports) {
        mean_h1 += r.hits_at_1;
        mean_h10 += r.hits_at_10_structural;
    }
    mean_h1 /= static_cast<double>(reports.size());
    mean_h10 /= static_cast<double>(reports.size());

    std::filesystem::create_directories(config.out_dir);
    ordered_json j;
    j["splits"] = config.splits;
    j["mean_hits_at_1"] = mean_h1;
    j["mean_hits_at_10_structural"] = mean_h10;
    ordered_json per = ordered_json::array();
    for (const auto& r : reports) {
        per.push_back({{"hits_at_1", r.hits_at_1},
                       {"hits_at_10_structural", r.hits_at_10_structural}});
    }
    j["per_split"] = std::move(per);
    std::ofstream out(config.out_dir / "combined.json");
    out << j.dump(2) << '\n';
    return reports;
}

}  // namespace kgalign
