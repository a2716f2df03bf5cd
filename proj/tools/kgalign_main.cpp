// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
//
// kgalign CLI: synth | train | candidates | align | eval
// Exit codes: 0 success, 1 validation error, 2 phase failure.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "kgalign/embedding_io.hpp"
#include "kgalign/kg.hpp"
#include "kgalign/metrics.hpp"
#include "kgalign/pipeline.hpp"
#include "kgalign/rng.hpp"
#include "kgalign/similarity.hpp"
#include "kgalign/synth.hpp"

namespace {

using namespace kgalign;

struct CommonOpts {
    std::string config_path;
    std::string dataset_dir;
    std::string word_vectors;
    std::string out_dir;
    int k = 0;
    std::string backend;
    std::vector<std::string> ablate;
    std::uint64_t seed = 0;
    double train_fraction = -1.0;
    int splits = 0;
    int dim = 0, layers = 0, epochs = 0, batch_size = 0, augment_every = 0;
    double lr = 0.0, margin = 0.0;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* backend_opt = nullptr;
    CLI::Option* fraction_opt = nullptr;
    CLI::Option* splits_opt = nullptr;
    CLI::Option* dim_opt = nullptr;
    CLI::Option* layers_opt = nullptr;
    CLI::Option* epochs_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* augment_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* margin_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value configuration file");
        cmd->add_option("--dataset-dir", dataset_dir, "dataset directory");
        cmd->add_option("--vectors", word_vectors, "word-vector text file");
        cmd->add_option("--out", out_dir, "output directory");
        k_opt = cmd->add_option("--k", k, "candidates per channel");
        backend_opt = cmd->add_option("--backend", backend, "mock | live")
                          ->check(CLI::IsMember({"mock", "live"}));
        cmd->add_option("--ablate", ablate,
                        "disable a component: structural, name, edit, llm (repeatable)")
            ->delimiter(',');
        seed_opt = cmd->add_option("--seed", seed, "master random seed");
        fraction_opt = cmd->add_option("--train-fraction", train_fraction,
                                       "fraction of reference pairs used for training");
        splits_opt = cmd->add_option("--splits", splits, "average over N distinct data splits");
        dim_opt = cmd->add_option("--dim", dim, "embedding dimension");
        layers_opt = cmd->add_option("--layers", layers, "attention layers");
        epochs_opt = cmd->add_option("--epochs", epochs, "training epochs");
        batch_opt = cmd->add_option("--batch-size", batch_size, "seed pairs per batch");
        augment_opt = cmd->add_option("--augment-every", augment_every,
                                      "epochs between seed augmentations");
        lr_opt = cmd->add_option("--lr", lr, "learning rate");
        margin_opt = cmd->add_option("--margin", margin, "triplet-loss margin");
    }

    PipelineConfig build() const {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path);
        if (!dataset_dir.empty()) cfg.dataset_dir = dataset_dir;
        if (!word_vectors.empty()) cfg.word_vectors = word_vectors;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (k_opt->count()) cfg.k = k;
        if (backend_opt->count()) cfg.backend = backend;
        if (seed_opt->count()) cfg.seed = seed;
        if (fraction_opt->count()) cfg.train_fraction = train_fraction;
        if (splits_opt->count()) cfg.splits = splits;
        if (dim_opt->count()) cfg.train.dim = dim;
        if (layers_opt->count()) cfg.train.layers = layers;
        if (epochs_opt->count()) cfg.train.epochs = epochs;
        if (batch_opt->count()) cfg.train.batch_size = batch_size;
        if (augment_opt->count()) cfg.train.augment_every = augment_every;
        if (lr_opt->count()) cfg.train.learning_rate = lr;
        if (margin_opt->count()) cfg.train.margin = margin;
        for (const std::string& item : ablate) {
            if (item == "structural") cfg.channel_structural = false;
            else if (item == "name") cfg.channel_name = false;
            else if (item == "edit") cfg.channel_edit = false;
            else if (item == "llm") cfg.use_llm = false;
            else throw ValidationError("unknown ablation '" + item + "'");
        }
        return cfg;
    }
};

void print_report(const AlignmentReport& report) {
    std::cout << "test pairs:           " << report.test_pairs << "\n";
    std::cout << "hits@1 (predictions): " << report.hits_at_1 << "\n";
    std::cout << "hits@10 (structural): " << report.hits_at_10_structural << "\n";
    for (const auto& [channel, rate] : report.channel_hit_rate) {
        std::cout << "hit rate " << channel << ":  " << rate << "\n";
    }
    std::cout << "fallbacks:            " << report.fallback_count << "\n";
    std::cout << "llm requests:         " << report.llm_requests << "\n";
    std::cout << "runtime (s):          " << report.runtime_seconds << "\n";
}

int run_eval(const std::string& dataset_dir, const std::string& embeddings_path,
             const std::string& test_pairs_path, const std::string& report_path,
             std::uint64_t seed, double fraction, int k) {
    Dataset ds = load_dataset(dataset_dir);

    AlignmentSeedSet test_pairs;
    if (!test_pairs_path.empty()) {
        test_pairs = parse_seed_pairs(test_pairs_path, ds.pair);
    } else {
        auto parts = split_seeds(ds.reference, fraction, Rng::derive(seed, 1));
        test_pairs = std::move(parts.second);
    }
    if (test_pairs.empty()) throw ValidationError("no test pairs to evaluate");

    if (!embeddings_path.empty()) {
        EmbeddingMatrix emb;
        emb.rows = read_matrix_file(embeddings_path);
        emb.index = EntityIndexer(ds.pair.merged().entity_ids());
        if (emb.rows.rows() != emb.index.size()) {
            throw ValidationError("embedding row count does not match the dataset");
        }
        const std::vector<EntityId>& target_ids = ds.pair.target().entity_ids();
        Eigen::MatrixXd target_block(static_cast<Eigen::Index>(target_ids.size()),
                                     emb.rows.cols());
        for (std::size_t j = 0; j < target_ids.size(); ++j) {
            target_block.row(static_cast<Eigen::Index>(j)) =
                emb.rows.row(emb.index.row(target_ids[j]));
        }
        auto row_of = [&](EntityId s) {
            return similarity_row(emb.rows.row(emb.index.row(s)), target_block, Metric::Cosine);
        };
        std::cout << "hits@1 (structural):  " << hits_at_k(row_of, target_ids, test_pairs, 1)
                  << "\n";
        std::cout << "hits@" << k << " (structural):" << (k < 10 ? "  " : " ")
                  << hits_at_k(row_of, target_ids, test_pairs, k) << "\n";
    }

    if (!report_path.empty()) {
        std::ifstream in(report_path);
        if (!in) throw ValidationError("cannot open " + report_path);
        const auto j = nlohmann::json::parse(in);
        std::vector<std::pair<EntityId, EntityId>> predictions;
        for (const auto& p : j.at("predictions")) {
            predictions.emplace_back(p.at("source").get<EntityId>(),
                                     p.at("predicted").get<EntityId>());
        }
        std::cout << "hits@1 (report predictions): " << hits_at_1(predictions, test_pairs)
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph entity alignment toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset directory");
    int synth_entities = 200, synth_relations = 10, synth_triples = 600;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "synth_data";
    synth_cmd->add_option("--entities", synth_entities, "entities per side");
    synth_cmd->add_option("--relations", synth_relations, "relations per side");
    synth_cmd->add_option("--triples", synth_triples, "triples per side");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--out", synth_out, "output directory");

    // train / candidates / align
    auto* train_cmd = app.add_subcommand("train", "learn structural embeddings only");
    CommonOpts train_opts;
    train_opts.attach(train_cmd);

    auto* cand_cmd =
        app.add_subcommand("candidates", "produce per-channel candidate files");
    CommonOpts cand_opts;
    cand_opts.attach(cand_cmd);

    auto* align_cmd = app.add_subcommand("align", "run the full alignment pipeline");
    CommonOpts align_opts;
    align_opts.attach(align_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "compute metrics from stored artifacts");
    std::string eval_dataset, eval_embeddings, eval_test_pairs, eval_report;
    std::uint64_t eval_seed = 0;
    double eval_fraction = 0.3;
    int eval_k = 10;
    eval_cmd->add_option("--dataset-dir", eval_dataset, "dataset directory")->required();
    eval_cmd->add_option("--embeddings", eval_embeddings, "embedding matrix file");
    eval_cmd->add_option("--test-pairs", eval_test_pairs,
                         "test pair file (otherwise recomputed from --seed)");
    eval_cmd->add_option("--report", eval_report, "report.json with predictions");
    eval_cmd->add_option("--seed", eval_seed, "master seed used by the original run");
    eval_cmd->add_option("--train-fraction", eval_fraction, "train fraction of that run");
    eval_cmd->add_option("--k", eval_k, "k for hits@k");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (synth_cmd->parsed()) {
            SyntheticPair synth = generate_synthetic_pair(synth_entities, synth_relations,
                                                          synth_triples, synth_seed);
            write_synthetic_dataset(synth, synth_out, synth_seed);
            std::cout << "wrote " << synth_out << ": " << synth.pair.source().entity_count()
                      << " entities, " << synth.pair.source().relation_count() << " relations, "
                      << synth.pair.source().triple_count() << " triples per side, "
                      << synth.truth.size() << " reference pairs\n";
        } else if (train_cmd->parsed()) {
            const AlignmentReport report =
                run_alignment(train_opts.build(), PipelineStage::Train);
            std::cout << "initial loss: " << report.initial_loss << "\n";
            std::cout << "final loss:   " << report.final_loss << "\n";
            std::cout << "runtime (s):  " << report.runtime_seconds << "\n";
        } else if (cand_cmd->parsed()) {
            const AlignmentReport report =
                run_alignment(cand_opts.build(), PipelineStage::Candidates);
            std::cout << "candidate files written; llm requests: " << report.llm_requests
                      << "\n";
        } else if (align_cmd->parsed()) {
            const PipelineConfig cfg = align_opts.build();
            const auto reports = run_alignment_splits(cfg);
            if (reports.size() == 1) {
                print_report(reports.front());
            } else {
                double mean = 0.0;
                for (const auto& r : reports) mean += r.hits_at_1;
                std::cout << "splits:        " << reports.size() << "\n";
                std::cout << "mean hits@1:   " << mean / static_cast<double>(reports.size())
                          << "\n";
            }
        } else if (eval_cmd->parsed()) {
            return run_eval(eval_dataset, eval_embeddings, eval_test_pairs, eval_report,
                            eval_seed, eval_fraction, eval_k);
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const PhaseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
