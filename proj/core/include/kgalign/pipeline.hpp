// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgalign/kg.hpp"
#include "kgalign/llm.hpp"
#include "kgalign/similarity.hpp"
#include "kgalign/train.hpp"

namespace kgalign {

/// Configuration errors exit with code 1, phase failures with code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class PhaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::filesystem::path dataset_dir;
    std::filesystem::path word_vectors;  // required when the name channel is on
    std::filesystem::path out_dir = "out";

    TrainConfig train;
    double train_fraction = 0.3;
    int k = 10;

    bool channel_structural = true;
    bool channel_name = true;
    bool channel_edit = true;
    bool use_llm = true;

    std::string backend = "mock";  // mock | live
    LiveBackendConfig live;
    int llm_concurrency = 4;  // cap on in-flight requests
    int demo_count = 3;       // demonstrations in the virtual-entity prompt
    std::string target_language = "the target knowledge graph's language";

    std::uint64_t seed = 0;  // master seed; split/train/protocol streams derive from it
    bool train_seed_overridden = false;

    int splits = 1;  // independent reruns with distinct data splits

    void validate() const;
};

/// Key=value configuration file; '#' starts a comment. Keys mirror the
/// struct fields (see README for the full list).
PipelineConfig load_config_file(const std::filesystem::path& path);

struct EntityPrediction {
    EntityId source = -1;
    EntityId predicted = -1;  // -1 = no prediction (only possible without fallback)
    EntityId truth = -1;
    bool correct = false;
    bool fallback = false;       // protocol answered none; top structural used
    bool parse_failure = false;  // some round exhausted its retry budget
    int rounds = 0;
    std::string provenance;  // channels that proposed the predicted entity
};

struct AlignmentReport {
    std::size_t test_pairs = 0;
    double hits_at_1 = 0.0;              // over final predictions
    double hits_at_10_structural = 0.0;  // from the similarity matrix, always
    std::map<std::string, double> channel_hit_rate;
    std::size_t fallback_count = 0;
    std::size_t parse_failure_count = 0;
    std::size_t llm_requests = 0;
    std::size_t total_rounds = 0;
    std::size_t max_rounds = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double runtime_seconds = 0.0;  // reported in the human summary only
    std::vector<EntityPrediction> predictions;
};

/// What part of the pipeline to run; artifacts of completed phases are
/// always written, so later stages can resume from them.
enum class PipelineStage { Train, Candidates, Full };

/// Full pipeline: load -> split -> train -> name embeddings -> candidates
/// -> prediction -> metrics. Artifacts land in config.out_dir; expensive
/// phases are cached under out_dir/cache by content-derived names.
AlignmentReport run_alignment(const PipelineConfig& config,
                              PipelineStage stage = PipelineStage::Full);

/// Averages hits metrics over config.splits runs with distinct data splits
/// (split i uses seed + i); per-split artifacts go to out_dir/split_<i>.
std::vector<AlignmentReport> run_alignment_splits(const PipelineConfig& config);

}  // namespace kgalign
