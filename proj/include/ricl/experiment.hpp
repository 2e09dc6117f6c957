// Copyright 2026 The RiCL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RICL_EXPERIMENT_HPP
#define RICL_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ricl/metrics.hpp"
#include "ricl/trainer.hpp"

namespace ricl {

enum class Method { Ricl, SeqFT, Er };

std::string to_string(Method m);

struct AblationFlags {
    bool tcp = true;
    bool ncl = true;
    bool ipo = true;

    bool all_on() const { return tcp && ncl && ipo; }
    bool operator==(const AblationFlags&) const = default;
};

struct CorpusConfig {
    std::string source = "synthetic";  // or a JSONL path
    Index classes = 20;
    Index docs_per_class = 300;
    Index vocab_size = 4000;
    std::uint64_t seed = 7;

    bool operator==(const CorpusConfig&) const = default;
};

struct ExperimentConfig {
    Method method = Method::Ricl;
    AblationFlags ablation;
    CorpusConfig corpus;
    StreamConfig stream;
    ModelShape shape;  // num_classes comes from the corpus
    std::uint64_t hash_seed = 0;
    double init_scale = 0.05;
    PurifierConfig purifier;
    TrainPhaseConfig train;
    AugmentConfig augment;
    std::string synonyms_path;  // empty: use the corpus' own table
    BufferCapacities buffers;
    std::vector<std::uint32_t> task_order;  // empty: 0, 1, ..., num_tasks - 1
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::string output_dir;
    bool dump_stream = false;
    bool dump_buffers = false;

    /// Run label used for output directories, e.g. "ricl", "ricl-no-ipo", "er".
    std::string label() const;
    PipelineConfig pipeline() const;
    void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Flat `key = value` lines under `[section]` headers; `#` starts a comment.
/// Keys before the first header belong to [experiment]. Unknown keys throw
/// ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct RunArtifacts {
    std::uint64_t seed = 0;
    AccuracyMatrix matrix;
    std::vector<CycleReport> cycles;
    double ap = 0.0;
    double af = 0.0;

    std::string cycles_jsonl() const;
};

struct ExperimentResult {
    std::string label;
    std::vector<RunArtifacts> runs;
    double ap_mean = 0.0;
    double ap_std = 0.0;  // population std over seeds
    double af_mean = 0.0;
    double af_std = 0.0;
};

/// Corpus named by the config (synthetic or loaded).
Corpus load_corpus(const ExperimentConfig& cfg);

LearnerConfig make_learner_config(const ExperimentConfig& cfg, const Corpus& corpus);

RunArtifacts run_single(const ExperimentConfig& cfg, const Corpus& corpus, std::uint64_t seed);

/// All seeds; writes artifacts under output_dir/<label>/ when output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Corpus& corpus);

struct AblationRow {
    AblationFlags flags;
    ExperimentResult result;
};

/// all-on, -IPO, -NCL, -TCP.
std::vector<AblationRow> ablate(const ExperimentConfig& cfg);
std::vector<AblationRow> ablate(const ExperimentConfig& cfg, const Corpus& corpus);
std::string ablation_markdown(const std::vector<AblationRow>& rows);

/// Markdown table over every experiment_summary.csv found below `dir`.
std::string report_markdown(const std::filesystem::path& dir);

}  // namespace ricl

#endif
