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

#ifndef RICL_STREAM_HPP
#define RICL_STREAM_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ricl/nn.hpp"

namespace ricl {

using Rng = std::mt19937_64;

/// Independent child seed for a named sub-stream of one run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0);

using SynonymTable = std::map<std::string, std::vector<std::string>>;

struct LabeledDoc {
    Tokens tokens;
    Index label = 0;
};

struct Corpus {
    std::vector<std::string> label_names;
    std::vector<LabeledDoc> docs;
    SynonymTable synonyms;  // filled by the synthetic generator, empty for loaded corpora

    Index num_classes() const { return static_cast<Index>(label_names.size()); }
};

/// Per-class keyword groups (two synonymous surface forms each) over a shared
/// background vocabulary. Keywords are disjoint across classes.
Corpus generate_synthetic_corpus(Index num_classes, Index docs_per_class, Index vocab_size, std::uint64_t seed);

/// JSONL, one {"text": ..., "label": ...} object per line. Labels get indices
/// in first-seen order.
Corpus load_jsonl_corpus(const std::filesystem::path& path);
void write_jsonl_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Feature hashing parameters shared by every model in a run.
struct Featurizer {
    std::uint32_t hash_dim = 1u << 14;
    std::uint64_t seed = 0;

    FeatureVector operator()(std::span<const std::string> tokens) const { return featurize(tokens, hash_dim, seed); }
};

struct Sample {
    std::uint64_t id = 0;
    Tokens tokens;
    FeatureVector features;
    Index y_true = 0;   // evaluation and oracles only
    Index y = 0;        // human feedback, possibly noisy
    Index y_model = 0;  // model-generated label at arrival
    std::uint32_t task_id = 0;
    bool is_noisy = false;
};

struct TaskSpec {
    std::uint32_t task_id = 0;
    std::vector<Index> primary_classes;
    std::vector<Index> secondary_classes;
    std::vector<Sample> samples;  // training stream for this task
    std::vector<Sample> test;     // clean held-out split of the primary classes

    double measured_blur() const;
};

struct StreamConfig {
    std::uint32_t num_tasks = 5;
    std::uint32_t classes_per_task = 4;
    double blur_rate = 0.1;
    double noise_rate = 0.2;
    std::uint32_t delay_buffer_size = 200;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate(Index corpus_classes) const;
};

/// Seeded class shuffle into tasks; holds out `test_fraction` of every class.
std::vector<TaskSpec> partition_tasks(const Corpus& corpus, const StreamConfig& cfg, const Featurizer& featurizer);

/// Moves round(r * |D_t|) samples out of each task and redistributes them as
/// secondary-class samples of other tasks; total count and task sizes are kept.
std::vector<TaskSpec> apply_blur(std::vector<TaskSpec> tasks, double blur_rate, std::uint64_t seed);

/// Symmetric noise: flip with probability rho to a uniform other primary class of the task.
std::vector<TaskSpec> inject_noise(std::vector<TaskSpec> tasks, double noise_rate, std::uint64_t seed);

/// partition -> blur -> noise, each with its own derived seed.
std::vector<TaskSpec> build_tasks(const Corpus& corpus, const StreamConfig& cfg, const Featurizer& featurizer);

void write_stream_jsonl(const std::vector<TaskSpec>& tasks, const std::filesystem::path& path);

struct DelayBuffer {
    std::vector<Sample> samples;
    std::size_t task_position = 0;  // index into the task order
    bool closes_task = false;
};

/// Streams tasks in the given order as delay buffers of at most M samples.
/// A buffer never spans a task boundary.
class Stream {
public:
    Stream(std::vector<TaskSpec> tasks, std::vector<std::uint32_t> order, std::size_t delay_buffer_size);

    bool exhausted() const { return task_pos_ >= order_.size(); }

    /// Fills y_model with the argmax of `model` on each sample as it arrives.
    DelayBuffer next_delay_buffer(const ModelParams& model);

    std::size_t num_buffers() const;
    const std::vector<std::uint32_t>& order() const { return order_; }
    const TaskSpec& task_at(std::size_t position) const { return tasks_[order_.at(position)]; }
    const std::vector<TaskSpec>& tasks() const { return tasks_; }

private:
    std::vector<TaskSpec> tasks_;
    std::vector<std::uint32_t> order_;
    std::size_t m_;
    std::size_t task_pos_ = 0;
    std::size_t offset_ = 0;
};

}  // namespace ricl

#endif
