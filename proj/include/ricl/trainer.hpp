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

#ifndef RICL_TRAINER_HPP
#define RICL_TRAINER_HPP

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ricl/augment.hpp"
#include "ricl/buffers.hpp"
#include "ricl/nn.hpp"
#include "ricl/purifier.hpp"
#include "ricl/stream.hpp"

namespace ricl {

enum class AlternativeSource { Purifier, Model };

struct TrainPhaseConfig {
    double lr_ncl = 0.05;
    double lr_sft = 0.5;
    double lr_ipo = 0.25;
    std::size_t num_alternatives = 5;
    std::size_t batch_size = 16;
    std::size_t epochs = 3;
    double replay_mix = 0.5;
    double tau = 0.1;
    AlternativeSource alternative_source = AlternativeSource::Purifier;
    bool freeze_pairs = false;  // draw preference pairs once per phase instead of every epoch

    void validate() const;
};

struct PreferencePair {
    std::uint64_t sample_id = 0;
    Index preferred = 0;
    Index rejected = 0;
};

/// Contrastive learning never sees labels: this is all it gets.
struct UnlabeledSample {
    std::uint64_t id = 0;
    Tokens tokens;
    FeatureVector features;
};

std::vector<UnlabeledSample> strip_labels(std::span<const Sample> samples);

/// An original input and the featurized augmentations serving as its positives.
struct ContrastiveView {
    FeatureVector original;
    std::vector<FeatureVector> variants;
};

ContrastiveView make_view(const UnlabeledSample& sample, const AugmentConfig& augment, const Featurizer& featurizer);

/// L draws with replacement from softmax(logits) restricted to classes != y.
std::vector<Index> sample_alternatives(const Vec<double>& logits, Index y, std::size_t count, Rng& rng);

std::vector<PreferencePair> make_preference_pairs(std::uint64_t sample_id, Index y, const std::vector<Index>& alternatives);

/// Mean contrastive loss over the batch anchors; each anchor's negatives are
/// every other view's original and variants. Accumulates the gradient of the
/// mean into `grads` when given.
double ncl_batch_loss(const ModelParams& params, std::span<const ContrastiveView> batch, double tau,
                      ParamGrads* grads = nullptr);

/// Mean IPO loss over samples with fixed alternative lists.
double ipo_batch_loss(const ModelParams& params, std::span<const Sample> batch,
                      std::span<const std::vector<Index>> alternatives, ParamGrads* grads = nullptr);

double sft_batch_loss(const ModelParams& params, std::span<const Sample> batch, ParamGrads* grads = nullptr);

struct PhaseResult {
    std::vector<double> epoch_losses;
    std::size_t steps = 0;

    bool ran() const { return steps > 0; }
    std::optional<double> final_loss() const {
        if (epoch_losses.empty()) return std::nullopt;
        return epoch_losses.back();
    }
};

PhaseResult ncl_phase(ModelParams& params, std::span<const UnlabeledSample> current,
                      std::span<const UnlabeledSample> replay, const TrainPhaseConfig& cfg,
                      const AugmentConfig& augment, const Featurizer& featurizer, Rng& rng);

PhaseResult sft_phase(ModelParams& params, std::span<const Sample> current, const BoundedBuffer* replay,
                      const TrainPhaseConfig& cfg, Rng& rng);

/// Alternatives come from `scorer` (the purifier, or the model itself when null).
PhaseResult ipo_phase(ModelParams& params, const ModelParams* scorer, std::span<const Sample> current,
                      const BoundedBuffer* replay, const TrainPhaseConfig& cfg, Rng& rng);

struct PipelineConfig {
    bool use_purifier = true;
    bool use_ncl = true;
    bool use_sft = true;
    bool use_ipo = true;
    bool use_replay = true;
};

struct BufferCapacities {
    std::size_t delay = 200;
    std::size_t clean_partition = 200;
    std::size_t noisy_partition = 400;
    std::size_t replay = 800;  // each of R_clean and R_noisy
    EvictionPolicy replay_policy = EvictionPolicy::Reservoir;
};

struct LearnerConfig {
    ModelShape shape;
    Featurizer featurizer;
    PipelineConfig pipeline;
    PurifierConfig purifier;
    TrainPhaseConfig train;
    AugmentConfig augment;
    BufferCapacities buffers;
    double init_scale = 0.05;
};

struct CycleReport {
    std::size_t cycle = 0;
    std::size_t task_position = 0;
    std::uint32_t task_id = 0;
    bool closes_task = false;
    std::size_t buffer_size = 0;
    std::size_t routed_clean = 0;
    std::size_t routed_noisy = 0;
    std::size_t routed_noisy_hits = 0;  // oracle: routed noisy and actually noisy
    std::size_t arrivals_noisy = 0;     // oracle: noisy samples in this delay buffer
    PromotionReport promotion;
    std::optional<double> purifier_loss;
    std::optional<double> ncl_loss;
    std::optional<double> sft_loss;
    std::optional<double> ipo_loss;
    std::size_t replay_clean_size = 0;
    std::size_t replay_noisy_size = 0;
    std::size_t clean_partition_size = 0;
    std::size_t noisy_partition_size = 0;

    nlohmann::json to_json() const;
};

/// One learner: primary model, optional purifier, replay buffers.
class Learner {
public:
    Learner(LearnerConfig cfg, std::uint64_t seed);

    /// Pull one delay buffer and run purifier + NCL -> SFT -> IPO on it.
    CycleReport process_cycle(Stream& stream);

    const ModelParams& model() const { return model_; }
    const Purifier* purifier() const { return purifier_ ? &*purifier_ : nullptr; }
    const ReplayBuffers& replay() const { return replay_; }
    const LearnerConfig& config() const { return cfg_; }

private:
    LearnerConfig cfg_;
    ModelParams model_;
    std::optional<Purifier> purifier_;
    ReplayBuffers replay_;
    Rng purifier_rng_;
    Rng route_rng_;
    Rng train_rng_;
    Rng replay_rng_;
    std::size_t cycle_ = 0;
};

}  // namespace ricl

#endif
