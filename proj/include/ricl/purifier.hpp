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

#ifndef RICL_PURIFIER_HPP
#define RICL_PURIFIER_HPP

#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ricl/buffers.hpp"
#include "ricl/nn.hpp"
#include "ricl/stream.hpp"

namespace ricl {

struct PurifierConfig {
    std::size_t epochs = 5;
    double lr = 0.3;
    double q = 0.7;
    std::size_t batch_size = 16;

    void validate() const;
};

/// Logit of the labelled class minus the best competing logit.
template <typename Derived>
typename Derived::Scalar confidence(const Eigen::MatrixBase<Derived>& logits, Index y) {
    require(logits.size() >= 2, "confidence: need at least two classes");
    require(y >= 0 && y < logits.size(), "confidence: label out of range");
    auto best = -std::numeric_limits<typename Derived::Scalar>::infinity();
    for (Index c = 0; c < logits.size(); ++c) {
        if (c != y && logits(c) > best) best = logits(c);
    }
    return logits(y) - best;
}

/// Mean GCE against the human labels y.
double mean_gce_loss(const ModelParams& params, std::span<const Sample> samples, double q);

/// Warm-started minibatch SGD on GCE. Per-epoch mean losses are appended to
/// `epoch_losses` when given.
ModelParams train_purifier(ModelParams params, std::span<const Sample> buffer, const PurifierConfig& cfg, Rng& rng,
                           std::vector<double>* epoch_losses = nullptr);

enum class Route { Clean, Noisy };
enum class Promotion { PromoteClean, PromoteNoisy, Discard };

struct ConfidenceRecord {
    std::uint64_t sample_id = 0;
    double conf_at_arrival = 0.0;
    std::optional<double> conf_at_recheck;
};

/// Sign agreement between the two confidences; zero counts as clean.
Promotion decide_promotion(double conf_at_arrival, double conf_at_recheck);

struct PromotionReport {
    std::size_t promoted_clean = 0;
    std::size_t promoted_noisy = 0;
    std::size_t discarded = 0;
    // Oracle bookkeeping against Sample::is_noisy.
    std::size_t rechecked_noisy = 0;       // noisy samples among the rechecked ones
    std::size_t promoted_noisy_hits = 0;   // promoted to R_noisy and actually noisy
    std::size_t promoted_clean_hits = 0;   // promoted to R_clean and actually clean
    std::vector<ConfidenceRecord> records;
};

/// Purifier model plus the clean/noisy delay partitions awaiting recheck.
class Purifier {
public:
    Purifier(ModelParams params, std::size_t clean_capacity, std::size_t noisy_capacity);

    const ModelParams& params() const { return params_; }
    ModelParams& params() { return params_; }

    std::pair<Route, ConfidenceRecord> route_at_arrival(const Sample& sample, Rng& rng);

    /// Re-scores every partitioned sample with the current params, promotes the
    /// sign-consistent ones and clears both partitions.
    PromotionReport recheck_and_promote(ReplayBuffers& replay, Rng& rng);

    const BoundedBuffer& clean_partition() const { return clean_; }
    const BoundedBuffer& noisy_partition() const { return noisy_; }
    const std::unordered_map<std::uint64_t, ConfidenceRecord>& records() const { return records_; }

private:
    ModelParams params_;
    BoundedBuffer clean_;
    BoundedBuffer noisy_;
    std::unordered_map<std::uint64_t, ConfidenceRecord> records_;
};

}  // namespace ricl

#endif
