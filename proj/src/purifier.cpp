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

#include "ricl/purifier.hpp"

#include <algorithm>
#include <numeric>

#include "ricl/losses.hpp"

namespace ricl {

void PurifierConfig::validate() const {
    if (!(lr >= 0.0)) throw ConfigError("lr", "purifier learning rate must be >= 0");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q", "must lie in (0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
}

double mean_gce_loss(const ModelParams& params, std::span<const Sample> samples, double q) {
    require(!samples.empty(), "mean_gce_loss: no samples");
    double total = 0.0;
    for (const auto& s : samples) {
        const auto out = forward(params, s.features);
        total += gce_loss(out.log_probs.array().exp().matrix().eval(), s.y, q).value;
    }
    return total / static_cast<double>(samples.size());
}

ModelParams train_purifier(ModelParams params, std::span<const Sample> buffer, const PurifierConfig& cfg, Rng& rng,
                           std::vector<double>* epoch_losses) {
    require(!buffer.empty(), "train_purifier: empty buffer");
    cfg.validate();
    const ModelShape shape = params.shape();
    std::vector<std::size_t> order(buffer.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            auto grads = ParamGrads::zeros(shape);
            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = buffer[order[i]];
                const auto out = forward(params, s.features);
                const auto loss = gce_loss(out.log_probs.array().exp().matrix().eval(), s.y, cfg.q);
                epoch_loss += loss.value;
                grads.add(backward(params, s.features, OutputGrads{loss.grad, {}}));
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            sgd_step(params, grads, cfg.lr);
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(buffer.size()));
    }
    return params;
}

Promotion decide_promotion(double conf_at_arrival, double conf_at_recheck) {
    const bool clean_then = conf_at_arrival >= 0.0;
    const bool clean_now = conf_at_recheck >= 0.0;
    if (clean_then != clean_now) return Promotion::Discard;
    return clean_now ? Promotion::PromoteClean : Promotion::PromoteNoisy;
}

Purifier::Purifier(ModelParams params, std::size_t clean_capacity, std::size_t noisy_capacity)
    : params_(std::move(params)),
      clean_(clean_capacity, EvictionPolicy::AdmissionStop),
      noisy_(noisy_capacity, EvictionPolicy::AdmissionStop) {}

std::pair<Route, ConfidenceRecord> Purifier::route_at_arrival(const Sample& sample, Rng& rng) {
    const auto out = forward(params_, sample.features);
    ConfidenceRecord rec{sample.id, confidence(out.logits, sample.y), std::nullopt};
    const Route route = rec.conf_at_arrival >= 0.0 ? Route::Clean : Route::Noisy;
    auto& partition = route == Route::Clean ? clean_ : noisy_;
    if (partition.push(sample, rng).outcome == PushOutcome::Dropped) {
        log::warn("delay partition full; sample " + std::to_string(sample.id) + " not queued for recheck");
    } else {
        records_[sample.id] = rec;
    }
    return {route, rec};
}

PromotionReport Purifier::recheck_and_promote(ReplayBuffers& replay, Rng& rng) {
    PromotionReport report;
    for (const BoundedBuffer* partition : {&clean_, &noisy_}) {
        for (const auto& s : partition->items()) {
            auto& rec = records_.at(s.id);
            rec.conf_at_recheck = confidence(forward(params_, s.features).logits, s.y);
            if (s.is_noisy) ++report.rechecked_noisy;
            switch (decide_promotion(rec.conf_at_arrival, *rec.conf_at_recheck)) {
                case Promotion::PromoteClean:
                    ++report.promoted_clean;
                    if (!s.is_noisy) ++report.promoted_clean_hits;
                    replay.push_clean(s, rng);
                    break;
                case Promotion::PromoteNoisy:
                    ++report.promoted_noisy;
                    if (s.is_noisy) ++report.promoted_noisy_hits;
                    replay.push_noisy(s, rng);
                    break;
                case Promotion::Discard:
                    ++report.discarded;
                    break;
            }
            report.records.push_back(rec);
        }
    }
    clean_.clear();
    noisy_.clear();
    records_.clear();
    return report;
}

}  // namespace ricl
