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

#include "ricl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ricl/log.hpp"
#include "ricl/losses.hpp"

namespace ricl {
namespace {

constexpr std::uint64_t kModelInitStream = 41;
constexpr std::uint64_t kPurifierInitStream = 42;
constexpr std::uint64_t kPurifierTrainStream = 43;
constexpr std::uint64_t kRouteStream = 44;
constexpr std::uint64_t kTrainStream = 45;
constexpr std::uint64_t kReplayStream = 46;

std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t size, Rng& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n >= size) return idx;
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, size - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    return idx;
}

// Shared minibatch schedule. Each batch holds `batch_size` items, a
// `replay_mix` share of them drawn from replay (at least one current item).
// `step(current_indices, n_replay)` returns the batch mean loss and its size.
template <typename Step>
PhaseResult run_phase(std::size_t n_current, std::size_t replay_size, const TrainPhaseConfig& cfg, Rng& rng,
                      Step&& step) {
    PhaseResult result;
    std::size_t n_rep = 0;
    if (replay_size > 0) {
        n_rep = static_cast<std::size_t>(std::floor(cfg.replay_mix * static_cast<double>(cfg.batch_size)));
        n_rep = std::min(n_rep, cfg.batch_size - 1);
    }
    const std::size_t n_cur = cfg.batch_size - n_rep;
    std::vector<std::size_t> order(n_current);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t start = 0; start < order.size(); start += n_cur) {
            const std::size_t end = std::min(order.size(), start + n_cur);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto [loss, size] = step(batch, std::min(n_rep, replay_size));
            loss_sum += loss * static_cast<double>(size);
            count += size;
            ++result.steps;
        }
        if (count > 0) result.epoch_losses.push_back(loss_sum / static_cast<double>(count));
    }
    return result;
}

}  // namespace

void TrainPhaseConfig::validate() const {
    if (!(lr_ncl >= 0.0)) throw ConfigError("lr_ncl", "must be >= 0");
    if (!(lr_sft >= 0.0)) throw ConfigError("lr_sft", "must be >= 0");
    if (!(lr_ipo >= 0.0)) throw ConfigError("lr_ipo", "must be >= 0");
    if (num_alternatives < 1) throw ConfigError("num_alternatives", "must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
    if (!(replay_mix >= 0.0 && replay_mix <= 1.0)) throw ConfigError("replay_mix", "must lie in [0, 1]");
    if (!(tau > 0.0)) throw ConfigError("tau", "must be positive");
}

std::vector<UnlabeledSample> strip_labels(std::span<const Sample> samples) {
    std::vector<UnlabeledSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.id, s.tokens, s.features});
    return out;
}

ContrastiveView make_view(const UnlabeledSample& sample, const AugmentConfig& augment, const Featurizer& featurizer) {
    ContrastiveView view;
    view.original = sample.features;
    for (const auto& tokens : augment_all(sample.tokens, augment, sample.id)) {
        view.variants.push_back(featurizer(tokens));
    }
    return view;
}

std::vector<Index> sample_alternatives(const Vec<double>& logits, Index y, std::size_t count, Rng& rng) {
    require(logits.size() >= 2, "sample_alternatives: need at least two classes");
    require(y >= 0 && y < logits.size(), "sample_alternatives: label out of range");
    require(count >= 1, "sample_alternatives: L must be >= 1");
    double peak = -std::numeric_limits<double>::infinity();
    for (Index c = 0; c < logits.size(); ++c) {
        if (c != y) peak = std::max(peak, logits(c));
    }
    std::vector<double> weights(static_cast<std::size_t>(logits.size()));
    for (Index c = 0; c < logits.size(); ++c) weights[c] = c == y ? 0.0 : std::exp(logits(c) - peak);
    std::discrete_distribution<Index> dist(weights.begin(), weights.end());
    std::vector<Index> out(count);
    for (auto& a : out) a = dist(rng);
    return out;
}

std::vector<PreferencePair> make_preference_pairs(std::uint64_t sample_id, Index y, const std::vector<Index>& alternatives) {
    std::vector<PreferencePair> pairs;
    pairs.reserve(alternatives.size());
    for (Index alt : alternatives) {
        require(alt != y, "preference pair would reject the preferred label");
        pairs.push_back({sample_id, y, alt});
    }
    return pairs;
}

double ncl_batch_loss(const ModelParams& params, std::span<const ContrastiveView> batch, double tau, ParamGrads* grads) {
    require(!batch.empty(), "ncl_batch_loss: empty batch");
    const ModelShape shape = params.shape();
    // Columns: for view i, its original then its variants.
    std::vector<const FeatureVector*> inputs;
    std::vector<std::size_t> first(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        require(!batch[i].variants.empty(), "ncl_batch_loss: view without positives");
        first[i] = inputs.size();
        inputs.push_back(&batch[i].original);
        for (const auto& v : batch[i].variants) inputs.push_back(&v);
    }
    const Index n_cols = static_cast<Index>(inputs.size());
    Mat<double> emb(shape.hidden_dim, n_cols);
    for (Index c = 0; c < n_cols; ++c) emb.col(c) = forward(params, *inputs[c]).embedding;

    Mat<double> d_emb = Mat<double>::Zero(shape.hidden_dim, n_cols);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Index a = static_cast<Index>(first[i]);
        const Index k = static_cast<Index>(batch[i].variants.size());
        std::vector<Index> neg_cols;
        for (Index c = 0; c < n_cols; ++c) {
            if (c < a || c > a + k) neg_cols.push_back(c);
        }
        Mat<double> negatives(shape.hidden_dim, static_cast<Index>(neg_cols.size()));
        for (std::size_t j = 0; j < neg_cols.size(); ++j) negatives.col(static_cast<Index>(j)) = emb.col(neg_cols[j]);
        const auto loss = ncl_loss(emb.col(a), emb.middleCols(a + 1, k), negatives, tau);
        total += loss.value;
        if (grads) {
            d_emb.col(a) += inv_n * loss.anchor_grad;
            d_emb.middleCols(a + 1, k) += inv_n * loss.positive_grads;
            for (std::size_t j = 0; j < neg_cols.size(); ++j) {
                d_emb.col(neg_cols[j]) += inv_n * loss.negative_grads.col(static_cast<Index>(j));
            }
        }
    }
    if (grads) {
        for (Index c = 0; c < n_cols; ++c) {
            grads->add(backward(params, *inputs[c], OutputGrads{{}, d_emb.col(c)}));
        }
    }
    return total * inv_n;
}

double ipo_batch_loss(const ModelParams& params, std::span<const Sample> batch,
                      std::span<const std::vector<Index>> alternatives, ParamGrads* grads) {
    require(!batch.empty() && batch.size() == alternatives.size(), "ipo_batch_loss: batch/alternative mismatch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto out = forward(params, batch[i].features);
        const auto loss = ipo_loss_logits(out.log_probs, batch[i].y, alternatives[i]);
        total += loss.value;
        if (grads) grads->add(backward(params, batch[i].features, OutputGrads{loss.grad, {}}), inv_n);
    }
    return total * inv_n;
}

double sft_batch_loss(const ModelParams& params, std::span<const Sample> batch, ParamGrads* grads) {
    require(!batch.empty(), "sft_batch_loss: empty batch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& s : batch) {
        const auto out = forward(params, s.features);
        const auto loss = cross_entropy(out.log_probs, s.y);
        total += loss.value;
        if (grads) grads->add(backward(params, s.features, OutputGrads{loss.grad, {}}), inv_n);
    }
    return total * inv_n;
}

PhaseResult ncl_phase(ModelParams& params, std::span<const UnlabeledSample> current,
                      std::span<const UnlabeledSample> replay, const TrainPhaseConfig& cfg,
                      const AugmentConfig& augment, const Featurizer& featurizer, Rng& rng) {
    cfg.validate();
    if (current.empty() && replay.empty()) return {};
    std::vector<UnlabeledSample> pool(current.begin(), current.end());
    std::span<const UnlabeledSample> replay_pool = replay;
    if (pool.empty()) {
        for (auto i : draw_without_replacement(cfg.batch_size, replay.size(), rng)) pool.push_back(replay[i]);
        replay_pool = {};
    }
    std::unordered_map<std::uint64_t, ContrastiveView> views;
    auto view_of = [&](const UnlabeledSample& s) -> const ContrastiveView& {
        auto it = views.find(s.id);
        if (it == views.end()) it = views.emplace(s.id, make_view(s, augment, featurizer)).first;
        return it->second;
    };
    const ModelShape shape = params.shape();
    return run_phase(pool.size(), replay_pool.size(), cfg, rng,
                     [&](const std::vector<std::size_t>& idx, std::size_t n_rep) -> std::pair<double, std::size_t> {
                         std::vector<ContrastiveView> batch;
                         for (auto i : idx) batch.push_back(view_of(pool[i]));
                         for (auto i : draw_without_replacement(n_rep, replay_pool.size(), rng)) {
                             batch.push_back(view_of(replay_pool[i]));
                         }
                         auto grads = ParamGrads::zeros(shape);
                         const double loss = ncl_batch_loss(params, batch, cfg.tau, &grads);
                         sgd_step(params, grads, cfg.lr_ncl);
                         return {loss, batch.size()};
                     });
}

PhaseResult sft_phase(ModelParams& params, std::span<const Sample> current, const BoundedBuffer* replay,
                      const TrainPhaseConfig& cfg, Rng& rng) {
    cfg.validate();
    const bool has_replay = replay != nullptr && !replay->empty() && cfg.replay_mix > 0.0;
    if (current.empty() && !has_replay) return {};
    std::vector<Sample> pool(current.begin(), current.end());
    if (pool.empty()) pool = replay->sample_batch(cfg.batch_size, rng);
    const std::size_t replay_size = has_replay && !current.empty() ? replay->size() : 0;
    const ModelShape shape = params.shape();
    return run_phase(pool.size(), replay_size, cfg, rng,
                     [&](const std::vector<std::size_t>& idx, std::size_t n_rep) -> std::pair<double, std::size_t> {
                         std::vector<Sample> batch;
                         for (auto i : idx) batch.push_back(pool[i]);
                         if (n_rep > 0) {
                             auto extra = replay->sample_batch(n_rep, rng);
                             batch.insert(batch.end(), extra.begin(), extra.end());
                         }
                         auto grads = ParamGrads::zeros(shape);
                         const double loss = sft_batch_loss(params, batch, &grads);
                         sgd_step(params, grads, cfg.lr_sft);
                         return {loss, batch.size()};
                     });
}

PhaseResult ipo_phase(ModelParams& params, const ModelParams* scorer, std::span<const Sample> current,
                      const BoundedBuffer* replay, const TrainPhaseConfig& cfg, Rng& rng) {
    cfg.validate();
    const bool has_replay = replay != nullptr && !replay->empty() && cfg.replay_mix > 0.0;
    if (current.empty() && !has_replay) return {};
    std::vector<Sample> pool(current.begin(), current.end());
    if (pool.empty()) pool = replay->sample_batch(cfg.batch_size, rng);
    const std::size_t replay_size = has_replay && !current.empty() ? replay->size() : 0;

    std::unordered_map<std::uint64_t, std::vector<Index>> frozen;
    auto alternatives_for = [&](const Sample& s) {
        if (cfg.freeze_pairs) {
            if (auto it = frozen.find(s.id); it != frozen.end()) return it->second;
        }
        const ModelParams& source = scorer ? *scorer : params;
        auto alts = sample_alternatives(forward(source, s.features).logits, s.y, cfg.num_alternatives, rng);
        if (cfg.freeze_pairs) frozen.emplace(s.id, alts);
        return alts;
    };
    const ModelShape shape = params.shape();
    return run_phase(pool.size(), replay_size, cfg, rng,
                     [&](const std::vector<std::size_t>& idx, std::size_t n_rep) -> std::pair<double, std::size_t> {
                         std::vector<Sample> batch;
                         for (auto i : idx) batch.push_back(pool[i]);
                         if (n_rep > 0) {
                             auto extra = replay->sample_batch(n_rep, rng);
                             batch.insert(batch.end(), extra.begin(), extra.end());
                         }
                         std::vector<std::vector<Index>> alts;
                         alts.reserve(batch.size());
                         for (const auto& s : batch) alts.push_back(alternatives_for(s));
                         auto grads = ParamGrads::zeros(shape);
                         const double loss = ipo_batch_loss(params, batch, alts, &grads);
                         sgd_step(params, grads, cfg.lr_ipo);
                         return {loss, batch.size()};
                     });
}

nlohmann::json CycleReport::to_json() const {
    auto opt = [](const std::optional<double>& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nullptr; };
    return {
        {"cycle", cycle},
        {"task_position", task_position},
        {"task_id", task_id},
        {"closes_task", closes_task},
        {"buffer_size", buffer_size},
        {"routing", {{"clean", routed_clean}, {"noisy", routed_noisy}, {"noisy_hits", routed_noisy_hits},
                     {"arrivals_noisy", arrivals_noisy}}},
        {"promotions", {{"clean", promotion.promoted_clean}, {"noisy", promotion.promoted_noisy},
                        {"discarded", promotion.discarded}, {"rechecked_noisy", promotion.rechecked_noisy},
                        {"noisy_hits", promotion.promoted_noisy_hits}, {"clean_hits", promotion.promoted_clean_hits}}},
        {"losses", {{"purifier", opt(purifier_loss)}, {"ncl", opt(ncl_loss)}, {"sft", opt(sft_loss)},
                    {"ipo", opt(ipo_loss)}}},
        {"buffers", {{"replay_clean", replay_clean_size}, {"replay_noisy", replay_noisy_size},
                     {"clean_partition", clean_partition_size}, {"noisy_partition", noisy_partition_size}}},
    };
}

Learner::Learner(LearnerConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      model_(ModelParams::uniform(cfg_.shape, derive_seed(seed, kModelInitStream), cfg_.init_scale)),
      replay_(cfg_.buffers.replay, cfg_.buffers.replay, cfg_.buffers.replay_policy),
      purifier_rng_(derive_seed(seed, kPurifierTrainStream)),
      route_rng_(derive_seed(seed, kRouteStream)),
      train_rng_(derive_seed(seed, kTrainStream)),
      replay_rng_(derive_seed(seed, kReplayStream)) {
    cfg_.purifier.validate();
    cfg_.train.validate();
    cfg_.augment.validate();
    if (cfg_.pipeline.use_purifier) {
        purifier_.emplace(ModelParams::uniform(cfg_.shape, derive_seed(seed, kPurifierInitStream), cfg_.init_scale),
                          cfg_.buffers.clean_partition, cfg_.buffers.noisy_partition);
    }
}

CycleReport Learner::process_cycle(Stream& stream) {
    const auto& pipe = cfg_.pipeline;
    DelayBuffer buf = stream.next_delay_buffer(model_);

    CycleReport report;
    report.cycle = cycle_++;
    report.task_position = buf.task_position;
    report.task_id = stream.order()[buf.task_position];
    report.closes_task = buf.closes_task;
    report.buffer_size = buf.samples.size();
    for (const auto& s : buf.samples) report.arrivals_noisy += s.is_noisy ? 1 : 0;

    std::vector<Sample> clean;
    std::vector<Sample> noisy;
    if (purifier_) {
        std::vector<double> losses;
        purifier_->params() = train_purifier(std::move(purifier_->params()), buf.samples, cfg_.purifier,
                                             purifier_rng_, &losses);
        if (!losses.empty()) report.purifier_loss = losses.back();
        // The freshly trained purifier rechecks last cycle's partitions before
        // this cycle's arrivals are routed into them.
        if (pipe.use_replay) {
            report.promotion = purifier_->recheck_and_promote(replay_, replay_rng_);
        } else {
            ReplayBuffers scratch(0, 0);
            report.promotion = purifier_->recheck_and_promote(scratch, replay_rng_);
        }
        for (auto& s : buf.samples) {
            const auto [route, rec] = purifier_->route_at_arrival(s, route_rng_);
            if (route == Route::Clean) {
                clean.push_back(std::move(s));
            } else {
                if (s.is_noisy) ++report.routed_noisy_hits;
                noisy.push_back(std::move(s));
            }
        }
    } else {
        clean = std::move(buf.samples);
    }
    report.routed_clean = clean.size();
    report.routed_noisy = noisy.size();

    const BoundedBuffer* replay_clean = pipe.use_replay ? &replay_.clean() : nullptr;
    if (pipe.use_ncl) {
        const auto current = strip_labels(noisy);
        const auto replayed = pipe.use_replay ? strip_labels(replay_.noisy().items()) : std::vector<UnlabeledSample>{};
        report.ncl_loss = ncl_phase(model_, current, replayed, cfg_.train, cfg_.augment, cfg_.featurizer, train_rng_)
                              .final_loss();
    }
    if (pipe.use_sft) {
        report.sft_loss = sft_phase(model_, clean, replay_clean, cfg_.train, train_rng_).final_loss();
    }
    if (pipe.use_ipo) {
        const ModelParams* scorer = purifier_ && cfg_.train.alternative_source == AlternativeSource::Purifier
                                        ? &purifier_->params()
                                        : nullptr;
        report.ipo_loss = ipo_phase(model_, scorer, clean, replay_clean, cfg_.train, train_rng_).final_loss();
    }

    // Without a purifier every labelled arrival is replayed as clean.
    if (!purifier_ && pipe.use_replay) {
        for (auto& s : clean) replay_.push_clean(std::move(s), replay_rng_);
    }

    report.replay_clean_size = replay_.clean().size();
    report.replay_noisy_size = replay_.noisy().size();
    if (purifier_) {
        report.clean_partition_size = purifier_->clean_partition().size();
        report.noisy_partition_size = purifier_->noisy_partition().size();
    }
    return report;
}

}  // namespace ricl
