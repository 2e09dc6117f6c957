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


#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ricl/metrics.hpp"
#include "ricl/purifier.hpp"

using namespace ricl;

namespace {

const ModelShape kTiny{16, 2, 2, 3};
const Featurizer kFeat{1 << 12, 0};

Sample sample(std::uint64_t id, Index y, bool noisy = false) {
    Sample s;
    s.id = id;
    s.tokens = {"tok" + std::to_string(id)};
    s.features = featurize(s.tokens, static_cast<std::uint32_t>(kTiny.hash_dim), 0);
    s.y = y;
    s.y_true = noisy ? (y + 1) % kTiny.num_classes : y;
    s.is_noisy = noisy;
    return s;
}

// Zero weights, so the logits equal the head bias for every input.
ModelParams constant_logits(std::initializer_list<double> bias) {
    auto p = ModelParams::zeros(kTiny);
    Index i = 0;
    for (double b : bias) p.head_bias(i++) = b;
    return p;
}

Vec<double> vec(std::initializer_list<double> v) {
    Vec<double> out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<Sample> corpus_samples(const Corpus& c) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < c.docs.size(); ++i) {
        Sample s;
        s.id = i;
        s.tokens = c.docs[i].tokens;
        s.features = kFeat(s.tokens);
        s.y = s.y_true = c.docs[i].label;
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST(Confidence, MarginExamples) {
    EXPECT_DOUBLE_EQ(confidence(vec({2, 1, 0}), 0), 1.0);
    EXPECT_DOUBLE_EQ(confidence(vec({2, 1, 0}), 1), -1.0);
    EXPECT_DOUBLE_EQ(confidence(vec({3, 3, 0}), 0), 0.0);
}

TEST(Confidence, NeedsTwoClasses) {
    EXPECT_THROW(confidence(vec({1.0}), 0), Error);
    EXPECT_THROW(confidence(vec({1.0, 2.0}), 2), Error);
}

TEST(Confidence, NonNegativeIffLabelIsAnArgmax) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> small(-3, 3);
    for (int trial = 0; trial < 5000; ++trial) {
        Vec<double> z(5);
        for (Index c = 0; c < 5; ++c) z(c) = small(rng);  // integers make ties common
        const Index y = static_cast<Index>(rng() % 5);
        EXPECT_EQ(confidence(z, y) >= 0.0, z(y) == z.maxCoeff());
    }
}

TEST(DecidePromotion, SignAgreement) {
    EXPECT_EQ(decide_promotion(2.0, 0.3), Promotion::PromoteClean);
    EXPECT_EQ(decide_promotion(-1.0, 1.0), Promotion::Discard);
    EXPECT_EQ(decide_promotion(1.0, -1.0), Promotion::Discard);
    EXPECT_EQ(decide_promotion(-0.2, -5.0), Promotion::PromoteNoisy);
    EXPECT_EQ(decide_promotion(0.0, 0.0), Promotion::PromoteClean);
}

TEST(Route, MarginSignDecides) {
    Rng rng(2);
    Purifier pos(constant_logits({1.0, 0.0, 0.0}), 10, 10);
    EXPECT_EQ(pos.route_at_arrival(sample(1, 0), rng).first, Route::Clean);
    EXPECT_DOUBLE_EQ(pos.records().at(1).conf_at_arrival, 1.0);
    EXPECT_FALSE(pos.records().at(1).conf_at_recheck.has_value());

    Purifier neg(constant_logits({0.0, 0.5, 0.0}), 10, 10);
    const auto [route, rec] = neg.route_at_arrival(sample(2, 0), rng);
    EXPECT_EQ(route, Route::Noisy);
    EXPECT_DOUBLE_EQ(rec.conf_at_arrival, -0.5);
    EXPECT_EQ(neg.noisy_partition().size(), 1u);
}

TEST(Route, ZeroPurifierRoutesClean) {
    Rng rng(3);
    Purifier p(ModelParams::zeros(kTiny), 10, 10);
    for (std::uint64_t i = 0; i < 5; ++i) EXPECT_EQ(p.route_at_arrival(sample(i, i % 3), rng).first, Route::Clean);
    EXPECT_EQ(p.clean_partition().size(), 5u);
}

TEST(Route, EveryArrivalLandsInExactlyOnePartition) {
    Rng rng(4);
    Purifier p(ModelParams::uniform(kTiny, 5, 2.0), 100, 100);
    for (std::uint64_t i = 0; i < 60; ++i) p.route_at_arrival(sample(i, i % 3), rng);
    EXPECT_EQ(p.clean_partition().size() + p.noisy_partition().size(), 60u);
    for (const auto& s : p.clean_partition().items()) EXPECT_FALSE(p.noisy_partition().contains(s.id));
}

TEST(Recheck, PromotesByConsistencyAndClears) {
    Rng rng(5);
    Purifier p(constant_logits({2.0, 0.0, 0.0}), 10, 10);
    p.route_at_arrival(sample(1, 0), rng);        // +2 -> C
    p.route_at_arrival(sample(2, 1, true), rng);  // -2 -> N
    p.params() = constant_logits({0.0, 0.0, 2.0});
    p.route_at_arrival(sample(3, 0), rng);        // -2 -> N
    p.params() = constant_logits({1.3, 0.0, 1.0});
    ReplayBuffers replay(10, 10);
    const auto report = p.recheck_and_promote(replay, rng);
    // recheck margins: sample 1 +0.3, sample 2 -1.3, sample 3 +0.3 (flipped)
    EXPECT_EQ(report.promoted_clean, 1u);
    EXPECT_EQ(report.promoted_noisy, 1u);
    EXPECT_EQ(report.discarded, 1u);
    EXPECT_EQ(report.rechecked_noisy, 1u);
    EXPECT_EQ(report.promoted_noisy_hits, 1u);
    EXPECT_EQ(report.promoted_clean_hits, 1u);
    EXPECT_TRUE(replay.clean().contains(1));
    EXPECT_TRUE(replay.noisy().contains(2));
    EXPECT_FALSE(replay.clean().contains(3) || replay.noisy().contains(3));
    EXPECT_TRUE(p.clean_partition().empty());
    EXPECT_TRUE(p.noisy_partition().empty());
    EXPECT_TRUE(p.records().empty());
    ASSERT_EQ(report.records.size(), 3u);
    for (const auto& r : report.records) EXPECT_TRUE(r.conf_at_recheck.has_value());
}

TEST(Recheck, FlipToCleanIsDiscarded) {
    Rng rng(6);
    Purifier p(constant_logits({0.0, 1.0, 0.0}), 10, 10);
    p.route_at_arrival(sample(1, 0), rng);  // -1
    p.params() = constant_logits({1.0, 0.0, 0.0});
    ReplayBuffers replay(10, 10);
    const auto report = p.recheck_and_promote(replay, rng);
    EXPECT_EQ(report.discarded, 1u);
    EXPECT_TRUE(replay.clean().empty());
    EXPECT_TRUE(replay.noisy().empty());
}

TEST(Recheck, ConservationOverRandomCycles) {
    Rng rng(7);
    Purifier p(ModelParams::uniform(kTiny, 8, 1.5), 30, 30);
    ReplayBuffers replay(1000, 1000);
    std::uint64_t id = 0;
    for (int cycle = 0; cycle < 20; ++cycle) {
        for (int i = 0; i < 25; ++i, ++id) p.route_at_arrival(sample(id, static_cast<Index>(id % 3), id % 4 == 0), rng);
        const std::size_t queued = p.clean_partition().size() + p.noisy_partition().size();
        p.params() = ModelParams::uniform(kTiny, 100 + cycle, 1.5);
        const auto r = p.recheck_and_promote(replay, rng);
        EXPECT_EQ(r.promoted_clean + r.promoted_noisy + r.discarded, queued);
        for (const auto& s : replay.noisy().items()) ASSERT_FALSE(replay.clean().contains(s.id));
    }
}

TEST(TrainPurifier, ZeroEpochsIsIdentity) {
    Rng rng(9);
    const auto start = ModelParams::uniform(kTiny, 9);
    std::vector<Sample> buf{sample(1, 0), sample(2, 1)};
    PurifierConfig cfg;
    cfg.epochs = 0;
    const auto out = train_purifier(start, buf, cfg, rng);
    EXPECT_EQ(out.embedding, start.embedding);
    EXPECT_EQ(out.head, start.head);
}

TEST(TrainPurifier, EmptyBufferThrows) {
    Rng rng(10);
    EXPECT_THROW(train_purifier(ModelParams::zeros(kTiny), std::vector<Sample>{}, PurifierConfig{}, rng), Error);
}

TEST(TrainPurifier, FitsSeparableCleanSet) {
    const auto corpus = generate_synthetic_corpus(4, 60, 800, 11);
    // The corpus is separable according to an independent naive-Bayes fit.
    oracle::NaiveBayes nb(4);
    nb.fit(corpus.docs);
    std::size_t nb_correct = 0;
    for (const auto& d : corpus.docs) nb_correct += nb.predict(d.tokens) == d.label ? 1 : 0;
    ASSERT_GT(static_cast<double>(nb_correct) / static_cast<double>(corpus.docs.size()), 0.95);

    const auto buf = corpus_samples(corpus);
    Rng rng(11);
    PurifierConfig cfg;
    cfg.epochs = 20;
    std::vector<double> losses;
    const auto trained = train_purifier(ModelParams::uniform({kFeat.hash_dim, 16, 16, 4}, 3), buf, cfg, rng, &losses);
    EXPECT_GT(evaluate(trained, buf), 95.0);
    ASSERT_EQ(losses.size(), 20u);
    EXPECT_LT(losses.back(), losses.front());
}

TEST(TrainPurifier, LossDoesNotIncreaseOnTheSameBuffer) {
    const auto corpus = generate_synthetic_corpus(4, 50, 800, 12);
    const auto buf = corpus_samples(corpus);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Rng rng(seed);
        const auto start = ModelParams::uniform({kFeat.hash_dim, 16, 16, 4}, seed);
        const double before = mean_gce_loss(start, buf, 0.7);
        const auto trained = train_purifier(start, buf, PurifierConfig{}, rng);
        EXPECT_LE(mean_gce_loss(trained, buf, 0.7), before);
    }
}

TEST(PurifierConfig, Validation) {
    PurifierConfig cfg;
    cfg.q = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.lr = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
