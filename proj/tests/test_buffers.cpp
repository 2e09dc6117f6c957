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

#include <set>

#include "ricl/buffers.hpp"

using namespace ricl;

namespace {

Sample item(std::uint64_t id) {
    Sample s;
    s.id = id;
    return s;
}

std::set<std::uint64_t> ids_of(const BoundedBuffer& b) {
    std::set<std::uint64_t> out;
    for (const auto& s : b.items()) out.insert(s.id);
    return out;
}

}  // namespace

TEST(BoundedBuffer, AppendsUnderCapacity) {
    Rng rng(1);
    BoundedBuffer b(2);
    EXPECT_EQ(b.push(item(1), rng).outcome, PushOutcome::Appended);
    const auto r = b.push(item(2), rng);
    EXPECT_EQ(r.outcome, PushOutcome::Appended);
    EXPECT_FALSE(r.evicted_id.has_value());
    EXPECT_EQ(ids_of(b), (std::set<std::uint64_t>{1, 2}));
    EXPECT_EQ(b.seen_count(), 2u);
}

TEST(BoundedBuffer, ZeroCapacityDropsEverything) {
    Rng rng(2);
    BoundedBuffer b(0);
    for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(b.push(item(i), rng).outcome, PushOutcome::Dropped);
    EXPECT_TRUE(b.empty());
    EXPECT_EQ(b.seen_count(), 50u);
}

TEST(BoundedBuffer, DuplicateIdThrows) {
    Rng rng(3);
    BoundedBuffer b(4);
    b.push(item(7), rng);
    EXPECT_THROW(b.push(item(7), rng), Error);
    EXPECT_EQ(b.size(), 1u);
    EXPECT_EQ(b.seen_count(), 1u);
}

TEST(BoundedBuffer, ReplacementReportsEvictedResident) {
    Rng rng(4);
    BoundedBuffer b(3);
    for (std::uint64_t i = 0; i < 3; ++i) b.push(item(i), rng);
    int replaced = 0;
    for (std::uint64_t i = 3; i < 200; ++i) {
        const auto before = ids_of(b);
        const auto r = b.push(item(i), rng);
        if (r.outcome == PushOutcome::Replaced) {
            ++replaced;
            ASSERT_TRUE(r.evicted_id.has_value());
            EXPECT_TRUE(before.contains(*r.evicted_id));
            EXPECT_FALSE(b.contains(*r.evicted_id));
            EXPECT_TRUE(b.contains(i));
        } else {
            EXPECT_EQ(r.outcome, PushOutcome::Dropped);
            EXPECT_EQ(ids_of(b), before);
        }
        EXPECT_EQ(b.size(), 3u);
    }
    EXPECT_GT(replaced, 0);
}

TEST(BoundedBuffer, ReservoirRetentionIsUniform) {
    // capacity 100 over 10,000 pushes: every item survives with probability 0.01.
    constexpr int kTrials = 1000;
    constexpr std::uint64_t kItems = 10000;
    std::vector<int> kept(kItems, 0);
    for (int t = 0; t < kTrials; ++t) {
        Rng rng(1000 + t);
        BoundedBuffer b(100);
        for (std::uint64_t i = 0; i < kItems; ++i) b.push(item(i), rng);
        for (const auto& s : b.items()) ++kept[s.id];
    }
    const double sigma = std::sqrt(kTrials * 0.01 * 0.99);
    int outside = 0;
    for (int k : kept) outside += std::fabs(k - 10.0) > 3.0 * sigma ? 1 : 0;
    // 3 sigma leaves roughly 0.3% of items outside by chance; allow a margin.
    EXPECT_LT(outside, static_cast<int>(0.01 * kItems));
    // Early, middle and late thirds of the stream are retained equally often.
    double thirds[3] = {0, 0, 0};
    for (std::uint64_t i = 0; i < kItems; ++i) thirds[std::min<std::uint64_t>(2, i * 3 / kItems)] += kept[i];
    const double expected = 100.0 * kTrials / 3.0;
    for (double v : thirds) EXPECT_LT(std::fabs(v - expected), 3.0 * std::sqrt(expected));
}

TEST(BoundedBuffer, AdmissionStopKeepsTheFirst) {
    Rng rng(5);
    BoundedBuffer b(3, EvictionPolicy::AdmissionStop);
    for (std::uint64_t i = 0; i < 10; ++i) b.push(item(i), rng);
    EXPECT_EQ(ids_of(b), (std::set<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(b.seen_count(), 10u);
}

TEST(BoundedBuffer, SampleBatchWholeBufferWhenLarge) {
    Rng rng(6);
    BoundedBuffer b(10);
    for (std::uint64_t i = 0; i < 6; ++i) b.push(item(i), rng);
    for (std::size_t n : {6u, 7u, 100u}) {
        const auto batch = b.sample_batch(n, rng);
        std::multiset<std::uint64_t> ids;
        for (const auto& s : batch) ids.insert(s.id);
        EXPECT_EQ(ids, (std::multiset<std::uint64_t>{0, 1, 2, 3, 4, 5}));
    }
}

TEST(BoundedBuffer, SampleBatchWithoutReplacementSubset) {
    Rng rng(7);
    BoundedBuffer b(20);
    for (std::uint64_t i = 100; i < 120; ++i) b.push(item(i), rng);
    for (int trial = 0; trial < 200; ++trial) {
        const auto batch = b.sample_batch(7, rng);
        ASSERT_EQ(batch.size(), 7u);
        std::set<std::uint64_t> ids;
        for (const auto& s : batch) {
            EXPECT_TRUE(b.contains(s.id));
            ids.insert(s.id);
        }
        EXPECT_EQ(ids.size(), 7u);
    }
}

TEST(BoundedBuffer, SingleDrawIsUniform) {
    Rng rng(8);
    BoundedBuffer b(10);
    for (std::uint64_t i = 0; i < 10; ++i) b.push(item(i), rng);
    std::vector<int> count(10, 0);
    constexpr int kTrials = 10000;
    for (int t = 0; t < kTrials; ++t) ++count[b.sample_batch(1, rng)[0].id];
    const double sigma = std::sqrt(kTrials * 0.1 * 0.9);
    for (int c : count) EXPECT_LT(std::fabs(c - 1000.0), 3.0 * sigma);
}

TEST(BoundedBuffer, EmptySampleBatchThrows) {
    Rng rng(9);
    BoundedBuffer b(4);
    EXPECT_THROW(b.sample_batch(1, rng), Error);
}

TEST(BoundedBuffer, ClearResetsState) {
    Rng rng(10);
    BoundedBuffer b(2);
    b.push(item(1), rng);
    b.push(item(2), rng);
    b.push(item(3), rng);
    b.clear();
    EXPECT_TRUE(b.empty());
    EXPECT_EQ(b.seen_count(), 0u);
    EXPECT_NO_THROW(b.push(item(1), rng));
    const auto j = b.to_json();
    EXPECT_EQ(j["size"], 1);
    EXPECT_EQ(j["capacity"], 2);
    EXPECT_EQ(j["ids"][0], 1);
}

TEST(ReplayBuffers, DisjointByConstruction) {
    Rng rng(11);
    ReplayBuffers r(5, 5);
    r.push_clean(item(1), rng);
    r.push_noisy(item(2), rng);
    EXPECT_THROW(r.push_noisy(item(1), rng), Error);
    EXPECT_THROW(r.push_clean(item(2), rng), Error);
    EXPECT_EQ(r.clean().size(), 1u);
    EXPECT_EQ(r.noisy().size(), 1u);
}

TEST(ReplayBuffers, RandomOperationSequencesKeepInvariants) {
    Rng rng(12);
    ReplayBuffers r(17, 9);
    BoundedBuffer partition(13, EvictionPolicy::AdmissionStop);
    std::uint64_t next = 0;
    std::uniform_int_distribution<int> op(0, 5);
    for (int step = 0; step < 10000; ++step) {
        switch (op(rng)) {
            case 0:
            case 1:
                r.push_clean(item(next++), rng);
                break;
            case 2:
                r.push_noisy(item(next++), rng);
                break;
            case 3:
                partition.push(item(next++), rng);
                break;
            case 4:
                if (!r.clean().empty()) {
                    // Re-pushing a resident id elsewhere must be refused.
                    const auto id = r.clean().sample_batch(1, rng)[0].id;
                    EXPECT_THROW(r.push_noisy(item(id), rng), Error);
                }
                break;
            default:
                partition.clear();
        }
        ASSERT_LE(r.clean().size(), 17u);
        ASSERT_LE(r.noisy().size(), 9u);
        ASSERT_LE(partition.size(), 13u);
        for (const auto& s : r.noisy().items()) ASSERT_FALSE(r.clean().contains(s.id));
    }
}
