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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "ricl/augment.hpp"

using namespace ricl;

namespace {

SynonymTable table() {
    return {{"quick", {"fast", "rapid"}}, {"fast", {"quick"}}, {"dog", {"hound"}}, {"jumps", {"leaps"}}};
}

Tokens random_doc(Rng& rng, std::size_t n) {
    static const Tokens vocab{"quick", "fast", "dog", "jumps", "the", "over", "lazy", "fox", "a", "and"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    Tokens t;
    for (std::size_t i = 0; i < n; ++i) t.push_back(vocab[pick(rng)]);
    return t;
}

Tokens sorted(Tokens t) {
    std::sort(t.begin(), t.end());
    return t;
}

bool multiset_contains(Tokens big, Tokens small) {
    std::sort(big.begin(), big.end());
    std::sort(small.begin(), small.end());
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

TEST(Stopwords, CommonFunctionWords) {
    for (const char* w : {"the", "a", "and", "of", "is"}) EXPECT_TRUE(is_stopword(w)) << w;
    for (const char* w : {"dog", "quick", "", "w00001"}) EXPECT_FALSE(is_stopword(w)) << w;
}

TEST(SynonymReplace, IdentityCases) {
    Rng rng(1);
    const Tokens t{"the", "quick", "dog"};
    EXPECT_EQ(synonym_replace(t, 0.5, SynonymTable{}, rng), t);
    EXPECT_EQ(synonym_replace(t, 0.0, table(), rng), t);
    EXPECT_TRUE(synonym_replace(Tokens{}, 0.5, table(), rng).empty());
}

TEST(SynonymReplace, ReplacesCeilRateNonStopwords) {
    Rng rng(2);
    const Tokens t{"the", "quick", "dog", "jumps", "over", "fox"};
    // 4 non-stopwords, rate 0.5 -> 2 replacements among the 3 with entries.
    for (int trial = 0; trial < 100; ++trial) {
        const auto out = synonym_replace(t, 0.5, table(), rng);
        ASSERT_EQ(out.size(), t.size());
        int changed = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (out[i] != t[i]) {
                ++changed;
                const auto syns = table().at(t[i]);
                EXPECT_NE(std::find(syns.begin(), syns.end(), out[i]), syns.end());
            }
        }
        EXPECT_EQ(changed, 2);
        EXPECT_EQ(out[0], "the");
    }
}

TEST(SynonymReplace, PreservesLength) {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto doc = random_doc(rng, 1 + trial % 30);
        EXPECT_EQ(synonym_replace(doc, 0.3, table(), rng).size(), doc.size());
    }
}

TEST(RandomInsert, IdentityCases) {
    Rng rng(4);
    const Tokens t{"quick", "dog"};
    EXPECT_EQ(random_insert(t, 0.0, table(), rng), t);
    const Tokens no_syn{"lazy", "fox", "over"};
    EXPECT_EQ(random_insert(no_syn, 0.9, table(), rng), no_syn);
}

TEST(RandomInsert, EmptyInputThrows) {
    Rng rng(5);
    EXPECT_THROW(random_insert(Tokens{}, 0.1, table(), rng), Error);
}

TEST(RandomInsert, GrowsByCeilAndContainsOriginal) {
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        auto doc = random_doc(rng, 1 + trial % 25);
        doc.push_back("dog");
        const auto out = random_insert(doc, 0.1, table(), rng);
        const auto expected = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(doc.size()) - 1e-12));
        EXPECT_EQ(out.size(), doc.size() + expected);
        EXPECT_TRUE(multiset_contains(out, doc));
    }
}

TEST(RandomSwap, IdentityCases) {
    Rng rng(7);
    EXPECT_EQ(random_swap(Tokens{"solo"}, 5, rng), Tokens{"solo"});
    const Tokens t{"a", "b", "c"};
    EXPECT_EQ(random_swap(t, 0, rng), t);
    EXPECT_TRUE(random_swap(Tokens{}, 3, rng).empty());
}

TEST(RandomSwap, PreservesMultiset) {
    Rng rng(8);
    bool moved = false;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto doc = random_doc(rng, 2 + trial % 20);
        const auto out = random_swap(doc, 3, rng);
        EXPECT_EQ(sorted(out), sorted(doc));
        moved = moved || out != doc;
    }
    EXPECT_TRUE(moved);
}

TEST(RandomDelete, Extremes) {
    Rng rng(9);
    const Tokens t{"a", "b", "c", "d"};
    EXPECT_EQ(random_delete(t, 0.0, rng), t);
    for (int trial = 0; trial < 100; ++trial) {
        const auto out = random_delete(t, 1.0, rng);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_NE(std::find(t.begin(), t.end(), out[0]), t.end());
    }
    EXPECT_THROW(random_delete(t, 1.5, rng), Error);
}

TEST(RandomDelete, DeletionCountIsBinomial) {
    Rng rng(10);
    Tokens t;
    for (int i = 0; i < 10000; ++i) t.push_back("t" + std::to_string(i));
    const auto out = random_delete(t, 0.1, rng);
    const double deleted = static_cast<double>(t.size() - out.size());
    EXPECT_LT(std::fabs(deleted - 1000.0), 3.0 * std::sqrt(10000 * 0.1 * 0.9));
    EXPECT_TRUE(multiset_contains(t, out));
}

TEST(AugmentAll, FourDeterministicNonEmptyVariants) {
    AugmentConfig cfg;
    cfg.synonyms = std::make_shared<SynonymTable>(table());
    cfg.seed = 3;
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto doc = random_doc(rng, 1 + trial % 15);
        const auto a = augment_all(doc, cfg, trial);
        ASSERT_EQ(a.size(), 4u);
        EXPECT_EQ(a, augment_all(doc, cfg, trial));
        for (const auto& v : a) EXPECT_FALSE(v.empty());
        EXPECT_EQ(a[0].size(), doc.size());
        EXPECT_GE(a[1].size(), doc.size());
        EXPECT_EQ(sorted(a[2]), sorted(doc));
        EXPECT_TRUE(multiset_contains(doc, a[3]));
    }
}

TEST(AugmentAll, SeedAndIdChangeVariants) {
    AugmentConfig cfg;
    cfg.synonyms = std::make_shared<SynonymTable>(table());
    cfg.op_rate = 0.5;
    cfg.swap_rate = 0.5;
    cfg.delete_prob = 0.5;
    Tokens doc;
    for (int i = 0; i < 30; ++i) doc.push_back(i % 2 ? "quick" : "dog" + std::to_string(i));
    const auto base = augment_all(doc, cfg, 1);
    EXPECT_NE(base, augment_all(doc, cfg, 2));
    cfg.seed = 99;
    EXPECT_NE(base, augment_all(doc, cfg, 1));
}

TEST(AugmentAll, RejectsEmptyAndBadConfig) {
    AugmentConfig cfg;
    EXPECT_THROW(augment_all(Tokens{}, cfg, 0), Error);
    cfg.num_variants = 3;
    EXPECT_THROW(augment_all(Tokens{"x"}, cfg, 0), ConfigError);
    cfg = {};
    cfg.op_rate = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SynonymTableFile, RoundTripAndComments) {
    const auto path = std::filesystem::temp_directory_path() / ("ricl_syn_" + std::to_string(::getpid()) + ".tsv");
    write_synonym_table(table(), path);
    EXPECT_EQ(load_synonym_table(path), table());
    {
        std::ofstream out(path);
        out << "# comment\n\nbig\tlarge,huge\r\n";
    }
    const auto t = load_synonym_table(path);
    EXPECT_EQ(t.at("big"), (std::vector<std::string>{"large", "huge"}));
    {
        std::ofstream out(path);
        out << "no tab here\n";
    }
    EXPECT_THROW(load_synonym_table(path), Error);
    std::filesystem::remove(path);
    EXPECT_THROW(load_synonym_table(path), Error);
}
