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

#ifndef RICL_AUGMENT_HPP
#define RICL_AUGMENT_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include "ricl/stream.hpp"

namespace ricl {

/// Token-level augmentations producing the positives for contrastive learning.
struct AugmentConfig {
    double op_rate = 0.1;        // fraction of tokens touched by replace / insert
    double swap_rate = 0.1;      // n_swaps = ceil(swap_rate * n)
    double delete_prob = 0.1;
    std::uint32_t num_variants = 4;
    std::uint64_t seed = 0;
    std::shared_ptr<const SynonymTable> synonyms = std::make_shared<SynonymTable>();

    void validate() const;
};

bool is_stopword(std::string_view token);

/// File format: one `token<TAB>syn,syn,...` entry per line.
SynonymTable load_synonym_table(const std::filesystem::path& path);
void write_synonym_table(const SynonymTable& table, const std::filesystem::path& path);

Tokens synonym_replace(const Tokens& tokens, double rate, const SynonymTable& table, Rng& rng);
Tokens random_insert(const Tokens& tokens, double rate, const SynonymTable& table, Rng& rng);
Tokens random_swap(const Tokens& tokens, std::size_t n_swaps, Rng& rng);
Tokens random_delete(const Tokens& tokens, double p, Rng& rng);

/// One variant per method, in the order replace, insert, swap, delete. Each
/// method gets its own generator seeded from (cfg.seed, sample_id, method).
std::vector<Tokens> augment_all(const Tokens& tokens, const AugmentConfig& cfg, std::uint64_t sample_id);

}  // namespace ricl

#endif
