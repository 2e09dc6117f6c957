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

#include "ricl/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ricl {
namespace {

constexpr std::uint64_t kAugmentStream = 31;

constexpr std::array<std::string_view, 104> kStopwords = {
    "a",       "about",   "above", "after",  "again", "against", "all",   "am",     "an",    "and",
    "any",     "are",     "as",    "at",     "be",    "because", "been",  "before", "being", "below",
    "between", "both",    "but",   "by",     "can",   "did",     "do",    "does",   "doing", "down",
    "during",  "each",    "few",   "for",    "from",  "further", "had",   "has",    "have",  "having",
    "he",      "her",     "here",  "hers",   "him",   "his",     "how",   "i",      "if",    "in",
    "into",    "is",      "it",    "its",    "just",  "me",      "more",  "most",   "my",    "no",
    "nor",     "not",     "now",   "of",     "off",   "on",      "once",  "only",   "or",    "other",
    "our",     "out",     "over",  "own",    "same",  "she",     "should", "so",    "some",  "such",
    "than",    "that",    "the",   "their",  "them",  "then",    "there", "these",  "they",  "this",
    "those",   "through", "to",    "too",    "under", "until",   "up",    "very",   "was",   "we",
    "were",    "what",    "when",  "which"};

std::size_t ceil_count(double rate, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-12));
}

const std::vector<std::string>* synonyms_of(const SynonymTable& table, const std::string& token) {
    auto it = table.find(token);
    if (it == table.end() || it->second.empty()) return nullptr;
    return &it->second;
}

}  // namespace

void AugmentConfig::validate() const {
    if (!(op_rate >= 0.0 && op_rate <= 1.0)) throw ConfigError("op_rate", "must lie in [0, 1]");
    if (!(swap_rate >= 0.0)) throw ConfigError("swap_rate", "must be >= 0");
    if (!(delete_prob >= 0.0 && delete_prob <= 1.0)) throw ConfigError("delete_prob", "must lie in [0, 1]");
    if (num_variants != 4) throw ConfigError("num_variants", "exactly one variant per augmentation method (4)");
    require(synonyms != nullptr, "augment config has no synonym table");
}

bool is_stopword(std::string_view token) {
    return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

SynonymTable load_synonym_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synonym table " + path.string());
    SynonymTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error("synonym table line without a tab: " + line);
        auto& syns = table[line.substr(0, tab)];
        std::stringstream rest(line.substr(tab + 1));
        std::string syn;
        while (std::getline(rest, syn, ',')) {
            if (!syn.empty()) syns.push_back(syn);
        }
    }
    return table;
}

void write_synonym_table(const SynonymTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& [token, syns] : table) {
        out << token << '\t';
        for (std::size_t i = 0; i < syns.size(); ++i) out << (i ? "," : "") << syns[i];
        out << '\n';
    }
}

Tokens synonym_replace(const Tokens& tokens, double rate, const SynonymTable& table, Rng& rng) {
    std::vector<std::size_t> candidates;
    std::size_t n_nonstop = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_stopword(tokens[i])) continue;
        ++n_nonstop;
        if (synonyms_of(table, tokens[i])) candidates.push_back(i);
    }
    const std::size_t n_replace = std::min(ceil_count(rate, n_nonstop), candidates.size());
    std::shuffle(candidates.begin(), candidates.end(), rng);
    Tokens out = tokens;
    for (std::size_t k = 0; k < n_replace; ++k) {
        const auto& syns = *synonyms_of(table, tokens[candidates[k]]);
        std::uniform_int_distribution<std::size_t> pick(0, syns.size() - 1);
        out[candidates[k]] = syns[pick(rng)];
    }
    return out;
}

Tokens random_insert(const Tokens& tokens, double rate, const SynonymTable& table, Rng& rng) {
    require(!tokens.empty(), "random_insert: empty input");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (synonyms_of(table, tokens[i])) candidates.push_back(i);
    }
    Tokens out = tokens;
    if (candidates.empty()) return out;
    const std::size_t n_insert = ceil_count(rate, tokens.size());
    std::uniform_int_distribution<std::size_t> pick_source(0, candidates.size() - 1);
    for (std::size_t k = 0; k < n_insert; ++k) {
        const auto& syns = *synonyms_of(table, tokens[candidates[pick_source(rng)]]);
        std::uniform_int_distribution<std::size_t> pick_syn(0, syns.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_pos(0, out.size());
        const auto& syn = syns[pick_syn(rng)];
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(pick_pos(rng)), syn);
    }
    return out;
}

Tokens random_swap(const Tokens& tokens, std::size_t n_swaps, Rng& rng) {
    Tokens out = tokens;
    if (out.size() < 2) return out;
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    for (std::size_t k = 0; k < n_swaps; ++k) {
        const std::size_t i = pick(rng);
        const std::size_t j = pick(rng);
        std::swap(out[i], out[j]);
    }
    return out;
}

Tokens random_delete(const Tokens& tokens, double p, Rng& rng) {
    require(p >= 0.0 && p <= 1.0, "random_delete: p must lie in [0, 1]");
    if (tokens.empty()) return {};
    std::bernoulli_distribution drop(p);
    Tokens out;
    for (const auto& t : tokens) {
        if (!drop(rng)) out.push_back(t);
    }
    if (out.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
        out.push_back(tokens[pick(rng)]);
    }
    return out;
}

std::vector<Tokens> augment_all(const Tokens& tokens, const AugmentConfig& cfg, std::uint64_t sample_id) {
    require(!tokens.empty(), "augment_all: empty input");
    cfg.validate();
    auto rng_for = [&](std::uint64_t method) { return Rng(derive_seed(cfg.seed, kAugmentStream, sample_id * 8 + method)); };
    std::vector<Tokens> out;
    out.reserve(4);
    {
        auto rng = rng_for(0);
        out.push_back(synonym_replace(tokens, cfg.op_rate, *cfg.synonyms, rng));
    }
    {
        auto rng = rng_for(1);
        out.push_back(random_insert(tokens, cfg.op_rate, *cfg.synonyms, rng));
    }
    {
        auto rng = rng_for(2);
        out.push_back(random_swap(tokens, ceil_count(cfg.swap_rate, tokens.size()), rng));
    }
    {
        auto rng = rng_for(3);
        out.push_back(random_delete(tokens, cfg.delete_prob, rng));
    }
    return out;
}

}  // namespace ricl
