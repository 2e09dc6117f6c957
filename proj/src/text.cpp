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

#include <algorithm>
#include <cctype>
#include <map>

#include "ricl/nn.hpp"

namespace ricl {
namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// splitmix64 finalizer; spreads FNV output over the low bits used for bucketing.
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t seeded_offset(std::uint64_t seed, std::uint64_t order) {
    return mix(kFnvOffset ^ mix(seed) ^ (order * 0x632be59bd9b4e019ULL));
}

}  // namespace

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

FeatureVector featurize(std::span<const std::string> tokens, std::uint32_t hash_dim, std::uint64_t seed) {
    require(!tokens.empty(), "featurize: empty token list");
    require(hash_dim > 0, "featurize: hash_dim must be positive");
    const std::uint64_t uni = seeded_offset(seed, 1);
    const std::uint64_t bi = seeded_offset(seed, 2);

    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        counts[static_cast<std::uint32_t>(mix(fnv1a(uni, tokens[i])) % hash_dim)] += 1.0;
        if (i + 1 < tokens.size()) {
            std::uint64_t h = fnv1a(bi, tokens[i]);
            h = fnv1a(h, "\x1f");
            h = fnv1a(h, tokens[i + 1]);
            counts[static_cast<std::uint32_t>(mix(h) % hash_dim)] += 1.0;
        }
    }
    FeatureVector fv;
    fv.indices.reserve(counts.size());
    fv.weights.reserve(counts.size());
    for (const auto& [idx, w] : counts) {
        fv.indices.push_back(idx);
        fv.weights.push_back(w);
    }
    return fv;
}

}  // namespace ricl
