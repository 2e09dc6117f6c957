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

#include "ricl/buffers.hpp"

#include <algorithm>
#include <numeric>

namespace ricl {

PushResult BoundedBuffer::push(Sample sample, Rng& rng) {
    if (ids_.contains(sample.id)) {
        throw Error("buffer push: duplicate sample id " + std::to_string(sample.id));
    }
    ++seen_;
    PushResult result;
    if (items_.size() < capacity_) {
        ids_.insert(sample.id);
        items_.push_back(std::move(sample));
        result.outcome = PushOutcome::Appended;
        return result;
    }
    if (capacity_ == 0 || policy_ == EvictionPolicy::AdmissionStop) {
        return result;
    }
    std::uniform_int_distribution<std::uint64_t> slot(0, seen_ - 1);
    const std::uint64_t j = slot(rng);
    if (j >= capacity_) {
        return result;
    }
    auto& resident = items_[static_cast<std::size_t>(j)];
    result.outcome = PushOutcome::Replaced;
    result.evicted_id = resident.id;
    ids_.erase(resident.id);
    ids_.insert(sample.id);
    resident = std::move(sample);
    return result;
}

std::vector<Sample> BoundedBuffer::sample_batch(std::size_t n, Rng& rng) const {
    require(!items_.empty(), "sample_batch: empty buffer");
    if (n >= items_.size()) {
        return items_;
    }
    // Partial Fisher-Yates over an index permutation.
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
        out.push_back(items_[idx[i]]);
    }
    return out;
}

void BoundedBuffer::clear() {
    items_.clear();
    ids_.clear();
    seen_ = 0;
}

nlohmann::json BoundedBuffer::to_json() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(items_.size());
    for (const auto& s : items_) ids.push_back(s.id);
    return {{"capacity", capacity_}, {"seen", seen_}, {"size", items_.size()}, {"ids", ids}};
}

PushResult ReplayBuffers::push_clean(Sample sample, Rng& rng) {
    require(!noisy_.contains(sample.id), "sample already held by the noisy replay buffer");
    return clean_.push(std::move(sample), rng);
}

PushResult ReplayBuffers::push_noisy(Sample sample, Rng& rng) {
    require(!clean_.contains(sample.id), "sample already held by the clean replay buffer");
    return noisy_.push(std::move(sample), rng);
}

}  // namespace ricl
