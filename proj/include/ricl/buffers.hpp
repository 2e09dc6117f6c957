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

#ifndef RICL_BUFFERS_HPP
#define RICL_BUFFERS_HPP

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ricl/stream.hpp"

namespace ricl {

enum class EvictionPolicy {
    Reservoir,     // uniform retention over everything ever pushed
    AdmissionStop  // keep the first `capacity` items, drop the rest
};

enum class PushOutcome { Appended, Replaced, Dropped };

struct PushResult {
    PushOutcome outcome = PushOutcome::Dropped;
    std::optional<std::uint64_t> evicted_id;
};

/// Fixed-capacity sample store with unique ids.
class BoundedBuffer {
public:
    explicit BoundedBuffer(std::size_t capacity = 0, EvictionPolicy policy = EvictionPolicy::Reservoir)
        : capacity_(capacity), policy_(policy) {}

    /// Throws if a sample with the same id is resident.
    PushResult push(Sample sample, Rng& rng);

    /// n uniform draws without replacement; the whole buffer if n >= size.
    std::vector<Sample> sample_batch(std::size_t n, Rng& rng) const;

    bool contains(std::uint64_t id) const { return ids_.contains(id); }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t seen_count() const { return seen_; }
    const std::vector<Sample>& items() const { return items_; }

    /// Empties the buffer and resets the reservoir counter.
    void clear();

    nlohmann::json to_json() const;

private:
    std::size_t capacity_;
    EvictionPolicy policy_;
    std::vector<Sample> items_;
    std::unordered_set<std::uint64_t> ids_;
    std::uint64_t seen_ = 0;
};

/// R_clean and R_noisy, kept disjoint by sample id.
class ReplayBuffers {
public:
    ReplayBuffers(std::size_t clean_capacity, std::size_t noisy_capacity,
                  EvictionPolicy policy = EvictionPolicy::Reservoir)
        : clean_(clean_capacity, policy), noisy_(noisy_capacity, policy) {}

    PushResult push_clean(Sample sample, Rng& rng);
    PushResult push_noisy(Sample sample, Rng& rng);

    const BoundedBuffer& clean() const { return clean_; }
    const BoundedBuffer& noisy() const { return noisy_; }

private:
    BoundedBuffer clean_;
    BoundedBuffer noisy_;
};

}  // namespace ricl

#endif
