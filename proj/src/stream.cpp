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

#include "ricl/stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "ricl/log.hpp"

namespace ricl {
namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream tags for derive_seed.
constexpr std::uint64_t kPartitionStream = 11;
constexpr std::uint64_t kBlurStream = 12;
constexpr std::uint64_t kNoiseStream = 13;

constexpr double kKeywordProb = 0.35;
constexpr Index kMaxGroupsPerClass = 8;
constexpr Index kMinDocLength = 12;
constexpr Index kMaxDocLength = 20;

std::string word(Index i) {
    std::string s = std::to_string(i);
    return "w" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

std::string class_name(Index c) {
    std::string s = std::to_string(c);
    return "class_" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

std::string join(const Tokens& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
    return splitmix(splitmix(seed) ^ splitmix(stream * 0x2545f4914f6cdd1dULL + 1) ^ splitmix(salt + 0x51ed2701ULL));
}

Corpus generate_synthetic_corpus(Index num_classes, Index docs_per_class, Index vocab_size, std::uint64_t seed) {
    require(num_classes >= 1 && docs_per_class >= 1 && vocab_size >= 1,
            "generate_synthetic_corpus: all arguments must be >= 1");
    require(vocab_size >= num_classes, "generate_synthetic_corpus: vocab_size < num_classes");

    Corpus corpus;
    for (Index c = 0; c < num_classes; ++c) corpus.label_names.push_back(class_name(c));

    // Vocabulary layout: [class keyword forms | background words].
    const Index groups = std::min(vocab_size / (4 * num_classes), kMaxGroupsPerClass);
    const Index forms_per_class = groups > 0 ? 2 * groups : 1;
    std::vector<std::vector<std::string>> keywords(static_cast<std::size_t>(num_classes));
    Index next = 0;
    for (Index c = 0; c < num_classes; ++c) {
        for (Index f = 0; f < forms_per_class; ++f) keywords[c].push_back(word(next++));
        if (groups > 0) {
            for (Index g = 0; g < groups; ++g) {
                const auto& a = keywords[c][2 * g];
                const auto& b = keywords[c][2 * g + 1];
                corpus.synonyms[a].push_back(b);
                corpus.synonyms[b].push_back(a);
            }
        }
    }
    std::vector<std::string> background;
    while (next < vocab_size) background.push_back(word(next++));
    for (std::size_t i = 0; i + 1 < background.size(); i += 2) {
        corpus.synonyms[background[i]].push_back(background[i + 1]);
        corpus.synonyms[background[i + 1]].push_back(background[i]);
    }

    Rng rng(seed);
    std::uniform_int_distribution<Index> length(kMinDocLength, kMaxDocLength);
    std::bernoulli_distribution is_keyword(kKeywordProb);
    for (Index c = 0; c < num_classes; ++c) {
        std::uniform_int_distribution<std::size_t> pick_kw(0, keywords[c].size() - 1);
        for (Index d = 0; d < docs_per_class; ++d) {
            LabeledDoc doc;
            doc.label = c;
            const Index n = length(rng);
            for (Index t = 0; t < n; ++t) {
                if (background.empty() || is_keyword(rng)) {
                    doc.tokens.push_back(keywords[c][pick_kw(rng)]);
                } else {
                    std::uniform_int_distribution<std::size_t> pick_bg(0, background.size() - 1);
                    doc.tokens.push_back(background[pick_bg(rng)]);
                }
            }
            corpus.docs.push_back(std::move(doc));
        }
    }
    return corpus;
}

Corpus load_jsonl_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file " + path.string());
    Corpus corpus;
    std::unordered_map<std::string, Index> label_index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("text") || !obj.contains("label") || !obj["text"].is_string() ||
            !obj["label"].is_string()) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected string fields text and label");
        }
        const auto label = obj["label"].get<std::string>();
        auto [it, inserted] = label_index.try_emplace(label, corpus.num_classes());
        if (inserted) corpus.label_names.push_back(label);
        LabeledDoc doc{tokenize(obj["text"].get<std::string>()), it->second};
        if (doc.tokens.empty()) throw Error(path.string() + ":" + std::to_string(line_no) + ": empty text");
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

void write_jsonl_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& doc : corpus.docs) {
        nlohmann::json obj = {{"text", join(doc.tokens)}, {"label", corpus.label_names.at(doc.label)}};
        out << obj.dump() << '\n';
    }
}

double TaskSpec::measured_blur() const {
    if (samples.empty()) return 0.0;
    const std::set<Index> primary(primary_classes.begin(), primary_classes.end());
    const auto secondary = std::count_if(samples.begin(), samples.end(),
                                         [&](const Sample& s) { return !primary.contains(s.y_true); });
    return static_cast<double>(secondary) / static_cast<double>(samples.size());
}

void StreamConfig::validate(Index corpus_classes) const {
    if (num_tasks < 1) throw ConfigError("num_tasks", "must be >= 1");
    if (classes_per_task < 1) throw ConfigError("classes_per_task", "must be >= 1");
    if (static_cast<Index>(num_tasks) * classes_per_task > corpus_classes)
        throw ConfigError("num_tasks", "num_tasks * classes_per_task exceeds the number of classes");
    if (!(blur_rate >= 0.0 && blur_rate < 1.0)) throw ConfigError("blur_rate", "must lie in [0, 1)");
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("noise_rate", "must lie in [0, 1]");
    if (delay_buffer_size < 1) throw ConfigError("delay_buffer_size", "must be >= 1");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction", "must lie in [0, 1)");
}

std::vector<TaskSpec> partition_tasks(const Corpus& corpus, const StreamConfig& cfg, const Featurizer& featurizer) {
    cfg.validate(corpus.num_classes());
    Rng rng(derive_seed(cfg.seed, kPartitionStream));

    std::vector<Index> classes(static_cast<std::size_t>(corpus.num_classes()));
    std::iota(classes.begin(), classes.end(), Index{0});
    std::shuffle(classes.begin(), classes.end(), rng);

    std::vector<std::vector<std::size_t>> by_class(classes.size());
    for (std::size_t i = 0; i < corpus.docs.size(); ++i) by_class[corpus.docs[i].label].push_back(i);

    std::vector<TaskSpec> tasks(cfg.num_tasks);
    for (std::uint32_t t = 0; t < cfg.num_tasks; ++t) {
        auto& task = tasks[t];
        task.task_id = t;
        for (std::uint32_t k = 0; k < cfg.classes_per_task; ++k) {
            task.primary_classes.push_back(classes[t * cfg.classes_per_task + k]);
        }
        std::sort(task.primary_classes.begin(), task.primary_classes.end());
        for (Index c : task.primary_classes) {
            auto docs = by_class[c];
            require(!docs.empty(), "partition_tasks: class " + corpus.label_names[c] + " has no samples");
            std::shuffle(docs.begin(), docs.end(), rng);
            const auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * docs.size()));
            for (std::size_t i = 0; i < docs.size(); ++i) {
                const auto& doc = corpus.docs[docs[i]];
                Sample s;
                s.id = docs[i];
                s.tokens = doc.tokens;
                s.features = featurizer(s.tokens);
                s.y_true = s.y = doc.label;
                s.task_id = t;
                (i < n_test ? task.test : task.samples).push_back(std::move(s));
            }
        }
        std::sort(task.samples.begin(), task.samples.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
        std::shuffle(task.samples.begin(), task.samples.end(), rng);
    }
    return tasks;
}

std::vector<TaskSpec> apply_blur(std::vector<TaskSpec> tasks, double blur_rate, std::uint64_t seed) {
    if (!(blur_rate >= 0.0 && blur_rate < 1.0)) throw Error("apply_blur: blur rate must lie in [0, 1)");
    if (blur_rate == 0.0) return tasks;
    if (tasks.size() < 2) {
        log::warn("apply_blur: a single task has no other classes to borrow from; blur skipped");
        return tasks;
    }
    Rng rng(seed);
    const std::size_t n_tasks = tasks.size();

    // Each task donates round(r * |D_t|) of its samples and receives as many
    // from the other tasks, so |D_t| is unchanged and the donated share is r.
    std::vector<std::size_t> quota(n_tasks);
    std::vector<std::pair<std::size_t, Sample>> pool;  // (origin task, sample)
    for (std::size_t t = 0; t < n_tasks; ++t) {
        auto& samples = tasks[t].samples;
        quota[t] = static_cast<std::size_t>(std::llround(blur_rate * static_cast<double>(samples.size())));
        std::shuffle(samples.begin(), samples.end(), rng);
        for (std::size_t i = 0; i < quota[t]; ++i) {
            pool.emplace_back(t, std::move(samples.back()));
            samples.pop_back();
        }
    }
    std::shuffle(pool.begin(), pool.end(), rng);

    std::vector<std::vector<std::pair<std::size_t, Sample>>> received(n_tasks);
    std::vector<bool> used(pool.size(), false);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        for (std::size_t i = 0; i < pool.size() && received[t].size() < quota[t]; ++i) {
            if (!used[i] && pool[i].first != t) {
                used[i] = true;
                received[t].push_back(std::move(pool[i]));
            }
        }
    }
    // Leftovers can only be own-origin items of tasks whose quota is unmet;
    // swap each with a compatible item already placed elsewhere.
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        const std::size_t origin = pool[i].first;
        bool placed = false;
        for (std::size_t t = 0; t < n_tasks && !placed; ++t) {
            if (received[t].size() >= quota[t]) continue;
            for (std::size_t u = 0; u < n_tasks && !placed; ++u) {
                if (u == t || u == origin) continue;
                for (auto& item : received[u]) {
                    if (item.first != t) {
                        std::swap(item, pool[i]);
                        received[t].push_back(std::move(pool[i]));
                        placed = true;
                        break;
                    }
                }
            }
        }
        if (!placed) {
            // Nowhere valid to put it: return the sample to its own task.
            tasks[origin].samples.push_back(std::move(pool[i].second));
        }
        used[i] = true;
    }

    for (std::size_t t = 0; t < n_tasks; ++t) {
        std::set<Index> secondary;
        for (auto& [origin, s] : received[t]) {
            secondary.insert(s.y_true);
            s.task_id = tasks[t].task_id;
            tasks[t].samples.push_back(std::move(s));
        }
        tasks[t].secondary_classes.assign(secondary.begin(), secondary.end());
        std::shuffle(tasks[t].samples.begin(), tasks[t].samples.end(), rng);
        log::debug("task " + std::to_string(tasks[t].task_id) + " blur " + std::to_string(tasks[t].measured_blur()));
    }
    return tasks;
}

std::vector<TaskSpec> inject_noise(std::vector<TaskSpec> tasks, double noise_rate, std::uint64_t seed) {
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("inject_noise: noise rate must lie in [0, 1]");
    Rng rng(seed);
    std::bernoulli_distribution flip(noise_rate);
    for (auto& task : tasks) {
        if (noise_rate > 0.0 && task.primary_classes.size() < 2) {
            throw Error("inject_noise: task " + std::to_string(task.task_id) + " has a single class");
        }
        for (auto& s : task.samples) {
            s.y = s.y_true;
            if (flip(rng)) {
                std::vector<Index> others;
                for (Index c : task.primary_classes) {
                    if (c != s.y_true) others.push_back(c);
                }
                std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
                s.y = others[pick(rng)];
            }
            s.is_noisy = s.y != s.y_true;
        }
    }
    return tasks;
}

std::vector<TaskSpec> build_tasks(const Corpus& corpus, const StreamConfig& cfg, const Featurizer& featurizer) {
    auto tasks = partition_tasks(corpus, cfg, featurizer);
    tasks = apply_blur(std::move(tasks), cfg.blur_rate, derive_seed(cfg.seed, kBlurStream));
    return inject_noise(std::move(tasks), cfg.noise_rate, derive_seed(cfg.seed, kNoiseStream));
}

void write_stream_jsonl(const std::vector<TaskSpec>& tasks, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& task : tasks) {
        for (const auto& s : task.samples) {
            nlohmann::json obj = {{"id", s.id},         {"tokens", s.tokens},   {"y_true", s.y_true},
                                  {"y", s.y},           {"y_model", s.y_model}, {"task_id", s.task_id},
                                  {"is_noisy", s.is_noisy}};
            out << obj.dump() << '\n';
        }
    }
}

Stream::Stream(std::vector<TaskSpec> tasks, std::vector<std::uint32_t> order, std::size_t delay_buffer_size)
    : tasks_(std::move(tasks)), order_(std::move(order)), m_(delay_buffer_size) {
    require(m_ >= 1, "delay buffer size must be >= 1");
    std::vector<std::uint32_t> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    bool permutation = sorted.size() == tasks_.size();
    for (std::size_t i = 0; permutation && i < sorted.size(); ++i) permutation = sorted[i] == i;
    require(permutation, "task order is not a permutation of the tasks");
    for (const auto& t : tasks_) require(!t.samples.empty(), "stream task " + std::to_string(t.task_id) + " is empty");
}

std::size_t Stream::num_buffers() const {
    std::size_t n = 0;
    for (const auto& t : tasks_) n += (t.samples.size() + m_ - 1) / m_;
    return n;
}

DelayBuffer Stream::next_delay_buffer(const ModelParams& model) {
    require(!exhausted(), "stream exhausted");
    const auto& samples = tasks_[order_[task_pos_]].samples;
    DelayBuffer buf;
    buf.task_position = task_pos_;
    const std::size_t end = std::min(samples.size(), offset_ + m_);
    for (std::size_t i = offset_; i < end; ++i) {
        Sample s = samples[i];
        s.y_model = argmax(forward(model, s.features).logits);
        buf.samples.push_back(std::move(s));
    }
    offset_ = end;
    if (offset_ == samples.size()) {
        buf.closes_task = true;
        offset_ = 0;
        ++task_pos_;
    }
    return buf;
}

}  // namespace ricl
