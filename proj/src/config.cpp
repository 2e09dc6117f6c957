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

// Experiment configuration: a registry of (section, key) fields drives both
// parsing and serialization so the two stay in sync.

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ricl/experiment.hpp"

namespace ricl {
namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + v + "' as a number");
    return out;
}

template <typename T>
std::string format_number(T v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected on/off, got '" + v + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(key, item));
    }
    return out;
}

template <typename T>
std::string format_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
    return out;
}

Method parse_method(const std::string& v) {
    if (v == "ricl") return Method::Ricl;
    if (v == "seqft") return Method::SeqFT;
    if (v == "er") return Method::Er;
    throw ConfigError("method", "expected ricl, seqft or er, got '" + v + "'");
}

// Field builders over a member accessor.
template <typename T, typename Access>
Field number_field(std::string section, std::string key, Access access) {
    return {section, key, [access](const ExperimentConfig& c) { return format_number<T>(access(const_cast<ExperimentConfig&>(c))); },
            [access, key](ExperimentConfig& c, const std::string& v) { access(c) = parse_number<T>(key, v); }};
}

template <typename Access>
Field bool_field(std::string section, std::string key, Access access) {
    return {section, key, [access](const ExperimentConfig& c) -> std::string { return access(const_cast<ExperimentConfig&>(c)) ? "on" : "off"; },
            [access, key](ExperimentConfig& c, const std::string& v) { access(c) = parse_bool(key, v); }};
}

template <typename Access>
Field string_field(std::string section, std::string key, Access access) {
    return {section, key, [access](const ExperimentConfig& c) { return access(const_cast<ExperimentConfig&>(c)); },
            [access](ExperimentConfig& c, const std::string& v) { access(c) = v; }};
}

#define RICL_MEMBER(expr) [](ExperimentConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& registry() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back({"experiment", "method", [](const ExperimentConfig& c) { return to_string(c.method); },
                     [](ExperimentConfig& c, const std::string& v) { c.method = parse_method(v); }});
        f.push_back({"experiment", "seeds", [](const ExperimentConfig& c) { return format_list(c.seeds); },
                     [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_list<std::uint64_t>("seeds", v); }});
        f.push_back({"experiment", "task_order", [](const ExperimentConfig& c) { return format_list(c.task_order); },
                     [](ExperimentConfig& c, const std::string& v) {
                         c.task_order = parse_list<std::uint32_t>("task_order", v);
                     }});
        f.push_back(string_field("experiment", "output_dir", RICL_MEMBER(output_dir)));
        f.push_back(bool_field("experiment", "dump_stream", RICL_MEMBER(dump_stream)));
        f.push_back(bool_field("experiment", "dump_buffers", RICL_MEMBER(dump_buffers)));

        f.push_back(bool_field("ablation", "tcp", RICL_MEMBER(ablation.tcp)));
        f.push_back(bool_field("ablation", "ncl", RICL_MEMBER(ablation.ncl)));
        f.push_back(bool_field("ablation", "ipo", RICL_MEMBER(ablation.ipo)));

        f.push_back(string_field("corpus", "source", RICL_MEMBER(corpus.source)));
        f.push_back(number_field<Index>("corpus", "classes", RICL_MEMBER(corpus.classes)));
        f.push_back(number_field<Index>("corpus", "docs_per_class", RICL_MEMBER(corpus.docs_per_class)));
        f.push_back(number_field<Index>("corpus", "vocab_size", RICL_MEMBER(corpus.vocab_size)));
        f.push_back(number_field<std::uint64_t>("corpus", "seed", RICL_MEMBER(corpus.seed)));

        f.push_back(number_field<std::uint32_t>("stream", "num_tasks", RICL_MEMBER(stream.num_tasks)));
        f.push_back(number_field<std::uint32_t>("stream", "classes_per_task", RICL_MEMBER(stream.classes_per_task)));
        f.push_back(number_field<double>("stream", "blur_rate", RICL_MEMBER(stream.blur_rate)));
        f.push_back(number_field<double>("stream", "noise_rate", RICL_MEMBER(stream.noise_rate)));
        f.push_back(number_field<std::uint32_t>("stream", "delay_buffer_size", RICL_MEMBER(stream.delay_buffer_size)));
        f.push_back(number_field<double>("stream", "test_fraction", RICL_MEMBER(stream.test_fraction)));

        f.push_back(number_field<Index>("model", "hash_dim", RICL_MEMBER(shape.hash_dim)));
        f.push_back(number_field<Index>("model", "emb_dim", RICL_MEMBER(shape.emb_dim)));
        f.push_back(number_field<Index>("model", "hidden_dim", RICL_MEMBER(shape.hidden_dim)));
        f.push_back(number_field<std::uint64_t>("model", "hash_seed", RICL_MEMBER(hash_seed)));
        f.push_back(number_field<double>("model", "init_scale", RICL_MEMBER(init_scale)));

        f.push_back(number_field<std::size_t>("purifier", "epochs", RICL_MEMBER(purifier.epochs)));
        f.push_back(number_field<double>("purifier", "lr", RICL_MEMBER(purifier.lr)));
        f.push_back(number_field<double>("purifier", "q", RICL_MEMBER(purifier.q)));
        f.push_back(number_field<std::size_t>("purifier", "batch_size", RICL_MEMBER(purifier.batch_size)));

        f.push_back(number_field<double>("train", "lr_ncl", RICL_MEMBER(train.lr_ncl)));
        f.push_back(number_field<double>("train", "lr_sft", RICL_MEMBER(train.lr_sft)));
        f.push_back(number_field<double>("train", "lr_ipo", RICL_MEMBER(train.lr_ipo)));
        f.push_back(number_field<std::size_t>("train", "num_alternatives", RICL_MEMBER(train.num_alternatives)));
        f.push_back(number_field<std::size_t>("train", "batch_size", RICL_MEMBER(train.batch_size)));
        f.push_back(number_field<std::size_t>("train", "epochs", RICL_MEMBER(train.epochs)));
        f.push_back(number_field<double>("train", "replay_mix", RICL_MEMBER(train.replay_mix)));
        f.push_back(number_field<double>("train", "tau", RICL_MEMBER(train.tau)));
        f.push_back({"train", "alternative_source",
                     [](const ExperimentConfig& c) -> std::string {
                         return c.train.alternative_source == AlternativeSource::Purifier ? "purifier" : "model";
                     },
                     [](ExperimentConfig& c, const std::string& v) {
                         if (v == "purifier") c.train.alternative_source = AlternativeSource::Purifier;
                         else if (v == "model") c.train.alternative_source = AlternativeSource::Model;
                         else throw ConfigError("alternative_source", "expected purifier or model");
                     }});
        f.push_back(bool_field("train", "freeze_pairs", RICL_MEMBER(train.freeze_pairs)));

        f.push_back(number_field<double>("augment", "op_rate", RICL_MEMBER(augment.op_rate)));
        f.push_back(number_field<double>("augment", "swap_rate", RICL_MEMBER(augment.swap_rate)));
        f.push_back(number_field<double>("augment", "delete_prob", RICL_MEMBER(augment.delete_prob)));
        f.push_back(number_field<std::uint64_t>("augment", "seed", RICL_MEMBER(augment.seed)));
        f.push_back(string_field("augment", "synonyms", RICL_MEMBER(synonyms_path)));

        f.push_back(number_field<std::size_t>("buffers", "clean_partition", RICL_MEMBER(buffers.clean_partition)));
        f.push_back(number_field<std::size_t>("buffers", "noisy_partition", RICL_MEMBER(buffers.noisy_partition)));
        f.push_back(number_field<std::size_t>("buffers", "replay", RICL_MEMBER(buffers.replay)));
        f.push_back({"buffers", "eviction",
                     [](const ExperimentConfig& c) -> std::string {
                         return c.buffers.replay_policy == EvictionPolicy::Reservoir ? "reservoir" : "admission_stop";
                     },
                     [](ExperimentConfig& c, const std::string& v) {
                         if (v == "reservoir") c.buffers.replay_policy = EvictionPolicy::Reservoir;
                         else if (v == "admission_stop") c.buffers.replay_policy = EvictionPolicy::AdmissionStop;
                         else throw ConfigError("eviction", "expected reservoir or admission_stop");
                     }});
        return f;
    }();
    return fields;
}

#undef RICL_MEMBER

const std::set<std::string> kSections = {"experiment", "ablation", "corpus", "stream", "model",
                                         "purifier",   "train",    "augment", "buffers"};

// Buffer profiles are applied before any explicit [buffers] key.
void apply_profile(ExperimentConfig& cfg, const std::string& name) {
    if (name == "tacred") {
        cfg.stream.delay_buffer_size = 200;
        cfg.buffers.clean_partition = 200;
        cfg.buffers.noisy_partition = 400;
        cfg.buffers.replay = 800;
    } else if (name == "fewrel") {
        cfg.stream.delay_buffer_size = 1000;
        cfg.buffers.clean_partition = 1000;
        cfg.buffers.noisy_partition = 2000;
        cfg.buffers.replay = 4000;
    } else {
        throw ConfigError("profile", "expected tacred or fewrel, got '" + name + "'");
    }
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::Ricl: return "ricl";
        case Method::SeqFT: return "seqft";
        case Method::Er: return "er";
    }
    return "?";
}

std::string ExperimentConfig::label() const {
    if (method != Method::Ricl || ablation.all_on()) return to_string(method);
    std::string out = "ricl";
    if (!ablation.tcp) out += "-no-tcp";
    if (!ablation.ncl) out += "-no-ncl";
    if (!ablation.ipo) out += "-no-ipo";
    return out;
}

PipelineConfig ExperimentConfig::pipeline() const {
    switch (method) {
        case Method::Ricl: return {ablation.tcp, ablation.ncl, true, ablation.ipo, true};
        case Method::SeqFT: return {false, false, true, false, false};
        case Method::Er: return {false, false, true, false, true};
    }
    return {};
}

void ExperimentConfig::validate() const {
    if (method != Method::Ricl && !ablation.all_on()) {
        throw ConfigError(!ablation.tcp ? "tcp" : !ablation.ncl ? "ncl" : "ipo",
                          "ablation flags are only valid with method = ricl");
    }
    if (corpus.classes < 1) throw ConfigError("classes", "must be >= 1");
    if (corpus.docs_per_class < 1) throw ConfigError("docs_per_class", "must be >= 1");
    if (corpus.vocab_size < corpus.classes) throw ConfigError("vocab_size", "must be >= classes");
    if (corpus.source == "synthetic") stream.validate(corpus.classes);
    if (!(stream.test_fraction > 0.0)) throw ConfigError("test_fraction", "must be > 0 to evaluate tasks");
    if (shape.hash_dim < 1 || shape.hash_dim > (Index{1} << 31)) throw ConfigError("hash_dim", "out of range");
    if (shape.emb_dim < 1) throw ConfigError("emb_dim", "must be >= 1");
    if (shape.hidden_dim < 1) throw ConfigError("hidden_dim", "must be >= 1");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale", "must be >= 0");
    purifier.validate();
    train.validate();
    augment.validate();
    if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
    if (!task_order.empty()) {
        std::vector<std::uint32_t> sorted = task_order;
        std::sort(sorted.begin(), sorted.end());
        if (sorted.size() != stream.num_tasks) throw ConfigError("task_order", "must list every task exactly once");
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] != i) throw ConfigError("task_order", "is not a permutation of 0..num_tasks-1");
        }
    }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    auto aug = [](const AugmentConfig& x) { return std::tie(x.op_rate, x.swap_rate, x.delete_prob, x.num_variants, x.seed); };
    auto pur = [](const PurifierConfig& x) { return std::tie(x.epochs, x.lr, x.q, x.batch_size); };
    auto tr = [](const TrainPhaseConfig& x) {
        return std::tie(x.lr_ncl, x.lr_sft, x.lr_ipo, x.num_alternatives, x.batch_size, x.epochs, x.replay_mix, x.tau,
                        x.alternative_source, x.freeze_pairs);
    };
    auto st = [](const StreamConfig& x) {
        return std::tie(x.num_tasks, x.classes_per_task, x.blur_rate, x.noise_rate, x.delay_buffer_size, x.test_fraction,
                        x.seed);
    };
    auto buf = [](const BufferCapacities& x) {
        return std::tie(x.delay, x.clean_partition, x.noisy_partition, x.replay, x.replay_policy);
    };
    return a.method == b.method && a.ablation == b.ablation && a.corpus == b.corpus && st(a.stream) == st(b.stream) &&
           a.shape.hash_dim == b.shape.hash_dim && a.shape.emb_dim == b.shape.emb_dim &&
           a.shape.hidden_dim == b.shape.hidden_dim && a.hash_seed == b.hash_seed && a.init_scale == b.init_scale &&
           pur(a.purifier) == pur(b.purifier) && tr(a.train) == tr(b.train) && aug(a.augment) == aug(b.augment) &&
           a.synonyms_path == b.synonyms_path && buf(a.buffers) == buf(b.buffers) && a.task_order == b.task_order &&
           a.seeds == b.seeds && a.output_dir == b.output_dir && a.dump_stream == b.dump_stream &&
           a.dump_buffers == b.dump_buffers;
}

ExperimentConfig parse_config_text(const std::string& text) {
    struct Entry {
        std::string section, key, value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::string section = "experiment";
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", "line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSections.contains(section)) throw ConfigError(section, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
        }
        entries.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
    }

    ExperimentConfig cfg;
    for (const auto& e : entries) {
        if (e.section == "buffers" && e.key == "profile") apply_profile(cfg, e.value);
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : entries) {
        if (e.section == "buffers" && e.key == "profile") continue;
        if (!seen.emplace(e.section, e.key).second) throw ConfigError(e.key, "given more than once");
        const auto& fields = registry();
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](const Field& f) { return f.section == e.section && f.key == e.key; });
        if (it == fields.end()) throw ConfigError(e.key, "unknown key in [" + e.section + "]");
        it->set(cfg, e.value);
    }
    cfg.buffers.delay = cfg.stream.delay_buffer_size;
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : registry()) {
        if (f.section == "ablation" && cfg.method != Method::Ricl) continue;
        if (f.section != section) {
            section = f.section;
            out += (out.empty() ? "" : "\n") + std::string("[") + section + "]\n";
        }
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

}  // namespace ricl
