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

#include "ricl/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ricl/log.hpp"

namespace ricl {
namespace {

constexpr std::uint64_t kAugmentSeedStream = 51;

std::string fixed4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

nlohmann::json buffer_state(std::size_t cycle, const Learner& learner) {
    nlohmann::json j = {{"cycle", cycle},
                        {"replay_clean", learner.replay().clean().to_json()},
                        {"replay_noisy", learner.replay().noisy().to_json()}};
    if (const auto* p = learner.purifier()) {
        j["clean_partition"] = p->clean_partition().to_json();
        j["noisy_partition"] = p->noisy_partition().to_json();
    }
    return j;
}

}  // namespace

std::string RunArtifacts::cycles_jsonl() const {
    std::string out;
    for (const auto& c : cycles) out += c.to_json().dump() + "\n";
    return out;
}

Corpus load_corpus(const ExperimentConfig& cfg) {
    if (cfg.corpus.source == "synthetic") {
        return generate_synthetic_corpus(cfg.corpus.classes, cfg.corpus.docs_per_class, cfg.corpus.vocab_size,
                                         cfg.corpus.seed);
    }
    return load_jsonl_corpus(cfg.corpus.source);
}

LearnerConfig make_learner_config(const ExperimentConfig& cfg, const Corpus& corpus) {
    LearnerConfig lc;
    lc.shape = cfg.shape;
    lc.shape.num_classes = corpus.num_classes();
    lc.featurizer = Featurizer{static_cast<std::uint32_t>(cfg.shape.hash_dim), cfg.hash_seed};
    lc.pipeline = cfg.pipeline();
    lc.purifier = cfg.purifier;
    lc.train = cfg.train;
    lc.augment = cfg.augment;
    lc.augment.synonyms = std::make_shared<SynonymTable>(
        cfg.synonyms_path.empty() ? corpus.synonyms : load_synonym_table(cfg.synonyms_path));
    lc.buffers = cfg.buffers;
    lc.buffers.delay = cfg.stream.delay_buffer_size;
    lc.init_scale = cfg.init_scale;
    return lc;
}

RunArtifacts run_single(const ExperimentConfig& cfg, const Corpus& corpus, std::uint64_t seed) {
    cfg.stream.validate(corpus.num_classes());
    StreamConfig sc = cfg.stream;
    sc.seed = seed;
    LearnerConfig lc = make_learner_config(cfg, corpus);
    lc.augment.seed = derive_seed(cfg.augment.seed, kAugmentSeedStream, seed);

    auto tasks = build_tasks(corpus, sc, lc.featurizer);
    std::vector<std::uint32_t> order = cfg.task_order;
    if (order.empty()) {
        order.resize(tasks.size());
        std::iota(order.begin(), order.end(), 0u);
    }

    std::filesystem::path dir;
    if (!cfg.output_dir.empty()) {
        dir = std::filesystem::path(cfg.output_dir) / cfg.label() / ("seed_" + std::to_string(seed));
        std::filesystem::create_directories(dir);
        if (cfg.dump_stream) write_stream_jsonl(tasks, dir / "stream.jsonl");
    }

    Stream stream(std::move(tasks), order, sc.delay_buffer_size);
    Learner learner(lc, seed);
    RunArtifacts run;
    run.seed = seed;
    run.matrix = AccuracyMatrix(order.size());
    std::string buffer_dump;
    while (!stream.exhausted()) {
        auto report = learner.process_cycle(stream);
        if (cfg.dump_buffers) buffer_dump += buffer_state(report.cycle, learner).dump() + "\n";
        if (report.closes_task) {
            const std::size_t i = report.task_position;
            for (std::size_t j = 0; j <= i; ++j) run.matrix.set(i, j, evaluate(learner.model(), stream.task_at(j).test));
            log::info(cfg.label() + " seed " + std::to_string(seed) + " after task " + std::to_string(i) +
                      ": acc on it " + fixed4(run.matrix.at(i, i)));
        }
        run.cycles.push_back(std::move(report));
    }
    run.ap = ap(run.matrix);
    run.af = run.matrix.num_tasks() >= 2 ? af(run.matrix) : 0.0;

    if (!dir.empty()) {
        write_file(dir / "accuracy_matrix.csv", run.matrix.to_csv());
        write_file(dir / "cycles.jsonl", run.cycles_jsonl());
        write_file(dir / "summary.csv", "AP,AF\n" + fixed4(run.ap) + "," + fixed4(run.af) + "\n");
        if (cfg.dump_buffers) write_file(dir / "buffers.jsonl", buffer_dump);
    }
    return run;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_corpus(cfg)); }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Corpus& corpus) {
    cfg.validate();
    ExperimentResult result;
    result.label = cfg.label();
    std::vector<double> aps, afs;
    for (auto seed : cfg.seeds) {
        try {
            result.runs.push_back(run_single(cfg, corpus, seed));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw Error(result.label + " seed " + std::to_string(seed) + ": " + e.what());
        }
        aps.push_back(result.runs.back().ap);
        afs.push_back(result.runs.back().af);
    }
    std::tie(result.ap_mean, result.ap_std) = mean_std(aps);
    std::tie(result.af_mean, result.af_std) = mean_std(afs);

    if (!cfg.output_dir.empty()) {
        const auto dir = std::filesystem::path(cfg.output_dir) / result.label;
        std::filesystem::create_directories(dir);
        std::string per_seed = "seed,AP,AF\n";
        for (const auto& r : result.runs) per_seed += std::to_string(r.seed) + "," + fixed4(r.ap) + "," + fixed4(r.af) + "\n";
        write_file(dir / "seeds.csv", per_seed);
        const auto flag = [](bool b) { return b ? "1" : "0"; };
        const auto pipe = cfg.pipeline();
        write_file(dir / "experiment_summary.csv",
                   "label,method,tcp,ncl,ipo,seeds,ap_mean,ap_std,af_mean,af_std\n" + result.label + "," +
                       to_string(cfg.method) + "," + flag(pipe.use_purifier) + "," + flag(pipe.use_ncl) + "," +
                       flag(pipe.use_ipo) + "," + std::to_string(result.runs.size()) + "," + fixed4(result.ap_mean) +
                       "," + fixed4(result.ap_std) + "," + fixed4(result.af_mean) + "," + fixed4(result.af_std) + "\n");
        write_file(dir / "config.ini", serialize_config(cfg));
    }
    return result;
}

std::vector<AblationRow> ablate(const ExperimentConfig& cfg) { return ablate(cfg, load_corpus(cfg)); }

std::vector<AblationRow> ablate(const ExperimentConfig& cfg, const Corpus& corpus) {
    if (cfg.method != Method::Ricl) throw ConfigError("method", "ablation requires method = ricl");
    const AblationFlags grid[] = {{true, true, true}, {true, true, false}, {true, false, true}, {false, true, true}};
    std::vector<AblationRow> rows;
    for (const auto& flags : grid) {
        ExperimentConfig variant = cfg;
        variant.ablation = flags;
        rows.push_back({flags, run_experiment(variant, corpus)});
    }
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        write_file(std::filesystem::path(cfg.output_dir) / "ablation.md", ablation_markdown(rows));
    }
    return rows;
}

std::string ablation_markdown(const std::vector<AblationRow>& rows) {
    std::string out = "| TCP | NCL | IPO | AP | AF |\n|:---:|:---:|:---:|---:|---:|\n";
    const auto mark = [](bool b) { return b ? "x" : " "; };
    for (const auto& r : rows) {
        out += std::string("| ") + mark(r.flags.tcp) + " | " + mark(r.flags.ncl) + " | " + mark(r.flags.ipo) + " | " +
               fixed4(r.result.ap_mean) + " ± " + fixed4(r.result.ap_std) + " | " + fixed4(r.result.af_mean) +
               " ± " + fixed4(r.result.af_std) + " |\n";
    }
    return out;
}

std::string report_markdown(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::map<std::string, std::vector<std::string>> rows;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.path().filename() != "experiment_summary.csv") continue;
        std::ifstream in(entry.path());
        std::string header, line;
        std::getline(in, header);
        if (!std::getline(in, line)) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) throw Error("malformed summary " + entry.path().string());
        rows[std::filesystem::relative(entry.path().parent_path(), dir).string()] = cells;
    }
    std::string out = "| run | method | TCP | NCL | IPO | seeds | AP | AF |\n|---|---|:---:|:---:|:---:|---:|---:|---:|\n";
    for (const auto& [name, c] : rows) {
        out += "| " + name + " | " + c[1] + " | " + c[2] + " | " + c[3] + " | " + c[4] + " | " + c[5] + " | " + c[6] +
               " ± " + c[7] + " | " + c[8] + " ± " + c[9] + " |\n";
    }
    return out;
}

}  // namespace ricl
