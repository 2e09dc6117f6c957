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

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ricl/augment.hpp"
#include "ricl/experiment.hpp"
#include "ricl/log.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void print_result(const ricl::ExperimentResult& r) {
    std::printf("%s: AP %.2f ± %.2f, AF %.2f ± %.2f over %zu seed(s)\n", r.label.c_str(), r.ap_mean, r.ap_std,
                r.af_mean, r.af_std, r.runs.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive continual learning from noisy feedback: simulator and experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run one method over all configured seeds");
    run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "Run only this seed");
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");

    auto* abl = app.add_subcommand("ablate", "Run the TCP/NCL/IPO ablation grid");
    abl->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    abl->add_option("--out", out_dir, "Output directory (overrides output_dir)");

    ricl::Index classes = 20;
    ricl::Index per_class = 300;
    ricl::Index vocab = 4000;
    std::uint64_t corpus_seed = 7;
    std::string corpus_out;
    auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic JSONL corpus and its synonym table");
    gen->add_option("--classes", classes, "Number of classes")->required();
    gen->add_option("--per-class", per_class, "Documents per class")->required();
    gen->add_option("--vocab", vocab, "Vocabulary size");
    gen->add_option("--seed", corpus_seed, "Generator seed");
    gen->add_option("--out", corpus_out, "Output JSONL path")->required();

    std::string report_dir;
    auto* rep = app.add_subcommand("report", "Markdown table of AP/AF for every run below a directory");
    rep->add_option("--dir", report_dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run || *abl) {
            auto cfg = ricl::parse_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (*run) {
                if (*seed_opt) cfg.seeds = {seed};
                print_result(ricl::run_experiment(cfg));
            } else {
                const auto rows = ricl::ablate(cfg);
                std::cout << ricl::ablation_markdown(rows);
            }
        } else if (*gen) {
            const auto corpus = ricl::generate_synthetic_corpus(classes, per_class, vocab, corpus_seed);
            ricl::write_jsonl_corpus(corpus, corpus_out);
            ricl::write_synonym_table(corpus.synonyms, corpus_out + ".synonyms.tsv");
            std::printf("wrote %zu documents over %ld classes to %s\n", corpus.docs.size(),
                        static_cast<long>(corpus.num_classes()), corpus_out.c_str());
        } else if (*rep) {
            std::cout << ricl::report_markdown(report_dir);
        }
    } catch (const ricl::ConfigError& e) {
        ricl::log::error(e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        ricl::log::error(e.what());
        return kExitRuntime;
    }
    return 0;
}
