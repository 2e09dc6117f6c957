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

#include "ricl/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace ricl {

AccuracyMatrix AccuracyMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    AccuracyMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() <= rows.size(), "accuracy row longer than the number of tasks");
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (!std::isnan(rows[i][j])) m.set(i, j, rows[i][j]);
        }
    }
    return m;
}

void AccuracyMatrix::set(std::size_t after_task, std::size_t task, double accuracy) {
    require(after_task < num_tasks() && task < num_tasks(), "accuracy matrix index out of range");
    require(accuracy >= 0.0 && accuracy <= 100.0, "accuracy must lie in [0, 100]");
    m_(static_cast<Index>(after_task), static_cast<Index>(task)) = accuracy;
}

std::string AccuracyMatrix::to_csv() const {
    std::ostringstream out;
    out << "after_task";
    for (std::size_t j = 0; j < num_tasks(); ++j) out << ",task_" << j;
    out << '\n';
    char cell[32];
    for (std::size_t i = 0; i < num_tasks(); ++i) {
        out << i;
        for (std::size_t j = 0; j < num_tasks(); ++j) {
            out << ',';
            if (has(i, j)) {
                std::snprintf(cell, sizeof cell, "%.4f", at(i, j));
                out << cell;
            }
        }
        out << '\n';
    }
    return out.str();
}

double evaluate(const ModelParams& params, std::span<const Sample> split) {
    require(!split.empty(), "evaluate: empty split");
    std::size_t correct = 0;
    for (const auto& s : split) {
        if (argmax(forward(params, s.features).logits) == s.y_true) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(split.size());
}

double ap(const AccuracyMatrix& m) {
    require(m.num_tasks() >= 1, "ap: empty matrix");
    const std::size_t last = m.num_tasks() - 1;
    double sum = 0.0;
    for (std::size_t j = 0; j <= last; ++j) {
        require(m.has(last, j), "ap: final row is incomplete");
        sum += m.at(last, j);
    }
    return sum / static_cast<double>(m.num_tasks());
}

double af(const AccuracyMatrix& m) {
    require(m.num_tasks() >= 2, "af: needs at least two tasks");
    const std::size_t last = m.num_tasks() - 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < last; ++i) {
        require(m.has(i, i) && m.has(last, i), "af: missing diagonal or final-row entry");
        sum += m.at(i, i) - m.at(last, i);
    }
    return sum / static_cast<double>(last);
}

}  // namespace ricl
