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

#ifndef RICL_METRICS_HPP
#define RICL_METRICS_HPP

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "ricl/nn.hpp"
#include "ricl/stream.hpp"

namespace ricl {

/// m(i, j): accuracy (percent) on the j-th trained task after training through
/// the i-th. Entries above the diagonal are unused and stay NaN.
class AccuracyMatrix {
public:
    explicit AccuracyMatrix(std::size_t num_tasks = 0)
        : m_(Mat<double>::Constant(static_cast<Index>(num_tasks), static_cast<Index>(num_tasks),
                                   std::numeric_limits<double>::quiet_NaN())) {}

    static AccuracyMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t num_tasks() const { return static_cast<std::size_t>(m_.rows()); }
    void set(std::size_t after_task, std::size_t task, double accuracy);
    double at(std::size_t after_task, std::size_t task) const { return m_(after_task, task); }
    bool has(std::size_t after_task, std::size_t task) const { return !std::isnan(at(after_task, task)); }

    /// Rows = after-task index, columns = task index, blank cells above the diagonal.
    std::string to_csv() const;

private:
    Mat<double> m_;
};

/// 100 * fraction of samples whose argmax equals y_true.
double evaluate(const ModelParams& params, std::span<const Sample> split);

/// Mean of the final row.
double ap(const AccuracyMatrix& m);

/// Mean over i < M of m(i, i) - m(M, i). Not clamped.
double af(const AccuracyMatrix& m);

}  // namespace ricl

#endif
