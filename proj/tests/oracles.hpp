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


// Independent reference implementations used as test oracles. None of them
// call into the library's numeric kernels.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ricl/nn.hpp"
#include "ricl/stream.hpp"

namespace oracle {

// Plain nested loops over the parameter arrays.
struct Forward {
    std::vector<long double> logits;
    std::vector<long double> log_probs;
    std::vector<long double> embedding;
};

template <typename Scalar>
Forward straight_line_forward(const ricl::BasicModelParams<Scalar>& p, const ricl::FeatureVector& x) {
    const auto E = p.embedding.cols();
    const auto H = p.hidden.cols();
    const auto C = p.head.cols();
    std::vector<long double> pooled(E, 0.0L);
    for (std::size_t i = 0; i < x.indices.size(); ++i) {
        for (Eigen::Index c = 0; c < E; ++c) {
            pooled[c] += static_cast<long double>(x.weights[i]) * static_cast<long double>(p.embedding(x.indices[i], c));
        }
    }
    std::vector<long double> act(H);
    for (Eigen::Index h = 0; h < H; ++h) {
        long double z = p.hidden_bias(h);
        for (Eigen::Index c = 0; c < E; ++c) z += pooled[c] * static_cast<long double>(p.hidden(c, h));
        act[h] = std::tanh(z);
    }
    Forward out;
    out.logits.assign(C, 0.0L);
    for (Eigen::Index k = 0; k < C; ++k) {
        long double z = p.head_bias(k);
        for (Eigen::Index h = 0; h < H; ++h) z += act[h] * static_cast<long double>(p.head(h, k));
        out.logits[k] = z;
    }
    long double m = out.logits[0];
    for (auto v : out.logits) m = std::max(m, v);
    long double s = 0.0L;
    for (auto v : out.logits) s += std::exp(v - m);
    for (auto v : out.logits) out.log_probs.push_back(v - m - std::log(s));
    long double n2 = 0.0L;
    for (auto a : act) n2 += a * a;
    const long double n = std::sqrt(n2);
    for (auto a : act) out.embedding.push_back(n > 0 ? a / n : 0.0L);
    return out;
}

// Central difference of f at x along coordinate i.
inline long double central_difference(const std::function<long double(const std::vector<long double>&)>& f,
                                      std::vector<long double> x, std::size_t i, long double h) {
    const long double x0 = x[i];
    x[i] = x0 + h;
    const long double up = f(x);
    x[i] = x0 - h;
    const long double down = f(x);
    return (up - down) / (2 * h);
}

inline double relative_error(long double analytic, long double numeric) {
    return static_cast<double>(std::fabs(analytic - numeric) / (std::fabs(numeric) + 1e-8L));
}

// Coordinates of every parameter tensor, visited in a fixed order.
template <typename Scalar>
std::vector<Scalar*> parameter_slots(ricl::BasicModelParams<Scalar>& p, const std::vector<std::uint32_t>& rows) {
    std::vector<Scalar*> slots;
    for (auto r : rows) {
        for (Eigen::Index c = 0; c < p.embedding.cols(); ++c) slots.push_back(&p.embedding(r, c));
    }
    for (Eigen::Index i = 0; i < p.hidden.size(); ++i) slots.push_back(p.hidden.data() + i);
    for (Eigen::Index i = 0; i < p.hidden_bias.size(); ++i) slots.push_back(p.hidden_bias.data() + i);
    for (Eigen::Index i = 0; i < p.head.size(); ++i) slots.push_back(p.head.data() + i);
    for (Eigen::Index i = 0; i < p.head_bias.size(); ++i) slots.push_back(p.head_bias.data() + i);
    return slots;
}

template <typename Scalar>
std::vector<Scalar> gradient_slots(const ricl::BasicParamGrads<Scalar>& g, const std::vector<std::uint32_t>& rows,
                                   Eigen::Index hash_dim) {
    const auto dense = g.dense_embedding(hash_dim);
    std::vector<Scalar> out;
    for (auto r : rows) {
        for (Eigen::Index c = 0; c < dense.cols(); ++c) out.push_back(dense(r, c));
    }
    for (Eigen::Index i = 0; i < g.hidden.size(); ++i) out.push_back(g.hidden.data()[i]);
    for (Eigen::Index i = 0; i < g.hidden_bias.size(); ++i) out.push_back(g.hidden_bias.data()[i]);
    for (Eigen::Index i = 0; i < g.head.size(); ++i) out.push_back(g.head.data()[i]);
    for (Eigen::Index i = 0; i < g.head_bias.size(); ++i) out.push_back(g.head_bias.data()[i]);
    return out;
}

// Textbook InfoNCE with a single positive, written from the formula.
inline long double info_nce(const std::vector<long double>& a, const std::vector<long double>& pos,
                            const std::vector<std::vector<long double>>& negs, long double tau) {
    auto dot = [](const std::vector<long double>& u, const std::vector<long double>& v) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    };
    const long double num = std::exp(dot(a, pos) / tau);
    long double den = num;
    for (const auto& z : negs) den += std::exp(dot(a, z) / tau);
    return -std::log(num / den);
}

// Multinomial naive Bayes with add-one smoothing over raw tokens.
class NaiveBayes {
public:
    explicit NaiveBayes(ricl::Index num_classes) : counts_(num_classes), totals_(num_classes, 0.0), priors_(num_classes, 0.0) {}

    void fit(const std::vector<ricl::LabeledDoc>& docs) {
        for (const auto& d : docs) {
            priors_[d.label] += 1.0;
            for (const auto& t : d.tokens) {
                counts_[d.label][t] += 1.0;
                totals_[d.label] += 1.0;
                vocab_[t] = true;
            }
        }
        n_ += docs.size();
    }

    ricl::Index predict(const ricl::Tokens& tokens) const {
        ricl::Index best = 0;
        double best_score = -1e300;
        const double v = static_cast<double>(vocab_.size());
        for (std::size_t c = 0; c < counts_.size(); ++c) {
            double score = std::log((priors_[c] + 1.0) / (static_cast<double>(n_) + static_cast<double>(counts_.size())));
            for (const auto& t : tokens) {
                auto it = counts_[c].find(t);
                const double k = it == counts_[c].end() ? 0.0 : it->second;
                score += std::log((k + 1.0) / (totals_[c] + v));
            }
            if (score > best_score) {
                best_score = score;
                best = static_cast<ricl::Index>(c);
            }
        }
        return best;
    }

private:
    std::vector<std::map<std::string, double>> counts_;
    std::vector<double> totals_;
    std::vector<double> priors_;
    std::map<std::string, bool> vocab_;
    std::size_t n_ = 0;
};

}  // namespace oracle
