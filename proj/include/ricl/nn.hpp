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

#ifndef RICL_NN_HPP
#define RICL_NN_HPP

// Hashed n-gram text classifier: mean-pooled embedding rows, one tanh hidden
// layer and a linear head. Every tensor is a dense Eigen type templated on the
// scalar so the same code runs in double for training and in long double for
// the finite-difference checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ricl/error.hpp"
#include "ricl/log.hpp"

namespace ricl {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Tokens = std::vector<std::string>;

/// Sparse bag of hashed unigrams and bigrams. Indices are sorted and unique.
struct FeatureVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> weights;

    double total_weight() const {
        double t = 0.0;
        for (double w : weights) t += w;
        return t;
    }

    bool operator==(const FeatureVector&) const = default;
};

/// Lowercases and splits on ASCII whitespace.
Tokens tokenize(std::string_view text);

/// Unigram and bigram counts hashed into `hash_dim` buckets. Throws on empty input.
FeatureVector featurize(std::span<const std::string> tokens, std::uint32_t hash_dim,
                        std::uint64_t seed);

struct ModelShape {
    Index hash_dim = 1 << 14;
    Index emb_dim = 64;
    Index hidden_dim = 128;
    Index num_classes = 2;

    bool operator==(const ModelShape&) const = default;
};

template <typename Scalar>
struct BasicModelParams {
    RowMat<Scalar> embedding;  // hash_dim x emb_dim
    Mat<Scalar> hidden;        // emb_dim x hidden_dim
    Vec<Scalar> hidden_bias;   // hidden_dim
    Mat<Scalar> head;          // hidden_dim x num_classes
    Vec<Scalar> head_bias;     // num_classes

    static BasicModelParams zeros(const ModelShape& s) {
        BasicModelParams p;
        p.embedding = RowMat<Scalar>::Zero(s.hash_dim, s.emb_dim);
        p.hidden = Mat<Scalar>::Zero(s.emb_dim, s.hidden_dim);
        p.hidden_bias = Vec<Scalar>::Zero(s.hidden_dim);
        p.head = Mat<Scalar>::Zero(s.hidden_dim, s.num_classes);
        p.head_bias = Vec<Scalar>::Zero(s.num_classes);
        return p;
    }

    /// Every entry drawn from uniform(-scale, scale) by a seeded mt19937_64.
    static BasicModelParams uniform(const ModelShape& s, std::uint64_t seed, Scalar scale = Scalar(0.05)) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-static_cast<double>(scale), static_cast<double>(scale));
        auto fill = [&](auto& m) {
            for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
        };
        BasicModelParams p = zeros(s);
        fill(p.embedding);
        fill(p.hidden);
        fill(p.hidden_bias);
        fill(p.head);
        fill(p.head_bias);
        return p;
    }

    ModelShape shape() const {
        return {embedding.rows(), embedding.cols(), hidden.cols(), head.cols()};
    }

    void validate() const {
        require(embedding.cols() == hidden.rows() && hidden.cols() == hidden_bias.size() &&
                    hidden.cols() == head.rows() && head.cols() == head_bias.size(),
                "model parameter shapes are inconsistent");
        require(head.cols() >= 1, "model needs at least one class");
    }

    bool all_finite() const {
        return embedding.allFinite() && hidden.allFinite() && hidden_bias.allFinite() &&
               head.allFinite() && head_bias.allFinite();
    }

    template <typename Other>
    BasicModelParams<Other> cast() const {
        BasicModelParams<Other> p;
        p.embedding = embedding.template cast<Other>();
        p.hidden = hidden.template cast<Other>();
        p.hidden_bias = hidden_bias.template cast<Other>();
        p.head = head.template cast<Other>();
        p.head_bias = head_bias.template cast<Other>();
        return p;
    }
};

template <typename Scalar>
struct BasicForwardOutput {
    Vec<Scalar> logits;
    Vec<Scalar> log_probs;
    Vec<Scalar> embedding;  // unit L2 norm, or zero when the hidden layer is zero
};

/// Upstream gradients of a scalar loss w.r.t. the forward outputs. An empty
/// vector stands for a zero gradient.
template <typename Scalar>
struct BasicOutputGrads {
    Vec<Scalar> logits;
    Vec<Scalar> embedding;
};

/// Gradients w.r.t. every parameter. Embedding rows are kept sparse; a row may
/// appear more than once and contributions add.
template <typename Scalar>
struct BasicParamGrads {
    std::vector<std::uint32_t> embedding_rows;
    std::vector<Scalar> embedding_values;  // embedding_rows.size() * emb_dim, row-major
    Index emb_dim = 0;
    Mat<Scalar> hidden;
    Vec<Scalar> hidden_bias;
    Mat<Scalar> head;
    Vec<Scalar> head_bias;

    static BasicParamGrads zeros(const ModelShape& s) {
        BasicParamGrads g;
        g.emb_dim = s.emb_dim;
        g.hidden = Mat<Scalar>::Zero(s.emb_dim, s.hidden_dim);
        g.hidden_bias = Vec<Scalar>::Zero(s.hidden_dim);
        g.head = Mat<Scalar>::Zero(s.hidden_dim, s.num_classes);
        g.head_bias = Vec<Scalar>::Zero(s.num_classes);
        return g;
    }

    void add(const BasicParamGrads& o, Scalar scale = Scalar(1)) {
        require(o.emb_dim == emb_dim && o.hidden.rows() == hidden.rows() &&
                    o.hidden.cols() == hidden.cols() && o.head.cols() == head.cols(),
                "gradient shapes differ");
        embedding_rows.insert(embedding_rows.end(), o.embedding_rows.begin(), o.embedding_rows.end());
        const std::size_t offset = embedding_values.size();
        embedding_values.resize(offset + o.embedding_values.size());
        for (std::size_t i = 0; i < o.embedding_values.size(); ++i) {
            embedding_values[offset + i] = scale * o.embedding_values[i];
        }
        hidden += scale * o.hidden;
        hidden_bias += scale * o.hidden_bias;
        head += scale * o.head;
        head_bias += scale * o.head_bias;
    }

    void scale(Scalar s) {
        for (auto& v : embedding_values) v *= s;
        hidden *= s;
        hidden_bias *= s;
        head *= s;
        head_bias *= s;
    }

    RowMat<Scalar> dense_embedding(Index hash_dim) const {
        RowMat<Scalar> out = RowMat<Scalar>::Zero(hash_dim, emb_dim);
        for (std::size_t r = 0; r < embedding_rows.size(); ++r) {
            for (Index c = 0; c < emb_dim; ++c) {
                out(embedding_rows[r], c) += embedding_values[r * emb_dim + c];
            }
        }
        return out;
    }

    bool all_finite() const {
        for (const auto& v : embedding_values) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return hidden.allFinite() && hidden_bias.allFinite() && head.allFinite() && head_bias.allFinite();
    }

    bool is_zero() const {
        for (const auto& v : embedding_values) {
            if (v != Scalar(0)) return false;
        }
        return hidden.isZero(0) && hidden_bias.isZero(0) && head.isZero(0) && head_bias.isZero(0);
    }
};

using ModelParams = BasicModelParams<double>;
using ForwardOutput = BasicForwardOutput<double>;
using OutputGrads = BasicOutputGrads<double>;
using ParamGrads = BasicParamGrads<double>;

namespace detail {

template <typename Scalar>
struct ForwardTrace {
    Vec<Scalar> pooled;      // emb_dim
    Vec<Scalar> activation;  // hidden_dim
    Scalar norm{};
    BasicForwardOutput<Scalar> out;
};

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const BasicModelParams<Scalar>& params, const FeatureVector& x) {
    params.validate();
    require(x.indices.size() == x.weights.size(), "feature vector index/weight length mismatch");
    require(!x.indices.empty(), "empty feature vector");
    const Index hash_dim = params.embedding.rows();
    require(x.total_weight() > 0.0, "feature weights must be positive");

    // Sum pooling over feature counts.
    ForwardTrace<Scalar> t;
    t.pooled = Vec<Scalar>::Zero(params.embedding.cols());
    for (std::size_t i = 0; i < x.indices.size(); ++i) {
        require(static_cast<Index>(x.indices[i]) < hash_dim, "feature index exceeds hash dimension");
        t.pooled += static_cast<Scalar>(x.weights[i]) * params.embedding.row(x.indices[i]).transpose();
    }
    if (!t.pooled.allFinite() || !params.hidden.allFinite() || !params.hidden_bias.allFinite() ||
        !params.head.allFinite() || !params.head_bias.allFinite()) {
        throw Error("non-finite model parameter");
    }

    t.activation = (params.hidden.transpose() * t.pooled + params.hidden_bias).array().tanh().matrix();
    t.out.logits = params.head.transpose() * t.activation + params.head_bias;

    const Scalar peak = t.out.logits.maxCoeff();
    const Scalar lse = peak + std::log((t.out.logits.array() - peak).exp().sum());
    t.out.log_probs = t.out.logits.array() - lse;

    t.norm = t.activation.norm();
    if (t.norm > Scalar(0)) {
        t.out.embedding = t.activation / t.norm;
    } else {
        log::debug("zero hidden activation; embedding set to the zero vector");
        t.out.embedding = Vec<Scalar>::Zero(t.activation.size());
    }
    return t;
}

}  // namespace detail

template <typename Scalar>
BasicForwardOutput<Scalar> forward(const BasicModelParams<Scalar>& params, const FeatureVector& x) {
    return detail::forward_trace(params, x).out;
}

/// Index of the largest logit; ties go to the lowest index.
template <typename Derived>
Index argmax(const Eigen::MatrixBase<Derived>& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

template <typename Scalar>
BasicParamGrads<Scalar> backward(const BasicModelParams<Scalar>& params, const FeatureVector& x,
                                 const BasicOutputGrads<Scalar>& upstream) {
    const auto t = detail::forward_trace(params, x);
    const ModelShape s = params.shape();
    require(upstream.logits.size() == 0 || upstream.logits.size() == s.num_classes,
            "upstream logit gradient has wrong length");
    require(upstream.embedding.size() == 0 || upstream.embedding.size() == s.hidden_dim,
            "upstream embedding gradient has wrong length");

    auto g = BasicParamGrads<Scalar>::zeros(s);
    Vec<Scalar> d_act = Vec<Scalar>::Zero(s.hidden_dim);
    if (upstream.logits.size() != 0) {
        g.head.noalias() = t.activation * upstream.logits.transpose();
        g.head_bias = upstream.logits;
        d_act.noalias() += params.head * upstream.logits;
    }
    if (upstream.embedding.size() != 0 && t.norm > Scalar(0)) {
        const auto& u = t.out.embedding;
        d_act += (upstream.embedding - u * u.dot(upstream.embedding)) / t.norm;
    }
    const Vec<Scalar> d_pre = d_act.array() * (Scalar(1) - t.activation.array().square());
    g.hidden.noalias() = t.pooled * d_pre.transpose();
    g.hidden_bias = d_pre;
    const Vec<Scalar> d_pooled = params.hidden * d_pre;

    g.embedding_rows = x.indices;
    g.embedding_values.resize(x.indices.size() * s.emb_dim);
    for (std::size_t i = 0; i < x.indices.size(); ++i) {
        const Scalar w = static_cast<Scalar>(x.weights[i]);
        for (Index c = 0; c < s.emb_dim; ++c) {
            g.embedding_values[i * s.emb_dim + c] = w * d_pooled(c);
        }
    }
    return g;
}

/// params -= lr * grads. Throws, leaving params untouched, on non-finite grads or lr < 0.
template <typename Scalar>
void sgd_step(BasicModelParams<Scalar>& params, const BasicParamGrads<Scalar>& grads, Scalar lr) {
    require(std::isfinite(static_cast<double>(lr)) && lr >= Scalar(0), "learning rate must be finite and >= 0");
    require(grads.all_finite(), "non-finite gradient");
    const ModelShape s = params.shape();
    require(grads.emb_dim == s.emb_dim && grads.hidden.rows() == params.hidden.rows() &&
                grads.hidden.cols() == params.hidden.cols() && grads.head.cols() == params.head.cols(),
            "gradient shape does not match parameters");
    for (std::size_t r = 0; r < grads.embedding_rows.size(); ++r) {
        const auto row = grads.embedding_rows[r];
        require(static_cast<Index>(row) < s.hash_dim, "gradient row out of range");
        for (Index c = 0; c < s.emb_dim; ++c) {
            params.embedding(row, c) -= lr * grads.embedding_values[r * s.emb_dim + c];
        }
    }
    params.hidden -= lr * grads.hidden;
    params.hidden_bias -= lr * grads.hidden_bias;
    params.head -= lr * grads.head;
    params.head_bias -= lr * grads.head_bias;
}

}  // namespace ricl

#endif
