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

#ifndef RICL_LOSSES_HPP
#define RICL_LOSSES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "ricl/error.hpp"
#include "ricl/nn.hpp"

namespace ricl {

/// Loss value and its gradient. For the classification losses `grad` is taken
/// w.r.t. the logits that produced the given probabilities; for ipo_loss it is
/// w.r.t. (log_p_y, log_p_alts...).
template <typename Scalar>
struct LossValue {
    Scalar value{};
    Vec<Scalar> grad;
};

/// Contrastive loss value with gradients w.r.t. each embedding it was given.
template <typename Scalar>
struct ContrastiveLossValue {
    Scalar value{};
    Vec<Scalar> anchor_grad;
    Mat<Scalar> positive_grads;  // one column per positive
    Mat<Scalar> negative_grads;  // one column per negative
};

template <typename Scalar>
Scalar softplus(Scalar x) {
    using std::exp, std::log1p;
    return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar log_sigmoid(Scalar x) {
    return -softplus(-x);
}

template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    require(v.size() > 0, "logsumexp of an empty vector");
    const Scalar peak = v.maxCoeff();
    return peak + std::log((v.array() - peak).exp().sum());
}

template <typename Derived>
Vec<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
    return (logits.array() - logsumexp(logits)).matrix();
}

/// Chains a gradient w.r.t. log-softmax outputs back to the logits.
template <typename Derived, typename GradDerived>
Vec<typename Derived::Scalar> log_softmax_backward(const Eigen::MatrixBase<Derived>& log_probs,
                                                   const Eigen::MatrixBase<GradDerived>& grad_log_probs) {
    const auto probs = log_probs.array().exp().matrix();
    return grad_log_probs - probs * grad_log_probs.sum();
}

template <typename Derived>
LossValue<typename Derived::Scalar> cross_entropy(const Eigen::MatrixBase<Derived>& log_probs, Index y) {
    using Scalar = typename Derived::Scalar;
    require(y >= 0 && y < log_probs.size(), "cross_entropy: label out of range");
    LossValue<Scalar> out;
    out.value = -log_probs(y);
    out.grad = log_probs.array().exp().matrix();
    out.grad(y) -= Scalar(1);
    return out;
}

/// Generalized cross-entropy (1 - p_y^q) / q for q in (0, 1].
template <typename Derived>
LossValue<typename Derived::Scalar> gce_loss(const Eigen::MatrixBase<Derived>& probs, Index y,
                                             typename Derived::Scalar q) {
    using Scalar = typename Derived::Scalar;
    if (!(q > Scalar(0) && q <= Scalar(1))) throw Error("gce_loss: q must lie in (0, 1]");
    require(y >= 0 && y < probs.size(), "gce_loss: label out of range");
    require((probs.array() >= Scalar(0)).all() && std::abs(static_cast<double>(probs.sum()) - 1.0) < 1e-6,
            "gce_loss: probs is not a distribution");
    const Scalar pq = std::pow(probs(y), q);
    LossValue<Scalar> out;
    out.value = (Scalar(1) - pq) / q;
    // dL/dz_c = -p_y^q (1[c = y] - p_c)
    out.grad = pq * probs;
    out.grad(y) -= pq;
    return out;
}

/// Reference-free preference loss -sum_j log sigmoid(log_p_y - log_p_alts[j]).
template <typename Derived>
LossValue<typename Derived::Scalar> ipo_loss(typename Derived::Scalar log_p_y,
                                             const Eigen::MatrixBase<Derived>& log_p_alts) {
    using Scalar = typename Derived::Scalar;
    require(log_p_alts.size() >= 1, "ipo_loss: no alternative labels");
    require(std::isfinite(static_cast<double>(log_p_y)) && log_p_alts.allFinite(), "ipo_loss: non-finite input");
    LossValue<Scalar> out;
    out.grad = Vec<Scalar>::Zero(log_p_alts.size() + 1);
    for (Index j = 0; j < log_p_alts.size(); ++j) {
        const Scalar delta = log_p_y - log_p_alts(j);
        out.value -= log_sigmoid(delta);
        const Scalar s = sigmoid(-delta);
        out.grad(0) -= s;
        out.grad(j + 1) += s;
    }
    return out;
}

/// ipo_loss on a full log-softmax vector, gradient returned w.r.t. the logits.
template <typename Derived>
LossValue<typename Derived::Scalar> ipo_loss_logits(const Eigen::MatrixBase<Derived>& log_probs, Index y,
                                                    const std::vector<Index>& alternatives) {
    using Scalar = typename Derived::Scalar;
    require(y >= 0 && y < log_probs.size(), "ipo_loss: label out of range");
    Vec<Scalar> alts(static_cast<Index>(alternatives.size()));
    for (std::size_t j = 0; j < alternatives.size(); ++j) {
        require(alternatives[j] >= 0 && alternatives[j] < log_probs.size(), "ipo_loss: alternative out of range");
        alts(static_cast<Index>(j)) = log_probs(alternatives[j]);
    }
    auto pref = ipo_loss(log_probs(y), alts);
    Vec<Scalar> g_lp = Vec<Scalar>::Zero(log_probs.size());
    g_lp(y) += pref.grad(0);
    for (std::size_t j = 0; j < alternatives.size(); ++j) g_lp(alternatives[j]) += pref.grad(static_cast<Index>(j) + 1);
    pref.grad = log_softmax_backward(log_probs, g_lp);
    return pref;
}

/// Multi-positive InfoNCE with temperature inside the exponent. Embeddings are
/// columns and expected unit-norm or zero, so the dot product is the cosine
/// similarity (and a zero vector scores 0 against everything).
template <typename AnchorDerived, typename PosDerived, typename NegDerived>
ContrastiveLossValue<typename AnchorDerived::Scalar> ncl_loss(const Eigen::MatrixBase<AnchorDerived>& anchor,
                                                              const Eigen::MatrixBase<PosDerived>& positives,
                                                              const Eigen::MatrixBase<NegDerived>& negatives,
                                                              typename AnchorDerived::Scalar tau) {
    using Scalar = typename AnchorDerived::Scalar;
    if (positives.cols() == 0) throw Error("ncl_loss: need at least one positive");
    if (!(tau > Scalar(0))) throw Error("ncl_loss: tau must be positive");
    require(positives.rows() == anchor.size() && (negatives.cols() == 0 || negatives.rows() == anchor.size()),
            "ncl_loss: embedding dimensions differ");

    const Index k = positives.cols();
    const Index m = negatives.cols();
    Vec<Scalar> scores(k + m);
    scores.head(k) = positives.transpose() * anchor / tau;
    if (m > 0) scores.tail(m) = negatives.transpose() * anchor / tau;

    const Scalar lse_all = logsumexp(scores);
    const Scalar lse_pos = logsumexp(scores.head(k));

    ContrastiveLossValue<Scalar> out;
    out.value = lse_all - lse_pos;
    if (out.value < Scalar(0)) out.value = Scalar(0);  // rounding when m == 0

    // dL/dscore_i = softmax_all_i - 1[i positive] * softmax_pos_i
    Vec<Scalar> d_scores = (scores.array() - lse_all).exp().matrix();
    d_scores.head(k) -= (scores.head(k).array() - lse_pos).exp().matrix();
    d_scores /= tau;

    out.anchor_grad = positives * d_scores.head(k);
    if (m > 0) out.anchor_grad += negatives * d_scores.tail(m);
    out.positive_grads = anchor * d_scores.head(k).transpose();
    out.negative_grads = Mat<Scalar>(anchor.size(), m);
    if (m > 0) out.negative_grads = anchor * d_scores.tail(m).transpose();
    return out;
}

}  // namespace ricl

#endif
