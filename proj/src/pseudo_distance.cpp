#include "tedl/pseudo_distance.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "tedl/ted.hpp"

namespace tedl {

PairContext::PairContext(const Tree& tx, const Tree& ty, ScriptSummary s, Label gap)
    : PairContext(preorder(tx), preorder(ty), std::move(s), gap) {}

PairContext::PairContext(PreorderView px, PreorderView py, ScriptSummary s, Label gap)
    : x(std::move(px)), y(std::move(py)), summary(std::move(s)) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());
    if (summary.P.rows() != n + 1 || summary.P.cols() != m + 1) {
        throw std::invalid_argument("script summary is " + std::to_string(summary.P.rows()) + "x" +
                                    std::to_string(summary.P.cols()) + " but the trees need " +
                                    std::to_string(n + 1) + "x" + std::to_string(m + 1));
    }
    std::map<std::pair<Label, Label>, double> folded;
    for (Eigen::Index i = 0; i <= n; ++i) {
        Label li = i < n ? x.labels[i] : gap;
        for (Eigen::Index j = 0; j <= m; ++j) {
            if (summary.P(i, j) != 0.0) {
                Label lj = j < m ? y.labels[j] : gap;
                folded[{li, lj}] += summary.P(i, j);
            }
        }
    }
    weights.reserve(folded.size());
    for (auto& [key, w] : folded) {
        weights.push_back({key.first, key.second, w});
    }
}

PairContext make_context(const Tree& x, const Tree& y, const CostModel& c0, ScriptPolicy policy) {
    DistanceResult dp = ted(x, y, c0);
    ScriptSummary s = policy == ScriptPolicy::average ? coopt_average(x, y, c0, dp) : single_backtrace(x, y, c0, dp);
    return PairContext(x, y, std::move(s), c0.gap());
}

namespace {

void check_alphabet(const PairContext& ctx, const CostModel& c) {
    for (const auto& w : ctx.weights) {
        if (w.x > c.gap() || w.y > c.gap()) {
            throw std::invalid_argument("pair context uses labels outside the cost model's alphabet");
        }
    }
}

}

double pseudo_distance(const PairContext& ctx, const CostModel& c) {
    check_alphabet(ctx, c);
    double total = 0.0;
    for (const auto& w : ctx.weights) {
        total += w.weight * c.cost(w.x, w.y);
    }
    return total;
}

Eigen::MatrixXd pseudo_distance_grad_matrix(const PairContext& ctx, const ExplicitCostMatrix& c) {
    check_alphabet(ctx, c);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(c.entries().rows(), c.entries().cols());
    for (const auto& w : ctx.weights) {
        if (w.x != c.gap() || w.y != c.gap()) {
            grad(w.x, w.y) += w.weight;
        }
    }
    return grad;
}

Eigen::VectorXd pseudo_distance_grad_embedding(const PairContext& ctx, const EmbeddingCostModel& model, Label label) {
    const Eigen::MatrixXd& P = ctx.summary.P;
    const auto n = static_cast<Eigen::Index>(ctx.x.size());
    const auto m = static_cast<Eigen::Index>(ctx.y.size());
    const Label gap = model.gap();
    Eigen::VectorXd a = model.vector(label);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.dimension());

    auto add_direction = [&](double weight, Label other) {
        if (weight == 0.0) {
            return;
        }
        Eigen::VectorXd diff = a - model.vector(other);
        double norm = diff.norm();
        if (norm >= 1e-12) {
            grad += weight * diff / norm;
        }
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ctx.x.labels[i] != label) {
            continue;
        }
        for (Eigen::Index j = 0; j <= m; ++j) {
            add_direction(P(i, j), j < m ? ctx.y.labels[j] : gap);
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        if (ctx.y.labels[j] != label) {
            continue;
        }
        for (Eigen::Index i = 0; i <= n; ++i) {
            add_direction(P(i, j), i < n ? ctx.x.labels[i] : gap);
        }
    }
    return grad;
}

Eigen::MatrixXd pseudo_distance_grad_embedding(const PairContext& ctx, const EmbeddingCostModel& model) {
    Eigen::MatrixXd grad(model.dimension(), model.alphabet_size());
    for (Label u = 0; u < model.gap(); ++u) {
        grad.col(u) = pseudo_distance_grad_embedding(ctx, model, u);
    }
    return grad;
}

std::vector<double> pseudo_distance_gradient(const PairContext& ctx, const CostModel& c) {
    check_alphabet(ctx, c);
    std::vector<double> grad(c.num_parameters(), 0.0);
    for (const auto& w : ctx.weights) {
        c.accumulate_gradient(w.x, w.y, w.weight, grad);
    }
    return grad;
}

}
