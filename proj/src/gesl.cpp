#include "tedl/gesl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tedl/pairwise.hpp"

namespace tedl {

namespace {

double folded(const std::vector<LabelPairWeight>& weights, const Eigen::MatrixXd& c) {
    double total = 0.0;
    for (const auto& w : weights) {
        total += w.weight * c(w.x, w.y);
    }
    return total;
}

void project(Eigen::MatrixXd& c, double& eta) {
    c = c.cwiseMax(0.0);
    c.diagonal().setZero();
    eta = std::clamp(eta, 0.0, std::log(2.0));
}

}

GeslPairs gesl_pairs(const Eigen::MatrixXd& d, const std::vector<int>& labels, int k) {
    const int m = static_cast<int>(labels.size());
    if (d.rows() != m || d.cols() != m) {
        throw std::invalid_argument("gesl_pairs: distance matrix must be m x m");
    }
    if (k < 1) {
        throw std::invalid_argument("gesl_pairs: k must be at least 1");
    }
    GeslPairs pairs;
    for (int i = 0; i < m; ++i) {
        std::vector<int> same, other;
        for (int j = 0; j < m; ++j) {
            if (j != i) {
                (labels[j] == labels[i] ? same : other).push_back(j);
            }
        }
        std::stable_sort(same.begin(), same.end(), [&](int a, int b) { return d(i, a) < d(i, b); });
        std::stable_sort(other.begin(), other.end(), [&](int a, int b) { return d(i, a) > d(i, b); });
        for (int r = 0; r < std::min<int>(k, static_cast<int>(same.size())); ++r) {
            pairs.positive.emplace_back(i, same[r]);
        }
        for (int r = 0; r < std::min<int>(k, static_cast<int>(other.size())); ++r) {
            pairs.negative.emplace_back(i, other[r]);
        }
    }
    return pairs;
}

double gesl_objective(const GeslProblem& problem, const ExplicitCostMatrix& c, double eta, double beta) {
    const double margin = std::log(2.0);
    double total = beta * c.squared_norm();
    for (const auto& w : problem.positive) {
        total += std::max(0.0, folded(w, c.entries()) - eta);
    }
    for (const auto& w : problem.negative) {
        total += std::max(0.0, margin + eta - folded(w, c.entries()));
    }
    return total;
}

GeslResult gesl_fit(const std::vector<Tree>& trees, const std::vector<int>& labels, const Alphabet& alphabet,
                    const GeslConfig& config, const Eigen::MatrixXd* d0) {
    if (trees.size() != labels.size() || trees.empty()) {
        throw std::invalid_argument("gesl_fit: need one label per tree and a non-empty training set");
    }
    if (config.beta < 0.0 || config.iterations < 0) {
        throw std::invalid_argument("gesl_fit: need beta >= 0 and iterations >= 0");
    }
    const ExplicitCostMatrix unit = ExplicitCostMatrix::unit(alphabet.size());
    Eigen::MatrixXd d = d0 ? *d0 : pairwise_ted(trees, unit);
    GeslPairs pairs = gesl_pairs(d, labels, config.k);

    GeslProblem problem;
    problem.alphabet_size = alphabet.size();
    auto fold = [&](const std::vector<std::pair<int, int>>& requests) {
        std::vector<PairContext> contexts = config.parallel
                                                ? make_contexts_parallel(trees, trees, requests, unit, ScriptPolicy::single)
                                                : make_contexts_serial(trees, trees, requests, unit, ScriptPolicy::single);
        std::vector<std::vector<LabelPairWeight>> out;
        out.reserve(contexts.size());
        for (auto& ctx : contexts) {
            out.push_back(std::move(ctx.weights));
        }
        return out;
    };
    problem.positive = fold(pairs.positive);
    problem.negative = fold(pairs.negative);

    GeslResult result;
    result.positive_pairs = problem.positive.size();
    result.negative_pairs = problem.negative.size();
    const double margin = std::log(2.0);

    Eigen::MatrixXd c = unit.entries();
    double eta = 0.5 * margin;
    Eigen::MatrixXd best_c = c;
    double best_eta = eta;
    double best = gesl_objective(problem, ExplicitCostMatrix(c), eta, config.beta);
    result.objective_trace.reserve(static_cast<size_t>(config.iterations));

    Eigen::MatrixXd grad_c(c.rows(), c.cols());
    for (int t = 0; t < config.iterations; ++t) {
        grad_c = 2.0 * config.beta * c;
        double grad_eta = 0.0;
        for (const auto& w : problem.positive) {
            if (folded(w, c) - eta > 0.0) {
                for (const auto& e : w) {
                    grad_c(e.x, e.y) += e.weight;
                }
                grad_eta -= 1.0;
            }
        }
        for (const auto& w : problem.negative) {
            if (margin + eta - folded(w, c) > 0.0) {
                for (const auto& e : w) {
                    grad_c(e.x, e.y) -= e.weight;
                }
                grad_eta += 1.0;
            }
        }
        const double step = config.step / (1.0 + t);
        c -= step * grad_c;
        eta -= step * grad_eta;
        project(c, eta);
        double value = gesl_objective(problem, ExplicitCostMatrix(c), eta, config.beta);
        if (value < best) {
            best = value;
            best_c = c;
            best_eta = eta;
        }
        result.objective_trace.push_back(best);
    }
    result.costs = ExplicitCostMatrix(best_c);
    result.eta = best_eta;
    return result;
}

}
