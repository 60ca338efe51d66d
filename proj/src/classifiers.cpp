#include "tedl/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tedl {

std::vector<int> knn_classify(const Eigen::MatrixXd& d_test_train, const std::vector<int>& train_labels, int k) {
    const Eigen::Index m = d_test_train.cols();
    if (static_cast<size_t>(m) != train_labels.size()) {
        throw std::invalid_argument("knn_classify: one label per training column required");
    }
    if (k < 1 || k > m) {
        throw std::invalid_argument("knn_classify: need 1 <= k <= number of training points");
    }
    std::vector<int> out(static_cast<size_t>(d_test_train.rows()));
    std::vector<int> order(static_cast<size_t>(m));
    for (Eigen::Index t = 0; t < d_test_train.rows(); ++t) {
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            double da = d_test_train(t, a), db = d_test_train(t, b);
            return da < db || (da == db && a < b);
        });
        std::map<int, std::pair<int, double>> votes;   // class -> (count, summed distance)
        for (int r = 0; r < k; ++r) {
            auto& v = votes[train_labels[order[r]]];
            v.first += 1;
            v.second += d_test_train(t, order[r]);
        }
        auto best = votes.begin();
        for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
            if (it->second.first > best->second.first ||
                (it->second.first == best->second.first && it->second.second < best->second.second)) {
                best = it;
            }
        }
        out[static_cast<size_t>(t)] = best->first;
    }
    return out;
}

Eigen::MatrixXd goodness_similarity(const Eigen::MatrixXd& d) {
    return (2.0 * (-d.array()).exp() - 1.0).matrix();
}

double goodness_objective(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& signs, const Eigen::VectorXd& alpha,
                          double lambda) {
    Eigen::VectorXd margins = signs.cwiseProduct(k_train * alpha);
    return (1.0 - margins.array()).max(0.0).sum() + lambda * alpha.lpNorm<1>();
}

namespace {

Eigen::VectorXd solve_binary(const Eigen::MatrixXd& k, const Eigen::VectorXd& signs, double lambda,
                             const GoodnessOptions& options, double& objective) {
    const Eigen::Index m = k.cols();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd average = alpha;
    Eigen::VectorXd best = alpha;
    double best_value = goodness_objective(k, signs, alpha, lambda);
    Eigen::VectorXd grad(m);
    const double scale = options.step / std::max(k.rowwise().norm().maxCoeff(), 1e-12);
    for (int t = 0; t < options.iterations; ++t) {
        Eigen::VectorXd margins = signs.cwiseProduct(k * alpha);
        grad.setZero();
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            if (margins(i) < 1.0) {
                grad -= signs(i) * k.row(i).transpose();
            }
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            if (alpha(j) > 0.0) {
                grad(j) += lambda;
            } else if (alpha(j) < 0.0) {
                grad(j) -= lambda;
            } else {
                // minimal-norm element of the subdifferential at zero
                grad(j) = grad(j) > lambda ? grad(j) - lambda : (grad(j) < -lambda ? grad(j) + lambda : 0.0);
            }
        }
        double norm = grad.norm();
        if (norm == 0.0) {
            break;
        }
        alpha -= (scale / std::sqrt(t + 1.0)) * grad / norm;
        average += (alpha - average) / (t + 1.0);
        double value = goodness_objective(k, signs, alpha, lambda);
        if (value < best_value) {
            best_value = value;
            best = alpha;
        }
    }
    double average_value = goodness_objective(k, signs, average, lambda);
    if (average_value <= best_value) {
        objective = average_value;
        return average;
    }
    objective = best_value;
    return best;
}

}

GoodnessModel goodness_fit_similarity(const Eigen::MatrixXd& k_train, const std::vector<int>& labels, double lambda,
                                      const GoodnessOptions& options) {
    if (k_train.rows() != k_train.cols() || static_cast<size_t>(k_train.rows()) != labels.size()) {
        throw std::invalid_argument("goodness_fit: similarity matrix must be m x m for m labels");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("goodness_fit: lambda must be non-negative");
    }
    GoodnessModel model;
    model.lambda = lambda;
    model.classes = labels;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2) {
        throw std::invalid_argument("goodness_fit: need at least two classes");
    }
    const size_t problems = model.binary() ? 1 : model.classes.size();
    model.alpha.resize(k_train.cols(), static_cast<Eigen::Index>(problems));
    for (size_t p = 0; p < problems; ++p) {
        Eigen::VectorXd signs(k_train.rows());
        for (size_t i = 0; i < labels.size(); ++i) {
            signs(static_cast<Eigen::Index>(i)) = labels[i] == model.classes[p] ? 1.0 : -1.0;
        }
        double value = 0.0;
        model.alpha.col(static_cast<Eigen::Index>(p)) = solve_binary(k_train, signs, lambda, options, value);
        model.objective.push_back(value);
    }
    return model;
}

GoodnessModel goodness_fit(const Eigen::MatrixXd& d_train, const std::vector<int>& labels, double lambda,
                           const GoodnessOptions& options) {
    return goodness_fit_similarity(goodness_similarity(d_train), labels, lambda, options);
}

std::vector<int> goodness_predict(const GoodnessModel& model, const Eigen::MatrixXd& k_test_train) {
    if (k_test_train.cols() != model.alpha.rows()) {
        throw std::invalid_argument("goodness_predict: one similarity column per training point required");
    }
    Eigen::MatrixXd scores = k_test_train * model.alpha;
    std::vector<int> out(static_cast<size_t>(scores.rows()));
    for (Eigen::Index t = 0; t < scores.rows(); ++t) {
        if (model.binary()) {
            out[static_cast<size_t>(t)] = scores(t, 0) >= 0.0 ? model.classes[0] : model.classes[1];
        } else {
            Eigen::Index best = 0;
            for (Eigen::Index p = 1; p < scores.cols(); ++p) {
                if (scores(t, p) > scores(t, best)) {
                    best = p;
                }
            }
            out[static_cast<size_t>(t)] = model.classes[static_cast<size_t>(best)];
        }
    }
    return out;
}

}
