#include "tedl/mglvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace tedl {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double improvement_threshold = 1e-12;

double plus_ratio(double d_plus, double d_minus) {
    double s = d_plus + d_minus;
    return s > 0.0 ? d_plus / s : 0.5;
}

// Closest and second closest prototype positions among those with (same ? equal : different) class.
struct Winners {
    int first = -1, second = -1;
    double d1 = inf, d2 = inf;

    void offer(int pos, double dist) {
        if (dist < d1) {
            second = first;
            d2 = d1;
            first = pos;
            d1 = dist;
        } else if (dist < d2) {
            second = pos;
            d2 = dist;
        }
    }
    double without(int pos) const { return pos == first ? d2 : d1; }
};

struct EmState {
    std::vector<Winners> same, other;
    std::vector<double> gamma_plus, gamma_minus, log_g_plus, log_g_minus;
    double objective = 0.0;
};

EmState expectation(const Eigen::MatrixXd& d, const std::vector<int>& labels, const PrototypeModel& model) {
    const size_t m = labels.size();
    EmState s;
    s.same.resize(m);
    s.other.resize(m);
    s.gamma_plus.resize(m);
    s.gamma_minus.resize(m);
    s.log_g_plus.resize(m);
    s.log_g_minus.resize(m);
    for (size_t i = 0; i < m; ++i) {
        for (size_t k = 0; k < model.size(); ++k) {
            double dist = d(static_cast<Eigen::Index>(i), model.prototypes[k]);
            (model.classes[k] == labels[i] ? s.same[i] : s.other[i]).offer(static_cast<int>(k), dist);
        }
        double r = plus_ratio(s.same[i].d1, s.other[i].d1);
        double gp = 2.0 - r, gm = 3.0 - r;
        s.gamma_plus[i] = gp / (gp + gm);
        s.gamma_minus[i] = gm / (gp + gm);
        s.log_g_plus[i] = std::log(gp);
        s.log_g_minus[i] = std::log(gm);
        s.objective += std::log(gp + gm);
    }
    return s;
}

std::vector<int> distinct_classes(const std::vector<int>& labels) {
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

bool valid_init(const PrototypeModel& init, const std::vector<int>& labels) {
    if (init.prototypes.empty() || init.prototypes.size() != init.classes.size()) {
        return false;
    }
    std::vector<int> seen;
    for (size_t k = 0; k < init.size(); ++k) {
        int p = init.prototypes[k];
        if (p < 0 || p >= static_cast<int>(labels.size()) || labels[p] != init.classes[k]) {
            return false;
        }
        seen.push_back(labels[p]);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    return seen == distinct_classes(labels);
}

}

double glvq_mu(double d_plus, double d_minus) {
    double s = d_plus + d_minus;
    return s > 0.0 ? (d_plus - d_minus) / s : 0.0;
}

GlvqState glvq_state(const Eigen::MatrixXd& d_to_prototypes, const std::vector<int>& labels, const PrototypeModel& model) {
    const size_t m = labels.size();
    if (static_cast<size_t>(d_to_prototypes.rows()) != m || static_cast<size_t>(d_to_prototypes.cols()) != model.size()) {
        throw std::invalid_argument("glvq_state: distance matrix must be examples x prototypes");
    }
    GlvqState s;
    s.d_plus.resize(m);
    s.d_minus.resize(m);
    s.mu.resize(m);
    s.w_plus.assign(m, -1);
    s.w_minus.assign(m, -1);
    for (size_t i = 0; i < m; ++i) {
        Winners same, other;
        for (size_t k = 0; k < model.size(); ++k) {
            double dist = d_to_prototypes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            (model.classes[k] == labels[i] ? same : other).offer(static_cast<int>(k), dist);
        }
        if (same.first < 0 || other.first < 0) {
            throw std::invalid_argument("glvq_state: every example needs a prototype of its own and of another class");
        }
        s.w_plus[i] = same.first;
        s.w_minus[i] = other.first;
        s.d_plus(i) = same.d1;
        s.d_minus(i) = other.d1;
        s.mu(i) = glvq_mu(same.d1, other.d1);
        s.degenerate += same.d1 + other.d1 <= 0.0;
    }
    if (s.degenerate > 0) {
        spdlog::warn("glvq: {} example(s) at distance 0 from prototypes of both classes, mu set to 0", s.degenerate);
    }
    return s;
}

double glvq_loss(const GlvqState& state) {
    return (4.0 + state.mu.array()).log().sum();
}

double em_objective(const GlvqState& state) {
    return (4.0 - state.mu.array()).log().sum();
}

MglvqFit median_glvq_fit(const Eigen::MatrixXd& d, const std::vector<int>& labels, const MglvqOptions& options) {
    const size_t m = labels.size();
    if (d.rows() != d.cols() || static_cast<size_t>(d.rows()) != m) {
        throw std::invalid_argument("median_glvq_fit: distance matrix must be m x m for m labels");
    }
    if (options.k < 1) {
        throw std::invalid_argument("median_glvq_fit: k must be at least 1");
    }
    const std::vector<int> classes = distinct_classes(labels);
    if (classes.size() < 2) {
        throw std::invalid_argument("median_glvq_fit: need at least two classes");
    }
    std::map<int, std::vector<int>> members;
    for (size_t i = 0; i < m; ++i) {
        members[labels[i]].push_back(static_cast<int>(i));
    }

    MglvqFit fit;
    if (options.init && valid_init(*options.init, labels)) {
        fit.model = *options.init;
    } else {
        std::mt19937_64 rng(options.seed);
        for (int c : classes) {
            std::vector<int> pool = members[c];
            int k = options.k;
            if (static_cast<int>(pool.size()) < k) {
                spdlog::warn("median_glvq_fit: class {} has {} member(s), using k = {}", c, pool.size(), pool.size());
                k = static_cast<int>(pool.size());
            }
            std::shuffle(pool.begin(), pool.end(), rng);
            pool.resize(k);
            std::sort(pool.begin(), pool.end());
            for (int p : pool) {
                fit.model.prototypes.push_back(p);
                fit.model.classes.push_back(c);
            }
        }
    }

    PrototypeModel& model = fit.model;
    const size_t count = model.size();
    std::vector<char> is_prototype(m, 0);
    for (int p : model.prototypes) {
        is_prototype[p] = 1;
    }

    EmState em = expectation(d, labels, model);
    fit.objective_trace.push_back(em.objective);

    auto gain = [&](size_t pos, int candidate) {
        double total = 0.0;
        const int c = model.classes[pos];
        for (size_t i = 0; i < m; ++i) {
            const double dist = d(static_cast<Eigen::Index>(i), candidate);
            double dp = em.same[i].d1, dm = em.other[i].d1;
            if (labels[i] == c) {
                dp = std::min(dist, em.same[i].without(static_cast<int>(pos)));
            } else {
                dm = std::min(dist, em.other[i].without(static_cast<int>(pos)));
            }
            if (dp == em.same[i].d1 && dm == em.other[i].d1) {
                continue;
            }
            double r = plus_ratio(dp, dm);
            total += em.gamma_plus[i] * (std::log(2.0 - r) - em.log_g_plus[i]) +
                     em.gamma_minus[i] * (std::log(3.0 - r) - em.log_g_minus[i]);
        }
        return total;
    };

    size_t pos = 0, idle = 0;
    while (idle < count && fit.swaps < options.max_swaps) {
        bool accepted = false;
        for (int candidate : members[model.classes[pos]]) {
            if (is_prototype[candidate]) {
                continue;
            }
            if (gain(pos, candidate) > improvement_threshold) {
                is_prototype[model.prototypes[pos]] = 0;
                is_prototype[candidate] = 1;
                model.prototypes[pos] = candidate;
                ++fit.swaps;
                double before = em.objective;
                em = expectation(d, labels, model);
                if (em.objective < before - 1e-9) {
                    throw std::logic_error("median_glvq_fit: EM objective decreased after an accepted swap");
                }
                fit.objective_trace.push_back(em.objective);
                accepted = true;
                break;
            }
        }
        if (accepted) {
            idle = 0;
        } else {
            ++idle;
            pos = (pos + 1) % count;
        }
    }

    fit.training_error = error_rate(classify_nearest_prototype(prototype_columns(d, model), model), labels);
    return fit;
}

std::vector<int> classify_nearest_prototype(const Eigen::MatrixXd& d_to_prototypes, const PrototypeModel& model) {
    if (static_cast<size_t>(d_to_prototypes.cols()) != model.size() || model.size() == 0) {
        throw std::invalid_argument("classify_nearest_prototype: need one column per prototype");
    }
    std::vector<int> out(static_cast<size_t>(d_to_prototypes.rows()));
    for (Eigen::Index i = 0; i < d_to_prototypes.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < d_to_prototypes.cols(); ++k) {
            if (d_to_prototypes(i, k) < d_to_prototypes(i, best)) {
                best = k;
            }
        }
        out[static_cast<size_t>(i)] = model.classes[static_cast<size_t>(best)];
    }
    return out;
}

Eigen::MatrixXd prototype_columns(const Eigen::MatrixXd& d, const PrototypeModel& model) {
    Eigen::MatrixXd out(d.rows(), static_cast<Eigen::Index>(model.size()));
    for (size_t k = 0; k < model.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = d.col(model.prototypes[k]);
    }
    return out;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("error_rate: size mismatch");
    }
    if (truth.empty()) {
        return 0.0;
    }
    size_t wrong = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        wrong += predicted[i] != truth[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}
