#include "tedl/bedl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "tedl/lbfgs.hpp"
#include "tedl/pairwise.hpp"

namespace tedl {

namespace {

constexpr double eigenvalue_floor = 1e-12;
constexpr double phase_improvement = 1e-9;

void check_labels(const std::vector<Tree>& trees, const std::vector<int>& labels) {
    if (trees.empty()) {
        throw std::invalid_argument("bedl: empty training set");
    }
    if (trees.size() != labels.size()) {
        throw std::invalid_argument("bedl: one label per tree required");
    }
    for (int l : labels) {
        if (l != labels.front()) {
            return;
        }
    }
    throw std::invalid_argument("bedl: need at least two classes");
}

}

TrainingPairSet build_training_pairs(const std::vector<Tree>& trees, const std::vector<int>& labels,
                                     const Eigen::MatrixXd& d, const PrototypeModel& model, const CostModel& reference,
                                     ScriptPolicy policy, bool parallel) {
    GlvqState state = glvq_state(prototype_columns(d, model), labels, model);
    TrainingPairSet pairs;
    const size_t m = labels.size();
    std::vector<std::pair<int, int>> requests;
    requests.reserve(2 * m);
    for (size_t i = 0; i < m; ++i) {
        pairs.w_plus.push_back(model.prototypes[state.w_plus[i]]);
        pairs.w_minus.push_back(model.prototypes[state.w_minus[i]]);
        requests.emplace_back(static_cast<int>(i), pairs.w_plus.back());
        requests.emplace_back(static_cast<int>(i), pairs.w_minus.back());
    }
    std::vector<PairContext> contexts = parallel ? make_contexts_parallel(trees, trees, requests, reference, policy)
                                                 : make_contexts_serial(trees, trees, requests, reference, policy);
    pairs.plus.reserve(m);
    pairs.minus.reserve(m);
    for (size_t i = 0; i < m; ++i) {
        pairs.plus.push_back(std::move(contexts[2 * i]));
        pairs.minus.push_back(std::move(contexts[2 * i + 1]));
    }
    return pairs;
}

GlvqGradient glvq_metric_gradient(const TrainingPairSet& pairs, const CostModel& c, bool parallel) {
    const long m = static_cast<long>(pairs.size());
    std::vector<double> d_plus(m), d_minus(m);
#pragma omp parallel for if (parallel) schedule(static)
    for (long i = 0; i < m; ++i) {
        d_plus[i] = pseudo_distance(pairs.plus[i], c);
        d_minus[i] = pseudo_distance(pairs.minus[i], c);
    }

    const Eigen::Index side = static_cast<Eigen::Index>(c.alphabet_size()) + 1;
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(side, side);
    GlvqGradient out;
    for (long i = 0; i < m; ++i) {
        const double s = d_plus[i] + d_minus[i];
        if (!(s > 0.0)) {
            ++out.degenerate;
            out.loss += std::log(4.0);
            continue;
        }
        const double mu = (d_plus[i] - d_minus[i]) / s;
        const double phi = 1.0 / (4.0 + mu);
        out.loss += std::log(4.0 + mu);
        const double a_plus = 2.0 * phi * d_minus[i] / (s * s);
        const double a_minus = -2.0 * phi * d_plus[i] / (s * s);
        for (const auto& w : pairs.plus[i].weights) {
            weights(w.x, w.y) += a_plus * w.weight;
        }
        for (const auto& w : pairs.minus[i].weights) {
            weights(w.x, w.y) += a_minus * w.weight;
        }
    }
    out.gradient.assign(c.num_parameters(), 0.0);
    for (Eigen::Index y = 0; y < side; ++y) {
        for (Eigen::Index x = 0; x < side; ++x) {
            if (weights(x, y) != 0.0) {
                c.accumulate_gradient(static_cast<Label>(x), static_cast<Label>(y), weights(x, y), out.gradient);
            }
        }
    }
    return out;
}

Regularizer log_det_regularizer(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a * a.transpose());
    Eigen::VectorXd lambda = eig.eigenvalues();
    Regularizer r;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) < eigenvalue_floor) {
            lambda(k) = eigenvalue_floor;
            r.floored = true;
        }
    }
    r.value = lambda.array().log().sum();
    const Eigen::MatrixXd& w = eig.eigenvectors();
    r.gradient = 2.0 * w * lambda.cwiseInverse().asDiagonal() * w.transpose() * a;
    return r;
}

Regularizer frobenius_regularizer(const Eigen::MatrixXd& a) {
    return {a.squaredNorm(), 2.0 * a, false};
}

LossAndGradient regularized_loss_and_grad(const EmbeddingCostModel& c, const TrainingPairSet& pairs, double beta,
                                          LogDetSign sign, bool parallel) {
    GlvqGradient glvq = glvq_metric_gradient(pairs, c, parallel);
    const Eigen::MatrixXd& a = c.matrix();
    LossAndGradient out;
    out.value = glvq.loss;
    out.gradient = Eigen::Map<const Eigen::MatrixXd>(glvq.gradient.data(), a.rows(), a.cols());
    out.degenerate = glvq.degenerate;
    if (beta != 0.0) {
        Regularizer det = log_det_regularizer(a);
        out.floored = det.floored;
        const double s = sign == LogDetSign::add ? 1.0 : -1.0;
        Regularizer frob = frobenius_regularizer(a);
        out.value += s * beta * det.value + beta * frob.value;
        out.gradient += s * beta * det.gradient + beta * frob.gradient;
    }
    return out;
}

BedlResult bedl_fit(const std::vector<Tree>& trees, const std::vector<int>& labels, const Alphabet& alphabet,
                    const BedlConfig& config, uint64_t seed, std::optional<EmbeddingCostModel> init) {
    check_labels(trees, labels);
    if (config.beta < 0.0 || config.budget < 0 || config.max_outer < 1 || config.k < 1) {
        throw std::invalid_argument("bedl_fit: need beta >= 0, budget >= 0, max_outer >= 1, k >= 1");
    }
    EmbeddingCostModel model = init ? *init : simplex_init(alphabet.size());
    if (model.alphabet_size() != alphabet.size()) {
        throw std::invalid_argument("bedl_fit: initial embedding does not match the alphabet");
    }
    const EmbeddingCostModel reference = model;
    const ScriptPolicy policy = config.average_scripts ? ScriptPolicy::average : ScriptPolicy::single;
    const std::vector<ForestIndex> forests = index_forests(trees);
    auto distances = [&](const CostModel& c) {
        return config.parallel ? pairwise_ted_parallel(forests, forests, c) : pairwise_ted_serial(forests, forests, c);
    };

    BedlResult result;
    std::optional<PrototypeModel> prototypes;
    for (int outer = 0;; ++outer) {
        if (outer == config.max_outer) {
            result.stop_reason = "outer-loop limit";
            break;
        }
        Eigen::MatrixXd d = distances(model);
        MglvqOptions options;
        options.k = config.k;
        options.seed = seed;
        options.init = prototypes;
        MglvqFit fit = median_glvq_fit(d, labels, options);
        if (prototypes && fit.model == *prototypes) {
            result.stop_reason = "prototypes unchanged";
            break;
        }
        prototypes = fit.model;

        const CostModel& scripts_at = config.refresh == ScriptRefresh::per_phase ? static_cast<const CostModel&>(model)
                                                                                 : reference;
        TrainingPairSet pairs = build_training_pairs(trees, labels, d, *prototypes, scripts_at, policy, config.parallel);

        EmbeddingCostModel probe = model;
        int floored = 0, degenerate = 0;
        auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
            probe.set_parameters(std::span<const double>(theta.data(), static_cast<size_t>(theta.size())));
            LossAndGradient lg = regularized_loss_and_grad(probe, pairs, config.beta, config.log_det_sign, config.parallel);
            floored += lg.floored;
            degenerate = std::max(degenerate, lg.degenerate);
            grad = Eigen::Map<const Eigen::VectorXd>(lg.gradient.data(), lg.gradient.size());
            return lg.value;
        };
        std::vector<double> start = model.parameters();
        Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(start.data(), static_cast<Eigen::Index>(start.size()));

        BedlPhase phase;
        phase.outer = outer;
        phase.prototypes_changed = true;
        LbfgsOptions solver;
        solver.max_evaluations = config.budget;
        LbfgsResult solved = lbfgs_minimize(objective, x0, solver);
        if (solved.evaluations == 0) {
            Eigen::VectorXd unused(x0.size());
            phase.loss_before = phase.loss_after = objective(x0, unused);
        } else {
            phase.loss_before = solved.trace.front();
            phase.loss_after = solved.value;
        }
        if (floored > 0) {
            spdlog::warn("bedl_fit: phase {}: A A^T singular in {} evaluation(s), eigenvalues floored at {}", outer,
                         floored, eigenvalue_floor);
        }
        if (degenerate > 0) {
            spdlog::warn("bedl_fit: phase {}: up to {} example(s) with d+ = d- = 0 skipped in the gradient", outer,
                         degenerate);
        }
        phase.evaluations = solved.evaluations;
        phase.solver_stop = solved.stop_reason;
        phase.solver_trace = solved.trace;
        if (!std::isfinite(phase.loss_before) || !std::isfinite(phase.loss_after)) {
            std::ostringstream dump;
            dump << "bedl_fit: non-finite loss in phase " << outer << " (before " << phase.loss_before << ", after "
                 << phase.loss_after << ", |A|_F " << model.matrix().norm() << ", beta " << config.beta
                 << ", prototypes " << prototypes->size() << ")";
            throw std::runtime_error(dump.str());
        }
        model.set_parameters(std::span<const double>(solved.x.data(), static_cast<size_t>(solved.x.size())));
        result.history.push_back(std::move(phase));
        if (result.history.back().loss_before - result.history.back().loss_after < phase_improvement) {
            result.stop_reason = "no metric improvement";
            break;
        }
    }

    MglvqOptions final_options;
    final_options.k = config.k;
    final_options.seed = seed;
    final_options.init = prototypes;
    result.prototypes = median_glvq_fit(distances(model), labels, final_options).model;
    result.embedding = std::move(model);
    return result;
}

}
