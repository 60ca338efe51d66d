#include "tedl/lbfgs.hpp"

#include <cmath>

#include <ceres/ceres.h>

namespace tedl {

namespace {

// Refuses evaluations beyond the budget; the solver then stops at its last
// accepted iterate.
class BudgetedFunction : public ceres::FirstOrderFunction {
public:
    BudgetedFunction(const Objective& f, Eigen::Index n, int budget) : f_(f), n_(n), budget_(budget), grad_(n) {}

    bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
        if (evaluations_ >= budget_) {
            exhausted_ = true;
            return false;
        }
        ++evaluations_;
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(parameters, n_);
        *cost = f_(x, grad_);
        if (gradient != nullptr) {
            Eigen::Map<Eigen::VectorXd>(gradient, n_) = grad_;
        }
        return std::isfinite(*cost) && grad_.allFinite();
    }

    int NumParameters() const override { return static_cast<int>(n_); }

    int evaluations() const { return evaluations_; }
    bool exhausted() const { return exhausted_; }

private:
    const Objective& f_;
    Eigen::Index n_;
    int budget_;
    mutable int evaluations_ = 0;
    mutable bool exhausted_ = false;
    mutable Eigen::VectorXd grad_;
};

// Records every accepted iterate; the solver writes it into `state` first.
class TraceCallback : public ceres::IterationCallback {
public:
    TraceCallback(const Eigen::VectorXd& state, std::vector<double>& trace) : state_(state), trace_(trace) {}

    ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
        if (summary.iteration == 0 || summary.step_is_successful) {
            trace_.push_back(summary.cost);
            accepted = state_;
        }
        return ceres::SOLVER_CONTINUE;
    }

    Eigen::VectorXd accepted;

private:
    const Eigen::VectorXd& state_;
    std::vector<double>& trace_;
};

}

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options) {
    LbfgsResult r;
    r.x = std::move(x0);
    if (options.max_evaluations <= 0) {
        r.value = std::nan("");
        r.stop_reason = "no evaluation budget";
        return r;
    }

    auto* function = new BudgetedFunction(f, r.x.size(), options.max_evaluations);
    ceres::GradientProblem problem(function);
    TraceCallback callback(r.x, r.trace);

    ceres::GradientProblemSolver::Options solver;
    solver.line_search_direction_type = ceres::LBFGS;
    solver.line_search_type = ceres::WOLFE;
    solver.max_lbfgs_rank = options.memory;
    solver.line_search_sufficient_function_decrease = options.armijo;
    solver.line_search_sufficient_curvature_decrease = options.curvature;
    solver.gradient_tolerance = options.gradient_tolerance;
    solver.function_tolerance = options.relative_decrease;
    solver.parameter_tolerance = 0.0;
    solver.max_num_iterations = options.max_evaluations;
    solver.logging_type = ceres::SILENT;
    solver.minimizer_progress_to_stdout = false;
    solver.update_state_every_iteration = true;
    solver.callbacks.push_back(&callback);

    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(solver, problem, r.x.data(), &summary);

    if (r.trace.empty() && function->evaluations() > 0) {
        // converged at x0 before the first iteration was reported
        r.trace.push_back(summary.initial_cost);
    }
    if (callback.accepted.size() == r.x.size()) {
        r.x = callback.accepted;
    }
    r.evaluations = function->evaluations();
    r.iterations = static_cast<int>(r.trace.size()) - 1;
    r.value = r.trace.empty() ? std::nan("") : r.trace.back();
    r.stop_reason = function->exhausted() ? "evaluation budget exhausted" : summary.message;
    return r;
}

}
