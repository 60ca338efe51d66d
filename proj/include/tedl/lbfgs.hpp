#ifndef tedl_lbfgs_hpp
#define tedl_lbfgs_hpp

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tedl {

// Returns f(x) and writes the gradient into grad (already sized like x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
    int max_evaluations = 200;   // every call of the objective counts
    int memory = 10;
    double armijo = 1e-4;                // sufficient decrease
    double curvature = 0.9;              // strong Wolfe curvature condition
    double gradient_tolerance = 1e-10;   // infinity norm
    double relative_decrease = 1e-12;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    // objective value at x0 and after every accepted step; non-increasing
    std::vector<double> trace;
    std::string stop_reason;
};

/*
 * Limited-memory BFGS with a Wolfe line search (Ceres). Only steps that
 * satisfy sufficient decrease are accepted, so the returned value never
 * exceeds f(x0). Evaluations past the budget are refused and the last
 * accepted iterate is returned. With a budget of zero, x0 is returned
 * unevaluated.
 */
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}
#endif /* tedl_lbfgs_hpp */
