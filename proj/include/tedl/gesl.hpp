#ifndef tedl_gesl_hpp
#define tedl_gesl_hpp

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tedl/cost_model.hpp"
#include "tedl/pseudo_distance.hpp"
#include "tedl/tree.hpp"

namespace tedl {

struct GeslConfig {
    int k = 1;            // neighbors per example on each side
    double beta = 0.0;
    int iterations = 2000;
    double step = 0.1;    // step at iteration t is step / (1 + t)
    bool parallel = true;
};

struct GeslPairs {
    std::vector<std::pair<int, int>> positive, negative;
};

// For every example its k closest same-class points (itself excluded) and
// its k furthest points of other classes under d; ties by lower index.
GeslPairs gesl_pairs(const Eigen::MatrixXd& d, const std::vector<int>& labels, int k);

struct GeslProblem {
    std::vector<std::vector<LabelPairWeight>> positive, negative;
    size_t alphabet_size = 0;
};

// beta ||c||^2 + sum_P [d~ - eta]_+ + sum_N [log 2 + eta - d~]_+
double gesl_objective(const GeslProblem& problem, const ExplicitCostMatrix& c, double eta, double beta);

struct GeslResult {
    ExplicitCostMatrix costs;
    double eta = 0.0;
    // best objective seen after each iteration; non-increasing
    std::vector<double> objective_trace;
    size_t positive_pairs = 0, negative_pairs = 0;
};

/*
 * Good edit similarity learning. Scripts are single backtraces under unit
 * costs and stay fixed, which makes the problem convex in (c, eta). Solved by
 * projected subgradient descent: c >= 0, c(x, x) = 0, eta in [0, log 2].
 * The best iterate is returned. `d0` may pass the unit-cost distances if known.
 */
GeslResult gesl_fit(const std::vector<Tree>& trees, const std::vector<int>& labels, const Alphabet& alphabet,
                    const GeslConfig& config, const Eigen::MatrixXd* d0 = nullptr);

}
#endif /* tedl_gesl_hpp */
