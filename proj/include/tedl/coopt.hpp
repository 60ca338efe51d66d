#ifndef tedl_coopt_hpp
#define tedl_coopt_hpp

#include <cstdint>

#include <Eigen/Dense>

#include "tedl/cost_model.hpp"
#include "tedl/ted.hpp"
#include "tedl/tree.hpp"

namespace tedl {

// Costs within this absolute distance of the optimum count as co-optimal.
constexpr double cooptimal_tolerance = 1e-9;

/*
 * (|x|+1) x (|y|+1) matrix over pre-order indices; row |x| and column |y|
 * stand for the gap. P(i, j) is the fraction of the summarized mappings that
 * replace x_i by y_j, P(i, |y|) the fraction deleting x_i and P(|x|, j) the
 * fraction inserting y_j.
 */
struct ScriptSummary {
    Eigen::MatrixXd P;
    // natural log of the number of mappings averaged
    double log_count = 0.0;

    Eigen::Index rows() const { return P.rows(); }
    Eigen::Index cols() const { return P.cols(); }
};

// Indicator matrix of one co-optimal mapping. Ties prefer replacement, then
// deletion, then insertion.
ScriptSummary single_backtrace(const Tree& x, const Tree& y, const CostModel& c0, const DistanceResult& dp);

// Mean indicator matrix over all co-optimal mappings, computed by counting
// optimal derivations bottom-up and propagating visit probabilities top-down.
ScriptSummary coopt_average(const Tree& x, const Tree& y, const CostModel& c0, const DistanceResult& dp);

constexpr size_t enumeration_size_limit = 12;

struct CooptEnumeration {
    uint64_t count = 0;
    double optimum = 0.0;
    ScriptSummary summary;
};

// Exhaustive oracle for coopt_average. Refuses when |x| + |y| > 12.
CooptEnumeration enumerate_coopt(const Tree& x, const Tree& y, const CostModel& c0);

// sum_ij P(i, j) c(x_i, y_j)
double summary_cost(const ScriptSummary& s, const PreorderView& x, const PreorderView& y, const CostModel& c);

}
#endif /* tedl_coopt_hpp */
